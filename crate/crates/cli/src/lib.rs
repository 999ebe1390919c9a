//! The `gerbe` command-line front end.
//!
//! [`run`] parses arguments, reads inputs, and returns a [`CommandResult`]
//! instead of touching the process, so it can be tested in-process.

use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use gerbe_core::cohomology::{cohomology_group, cycle_basis, fundamental_cycle, Ring};
use gerbe_core::complex::{example_complex, Complex, ExampleSpace};
use gerbe_core::deligne::{deligne_equal, periods, DeligneCocycle, DeligneError};
use gerbe_core::gerbe::{GerbeData, GerbeError};
use gerbe_core::intlinalg::Int;
use gerbe_core::io;
use gerbe_core::lifting::{find_lift, lifting_obstruction, CentralExtension, PrincipalBundleData};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A decision question answered "no"; still a success.
    NegativeAnswer,
    InvalidInput,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandResult {
    pub status: Status,
    pub stdout: String,
    pub stderr: String,
}

impl CommandResult {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok | Status::NegativeAnswer => 0,
            Status::InvalidInput => 2,
        }
    }

    /// The stdout payload parsed as JSON.
    pub fn json(&self) -> Option<Value> {
        serde_json::from_str(&self.stdout).ok()
    }
}

#[derive(Parser, Debug)]
#[command(name = "gerbe", version, about = "Exact calculus for bundle gerbes over finite simplicial complexes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Io {
    /// Input JSON file; `-` reads standard input. Repeat for multiple inputs.
    #[arg(long = "in", value_name = "FILE")]
    inputs: Vec<String>,
    /// Write the JSON payload here instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ComplexSource {
    /// Complex JSON file (`-` for standard input).
    #[arg(long, value_name = "FILE")]
    complex: Option<String>,
    /// Bundled space, e.g. sphere3, torus3, rp2_x_s1.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RingArg {
    #[value(name = "Z")]
    Z,
    #[value(name = "Q")]
    Q,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cohomology group of a complex.
    Cohomology {
        /// Complex JSON file.
        path: Option<String>,
        #[arg(long)]
        degree: usize,
        #[arg(long, value_enum, default_value = "Z")]
        ring: RingArg,
        #[command(flatten)]
        src: ComplexSource,
        #[command(flatten)]
        io: Io,
    },
    /// Dixmier-Douady class of a gerbe.
    Dd(Io),
    /// Trivialization of a gerbe, if its class vanishes.
    Trivialize(Io),
    /// Tensor product of two gerbes.
    Tensor(Io),
    /// Dual gerbe.
    Dual(Io),
    /// Pullback of a gerbe (first input) along a map (second input).
    Pullback(Io),
    /// Gauge a gerbe (first input) by a 1-cochain of circle functions (second input).
    Gauge(Io),
    /// Decide stable isomorphism of two gerbes.
    StableIso(Io),
    /// Gerbe realizing a class of H³.
    FromClass {
        #[command(flatten)]
        src: ComplexSource,
        /// Free coordinates, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        free: Vec<i64>,
        /// Torsion coordinates, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        torsion: Vec<i64>,
        /// Constant phases, no windings (torsion classes only).
        #[arg(long)]
        flat: bool,
        #[command(flatten)]
        io: Io,
    },
    /// Canonical connection and curving for a gerbe.
    Connect(Io),
    /// Three-curvature of a Deligne triple.
    Curvature(Io),
    /// Periods of the three-curvature over the fundamental cycle (or a 3-cycle basis).
    Periods(Io),
    /// Decide equality of two Deligne classes.
    DeligneEq(Io),
    /// Trivialization of a Deligne triple, if its class vanishes.
    DeligneTrivialize(Io),
    /// Lifting obstruction of a bundle for a central extension (inputs in any order).
    LiftObstruction(Io),
    /// Lift of a bundle's transition functions, if one exists.
    FindLift(Io),
    /// Bundled spaces and gerbes.
    Example {
        /// trivial, generator, torsion, or a space name (sphere3 → generator,
        /// rp2_x_s1 → torsion, others → trivial). Omit to list names.
        #[arg(long)]
        name: Option<String>,
        /// Emit only the complex.
        #[arg(long)]
        complex: bool,
        #[command(flatten)]
        io: Io,
    },
}

struct Outcome {
    status: Status,
    payload: Value,
}

fn ok(payload: Value) -> anyhow::Result<Outcome> {
    Ok(Outcome { status: Status::Ok, payload })
}

fn negative(payload: Value) -> anyhow::Result<Outcome> {
    Ok(Outcome { status: Status::NegativeAnswer, payload })
}

/// Reads `--in` files, allowing at most one `-`.
struct Inputs {
    docs: Vec<(String, Value)>,
}

impl Inputs {
    fn load(io: &Io, want: usize, stdin: &mut dyn Read) -> anyhow::Result<Self> {
        if io.inputs.len() != want {
            bail!("expected {want} --in input(s), got {}", io.inputs.len());
        }
        let mut docs = Vec::new();
        let mut used_stdin = false;
        for name in &io.inputs {
            let text = read_source(name, stdin, &mut used_stdin)?;
            let v = io::parse(&text).with_context(|| format!("input {name}"))?;
            docs.push((name.clone(), v));
        }
        Ok(Inputs { docs })
    }

    fn get<T>(&self, i: usize, f: impl FnOnce(&Value) -> Result<T, io::IoError>) -> anyhow::Result<T> {
        let (name, v) = &self.docs[i];
        f(v).with_context(|| format!("input {name}"))
    }
}

fn read_source(name: &str, stdin: &mut dyn Read, used_stdin: &mut bool) -> anyhow::Result<String> {
    if name == "-" {
        if std::mem::replace(used_stdin, true) {
            bail!("standard input can be used only once");
        }
        let mut s = String::new();
        stdin.read_to_string(&mut s).context("reading standard input")?;
        Ok(s)
    } else {
        fs::read_to_string(name).with_context(|| format!("reading {name}"))
    }
}

fn space(name: &str) -> anyhow::Result<Arc<Complex>> {
    let s = ExampleSpace::parse(name).ok_or_else(|| anyhow!("unknown space name `{name}`"))?;
    Ok(Arc::new(example_complex(s)?))
}

fn load_complex(src: &ComplexSource, path: Option<&str>, stdin: &mut dyn Read) -> anyhow::Result<Arc<Complex>> {
    let file = path.or(src.complex.as_deref());
    match (file, &src.name) {
        (Some(f), None) => {
            let text = read_source(f, stdin, &mut false)?;
            let v = io::parse(&text).with_context(|| format!("input {f}"))?;
            Ok(Arc::new(io::complex_from_json(&v, "").with_context(|| format!("input {f}"))?))
        }
        (None, Some(n)) => space(n),
        (Some(_), Some(_)) => bail!("give either a complex file or --name, not both"),
        (None, None) => bail!("a complex is required (file or --name)"),
    }
}

/// The bundled gerbe for a name.
pub fn bundled_gerbe(name: &str) -> anyhow::Result<GerbeData> {
    let (space_name, kind) = match name {
        "trivial" => ("sphere3", "trivial"),
        "generator" => ("sphere3", "generator"),
        "torsion" => ("rp2_x_s1", "torsion"),
        "sphere3" | "torus3" => (name, "generator"),
        "rp2_x_s1" => (name, "torsion"),
        other => (other, "trivial"),
    };
    let k = space(space_name)?;
    let class = |free: Vec<Int>, torsion: Vec<Int>| -> anyhow::Result<gerbe_core::cohomology::ClassHk> {
        Ok(gerbe_core::cohomology::ClassHk::new(cohomology_group(&k, 3, Ring::Z)?, free, torsion)?)
    };
    Ok(match kind {
        "generator" => GerbeData::from_class(&k, &class(vec![Int::from(1)], vec![])?)?,
        "torsion" => GerbeData::flat_from_class(&k, &class(vec![], vec![Int::from(1)])?)?,
        _ => GerbeData::trivial(k),
    })
}

const BUNDLED: [&str; 10] =
    ["trivial", "generator", "torsion", "sphere3", "torus3", "rp2_x_s1", "rp2", "torus2", "sphere2", "circle3"];

fn dispatch(cmd: Command, stdin: &mut dyn Read) -> anyhow::Result<(Outcome, Option<PathBuf>)> {
    let gerbe = |v: &Value| io::gerbe_from_json(v, "");
    let deligne = |v: &Value| io::deligne_from_json(v, "");
    let (outcome, out) = match cmd {
        Command::Cohomology { path, degree, ring, src, io: o } => {
            let k = load_complex(&src, path.as_deref(), stdin)?;
            let ring = match ring {
                RingArg::Z => Ring::Z,
                RingArg::Q => Ring::Q,
            };
            let g = cohomology_group(&k, degree, ring)?;
            let p = json!({"degree": degree, "ring": format!("{ring:?}"), "group": g.describe(),
                "free_rank": g.free_rank(), "torsion": g.torsion().iter().map(ToString::to_string).collect::<Vec<_>>()});
            (ok(p)?, o.out)
        }
        Command::Dd(o) => {
            let g = Inputs::load(&o, 1, stdin)?.get(0, gerbe)?;
            (ok(io::class_to_json(&g.dd_class()?))?, o.out)
        }
        Command::Trivialize(o) => {
            let g = Inputs::load(&o, 1, stdin)?.get(0, gerbe)?;
            let r = match g.trivialize() {
                Ok(t) => ok(json!({"trivializable": true, "witness": io::circle_cochain_to_json(&t.h)})),
                Err(GerbeError::NonzeroClass(c)) => {
                    negative(json!({"trivializable": false, "class": io::class_to_json(&c)}))
                }
                Err(e) => Err(anyhow!(e)),
            };
            (r?, o.out)
        }
        Command::Tensor(o) => {
            let i = Inputs::load(&o, 2, stdin)?;
            let (a, b) = (i.get(0, gerbe)?, i.get(1, gerbe)?);
            (ok(io::gerbe_to_json(&a.tensor(&b)?))?, o.out)
        }
        Command::Dual(o) => {
            let g = Inputs::load(&o, 1, stdin)?.get(0, gerbe)?;
            (ok(io::gerbe_to_json(&g.dual()))?, o.out)
        }
        Command::Pullback(o) => {
            let i = Inputs::load(&o, 2, stdin)?;
            let g = i.get(0, gerbe)?;
            let m = i.get(1, |v| io::map_from_json(v, g.base(), ""))?;
            (ok(io::gerbe_to_json(&g.pullback(&m)?))?, o.out)
        }
        Command::Gauge(o) => {
            let i = Inputs::load(&o, 2, stdin)?;
            let g = i.get(0, gerbe)?;
            let h = i.get(1, |v| io::circle_cochain_from_json(v, Some(g.base()), ""))?;
            (ok(io::gerbe_to_json(&g.apply_gauge(&h)?))?, o.out)
        }
        Command::StableIso(o) => {
            let i = Inputs::load(&o, 2, stdin)?;
            let (a, b) = (i.get(0, gerbe)?, i.get(1, gerbe)?);
            let r = match a.stable_iso(&b)? {
                Some(t) => ok(json!({"stably_isomorphic": true, "answer": "stably isomorphic",
                    "witness": io::circle_cochain_to_json(&t.h)})),
                None => negative(json!({"stably_isomorphic": false, "answer": "not stably isomorphic",
                    "classes": [io::class_to_json(&a.dd_class()?), io::class_to_json(&b.dd_class()?)]})),
            };
            (r?, o.out)
        }
        Command::FromClass { src, free, torsion, flat, io: o } => {
            let k = load_complex(&src, None, stdin)?;
            let pres = cohomology_group(&k, 3, Ring::Z)?;
            let c = gerbe_core::cohomology::ClassHk::new(
                pres,
                free.into_iter().map(Int::from).collect(),
                torsion.into_iter().map(Int::from).collect(),
            )?;
            let g = if flat { GerbeData::flat_from_class(&k, &c)? } else { GerbeData::from_class(&k, &c)? };
            (ok(io::gerbe_to_json(&g))?, o.out)
        }
        Command::Connect(o) => {
            let g = Inputs::load(&o, 1, stdin)?.get(0, gerbe)?;
            (ok(io::deligne_to_json(&DeligneCocycle::connect(g)?))?, o.out)
        }
        Command::Curvature(o) => {
            let d = Inputs::load(&o, 1, stdin)?.get(0, deligne)?;
            let omega = d.three_curvature()?;
            let k = d.base();
            let table: Map<String, Value> = omega
                .iter()
                .enumerate()
                .filter(|(_, v)| !num_is_zero(v))
                .map(|(i, v)| (k.format_simplex(k.simplex(3, i)), io::rat_to_json(v)))
                .collect();
            (ok(json!({"three_curvature": table}))?, o.out)
        }
        Command::Periods(o) => {
            let d = Inputs::load(&o, 1, stdin)?.get(0, deligne)?;
            let k = d.base().clone();
            let omega = d.three_curvature()?;
            let (kind, cycles) = match fundamental_cycle(&k) {
                Some(c) => ("fundamental", vec![c]),
                None => ("basis", cycle_basis(&k, 3).to_vec()),
            };
            let p = periods(&k, &omega, &cycles)?;
            (ok(json!({"cycles": kind, "periods": p.iter().map(io::rat_to_json).collect::<Vec<_>>()}))?, o.out)
        }
        Command::DeligneEq(o) => {
            let i = Inputs::load(&o, 2, stdin)?;
            let (a, b) = (i.get(0, deligne)?, i.get(1, deligne)?);
            let r = match deligne_equal(&a, &b)? {
                (true, Some(t)) => ok(json!({"equal": true, "witness": io::deligne_trivialization_to_json(&t)})),
                _ => negative(json!({"equal": false})),
            };
            (r?, o.out)
        }
        Command::DeligneTrivialize(o) => {
            let d = Inputs::load(&o, 1, stdin)?.get(0, deligne)?;
            let r = match d.trivialize() {
                Ok(t) => ok(json!({"trivializable": true, "witness": io::deligne_trivialization_to_json(&t)})),
                Err(DeligneError::NonzeroClass(why)) => {
                    negative(json!({"trivializable": false, "obstruction": why.to_string()}))
                }
                Err(e) => Err(anyhow!(e)),
            };
            (r?, o.out)
        }
        Command::LiftObstruction(o) => {
            let (b, e) = bundle_and_extension(&o, stdin)?;
            (ok(io::class_to_json(&lifting_obstruction(&b, &e)?))?, o.out)
        }
        Command::FindLift(o) => {
            let (b, e) = bundle_and_extension(&o, stdin)?;
            let r = match find_lift(&b, &e)? {
                Some(l) => ok(json!({"liftable": true, "lift": io::lift_to_json(&l)})),
                None => negative(json!({"liftable": false,
                    "obstruction": io::class_to_json(&lifting_obstruction(&b, &e)?)})),
            };
            (r?, o.out)
        }
        Command::Example { name, complex, io: o } => {
            let r = match name {
                None => ok(json!({"names": BUNDLED})),
                Some(n) => {
                    if complex {
                        let k = match n.as_str() {
                            "trivial" | "generator" => space("sphere3")?,
                            "torsion" => space("rp2_x_s1")?,
                            other => space(other)?,
                        };
                        ok(io::complex_to_json(&k))
                    } else {
                        ok(io::gerbe_to_json(&bundled_gerbe(&n)?))
                    }
                }
            };
            (r?, o.out)
        }
    };
    Ok((outcome, out))
}

fn num_is_zero(v: &gerbe_core::intlinalg::Rat) -> bool {
    *v.numer() == Int::from(0)
}

/// Accepts the bundle and the extension in either order.
fn bundle_and_extension(o: &Io, stdin: &mut dyn Read) -> anyhow::Result<(PrincipalBundleData, CentralExtension)> {
    let i = Inputs::load(o, 2, stdin)?;
    let ext_first = i.docs[0].1.get("elements").is_some();
    let (ei, bi) = if ext_first { (0, 1) } else { (1, 0) };
    let e = i.get(ei, |v| io::extension_from_json(v, ""))?;
    let b = i.get(bi, |v| io::bundle_from_json(v, e.group(), ""))?;
    Ok((b, e))
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I, stdin: &mut dyn Read) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    CommandResult { status: Status::Ok, stdout: text, stderr: String::new() }
                }
                _ => CommandResult { status: Status::InvalidInput, stdout: String::new(), stderr: text },
            };
        }
    };
    match dispatch(cli.command, stdin) {
        Ok((outcome, out)) => {
            let text = io::render(&outcome.payload);
            match out {
                Some(path) => match fs::write(&path, &text) {
                    Ok(()) => CommandResult { status: outcome.status, stdout: String::new(), stderr: String::new() },
                    Err(e) => CommandResult {
                        status: Status::InvalidInput,
                        stdout: String::new(),
                        stderr: format!("error: writing {}: {e}\n", path.display()),
                    },
                },
                None => CommandResult { status: outcome.status, stdout: text, stderr: String::new() },
            }
        }
        Err(e) => CommandResult { status: Status::InvalidInput, stdout: String::new(), stderr: format!("error: {e:#}\n") },
    }
}
