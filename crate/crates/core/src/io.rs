//! Canonical JSON formats.
//!
//! Simplices are keyed as `"<a,b,c>"` with labels in vertex order, rationals
//! are `"p/q"` strings, zero entries are omitted and object keys are sorted,
//! so writing is deterministic and reading back yields an equal value.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::Zero;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::cech::{BiCochain, Coeff};
use crate::cohomology::{ClassHk, GroupPresentation};
use crate::complex::{Complex, Label, SimplicialMap};
use crate::deligne::{DeligneCocycle, DeligneTrivialization};
use crate::gerbe::{CircleCochain, GerbeData};
use crate::intlinalg::{Int, Rat};
use crate::lifting::{CentralExtension, FiniteGroup, Lift, PrincipalBundleData};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Syntax(String),
    #[error("key `{key}`: {msg}")]
    Invalid { key: String, msg: String },
}

fn invalid(key: impl Into<String>, msg: impl ToString) -> IoError {
    IoError::Invalid { key: key.into(), msg: msg.to_string() }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_owned()
    } else {
        format!("{path}.{key}")
    }
}

pub fn parse(text: &str) -> Result<Value, IoError> {
    serde_json::from_str(text).map_err(|e| IoError::Syntax(e.to_string()))
}

/// Pretty, sorted, newline-terminated.
pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, IoError> {
    v.as_object().ok_or_else(|| invalid(path, "expected an object"))
}

fn field<'a>(v: &'a Value, path: &str, key: &str) -> Result<&'a Value, IoError> {
    object(v, path)?.get(key).ok_or_else(|| invalid(join(path, key), "missing"))
}

fn only_keys(v: &Value, path: &str, allowed: &[&str]) -> Result<(), IoError> {
    for k in object(v, path)?.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(invalid(join(path, k), "unknown key"));
        }
    }
    Ok(())
}

pub fn rat_to_json(r: &Rat) -> Value {
    Value::String(r.to_string())
}

pub fn parse_rat(v: &Value, path: &str) -> Result<Rat, IoError> {
    match v {
        Value::Number(n) => n
            .as_i64()
            .map(|i| Rat::from_integer(i.into()))
            .ok_or_else(|| invalid(path, "expected an integer or a \"p/q\" string")),
        Value::String(s) => {
            let bad = || invalid(path, format!("`{s}` is not a rational \"p/q\""));
            let (num, den) = match s.trim().split_once('/') {
                Some((n, d)) => (n.trim().parse::<Int>().map_err(|_| bad())?, d.trim().parse::<Int>().map_err(|_| bad())?),
                None => (s.trim().parse::<Int>().map_err(|_| bad())?, Int::from(1)),
            };
            if den.is_zero() {
                return Err(invalid(path, "zero denominator"));
            }
            Ok(Rat::new(num, den))
        }
        _ => Err(invalid(path, "expected a rational")),
    }
}

pub fn parse_int(v: &Value, path: &str) -> Result<Int, IoError> {
    match v {
        Value::Number(n) => n.as_i64().map(Int::from).ok_or_else(|| invalid(path, "expected an integer")),
        Value::String(s) => s.trim().parse().map_err(|_| invalid(path, format!("`{s}` is not an integer"))),
        _ => Err(invalid(path, "expected an integer")),
    }
}

fn int_to_json(i: &Int) -> Value {
    match i64::try_from(i) {
        Ok(x) => json!(x),
        Err(_) => Value::String(i.to_string()),
    }
}

fn label_to_json(l: &Label) -> Value {
    match l {
        Label::Int(i) => json!(i),
        Label::Str(s) => json!(s),
    }
}

fn parse_label(v: &Value, path: &str) -> Result<Label, IoError> {
    let l = match v {
        Value::Number(n) => Label::Int(n.as_i64().ok_or_else(|| invalid(path, "vertex labels must be integers or strings"))?),
        Value::String(s) => Label::Str(s.clone()),
        _ => return Err(invalid(path, "vertex labels must be integers or strings")),
    };
    let text = l.to_string();
    if text.is_empty() || text.trim() != text || text.contains([',', '<', '>']) {
        return Err(invalid(path, format!("label `{text}` may not be empty or contain ',', '<', '>' or edge spaces")));
    }
    Ok(l)
}

// ---------- complexes ----------

pub fn complex_to_json(k: &Complex) -> Value {
    let mut maximal: Vec<Vec<Value>> = k
        .maximal_simplices()
        .iter()
        .map(|s| s.iter().map(|&v| label_to_json(k.label(v))).collect())
        .collect();
    maximal.sort_by_key(|s| s.iter().map(ToString::to_string).collect::<Vec<_>>());
    json!({
        "vertices": k.labels().iter().map(label_to_json).collect::<Vec<_>>(),
        "maximal_simplices": maximal,
    })
}

/// The vertex order is the order of the `vertices` list.
pub fn complex_from_json(v: &Value, path: &str) -> Result<Complex, IoError> {
    only_keys(v, path, &["vertices", "maximal_simplices"])?;
    let vp = join(path, "vertices");
    let vertices = field(v, path, "vertices")?.as_array().ok_or_else(|| invalid(&vp, "expected an array"))?;
    let labels: Vec<Label> =
        vertices.iter().enumerate().map(|(i, l)| parse_label(l, &format!("{vp}[{i}]"))).collect::<Result<_, _>>()?;
    let mut seen = HashMap::new();
    for (i, l) in labels.iter().enumerate() {
        if seen.insert(l.to_string(), i).is_some() {
            return Err(invalid(format!("{vp}[{i}]"), format!("label `{l}` appears twice")));
        }
    }
    let mp = join(path, "maximal_simplices");
    let maximal = field(v, path, "maximal_simplices")?.as_array().ok_or_else(|| invalid(&mp, "expected an array"))?;
    let mut tuples = Vec::with_capacity(maximal.len());
    for (i, s) in maximal.iter().enumerate() {
        let sp = format!("{mp}[{i}]");
        let arr = s.as_array().ok_or_else(|| invalid(&sp, "expected an array of vertices"))?;
        tuples.push(arr.iter().enumerate().map(|(j, l)| parse_label(l, &format!("{sp}[{j}]"))).collect::<Result<Vec<_>, _>>()?);
    }
    Complex::with_vertex_order(labels, &tuples).map_err(|e| invalid(mp, e))
}

fn complex_field(v: &Value, path: &str) -> Result<Arc<Complex>, IoError> {
    let p = join(path, "complex");
    Ok(Arc::new(complex_from_json(field(v, path, "complex")?, &p)?))
}

/// Resolves `"<a,b,c>"` (or a bare label when `bare`) to `(dimension, index)`.
struct Keys<'a> {
    k: &'a Complex,
    labels: HashMap<String, usize>,
}

impl<'a> Keys<'a> {
    fn new(k: &'a Complex) -> Self {
        Keys { k, labels: k.labels().iter().enumerate().map(|(i, l)| (l.to_string(), i)).collect() }
    }

    fn simplex(&self, key: &str, dim: usize, bare: bool, path: &str) -> Result<usize, IoError> {
        let inner = if bare {
            key
        } else {
            key.strip_prefix('<')
                .and_then(|s| s.strip_suffix('>'))
                .ok_or_else(|| invalid(path, "simplex keys look like \"<a,b,c>\""))?
        };
        let verts: Vec<usize> = inner
            .split(',')
            .map(|l| self.labels.get(l.trim()).copied().ok_or_else(|| invalid(path, format!("unknown vertex `{}`", l.trim()))))
            .collect::<Result<_, _>>()?;
        if verts.len() != dim + 1 {
            return Err(invalid(path, format!("expected a {dim}-simplex")));
        }
        if verts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(path, "vertices must be listed in increasing vertex order"));
        }
        self.k.index_of(&verts).ok_or_else(|| invalid(path, "not a simplex of the complex"))
    }
}

fn key_of(k: &Complex, dim: usize, i: usize, bare: bool) -> String {
    if bare {
        debug_assert_eq!(dim, 0);
        k.label(k.simplex(0, i)[0]).to_string()
    } else {
        k.format_simplex(k.simplex(dim, i))
    }
}

/// `{"<σ>": {"<ρ>": value}}`, nonzero entries only; every `σ` gets a key.
fn bicochain_to_json<R: Coeff>(x: &BiCochain<R>, bare: bool, f: impl Fn(&R) -> Value) -> Value {
    let k = x.base();
    let (p, q) = x.bidegree();
    let mut out = Map::new();
    for s in 0..k.count(p) {
        out.insert(key_of(k, p, s, false), Value::Object(Map::new()));
    }
    for (s, r, v) in x.entries() {
        if !v.is_zero() {
            if let Some(Value::Object(m)) = out.get_mut(&key_of(k, p, s, false)) {
                m.insert(key_of(k, q, r, bare), f(v));
            }
        }
    }
    Value::Object(out)
}

fn fill_star<R: Coeff>(
    x: &mut BiCochain<R>,
    keys: &Keys,
    s: usize,
    bare: bool,
    v: &Value,
    path: &str,
    parse: &impl Fn(&Value, &str) -> Result<R, IoError>,
) -> Result<(), IoError> {
    let q = x.form_degree();
    for (rk, val) in object(v, path)? {
        let rp = join(path, rk);
        let r = keys.simplex(rk, q, bare, &rp)?;
        if x.get(s, r).is_none() {
            return Err(invalid(rp, "outside the star"));
        }
        x.set(s, r, parse(val, &rp)?);
    }
    Ok(())
}

fn bicochain_from_json<R: Coeff>(
    k: &Arc<Complex>,
    (p, q): (usize, usize),
    bare: bool,
    v: &Value,
    path: &str,
    parse: impl Fn(&Value, &str) -> Result<R, IoError>,
) -> Result<BiCochain<R>, IoError> {
    let keys = Keys::new(k);
    let mut x = BiCochain::zeros(k.clone(), p, q);
    for (sk, inner) in object(v, path)? {
        let sp = join(path, sk);
        let s = keys.simplex(sk, p, false, &sp)?;
        fill_star(&mut x, &keys, s, bare, inner, &sp, &parse)?;
    }
    Ok(x)
}

// ---------- circle cochains and gerbes ----------

fn circle_data_to_json(c: &CircleCochain) -> Value {
    let theta = bicochain_to_json(&c.theta, true, rat_to_json);
    let winding = bicochain_to_json(&c.winding, false, int_to_json);
    let mut out = Map::new();
    for (key, t) in theta.as_object().expect("object") {
        out.insert(key.clone(), json!({"theta": t, "winding": winding[key]}));
    }
    Value::Object(out)
}

fn circle_data_from_json(k: &Arc<Complex>, p: usize, v: &Value, path: &str) -> Result<CircleCochain, IoError> {
    let keys = Keys::new(k);
    let mut theta = BiCochain::zeros(k.clone(), p, 0);
    let mut winding = BiCochain::zeros(k.clone(), p, 1);
    for (sk, entry) in object(v, path)? {
        let sp = join(path, sk);
        let s = keys.simplex(sk, p, false, &sp)?;
        only_keys(entry, &sp, &["theta", "winding"])?;
        if let Some(t) = object(entry, &sp)?.get("theta") {
            fill_star(&mut theta, &keys, s, true, t, &join(&sp, "theta"), &parse_rat)?;
        }
        if let Some(w) = object(entry, &sp)?.get("winding") {
            fill_star(&mut winding, &keys, s, false, w, &join(&sp, "winding"), &parse_int)?;
        }
    }
    CircleCochain::new(theta, winding).map_err(|e| invalid(path, e))
}

/// A Čech `p`-cochain of circle functions, with its complex.
pub fn circle_cochain_to_json(c: &CircleCochain) -> Value {
    json!({"complex": complex_to_json(c.base()), "degree": c.cech_degree(), "data": circle_data_to_json(c)})
}

/// Reads a circle cochain; if `base` is given the embedded complex is optional but must agree.
pub fn circle_cochain_from_json(v: &Value, base: Option<&Arc<Complex>>, path: &str) -> Result<CircleCochain, IoError> {
    only_keys(v, path, &["complex", "degree", "data"])?;
    let k = resolve_base(v, base, path)?;
    let p = match object(v, path)?.get("degree") {
        Some(d) => d.as_u64().ok_or_else(|| invalid(join(path, "degree"), "expected a natural number"))? as usize,
        None => 1,
    };
    circle_data_from_json(&k, p, field(v, path, "data")?, &join(path, "data"))
}

fn resolve_base(v: &Value, base: Option<&Arc<Complex>>, path: &str) -> Result<Arc<Complex>, IoError> {
    match (object(v, path)?.get("complex"), base) {
        (Some(_), Some(b)) => {
            let k = complex_field(v, path)?;
            if *k != **b {
                return Err(invalid(join(path, "complex"), "does not match the complex of the other input"));
            }
            Ok(b.clone())
        }
        (Some(_), None) => complex_field(v, path),
        (None, Some(b)) => Ok(b.clone()),
        (None, None) => Err(invalid(join(path, "complex"), "missing")),
    }
}

pub fn gerbe_to_json(g: &GerbeData) -> Value {
    json!({"complex": complex_to_json(g.base()), "data": circle_data_to_json(g.data())})
}

pub fn gerbe_from_json(v: &Value, path: &str) -> Result<GerbeData, IoError> {
    only_keys(v, path, &["complex", "data", "connection", "curving"])?;
    let k = complex_field(v, path)?;
    let dp = join(path, "data");
    let c = circle_data_from_json(&k, 2, field(v, path, "data")?, &dp)?;
    GerbeData::new(c).map_err(|e| invalid(dp, e))
}

// ---------- Deligne ----------

pub fn deligne_to_json(d: &DeligneCocycle) -> Value {
    let mut v = gerbe_to_json(&d.g);
    v["connection"] = bicochain_to_json(&d.a, false, rat_to_json);
    v["curving"] = bicochain_to_json(&d.f, false, rat_to_json);
    v
}

pub fn deligne_from_json(v: &Value, path: &str) -> Result<DeligneCocycle, IoError> {
    let g = gerbe_from_json(v, path)?;
    let k = g.base().clone();
    let cp = join(path, "connection");
    let a = bicochain_from_json(&k, (1, 1), false, field(v, path, "connection")?, &cp, parse_rat)?;
    let fp = join(path, "curving");
    let f = bicochain_from_json(&k, (0, 2), false, field(v, path, "curving")?, &fp, parse_rat)?;
    DeligneCocycle::new(g, a, f).map_err(|e| invalid(path, e))
}

pub fn deligne_trivialization_to_json(t: &DeligneTrivialization) -> Value {
    json!({"h": circle_data_to_json(&t.h), "k": bicochain_to_json(&t.k, false, rat_to_json)})
}

pub fn deligne_trivialization_from_json(v: &Value, base: &Arc<Complex>, path: &str) -> Result<DeligneTrivialization, IoError> {
    only_keys(v, path, &["h", "k"])?;
    let h = circle_data_from_json(base, 1, field(v, path, "h")?, &join(path, "h"))?;
    let k = bicochain_from_json(base, (0, 1), false, field(v, path, "k")?, &join(path, "k"), parse_rat)?;
    Ok(DeligneTrivialization { h, k })
}

// ---------- classes ----------

pub fn class_to_json(c: &ClassHk) -> Value {
    let p = c.presentation();
    json!({
        "degree": p.degree(),
        "group": p.describe(),
        "free": c.free_coords().iter().map(int_to_json).collect::<Vec<_>>(),
        "torsion": c.torsion_coords().iter().map(int_to_json).collect::<Vec<_>>(),
        "class": c.to_string(),
    })
}

/// Reads `free`/`torsion` coordinates against a known presentation.
pub fn class_from_json(v: &Value, pres: &Arc<GroupPresentation>, path: &str) -> Result<ClassHk, IoError> {
    let coords = |key: &str| -> Result<Vec<Int>, IoError> {
        let kp = join(path, key);
        match object(v, path)?.get(key) {
            None => Ok(Vec::new()),
            Some(a) => a
                .as_array()
                .ok_or_else(|| invalid(&kp, "expected an array"))?
                .iter()
                .enumerate()
                .map(|(i, x)| parse_int(x, &format!("{kp}[{i}]")))
                .collect(),
        }
    };
    ClassHk::new(pres.clone(), coords("free")?, coords("torsion")?).map_err(|e| invalid(path, e))
}

// ---------- maps ----------

pub fn map_to_json(m: &SimplicialMap) -> Value {
    let src = m.source();
    let tgt = m.target();
    let vm: Map<String, Value> = (0..src.num_vertices())
        .map(|v| (src.label(v).to_string(), label_to_json(tgt.label(m.apply(v)))))
        .collect();
    json!({"source": complex_to_json(src), "vertex_map": vm})
}

/// `{"source": complex, "vertex_map": {"label": label}}` into `target`.
pub fn map_from_json(v: &Value, target: &Arc<Complex>, path: &str) -> Result<SimplicialMap, IoError> {
    only_keys(v, path, &["source", "target", "vertex_map"])?;
    let sp = join(path, "source");
    let src = Arc::new(complex_from_json(field(v, path, "source")?, &sp)?);
    if let Some(t) = object(v, path)?.get("target") {
        let tp = join(path, "target");
        if complex_from_json(t, &tp)? != **target {
            return Err(invalid(tp, "does not match the target complex"));
        }
    }
    let mp = join(path, "vertex_map");
    let table = object(field(v, path, "vertex_map")?, &mp)?;
    let tkeys = Keys::new(target);
    let skeys = Keys::new(&src);
    let mut images = vec![None; src.num_vertices()];
    for (key, img) in table {
        let kp = join(&mp, key);
        let s = skeys.labels.get(key.as_str()).copied().ok_or_else(|| invalid(&kp, "unknown source vertex"))?;
        let text = parse_label(img, &kp)?.to_string();
        images[s] = Some(tkeys.labels.get(&text).copied().ok_or_else(|| invalid(&kp, format!("unknown target vertex `{text}`")))?);
    }
    let images = images
        .into_iter()
        .enumerate()
        .map(|(i, x)| x.ok_or_else(|| invalid(join(&mp, &src.label(i).to_string()), "missing")))
        .collect::<Result<Vec<_>, _>>()?;
    SimplicialMap::new(src, target.clone(), images).map_err(|e| invalid(mp, e))
}

// ---------- groups, extensions, bundles ----------

pub fn extension_to_json(e: &CentralExtension) -> Value {
    let g = e.group();
    let names = g.elements();
    let table: Vec<Vec<&String>> = g.table().iter().map(|r| r.iter().map(|&x| &names[x]).collect()).collect();
    let mut eps = Map::new();
    for a in 0..g.order() {
        for b in 0..g.order() {
            if !e.epsilon(a, b).is_zero() {
                eps.insert(format!("{},{}", names[a], names[b]), rat_to_json(e.epsilon(a, b)));
            }
        }
    }
    json!({"elements": names, "table": table, "epsilon": eps})
}

fn element_name(v: &Value, path: &str) -> Result<String, IoError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) if n.is_i64() => Ok(n.to_string()),
        _ => Err(invalid(path, "group elements are strings or integers")),
    }
}

pub fn extension_from_json(v: &Value, path: &str) -> Result<CentralExtension, IoError> {
    only_keys(v, path, &["elements", "table", "epsilon"])?;
    let ep = join(path, "elements");
    let elements: Vec<String> = field(v, path, "elements")?
        .as_array()
        .ok_or_else(|| invalid(&ep, "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, x)| element_name(x, &format!("{ep}[{i}]")))
        .collect::<Result<_, _>>()?;
    let index: HashMap<&str, usize> = elements.iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();
    if index.len() != elements.len() || elements.iter().any(|e| e.contains(',')) {
        return Err(invalid(ep, "element names must be distinct and contain no ','"));
    }
    let lookup = |name: &str, p: &str| index.get(name).copied().ok_or_else(|| invalid(p, format!("unknown element `{name}`")));
    let tp = join(path, "table");
    let rows = field(v, path, "table")?.as_array().ok_or_else(|| invalid(&tp, "expected an array of rows"))?;
    let mut table = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{tp}[{i}]");
        let row = row.as_array().ok_or_else(|| invalid(&rp, "expected an array"))?;
        table.push(
            row.iter()
                .enumerate()
                .map(|(j, x)| {
                    let xp = format!("{rp}[{j}]");
                    lookup(&element_name(x, &xp)?, &xp)
                })
                .collect::<Result<Vec<_>, _>>()?,
        );
    }
    let group = FiniteGroup::new(elements.clone(), table).map_err(|e| invalid(&tp, e))?;
    let n = group.order();
    let mut eps = vec![vec![Rat::zero(); n]; n];
    let xp = join(path, "epsilon");
    if let Some(table) = object(v, path)?.get("epsilon") {
        for (key, val) in object(table, &xp)? {
            let kp = join(&xp, key);
            let (a, b) = key.split_once(',').ok_or_else(|| invalid(&kp, "keys look like \"a,b\""))?;
            eps[lookup(a.trim(), &kp)?][lookup(b.trim(), &kp)?] = parse_rat(val, &kp)?;
        }
    }
    CentralExtension::new(group, eps).map_err(|e| invalid(xp, e))
}

pub fn bundle_to_json(b: &PrincipalBundleData) -> Value {
    let k = b.base();
    let g = b.group();
    let t: Map<String, Value> = b
        .transitions()
        .iter()
        .enumerate()
        .filter(|(_, &t)| t != g.identity())
        .map(|(e, &t)| (k.format_simplex(k.simplex(1, e)), json!(g.elements()[t])))
        .collect();
    json!({"complex": complex_to_json(k), "transition": t})
}

/// Transition elements are named in `group`; unlisted edges carry the identity.
pub fn bundle_from_json(v: &Value, group: &FiniteGroup, path: &str) -> Result<PrincipalBundleData, IoError> {
    only_keys(v, path, &["complex", "transition"])?;
    let k = complex_field(v, path)?;
    let keys = Keys::new(&k);
    let tp = join(path, "transition");
    let mut t = vec![group.identity(); k.count(1)];
    for (key, val) in object(field(v, path, "transition")?, &tp)? {
        let kp = join(&tp, key);
        let e = keys.simplex(key, 1, false, &kp)?;
        let name = element_name(val, &kp)?;
        t[e] = group.element_index(&name).ok_or_else(|| invalid(&kp, format!("unknown element `{name}`")))?;
    }
    PrincipalBundleData::new(k, group.clone(), t).map_err(|e| invalid(tp, e))
}

pub fn lift_to_json(l: &Lift) -> Value {
    json!({"phase": bicochain_to_json(&l.phase, true, rat_to_json)})
}
