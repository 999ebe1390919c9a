use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use gerbe_cli::{run, CommandResult, Status};
use serde_json::Value;

fn gerbe(args: &[&str]) -> CommandResult {
    gerbe_stdin(args, "")
}

fn gerbe_stdin(args: &[&str], stdin: &str) -> CommandResult {
    let mut argv = vec!["gerbe"];
    argv.extend_from_slice(args);
    run(argv, &mut stdin.as_bytes())
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn example(name: &str) -> String {
    let r = gerbe(&["example", "--name", name]);
    assert_eq!(r.status, Status::Ok, "{}", r.stderr);
    r.stdout
}

#[test]
fn pipeline_example_into_dd() {
    let bin = env!("CARGO_BIN_EXE_gerbe");
    let produced = Command::new(bin).args(["example", "--name", "sphere3"]).output().unwrap();
    assert!(produced.status.success());
    let mut dd = Command::new(bin)
        .args(["dd", "--in", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    dd.stdin.take().unwrap().write_all(&produced.stdout).unwrap();
    let out = dd.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["class"], "free=(1) torsion=()");
    assert!(v["class"].as_str().unwrap().contains("(1)"));
}

#[test]
fn trivialize_trivial_gerbe() {
    let r = gerbe_stdin(&["trivialize", "--in", "-"], &example("trivial"));
    assert_eq!((r.status, r.exit_code()), (Status::Ok, 0));
    let v = r.json().unwrap();
    assert_eq!(v["trivializable"], true);
    assert!(v["witness"]["data"].is_object());
}

#[test]
fn trivialize_generator_is_a_negative_answer() {
    let r = gerbe_stdin(&["trivialize", "--in", "-"], &example("generator"));
    assert_eq!((r.status, r.exit_code()), (Status::NegativeAnswer, 0));
    assert_eq!(r.json().unwrap()["class"]["free"][0], 1);
}

#[test]
fn stable_iso_generator_vs_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "gen.json", &example("generator"));
    let b = write(dir.path(), "triv.json", &example("trivial"));
    let r = gerbe(&["stable-iso", "--in", a.to_str().unwrap(), "--in", b.to_str().unwrap()]);
    assert_eq!((r.status, r.exit_code()), (Status::NegativeAnswer, 0));
    assert_eq!(r.json().unwrap()["answer"], "not stably isomorphic");
    let same = gerbe(&["stable-iso", "--in", a.to_str().unwrap(), "--in", a.to_str().unwrap()]);
    assert_eq!(same.status, Status::Ok);
    assert_eq!(same.json().unwrap()["answer"], "stably isomorphic");
}

#[test]
fn gerbe_algebra_commands() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", &example("generator"));
    let g = g.to_str().unwrap();
    let dual = gerbe(&["dual", "--in", g]);
    let d = write(dir.path(), "d.json", &dual.stdout);
    let dd = gerbe(&["dd", "--in", d.to_str().unwrap()]);
    assert_eq!(dd.json().unwrap()["free"][0], -1);
    let t = gerbe(&["tensor", "--in", g, "--in", g]);
    let t = write(dir.path(), "t.json", &t.stdout);
    assert_eq!(gerbe(&["dd", "--in", t.to_str().unwrap()]).json().unwrap()["free"][0], 2);
    let fc = gerbe(&["from-class", "--name", "torus3", "--free", "-2"]);
    assert_eq!(fc.status, Status::Ok, "{}", fc.stderr);
    let fc = write(dir.path(), "fc.json", &fc.stdout);
    assert_eq!(gerbe(&["dd", "--in", fc.to_str().unwrap()]).json().unwrap()["free"][0], -2);
    let flat = gerbe(&["from-class", "--name", "rp2_x_s1", "--torsion", "1", "--flat"]);
    let flat = write(dir.path(), "flat.json", &flat.stdout);
    assert_eq!(gerbe(&["dd", "--in", flat.to_str().unwrap()]).json().unwrap()["class"], "free=() torsion=(1 mod 2)");
}

#[test]
fn gauge_and_pullback() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", &example("torus3"));
    let g = g.to_str().unwrap();
    // gauging by a witness of the trivial gerbe on the same complex keeps the class
    let t3 = gerbe(&["from-class", "--name", "torus3", "--free", "0"]);
    let t3 = write(dir.path(), "t3.json", &t3.stdout);
    let w = gerbe(&["trivialize", "--in", t3.to_str().unwrap()]).json().unwrap()["witness"].clone();
    let h = write(dir.path(), "h.json", &w.to_string());
    let gauged = gerbe(&["gauge", "--in", g, "--in", h.to_str().unwrap()]);
    assert_eq!(gauged.status, Status::Ok, "{}", gauged.stderr);
    let gauged = write(dir.path(), "gg.json", &gauged.stdout);
    assert_eq!(gerbe(&["dd", "--in", gauged.to_str().unwrap()]).json().unwrap()["free"][0], 1);
    // identity map on torus3
    let complex = gerbe(&["example", "--name", "torus3", "--complex"]).json().unwrap();
    let labels: Vec<Value> = complex["vertices"].as_array().unwrap().clone();
    let vm: serde_json::Map<String, Value> =
        labels.iter().map(|l| (l.as_str().unwrap().to_owned(), l.clone())).collect();
    let map = serde_json::json!({"source": complex, "vertex_map": vm});
    let m = write(dir.path(), "m.json", &map.to_string());
    let pulled = gerbe(&["pullback", "--in", g, "--in", m.to_str().unwrap()]);
    assert_eq!(pulled.stdout, std::fs::read_to_string(g).unwrap());
}

#[test]
fn cohomology_command() {
    let r = gerbe(&["cohomology", "--name", "rp2", "--degree", "2"]);
    assert_eq!(r.json().unwrap()["group"], "Z/2");
    let r = gerbe(&["cohomology", "--name", "torus3", "--degree", "2", "--ring", "Q"]);
    assert_eq!(r.json().unwrap()["group"], "Q^3");
    let dir = tempfile::tempdir().unwrap();
    let k = gerbe(&["example", "--name", "rp2_x_s1", "--complex"]);
    let k = write(dir.path(), "k.json", &k.stdout);
    let r = gerbe(&["cohomology", k.to_str().unwrap(), "--degree", "3"]);
    assert_eq!(r.json().unwrap()["group"], "Z/2");
}

#[test]
fn deligne_commands() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "g.json", &example("generator"));
    let d = gerbe(&["connect", "--in", g.to_str().unwrap()]);
    assert_eq!(d.status, Status::Ok, "{}", d.stderr);
    let d = write(dir.path(), "d.json", &d.stdout);
    let d = d.to_str().unwrap();
    let curv = gerbe(&["curvature", "--in", d]).json().unwrap();
    assert!(!curv["three_curvature"].as_object().unwrap().is_empty());
    let p = gerbe(&["periods", "--in", d]).json().unwrap();
    assert_eq!(p["cycles"], "fundamental");
    let period = p["periods"][0].as_str().unwrap();
    assert!(period == "1" || period == "-1");
    let eq = gerbe(&["deligne-eq", "--in", d, "--in", d]);
    assert_eq!(eq.status, Status::Ok);
    assert_eq!(eq.json().unwrap()["equal"], true);
    let tr = gerbe(&["deligne-trivialize", "--in", d]);
    assert_eq!((tr.status, tr.exit_code()), (Status::NegativeAnswer, 0));
    assert!(tr.json().unwrap()["obstruction"].as_str().unwrap().contains("Dixmier-Douady"));
    let triv = write(dir.path(), "t.json", &example("trivial"));
    let dt = gerbe(&["connect", "--in", triv.to_str().unwrap()]);
    let dt = write(dir.path(), "dt.json", &dt.stdout);
    assert_eq!(gerbe(&["deligne-trivialize", "--in", dt.to_str().unwrap()]).status, Status::Ok);
    let ne = gerbe(&["deligne-eq", "--in", d, "--in", dt.to_str().unwrap()]);
    assert_eq!((ne.status, ne.json().unwrap()["equal"].clone()), (Status::NegativeAnswer, Value::Bool(false)));
}

#[test]
fn lifting_commands() {
    let dir = tempfile::tempdir().unwrap();
    let ext = r#"{"elements":["0","1"],"table":[["0","1"],["1","0"]],"epsilon":{"1,1":"1/2"}}"#;
    let e = write(dir.path(), "e.json", ext);
    let complex = gerbe(&["example", "--name", "circle3", "--complex"]).stdout;
    let bundle = format!(r#"{{"complex":{complex},"transition":{{"<0,1>":"1"}}}}"#);
    let b = write(dir.path(), "b.json", &bundle);
    let (e, b) = (e.to_str().unwrap(), b.to_str().unwrap());
    let o = gerbe(&["lift-obstruction", "--in", b, "--in", e]);
    assert_eq!(o.status, Status::Ok, "{}", o.stderr);
    let l = gerbe(&["find-lift", "--in", e, "--in", b]);
    assert_eq!(l.status, Status::Ok, "{}", l.stderr);
    assert_eq!(l.json().unwrap()["liftable"], true);
    let bad = format!(r#"{{"complex":{complex},"transition":{{"<0,1>":"7"}}}}"#);
    let bad = write(dir.path(), "bad.json", &bad);
    let r = gerbe(&["find-lift", "--in", e, "--in", bad.to_str().unwrap()]);
    assert_eq!(r.exit_code(), 2);
    assert!(r.stderr.contains("transition.<0,1>"), "{}", r.stderr);
}

#[test]
fn invalid_input_exits_2_and_names_the_key() {
    let r = gerbe_stdin(&["dd", "--in", "-"], "{ not json");
    assert_eq!(r.exit_code(), 2);
    assert!(r.stderr.contains("malformed JSON"));
    let mut v: Value = serde_json::from_str(&example("trivial")).unwrap();
    v["data"]["<0,1,2>"]["winding"]["<0,1>"] = Value::String("x".into());
    let r = gerbe_stdin(&["dd", "--in", "-"], &v.to_string());
    assert_eq!(r.exit_code(), 2);
    assert!(r.stderr.contains("data.<0,1,2>.winding.<0,1>"), "{}", r.stderr);
    let mut v: Value = serde_json::from_str(&example("trivial")).unwrap();
    v.as_object_mut().unwrap().remove("data");
    let r = gerbe_stdin(&["dd", "--in", "-"], &v.to_string());
    assert!(r.stderr.contains("`data`"), "{}", r.stderr);
    let r = gerbe(&["frobnicate"]);
    assert_eq!((r.status, r.exit_code()), (Status::InvalidInput, 2));
    assert_eq!(gerbe(&["dd"]).exit_code(), 2);
}

#[test]
fn version_and_listing() {
    let r = gerbe(&["--version"]);
    assert_eq!(r.exit_code(), 0);
    assert!(r.stdout.contains(env!("CARGO_PKG_VERSION")));
    let names = gerbe(&["example"]).json().unwrap();
    assert!(names["names"].as_array().unwrap().iter().any(|n| n == "rp2_x_s1"));
}

#[test]
fn out_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["trivial", "generator", "torsion"] {
        let out = dir.path().join(format!("{name}.json"));
        let r = gerbe(&["example", "--name", name, "--out", out.to_str().unwrap()]);
        assert_eq!((r.status, r.stdout.as_str()), (Status::Ok, ""));
        let text = std::fs::read_to_string(&out).unwrap();
        let g = gerbe_core::io::gerbe_from_json(&gerbe_core::io::parse(&text).unwrap(), "").unwrap();
        assert_eq!(gerbe_core::io::render(&gerbe_core::io::gerbe_to_json(&g)), text);
        assert_eq!(g, gerbe_cli::bundled_gerbe(name).unwrap());
        let again = dir.path().join("again.json");
        gerbe(&["dual", "--in", out.to_str().unwrap(), "--out", again.to_str().unwrap()]);
        let twice = gerbe(&["dual", "--in", again.to_str().unwrap()]);
        assert_eq!(twice.stdout, text);
    }
}
