//! End-to-end runs of the `polycert` binary.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use polycert::cli::parse_grid;
use polycert::fields::Field;
use polycert::nulla::PolySystem;
use serde_json::Value;

const K4: &str = "p edge 4 6\ne 1 2\ne 1 3\ne 1 4\ne 2 3\ne 2 4\ne 3 4\n";
const C5: &str = "p edge 5 5\ne 1 2\ne 2 3\ne 3 4\ne 4 5\ne 5 1\n";
const TRIANGLE: &str = "p edge 3 3\ne 1 2\ne 2 3\ne 1 3\n";

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Scratch {
        let d = std::env::temp_dir().join(format!("polycert-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&d).unwrap();
        Scratch(d)
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.0.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_polycert"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn linear_example() -> String {
    PolySystem::parse(&Field::rational(), &["x1", "x2", "x3"], &["x1^2 - 1", "2*x1*x2 + x3", "x1 + x2", "x1 + x3"]).unwrap().to_json_string()
}

#[test]
fn nulla_certificate_round_trip_and_tamper() {
    let dir = Scratch::new("nulla");
    let sys = dir.file("sys.json", &linear_example());
    let s = sys.to_str().unwrap();

    let low = run(&["nulla", "--max-degree", "0", "--system", s], None);
    assert_eq!(low.status.code(), Some(2));
    assert_eq!(json(&low)["status"], "BOUND_REACHED");

    let out = run(&["nulla", "--max-degree", "1", "--system", s], None);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["status"], "INFEASIBLE");
    assert_eq!(report["nulla_degree"], 1);
    let cert = dir.file("cert.json", &report["certificate"].to_string());
    let ok = run(&["check-cert", cert.to_str().unwrap(), "--system", s], None);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(json(&ok)["valid"], true);

    // Drop one term from the first nonempty multiplier.
    let mut bad = report["certificate"].clone();
    let mults = bad["multipliers"].as_array_mut().unwrap();
    mults.iter_mut().find(|m| !m.as_array().unwrap().is_empty()).unwrap().as_array_mut().unwrap().pop();
    let tampered = dir.file("bad.json", &bad.to_string());
    let rej = run(&["check-cert", tampered.to_str().unwrap(), "--system", s], None);
    assert_eq!(rej.status.code(), Some(1));
    assert!(rej.stdout.is_empty());
    assert!(String::from_utf8_lossy(&rej.stderr).contains("identity residual nonzero"));
}

#[test]
fn coloring_pipeline_from_stdin() {
    let dir = Scratch::new("color");
    let enc = run(&["encode", "--anchor", "0"], Some(K4));
    assert_eq!(enc.status.code(), Some(0));
    let sys = dir.file("k4.json", &String::from_utf8(enc.stdout).unwrap());
    let s = sys.to_str().unwrap();

    let fp = run(&["fpnulla", "--system", s], None);
    assert_eq!(fp.status.code(), Some(0));
    let r = json(&fp);
    assert_eq!(r["status"], "INFEASIBLE");
    let cert = dir.file("fp.json", &r["certificate"].to_string());
    assert_eq!(run(&["check-cert", cert.to_str().unwrap(), "--system", s], None).status.code(), Some(0));

    let g = dir.file("k4.col", K4);
    let cyc = run(&["cycle-cert", "--graph", g.to_str().unwrap()], None);
    assert_eq!(cyc.status.code(), Some(0));
    let cc = dir.file("cyc.json", &String::from_utf8(cyc.stdout).unwrap());
    let chk = run(&["check-cert", cc.to_str().unwrap(), "--graph", g.to_str().unwrap()], None);
    assert_eq!(chk.status.code(), Some(0), "{}", String::from_utf8_lossy(&chk.stderr));

    let none = run(&["cycle-cert"], Some(C5.replace("p edge 5 5", "p edge 5 4").replace("e 5 1\n", "").as_str()));
    assert_eq!(none.status.code(), Some(2));
}

#[test]
fn solve_lists_triangle_colorings() {
    let enc = run(&["encode", "--anchor", "0"], Some(TRIANGLE));
    let out = run(&["solve", "--seed", "3"], Some(&String::from_utf8(enc.stdout).unwrap()));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["status"], "SOLVED");
    assert_eq!(r["count"], 2);
}

#[test]
fn real_certificates_round_trip() {
    let dir = Scratch::new("real");
    let sys = dir.file("sys.json", r#"{"variables":["x1","x2"],"equations":["x2 + x1^2 + 2"],"inequalities":["x1 - x2^2 + 3"]}"#);
    let s = sys.to_str().unwrap();
    let out = run(&["psatz", "--system", s, "--max-degree", "2"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["status"], "FOUND");
    let cert = dir.file("cert.json", &r["certificate"].to_string());
    let chk = run(&["check-cert", cert.to_str().unwrap(), "--system", s], None);
    assert_eq!(chk.status.code(), Some(0), "{}", String::from_utf8_lossy(&chk.stderr));

    let sos = run(&["sos-check", "--poly", "x1^2 - x1*x2^2 + x2^4 + 1", "--vars", "x1,x2"], None);
    assert_eq!(sos.status.code(), Some(0));
    assert_eq!(json(&sos)["status"], "SOS");
    let not = run(&["sos-check", "--poly", "x1*x2", "--vars", "x1,x2"], None);
    assert_eq!(json(&not)["status"], "NOT_SOS");

    let th = run(&["theta1"], Some(C5));
    assert_eq!(th.status.code(), Some(0));
    assert!((json(&th)["value"].as_f64().unwrap() - 5f64.sqrt()).abs() < 1e-4);
}

#[test]
fn usage_errors_exit_one() {
    let out = run(&["encode", "--field", "gf:4:1"], Some(K4));
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("polycert:"));
    let out = run(&["nulla"], Some("{ not json"));
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["frobnicate"], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn experiment_csv_is_reproducible() {
    let args = ["experiment", "--n", "10", "--p", "0.0:1.0:0.5", "--trials", "4", "--seed", "5", "--no-timestamp", "--threads", "2"];
    let a = run(&args, None);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = run(&args, None);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("p,")).collect();
    assert_eq!(rows.len(), 3 * 3);
    // Empty graphs are colourable; complete graphs on ten vertices are not.
    for r in &rows {
        let cols: Vec<&str> = r.split(',').collect();
        match cols[0] {
            "0.00" | "0" | "0.0" => assert_eq!(cols[3], "0", "{r}"),
            "1.00" | "1" | "1.0" => assert_eq!(cols[3], "4", "{r}"),
            _ => {}
        }
    }
    let dir = Scratch::new("exp");
    let csv = dir.file("run.csv", &text);
    let chk = run(&["experiment", "--input", csv.to_str().unwrap(), "--assert-dominance"], None);
    assert_eq!(chk.status.code(), Some(0), "{}", String::from_utf8_lossy(&chk.stderr));
}

#[test]
fn default_grid_has_sixteen_points() {
    let g = parse_grid("0.05:0.20:0.01").unwrap();
    assert_eq!(g.len(), 16);
    assert!((g[15] - 0.20).abs() < 1e-12);
}
