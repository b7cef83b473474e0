use std::path::Path;
use std::process::{Command, Output};

use prodrange::io::write_operator;
use prodrange::{zoo, ComplexMatrix, C64};
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prodrange")).args(args).env_remove("PRODRANGE_SEED").output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn interval(v: &Value) -> (f64, f64) {
    let i = &v["interval"];
    (i["lo"].as_f64().unwrap(), i["hi"].as_f64().unwrap())
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn hermitian_range_of_z() {
    let out = run(&["range", "--zoo", "z24", "--param", "gamma=0.25", "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let (lo, hi) = interval(&json(&out));
    assert!((lo - 0.25).abs() < 1e-12 && (hi - 0.75).abs() < 1e-12);
}

#[test]
fn range_from_file() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("diag4.json");
    write_operator(&f, &ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0, 4.0])).unwrap();
    let out = run(&["range", "--file", path_str(&f), "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(interval(&json(&out)), (2.0, 3.0));

    let out = run(&["range", "--file", path_str(&f), "--k", "3"]);
    assert_eq!(out.status.code(), Some(2), "rank-3 range of a 4x4 diagonal is empty");
}

#[test]
fn swap_product_range_is_empty_for_d3() {
    let out = run(&["range", "--zoo", "swap", "--d", "3", "--product", "2x2"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["interval"]["empty"], Value::Bool(true));
    let out = run(&["range", "--zoo", "swap", "--d", "4", "--product", "2x2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(interval(&json(&out)), (0.0, 0.0));
}

#[test]
fn delta_certificate_for_a_unitary() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("u.json");
    let code = dir.path().join("p.json");
    let w = C64::from_polar(1.0, std::f64::consts::TAU / 3.0);
    let entry = |z: C64| format!("[{},{}]", z.re, z.im);
    let zero = entry(C64::new(0.0, 0.0));
    let diag = [C64::new(1.0, 0.0), w, w * w];
    let rows: Vec<String> = (0..3)
        .map(|i| {
            let cells: Vec<String> = (0..3).map(|j| if i == j { entry(diag[i]) } else { zero.clone() }).collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    std::fs::write(&f, format!("{{\"dims\":[3],\"matrix\":[{}]}}", rows.join(","))).unwrap();
    let out = run(&["range", "--file", path_str(&f), "--k", "1", "--lambda", "0", "--code-out", path_str(&code)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["certified"], Value::Bool(true));
    assert!(v["residual"].as_f64().unwrap() <= 1e-8);
    assert!(code.exists());

    let out = run(&["range", "--file", path_str(&f), "--k", "2", "--lambda", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_bound_with_csv() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("trace.csv");
    let out = run(&["bound", "--zoo", "example2", "--method", "scan", "--csv", path_str(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let (_, hi) = interval(&json(&out));
    assert!((hi - (3.0 + 33f64.sqrt()) / 9.0).abs() <= 0.01);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("gamma,feasible"));
    assert_eq!(lines.count(), 101);
}

#[test]
fn cnum_bound_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = |p: &Path| {
        vec!["bound", "--zoo", "example2", "--method", "cnum", "--restarts", "16", "--seed", "7", "--out"]
            .into_iter()
            .map(String::from)
            .chain([p.display().to_string()])
            .collect::<Vec<_>>()
    };
    for p in [&a, &b] {
        let argv = args(p);
        let out = run(&argv.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let v: Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    let (lo, hi) = interval(&v);
    assert!(lo >= 0.0 && hi <= 1.0 && lo < hi);
}

#[test]
fn seed_comes_from_the_environment() {
    let run_env = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_prodrange"))
            .args(["bound", "--zoo", "example2", "--method", "cnum", "--restarts", "2", "--max-iter", "5"])
            .env("PRODRANGE_SEED", seed)
            .output()
            .unwrap()
    };
    let a = json(&run_env("3"));
    assert_eq!(a["seed"], Value::from(3));
    assert_eq!(a, json(&run_env("3")));
    assert_ne!(a["bound"]["argmin"], json(&run_env("4"))["bound"]["argmin"]);
}

#[test]
fn convex_bound_of_the_blocks() {
    let out = run(&["bound", "--zoo", "q24", "--param", "gamma=0.25", "--method", "convex"]);
    assert_eq!(out.status.code(), Some(0));
    let (lo, hi) = interval(&json(&out));
    assert!((lo - 0.25).abs() < 1e-9 && (hi - 0.75).abs() < 1e-9);
}

#[test]
fn verify_exported_codes() {
    let dir = TempDir::new().unwrap();
    let op = dir.path().join("q.json");
    let code = dir.path().join("code.json");
    let out = run(&[
        "export",
        "--zoo",
        "q44",
        "--param",
        "alpha=0.3",
        "--out",
        path_str(&op),
        "--code-out",
        path_str(&code),
        "--beta",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&["verify", "--file", path_str(&op), "--code", path_str(&code)]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["lambda"][0].as_f64().unwrap() - 0.35).abs() < 1e-8);
    assert!((v["gamma"].as_f64().unwrap() - 0.325).abs() < 1e-8);

    let swap_code = dir.path().join("swap_code.json");
    let swap = dir.path().join("swap.json");
    let out =
        run(&["export", "--zoo", "swap", "--d", "4", "--out", path_str(&swap), "--code-out", path_str(&swap_code)]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["verify", "--file", path_str(&swap), "--code", path_str(&swap_code), "--p", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["lambda"][0].as_f64().unwrap().abs() < 1e-12);
    assert!((v["entropy_bits"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    // the q44 code does not compress the swap to a scalar
    let out = run(&["verify", "--file", path_str(&swap), "--code", path_str(&code)]);
    assert_eq!(out.status.code(), Some(2));

    // a 3x3 code against a 4x4 operator
    let d3 = dir.path().join("d3.json");
    run(&["export", "--zoo", "dfs2", "--out", path_str(&d3), "--code-out", path_str(&code)]);
    let out = run(&["verify", "--file", path_str(&op), "--code", path_str(&code)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_bands_nest() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("q44.csv");
    let out = run(&[
        "sweep",
        "--zoo",
        "q44",
        "--vary",
        "alpha",
        "--start",
        "0.1",
        "--stop",
        "0.9",
        "--step",
        "0.2",
        "--methods",
        "scan,exact",
        "--out",
        path_str(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha,scan_lo,scan_hi,exact_lo,exact_hi"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!(r[1] <= r[3] + 1e-12 && r[4] <= r[2] + 1e-12, "row {r:?}");
    }
    let record: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("q44.csv.run.json")).unwrap()).unwrap();
    assert_eq!(record["seed"], Value::from(0));
    assert_eq!(record["outputs"][0], Value::from(csv.display().to_string()));
}

#[test]
fn sweep_scan_contains_cnum() {
    let out = run(&[
        "sweep",
        "--zoo",
        "example1",
        "--vary",
        "alpha",
        "--start",
        "0.3",
        "--stop",
        "0.9",
        "--step",
        "0.3",
        "--methods",
        "scan,cnum",
        "--restarts",
        "8",
        "--seed",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().skip(1) {
        let r: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(r[1] <= r[3] + 0.01 && r[4] <= r[2] + 0.01, "row {r:?}");
    }
}

#[test]
fn sweep_rejects_bad_grids() {
    let out = run(&["sweep", "--zoo", "q44", "--vary", "alpha", "--start", "0.5", "--stop", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["sweep", "--zoo", "q44", "--vary", "alpha", "--start", "0.1", "--stop", "0.5", "--step", "0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reverse_constructions() {
    let dir = TempDir::new().unwrap();
    let u = dir.path().join("u.json");
    let code = dir.path().join("code.json");
    let out = run(&[
        "reverse",
        "--d",
        "4",
        "--random",
        "--seed",
        "1",
        "--unitary-out",
        path_str(&u),
        "--code-out",
        path_str(&code),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["verify", "--file", path_str(&u), "--code", path_str(&code)]);
    assert_eq!(out.status.code(), Some(0));

    let out = run(&["reverse", "--d", "3", "--random", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["symmetric"], Value::Bool(true));

    let mut phases = zoo::d3_example_phases();
    phases[4] += std::f64::consts::PI / 10.0;
    let list = phases.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let out = run(&["reverse", "--d", "3", "--phases", &list]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pair-1-5"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dims\":[2],\"matrix\":[[[1,0]]]}").unwrap();
    assert_eq!(run(&["range", "--file", path_str(&bad)]).status.code(), Some(1));
    assert_eq!(run(&["range", "--zoo", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["bound", "--zoo", "example2", "--method", "magic"]).status.code(), Some(1));
    assert_eq!(run(&["range"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
