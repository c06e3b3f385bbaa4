use std::process::{Command, Output};

use tempfile::TempDir;

fn qgl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgl")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = qgl(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    qgl(args).status.code().unwrap()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

/// Dense upper-triangular matrix from the sparse text format.
fn qubo_rows(path: &str) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let n: usize = lines.next().unwrap().trim().parse().unwrap();
    let mut m = vec![vec![0.0; n]; n];
    for l in lines {
        let f: Vec<&str> = l.split_whitespace().collect();
        m[f[0].parse::<usize>().unwrap()][f[1].parse::<usize>().unwrap()] = f[2].parse().unwrap();
    }
    m
}

fn assert_rows(got: &[Vec<f64>], want: &[[f64; 2]; 2]) {
    for (g, w) in got.iter().zip(want) {
        for (a, b) in g.iter().zip(w) {
            assert!((a - b).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn gen_cones_reports_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(&dir, "a.csv"), p(&dir, "b.csv"));
    let args = |out: &str| {
        ["gen", "--family", "cones", "--n", "8", "--rho", "0.5", "--w", "0.2", "--d", "0.5", "--seed", "7", "--out"]
            .iter()
            .map(|s| s.to_string())
            .chain([out.to_string()])
            .collect::<Vec<_>>()
    };
    let stdout = ok(&args(&a).iter().map(String::as_str).collect::<Vec<_>>());
    ok(&args(&b).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(std::fs::read_to_string(&a).unwrap().lines().count(), 9);
    assert!(stdout.contains("n: 8"));
    let dist: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("min_cross_distance: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(dist >= 0.5);
}

#[test]
fn gen_circles_noiseless_inner_radius() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "c.csv");
    ok(&["gen", "--family", "circles", "--n", "8", "--r", "0.5", "--sigma", "0", "--seed", "1", "--out", &out]);
    let text = std::fs::read_to_string(&out).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let radius = f[0].hypot(f[1]);
        let want = if f[2] > 0.0 { 0.5 } else { 1.0 };
        assert!((radius - want).abs() < 1e-12);
    }
}

#[test]
fn gen_rejects_invalid_parameters() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "x.csv");
    assert_eq!(code(&["gen", "--family", "cones", "--n", "8", "--rho", "1.5", "--w", "0.2", "--d", "0.5", "--out", &out]), 1);
    assert_eq!(code(&["gen", "--family", "cones", "--n", "8", "--out", &out]), 1);
}

#[test]
fn qubo_fixtures_and_gap() {
    let dir = TempDir::new().unwrap();
    let antipodal = p(&dir, "antipodal.csv");
    std::fs::write(&antipodal, "x1,x2,label\n1,0,-1\n-1,0,1\n").unwrap();
    let q = p(&dir, "q.txt");
    ok(&["qubo", "--problem", "clustering", "--in", &antipodal, "--kernel", "linear", "--normalize", "--out", &q]);
    assert_rows(&qubo_rows(&q), &[[-0.5, 1.0], [0.0, -0.5]]);

    let line = ok(&["gap", "--in", &q]);
    assert_eq!(line.trim().lines().count(), 1);
    let rec: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(rec["gap"].as_f64(), Some(0.5));
    assert_eq!(rec["ground_degeneracy"].as_u64(), Some(2));

    // Re-normalizing the output leaves it unchanged.
    let q2 = p(&dir, "q2.txt");
    ok(&["qubo", "--problem", "clustering", "--in", &antipodal, "--normalize", "--out", &q2]);
    assert_eq!(std::fs::read(&q).unwrap(), std::fs::read(&q2).unwrap());

    let ortho = p(&dir, "ortho.csv");
    std::fs::write(&ortho, "x1,x2,label\n1,0,1\n0,1,-1\n").unwrap();
    let s = p(&dir, "s.txt");
    ok(&["qubo", "--problem", "svm", "--in", &ortho, "--c", "0.1", "--lambda", "1", "--out", &s]);
    assert_rows(&qubo_rows(&s), &[[-0.85, -0.2], [0.0, -0.85]]);
}

#[test]
fn qubo_rejects_mismatched_flags() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "d.csv");
    std::fs::write(&data, "x1,x2,label\n1,0,1\n0,1,-1\n").unwrap();
    let out = p(&dir, "q.txt");
    assert_eq!(code(&["qubo", "--problem", "svm", "--in", &data, "--out", &out]), 1);
    assert_eq!(code(&["qubo", "--problem", "clustering", "--in", &data, "--c", "1", "--out", &out]), 1);
    assert_eq!(code(&["qubo", "--problem", "clustering", "--in", &p(&dir, "missing.csv"), "--out", &out]), 2);
}

#[test]
fn gap_zero_instance_and_size_guard() {
    let dir = TempDir::new().unwrap();
    let zero = p(&dir, "zero.txt");
    std::fs::write(&zero, "3\n").unwrap();
    let rec: serde_json::Value = serde_json::from_str(ok(&["gap", "--in", &zero]).trim()).unwrap();
    assert!(rec["gap"].is_null());
    assert_eq!(rec["ground_degeneracy"].as_u64(), Some(8));

    let big = p(&dir, "big.txt");
    std::fs::write(&big, "29\n0 0 1.0\n").unwrap();
    let out = qgl(&["gap", "--in", &big]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("limit"));
}

#[test]
fn ahgap_single_qubit_and_guard() {
    let dir = TempDir::new().unwrap();
    let one = p(&dir, "one.txt");
    std::fs::write(&one, "1\n0 0 1\n").unwrap();
    let out = ok(&["ahgap", "--in", &one, "--grid", "201"]);
    let get = |k: &str| -> String {
        out.lines().find_map(|l| l.strip_prefix(&format!("{k}: "))).unwrap().to_string()
    };
    assert!((get("s_star").parse::<f64>().unwrap() - 0.8).abs() < 1e-4);
    assert!((get("min_gap").parse::<f64>().unwrap() - 0.8f64.sqrt()).abs() < 1e-6);
    assert_eq!(get("bound_ok"), "true");

    let big = p(&dir, "big.txt");
    std::fs::write(&big, "13\n").unwrap();
    assert_eq!(code(&["ahgap", "--in", &big]), 1);
}

#[test]
fn sweep_from_config_with_flag_override() {
    let dir = TempDir::new().unwrap();
    let cfg = p(&dir, "sweep.cfg");
    std::fs::write(
        &cfg,
        "# clustering margin sweep\nproblem = clustering\ngenerator = cones\nn = 8\n\
         sweep = D\nlo = 0\nhi = 1\nw = 0.2\nrho = 0.5\nsamples = 10\nseed = 11\n",
    )
    .unwrap();
    let (out, summary, plot) = (p(&dir, "r.csv"), p(&dir, "s.txt"), p(&dir, "r.gp"));
    let stdout = ok(&[
        "sweep", "--config", &cfg, "--samples", "50", "--out", &out, "--summary", &summary, "--gnuplot", &plot,
    ]);
    assert!(stdout.contains("records: 50"));
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 51);
    let text = std::fs::read_to_string(&summary).unwrap();
    let rho: f64 = text.lines().find_map(|l| l.strip_prefix("spearman: ")).unwrap().parse().unwrap();
    assert!(rho > 0.0);
    assert!(std::fs::read_to_string(&plot).unwrap().contains("r.csv"));

    // Same flags at a different worker count: byte-identical records.
    let out1 = p(&dir, "r1.csv");
    ok(&["--threads", "1", "sweep", "--config", &cfg, "--samples", "50", "--out", &out1, "--summary", &summary]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&out1).unwrap());
}

#[test]
fn sweep_errors() {
    let dir = TempDir::new().unwrap();
    let (out, summary) = (p(&dir, "r.csv"), p(&dir, "s.txt"));
    assert_eq!(code(&["sweep", "--out", &out, "--summary", &summary]), 1);
    assert_eq!(code(&["sweep", "--config", &p(&dir, "none.cfg"), "--out", &out, "--summary", &summary]), 2);
    let bad = p(&dir, "bad.cfg");
    std::fs::write(&bad, "problem clustering\n").unwrap();
    assert_eq!(code(&["sweep", "--config", &bad, "--out", &out, "--summary", &summary]), 1);
}

#[test]
fn weyl_check_reports_no_violations() {
    let out = ok(&["weyl-check", "--dim", "8", "--trials", "100", "--seed", "3"]);
    assert!(out.lines().any(|l| l == "0 violations"), "{out}");
}

#[test]
fn usage_errors_exit_one() {
    let out = qgl(&["gap"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(code(&["gap", "--in", "x", "--bogus"]), 1);
    assert_eq!(code(&["frobnicate"]), 1);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn threads_env_override_is_accepted() {
    let out = Command::new(env!("CARGO_BIN_EXE_qgl"))
        .args(["weyl-check", "--dim", "3", "--trials", "5"])
        .env("QGL_THREADS", "2")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_qgl"))
        .args(["weyl-check", "--dim", "3"])
        .env("QGL_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
