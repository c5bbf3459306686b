//! Exit-code golden tests and byte-level determinism for every
//! subcommand (acceptance criterion: CLI determinism and exit codes).

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_krein");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("binary launches")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).expect("output file written")
}

/// Runs the same invocation twice and asserts the output bytes match;
/// returns the contents.
fn deterministic(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(format!("{name}.out"));
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--out", path.to_str().unwrap()]);
    let out = run(&full);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let first = read(&path);
    let out = run(&full);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let second = read(&path);
    assert_eq!(first, second, "{name}: two identical runs differ");
    first
}

fn data_lines(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn weyl_grid_closed_form_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let content = deterministic(
        dir.path(),
        "weyl",
        &[
            "weyl-grid", "--model", "scalar-zero", "--zre", "0,0", "--zim", "1,2", "--grid", "2",
        ],
    );
    let rows = data_lines(&content);
    assert_eq!(rows.len(), 2);
    // Gamma(i) = i and Gamma(2i) = i/2 for the scalar model.
    let parse = |row: &str| -> Vec<f64> { row.split(',').map(|t| t.parse().unwrap()).collect() };
    let r0 = parse(rows[0]);
    let r1 = parse(rows[1]);
    assert!((r0[2] - 0.0).abs() < 1e-15 && (r0[3] - 1.0).abs() < 1e-15);
    assert!((r1[2] - 0.0).abs() < 1e-15 && (r1[3] - 0.5).abs() < 1e-15);
}

#[test]
fn weyl_grid_guard_and_empty_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("w.csv");
    let out = run(&[
        "weyl-grid", "--model", "diag-pair", "--zre", "1,1", "--zim", "0,0", "--grid", "1",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("1+0i"), "message names the offending z");

    let out = run(&[
        "weyl-grid", "--model", "scalar-zero", "--zre", "0", "--zim", "1", "--grid", "0",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn spectrum_golden_records_and_guard() {
    let dir = tempfile::tempdir().unwrap();
    let content = deterministic(
        dir.path(),
        "spectrum",
        &[
            "spectrum", "--model", "scalar-zero", "--theta", "2", "--interval", "0.1,0.9",
        ],
    );
    let rows = data_lines(&content);
    assert_eq!(rows.len(), 1);
    let fields: Vec<&str> = rows[0].split(',').collect();
    let lambda: f64 = fields[0].parse().unwrap();
    assert!((lambda - 0.5).abs() <= 1e-10);
    assert_eq!(fields[1], "1");
    assert_eq!(fields[4], "true");
    // The eigenvector sibling file exists and carries one component.
    let vec_file = Path::new(fields[5]);
    assert!(vec_file.exists());
    assert_eq!(data_lines(&read(vec_file)).len(), 1);

    let out = run(&[
        "spectrum", "--model", "diag-pair", "--theta", "2", "--interval", "-0.5", "1.5",
        "--out", dir.path().join("g.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("touches the base spectrum"));
}

#[test]
fn resolvent_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let content = deterministic(
        dir.path(),
        "resolvent",
        &[
            "resolvent", "--model", "scalar-zero", "--theta", "2", "--zre", "0.3", "--zim", "1.0",
        ],
    );
    let rows = data_lines(&content);
    assert_eq!(rows.len(), 1);
    let f: Vec<f64> = rows[0]
        .split(',')
        .map(|t| t.parse().unwrap())
        .collect();
    // 1 / (z - 1/theta) at z = 0.3 + i, theta = 2.
    let exact = 1.0 / num_complex::Complex64::new(0.3 - 0.5, 1.0);
    assert!((f[2] - exact.re).abs() < 1e-14 && (f[3] - exact.im).abs() < 1e-14);

    // A point on the base spectrum trips the guard.
    let out = run(&[
        "resolvent", "--model", "scalar-zero", "--theta", "2", "--zre", "0", "--zim", "0",
        "--out", dir.path().join("r.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn verify_passes_and_flags_rank_deficiency() {
    let dir = tempfile::tempdir().unwrap();
    deterministic(
        dir.path(),
        "verify",
        &[
            "verify", "--model", "random-hermitian", "--n", "8", "--k", "3", "--model-seed", "7",
            "--theta", "1,0,0,0,1,0,0,0,1", "--seed", "11",
        ],
    );

    // A corrupted trace map (two identical rows) must exit 1 and name
    // the rank deficiency.
    let model_file = dir.path().join("bad-model.txt");
    std::fs::write(
        &model_file,
        "krein-model v1\nkind dense\ndim 2\naux 2\nmatrix\n1 0 0 0\n0 0 -1 0\ntrace\n1 0 1 0\n1 0 1 0\nend\n",
    )
    .unwrap();
    let out = run(&[
        "verify", "--model", "file", "--model-path", model_file.to_str().unwrap(),
        "--out", dir.path().join("v.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("RankDeficientTrace"));
}

#[test]
fn density_peak_and_not_applicable() {
    let dir = tempfile::tempdir().unwrap();
    let content = deterministic(
        dir.path(),
        "density",
        &[
            "density", "--model", "scalar-zero", "--theta", "2", "--interval", "0.4,0.6",
            "--grid", "41", "--epsilon", "1e-3",
        ],
    );
    let rows = data_lines(&content);
    assert_eq!(rows.len(), 41);
    let peak = rows
        .iter()
        .map(|r| {
            let f: Vec<&str> = r.split(',').collect();
            (f[0].parse::<f64>().unwrap(), f[2].parse::<f64>().unwrap())
        })
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!((peak.0 - 0.5).abs() <= 0.005 + 1e-12, "peak at {}", peak.0);

    let out = run(&[
        "density", "--model", "scalar-zero", "--distinguished", "--interval", "0.4,0.6",
        "--grid", "5", "--epsilon", "1e-3",
        "--out", dir.path().join("d.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("not applicable"));
}

#[test]
fn calibrate_closed_form_and_zero_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let content = deterministic(
        dir.path(),
        "calibrate",
        &["calibrate", "--model", "diag-pair", "--coupling", "0.5"],
    );
    let rows = data_lines(&content);
    let theta: f64 = rows[0].split(',').next().unwrap().parse().unwrap();
    assert!((theta - 2.0).abs() <= 1e-10);

    let out = run(&[
        "calibrate", "--model", "lattice", "--n", "199", "--half-width", "20",
        "--delta-site", "99", "--alpha", "0",
        "--out", dir.path().join("c.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("calibration failed"));
}

#[test]
fn config_file_with_flag_override_and_json_meta() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[model]\nkind = \"scalar-zero\"\n\n[extension]\ntheta = [2.0]\n\n[task]\ninterval = [0.1, 0.9]\n",
    )
    .unwrap();

    // The flag overrides the file's theta: the eigenvalue moves to 1/4.
    let out_path = dir.path().join("s.json");
    let out = run(&[
        "spectrum", "--config", cfg.to_str().unwrap(), "--theta", "4",
        "--format", "json", "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&read(&out_path)).unwrap();
    assert_eq!(doc["meta"]["tool"], "krein");
    assert!(doc["meta"]["config_sha256"].as_str().unwrap().len() == 64);
    assert_eq!(doc["meta"]["config"]["extension"]["theta"][0], 4.0);
    let lambda = doc["records"][0]["lambda"].as_f64().unwrap();
    assert!((lambda - 0.25).abs() <= 1e-10);

    // An unknown key in the config file is a config error.
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[model]\nkind = \"scalar-zero\"\nbogus = 1\n").unwrap();
    let out = run(&[
        "verify", "--config", bad.to_str().unwrap(),
        "--out", dir.path().join("v.csv").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}
