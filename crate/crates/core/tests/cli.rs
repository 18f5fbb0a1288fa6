//! End-to-end tests of the command-line interface: artifact formats,
//! exit codes, spec files, and determinism.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pdem-spectra"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn parse_csv_column(csv: &str, col: usize) -> Vec<f64> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn eval_csv_table() {
    let out = run(&[
        "eval",
        "--family",
        "jacobi_es",
        "--q",
        "1",
        "--a",
        "1",
        "--b",
        "1",
        "--x-min",
        "-1",
        "--x-max",
        "1",
        "--points",
        "3",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let header = text.lines().next().unwrap();
    assert_eq!(header, "x,mass,veff,v,psi0");
    // row x = 0 has mass 1.0
    let masses = parse_csv_column(&text, 1);
    assert!((masses[1] - 1.0).abs() < 1e-15);
}

#[test]
fn eval_ben_daniel_duke_makes_v_equal_veff() {
    let out = run(&[
        "eval",
        "--family",
        "laguerre_es",
        "--q",
        "1",
        "--a",
        "1",
        "--alpha",
        "0",
        "--beta",
        "-1",
        "--points",
        "21",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let veff = parse_csv_column(&text, 2);
    let v = parse_csv_column(&text, 3);
    for (a, b) in veff.iter().zip(v.iter()) {
        assert_eq!(a, b, "veff and v columns must be identical");
    }
}

#[test]
fn eval_zhu_kroemer_free_particle_is_constant() {
    let out = run(&[
        "eval",
        "--family",
        "jacobi_es",
        "--q",
        "1",
        "--a",
        "0",
        "--b",
        "0",
        "--v0",
        "3",
        "--alpha",
        "-0.5",
        "--beta",
        "0",
        "--x-min",
        "-4",
        "--x-max",
        "4",
        "--points",
        "41",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let v = parse_csv_column(&stdout(&out), 3);
    for value in v {
        assert!(
            (value - 3.0).abs() < 1e-12,
            "V should be constant 3.0, got {value}"
        );
    }
}

#[test]
fn verify_exit_codes() {
    let out = run(&[
        "verify",
        "--family",
        "jacobi_es",
        "--q",
        "1",
        "--a",
        "0",
        "--b",
        "0",
        "--levels",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));

    let out = run(&[
        "verify", "--family", "qes", "--q", "1", "--a", "-1", "--xi", "2", "--k", "1", "--levels",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let analytic = report["analytic"].as_array().unwrap();
    assert_eq!(analytic[0].as_f64().unwrap(), -2.0);
    assert_eq!(analytic[1].as_f64().unwrap(), 2.0);

    // Inadmissible QES parameters: verification failure citing the range.
    let out = run(&[
        "verify", "--family", "qes", "--q", "1", "--a", "-0.4", "--xi", "1", "--k", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("a < -2k + 3/2"), "{}", stderr(&out));

    // Usage error: unknown family.
    let out = run(&["verify", "--family", "morse", "--q", "1", "--a", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn qes_solution_artifact() {
    let out = run(&["qes", "--k", "1", "--a", "-1", "--xi", "2"]);
    assert!(out.status.success());
    let sol: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let levels = sol["levels"].as_array().unwrap();
    assert_eq!(levels.len(), 2);
    assert!((levels[0]["c"].as_f64().unwrap() + 2.0).abs() < 1e-12);
    assert!((levels[1]["c"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    let coeffs: Vec<f64> = levels[0]["coeffs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((coeffs[0] - 2.0).abs() < 1e-10 && (coeffs[1] - 1.0).abs() < 1e-12);
}

#[test]
fn spectrum_artifact() {
    let out = run(&[
        "spectrum",
        "--family",
        "laguerre_es",
        "--q",
        "1",
        "--a",
        "1",
        "--levels",
        "4",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let energies = parse_csv_column(&stdout(&out), 1);
    for (n, e) in energies.iter().enumerate() {
        assert!((e - (n as f64 + 1.0)).abs() < 1e-12);
    }
}

#[test]
fn partner_report() {
    let out = run(&[
        "partner",
        "--family",
        "jacobi_es",
        "--q",
        "1",
        "--a",
        "1",
        "--b",
        "1",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["partner_kind"], "shape_invariant_jacobi");
    assert_eq!(report["shifted"]["a"].as_f64().unwrap(), 2.0);
    assert_eq!(report["shifted"]["b"].as_f64().unwrap(), 2.0);
    // E_{1,0} = E_1 of the source
    assert_eq!(report["known_levels"][0]["energy"].as_f64().unwrap(), 6.0);

    // closed and generic partner columns agree for QES k = 1
    let out = run(&[
        "partner", "--family", "qes", "--q", "1", "--a", "-3", "--xi", "1", "--k", "1",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    for row in report["table"].as_array().unwrap() {
        let g = row["veff1_generic"].as_f64().unwrap();
        let c = row["veff1_closed"].as_f64().unwrap();
        assert!((g - c).abs() <= 1e-10 * g.abs().max(1.0));
    }

    // no closed form for k >= 3
    let out = run(&[
        "partner",
        "--family",
        "qes",
        "--q",
        "1",
        "--a",
        "-7",
        "--xi",
        "1",
        "--k",
        "3",
        "--closed-form",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no closed form"), "{}", stderr(&out));
}

#[test]
fn spec_file_wins_over_flags_with_warning() {
    let dir = std::env::temp_dir().join(format!("pdem-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let spec_path = dir.join("family.json");
    std::fs::write(
        &spec_path,
        r#"{"family":"jacobi_es","q":1.0,"a":1.0,"b":1.0,"v0":0.0}"#,
    )
    .unwrap();
    let out = run(&[
        "spectrum",
        "--spec",
        spec_path.to_str().unwrap(),
        "--q",
        "2",
        "--levels",
        "1",
    ]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("--spec wins"), "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    // q = 1 from the file, not 2 from the flag: E_0 = (a+b)/2 * (a+b+2)/2 = 2
    assert_eq!(report["levels"][0]["energy"].as_f64().unwrap(), 2.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn artifacts_are_deterministic_and_written_atomically() {
    let dir = std::env::temp_dir().join(format!("pdem-det-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let args = [
        "verify",
        "--family",
        "laguerre_es",
        "--q",
        "1",
        "--a",
        "1",
        "--levels",
        "3",
        "--output",
    ];
    let out1 = bin()
        .args(args)
        .arg(&path)
        .env("PDEM_SPECTRA_SEED", "7")
        .output()
        .unwrap();
    assert!(out1.status.success());
    let first = std::fs::read(&path).unwrap();
    let out2 = bin()
        .args(args)
        .arg(&path)
        .env("PDEM_SPECTRA_SEED", "7")
        .output()
        .unwrap();
    assert!(out2.status.success());
    let second = std::fs::read(&path).unwrap();
    assert_eq!(
        first, second,
        "fixed seed must reproduce identical artifacts"
    );
    assert!(!dir.join("report.tmp").exists(), "temp file cleaned up");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn eval_rejects_levels_outside_qes_window() {
    let out = run(&[
        "eval", "--family", "qes", "--q", "1", "--a", "-1", "--xi", "2", "--k", "1", "--levels",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("level outside QES window"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn list_catalog() {
    let out = run(&["list", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("jacobi_es"));
    assert!(text.contains("laguerre_es"));
    assert!(text.contains("qes"));
}
