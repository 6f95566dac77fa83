use std::path::Path;
use std::process::Command;

fn lab(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_hydrogen-lab"))
        .args(args)
        .arg("--output-dir")
        .arg(dir)
        .output()
        .expect("run hydrogen-lab");
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap_or(-1), text)
}

#[test]
fn converge_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = lab(
        dir.path(),
        &[
            "converge",
            "--frame",
            "e1+ie2",
            "--E",
            "-0.5",
            "--N",
            "8,16,32",
            "--symbol",
            "radial-bump",
        ],
    );
    assert_eq!(code, 0, "{text}");
    let csv = std::fs::read_to_string(dir.path().join("converge.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "N,value,predicted,error,error_estimate");
    assert_eq!(lines.len(), 4);
    assert!(!csv.contains('\r'));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("converge.json")).unwrap()).unwrap();
    for key in ["config", "results", "invariant_failures", "versions"] {
        assert!(json.get(key).is_some(), "{key}");
    }
}

#[test]
fn identical_config_gives_identical_bytes() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = a.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"frame": [[1,0,0,0],[0,0.6,0,0.8]], "E": -0.5, "N_list": [2, 4],
            "symbol": {"kind": "position-ball"}, "method": "monte_carlo",
            "tolerances": {"mc_samples": 512}, "seed": 42}"#,
    )
    .unwrap();
    for d in [&a, &b] {
        let (code, text) = lab(d.path(), &["matelem", "--config", cfg.to_str().unwrap()]);
        assert_eq!(code, 0, "{text}");
    }
    let read = |d: &tempfile::TempDir| std::fs::read(d.path().join("matelem.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn hessian_table() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = lab(dir.path(), &["hessian", "--theta0", "0.785", "--beta-samples", "20"]);
    assert_eq!(code, 0, "{text}");
    let csv = std::fs::read_to_string(dir.path().join("hessian.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
    assert!(csv.starts_with("beta,closed,numeric,rel_error\n"));
}

#[test]
fn orbit_and_state() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = lab(dir.path(), &["orbit", "--frame", "theta0:0.5", "--samples", "64"]);
    assert_eq!(code, 0, "{text}");
    assert_eq!(
        std::fs::read_to_string(dir.path().join("orbit.csv"))
            .unwrap()
            .lines()
            .count(),
        65
    );
    let (code, text) = lab(dir.path(), &["state", "--N", "2,4", "--grid"]);
    assert_eq!(code, 0, "{text}");
    assert!(dir.path().join("state_N4.grid").exists());
}

#[test]
fn exit_codes_follow_the_failure_class() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(lab(dir.path(), &["converge", "--config", bad.to_str().unwrap()]).0, 2);
    assert_eq!(
        lab(dir.path(), &["converge", "--symbol", "no-such-symbol", "--N", "8"]).0,
        2
    );
    assert_eq!(lab(dir.path(), &["frobnicate"]).0, 2);
    // β = e^{iθ}α generates the same geodesic
    let same = lab(
        dir.path(),
        &[
            "cross",
            "--frame",
            "e1+ie2",
            "--beta-frame",
            "-1,0,0,0;0,-1,0,0",
            "--N",
            "8",
        ],
    );
    assert_eq!(same.0, 3, "{}", same.1);
    assert_eq!(lab(dir.path(), &["converge", "--N", "8,128"]).0, 2);
    let cfg = dir.path().join("tight.json");
    std::fs::write(
        &cfg,
        r#"{"N_list": [2], "symbol": {"kind": "position-ball"}, "method": "monte_carlo",
            "tolerances": {"mc_samples": 256, "monte_carlo": 1e-12}}"#,
    )
    .unwrap();
    assert_eq!(lab(dir.path(), &["matelem", "--config", cfg.to_str().unwrap()]).0, 4);
}

#[test]
fn invariants_pass() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = lab(dir.path(), &["invariants"]);
    assert_eq!(code, 0, "{text}");
    assert!(!text.contains("FAIL"));
}
