use loopgeom::io;
use loopgeom::manifold::Manifold;
use std::process::{Command, Output};

fn loopgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopgeom"))
        .args(args)
        .env_remove("LOOPGEOM_SEED")
        .output()
        .expect("binary runs")
}

#[test]
fn verify_writes_report_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = loopgeom(&["verify", "--suite", "transport", "--manifold", "sphere:1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let recs = io::read_report_json(std::fs::File::open(&out).unwrap()).unwrap();
    assert!(recs.iter().any(|r| r.check_id == "transport.holonomy_latitude.pi_3"));
    assert!(recs.iter().all(|r| r.suite == "transport" && r.passed));
}

#[test]
fn csv_report_has_header() {
    let o = loopgeom(&["verify", "--suite", "curve", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("suite,check_id,paper_anchor,value,tolerance,passed,runtime_ms"));
}

#[test]
fn impossible_tolerance_fails_with_one() {
    let o = loopgeom(&["verify", "--suite", "curve", "--tol", "curve.based_fields=-1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn configuration_errors_exit_two() {
    for args in [
        &["verify", "--n", "63"][..],
        &["verify", "--manifold", "klein:2"],
        &["verify", "--tol", "no.such.check=1"],
        &["verify", "--suite", "nonsense"],
        &["holonomy", "--k-max", "400", "--n", "64"],
    ] {
        assert_eq!(loopgeom(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn reeb_half_period_returns_the_loop() {
    let dir = tempfile::tempdir().unwrap();
    let start = dir.path().join("start.csv");
    let back = dir.path().join("back.csv");
    let m = Manifold::euclidean(2);
    let o = loopgeom(&["reeb", "--s", "0", "--n", "128", "--out", start.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = loopgeom(&["reeb", "--s", "0.5", "--loop", start.to_str().unwrap(), "--out", back.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let a = io::load_loop(&m, &start).unwrap();
    let b = io::load_loop(&m, &back).unwrap();
    assert!(a.sup_distance(&b) < 1e-6);
}

#[test]
fn seed_comes_from_environment() {
    let run = |seed: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_loopgeom"));
        c.args(["forms", "--pairs", "1"]).args(extra);
        match seed {
            Some(s) => c.env("LOOPGEOM_SEED", s),
            None => c.env_remove("LOOPGEOM_SEED"),
        };
        c.output().unwrap().stdout
    };
    assert_eq!(run(Some("11"), &[]), run(None, &["--seed", "11"]));
    assert_ne!(run(Some("11"), &[]), run(None, &[]));
    assert_eq!(run(Some("3"), &["--seed", "11"]), run(None, &["--seed", "11"]));
}

#[test]
fn subcommands_emit_json() {
    for (cmd, key) in [
        ("holonomy", "rotation_angle"),
        ("kernel-dim", "omega_kernel_dim"),
        ("acs", "fields"),
        ("contact", "quasi_contact_kernel"),
    ] {
        let o = loopgeom(&[cmd, "--n", "128"]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert!(v.get(key).is_some(), "{cmd}");
    }
}
