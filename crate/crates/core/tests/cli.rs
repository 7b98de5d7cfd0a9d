use std::fs;
use std::process::Command;

use proxcg::harness::sweep::SWEEP_HEADER;
use proxcg::solver::TRACE_HEADER;

fn proxcg() -> Command {
    Command::new(env!("CARGO_BIN_EXE_proxcg"))
}

#[test]
fn gen_then_solve_writes_a_trace() {
    let dir = tempfile::tempdir().unwrap();
    let inst = dir.path().join("i.pcg");
    let trace = dir.path().join("t.csv");
    let st = proxcg()
        .args(["gen", "--m", "8", "--n", "24", "--k", "2", "--seed", "3", "--out"])
        .arg(&inst)
        .status()
        .unwrap();
    assert!(st.success());
    let st = proxcg()
        .args(["solve", "--beta0", "20", "--max-iters", "200", "--record-every", "10", "--instance"])
        .arg(&inst)
        .arg("--out")
        .arg(&trace)
        .status()
        .unwrap();
    assert!(st.success());
    let text = fs::read_to_string(&trace).unwrap();
    assert!(text.lines().any(|l| l == TRACE_HEADER));
    assert!(text.lines().any(|l| l == "# beta0=20"));
    assert!(!text.contains('\r'));
}

#[test]
fn solve_accepts_inline_instances() {
    let out = proxcg()
        .args([
            "solve",
            "--inline",
            r#"{"a": [[1.0, 0.5, 0.0], [0.0, 1.0, 1.0]], "b": [1.0, 0.4], "sigma": 0.1, "p": 2.0}"#,
            "--max-iters",
            "50",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().filter(|l| !l.starts_with('#')).count() > 2);
}

#[test]
fn sweep_with_empty_grid_emits_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    fs::write(&plan, r#"{"beta0_grid": []}"#).unwrap();
    let out = proxcg().args(["sweep", "--plan"]).arg(&plan).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data, vec![SWEEP_HEADER]);
}

#[test]
fn small_sweeps_are_reproducible_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    fs::write(&plan, r#"{"sizes": [[6, 20, 2]], "seeds": [1, 2], "beta0_grid": [1, 20], "max_iters": 200}"#).unwrap();
    let go = || {
        let out = proxcg().args(["sweep", "--no-timing", "--plan"]).arg(&plan).output().unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(go(), go());
}

#[test]
fn bounds_prints_constants_and_rates() {
    let out = proxcg()
        .args(["bounds", "--beta0", "2", "--d-f", "1", "--lambda-bar", "0.5", "--t", "2,100"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# omega1=")));
    assert!(text.lines().any(|l| l == "t,tau,G,objective_bound"));
    assert_eq!(text.lines().filter(|l| l.starts_with("2,") || l.starts_with("100,")).count(), 2);
}

#[test]
fn verify_reports_and_sets_exit_status() {
    let out = proxcg().args(["verify", "--criterion", "A3"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("A3 PASS"));
    let out = proxcg().args(["verify", "--criterion", "A0"]).output().unwrap();
    assert!(!out.status.success());
}
