mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::PAPER71;
use tempfile::TempDir;

fn clusterhop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_clusterhop"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, sub: &str, scenario: &Path, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec![sub, "--scenario", scenario.to_str().unwrap(), "--out", out];
    args.extend_from_slice(extra);
    clusterhop(&args)
}

fn write_scenario(dir: &TempDir, text: &str) -> std::path::PathBuf {
    let path = dir.path().join("scenario.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn stderr_line(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr)
        .lines()
        .last()
        .unwrap_or_default()
        .to_string()
}

#[test]
fn plan_uses_every_slot_and_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    let scenario = write_scenario(&tmp, PAPER71);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(run_in(&a, "plan", &scenario, &[]).status.success());
    assert!(run_in(&b, "plan", &scenario, &[]).status.success());

    let text = std::fs::read_to_string(a.join("plan.json")).unwrap();
    assert_eq!(text, std::fs::read_to_string(b.join("plan.json")).unwrap());
    let plan: serde_json::Value = serde_json::from_str(&text).unwrap();
    let slots: u64 = plan["psi"]
        .as_object()
        .unwrap()
        .values()
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert_eq!(slots, 256);
    assert_eq!(plan["schedule"].as_array().unwrap().len(), 256);
    assert_eq!(plan["status"], "optimal");
    assert!(a.join("knobs.json").exists());
}

#[test]
fn compare_writes_reports_for_all_schemes() {
    let tmp = TempDir::new().unwrap();
    let scenario = write_scenario(&tmp, PAPER71);
    let out = tmp.path().join("cmp");
    let o = run_in(&out, "compare", &scenario, &["--solver", "greedy"]);
    assert!(o.status.success(), "{}", stderr_line(&o));
    for scheme in ["ch", "4c_fr", "1c_ffr_bh"] {
        let beams =
            std::fs::read_to_string(out.join(format!("report_{scheme}_beams.csv"))).unwrap();
        assert!(beams.starts_with("beam_id,demand_bps,offered_bps,scheme\n"));
        assert_eq!(beams.lines().count(), 72);
        let clusters =
            std::fs::read_to_string(out.join(format!("report_{scheme}_clusters.csv"))).unwrap();
        assert_eq!(clusters.lines().count(), 13);
    }
    assert!(out.join("summary.json").exists());
}

#[test]
fn other_subcommands_emit_their_files() {
    let tmp = TempDir::new().unwrap();
    let scenario = write_scenario(&tmp, PAPER71);
    for (sub, file) in [
        ("capacity", "capacity_clusters.csv"),
        ("snapshots", "snapshots.csv"),
        ("leakage", "leakage.csv"),
    ] {
        let out = tmp.path().join(sub);
        let o = run_in(&out, sub, &scenario, &[]);
        assert!(o.status.success(), "{sub}: {}", stderr_line(&o));
        assert!(out.join(file).exists(), "{sub}");
    }
    let o = clusterhop(&["validate", "--scenario", scenario.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("beams=71"));
}

fn expect_failure(o: &Output, code: i32, class: &str) {
    assert_eq!(o.status.code(), Some(code), "{}", stderr_line(o));
    let line = stderr_line(o);
    assert!(
        line.starts_with(&format!("error class={class} message=")),
        "{line}"
    );
}

#[test]
fn error_classes_map_to_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");

    let missing = tmp.path().join("missing.json");
    expect_failure(&run_in(&out, "plan", &missing, &[]), 5, "io");

    let broken = write_scenario(&tmp, "{ \"beams\": [");
    expect_failure(&run_in(&out, "plan", &broken, &[]), 2, "parse");

    let zero_np = write_scenario(&tmp, &PAPER71.replace("\"N_P\": 3", "\"N_P\": 0"));
    expect_failure(&run_in(&out, "plan", &zero_np, &[]), 2, "validate");

    let too_many = write_scenario(&tmp, &PAPER71.replace("\"N_P\": 3", "\"N_P\": 13"));
    expect_failure(&run_in(&out, "plan", &too_many, &[]), 3, "infeasible");

    let scenario = write_scenario(&tmp, PAPER71);
    expect_failure(
        &run_in(&out, "plan", &scenario, &["--solver", "oracle"]),
        4,
        "cap-exceeded",
    );
}
