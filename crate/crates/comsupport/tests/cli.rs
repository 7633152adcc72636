use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use comsupport::config::ScenarioConfig;
use comsupport::{load_scenario, sweep, trace};
use comsupport_core::centroidal::ComPolicy;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_comsupport"))
}

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn comsupport")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A short push so the binary runs quickly.
fn short_push(dir: &Path, fixed: bool) -> PathBuf {
    let text = std::fs::read_to_string(configs().join("push_free.toml")).unwrap();
    let mut text = text.replace("t_end = 35.0", "t_end = 3.0").replace(
        "points = [[0.0, 0.0], [2.0, 0.0], [12.0, 60.0], [22.0, 60.0], [32.0, 0.0]]",
        "points = [[0.0, 0.0], [0.5, 0.0], [2.5, 40.0]]",
    );
    if fixed {
        text = text.replace("com_policy = \"free\"", "com_policy = \"fixed\"");
    }
    let path = dir.join(if fixed { "short_fixed.toml" } else { "short_free.toml" });
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn trace_header_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_push(dir.path(), false);
    let out = dir.path().join("trace.csv");
    let o = run(&["simulate", "--config", arg(&cfg), "--out", arg(&out), "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let golden = include_str!("golden/trace_header.csv");
    assert!(csv.starts_with(golden), "header changed:\n{}", csv.lines().take(2).collect::<Vec<_>>().join("\n"));
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 601);
    assert!(rows.iter().all(|r| r.split(',').count() == trace::COLUMNS.len()));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(comsupport::cli::summary_path(&out)).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert_eq!(summary["run_status"], "completed");
}

#[test]
fn simulate_is_a_pure_function_of_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_push(dir.path(), false);
    let a = run(&["simulate", "--config", arg(&cfg), "--format", "csv"]);
    let b = run(&["simulate", "--config", arg(&cfg), "--format", "csv"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn fixed_com_run_is_flagged_but_exits_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_push(dir.path(), true);
    let plots = dir.path().join("plots");
    let o = run(&["simulate", "--config", arg(&cfg), "--plots", arg(&plots)]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["summary"]["run_status"], "balance_infeasible");
    let last = doc["records"].as_array().unwrap().last().unwrap().clone();
    assert_eq!(last["status"], "infeasible");
    assert!(last["f_hand_des"].as_f64().unwrap() < 40.0);
    for f in ["force.svg", "com.svg", "csa.svg"] {
        let svg = std::fs::read_to_string(plots.join(f)).unwrap();
        assert!(svg.starts_with("<svg") && !svg.contains("NaN"), "{f}");
    }
}

#[test]
fn solve_reports_and_exit_codes() {
    let free = configs().join("push_free.toml");
    let o = run(&["solve", "--config", arg(&free), "--at", "15"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(doc["status"], "optimal");
    assert_eq!(doc["schema_version"], 1);
    assert!(doc["com"][0].as_f64().unwrap() > 0.1, "CoM should lean toward the wall");

    // at rest the stance is symmetric
    let o = run(&["solve", "--config", arg(&free), "--at", "0", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let value = |name: &str| -> f64 {
        text.lines().find_map(|l| l.strip_prefix(&format!("{name},"))).unwrap().parse().unwrap()
    };
    assert!((value("w_rf_fz") - value("w_lf_fz")).abs() < 1e-8);
    assert!(value("com_x").abs() < 1e-9 && value("com_y").abs() < 1e-9);

    let fixed = configs().join("push_fixed.toml");
    let o = run(&["solve", "--config", arg(&fixed), "--at", "15"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(configs().join("push_free.toml")).unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, text.replacen("mu = 0.7", "mu = -0.7", 1)).unwrap();
    let o = run(&["csa", "--config", arg(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("feet[0].mu"));

    let free = configs().join("push_free.toml");
    let o = run(&["sweep", "--config", arg(&free), "--lo", "10", "--hi", "10"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["csa", "--config", arg(&dir.path().join("missing.toml"))]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn csa_command_matches_the_library() {
    let free = configs().join("push_free.toml");
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("csa.svg");
    let o = run(&["csa", "--config", arg(&free), "--at", "0", "--svg", arg(&svg)]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    // no hand force: the hull of the eight sole corners
    let v: Vec<[f64; 2]> = serde_json::from_value(doc["vertices"].clone()).unwrap();
    let mut got = v.clone();
    got.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(got, vec![[-0.05, -0.13], [-0.05, 0.13], [0.05, -0.13], [0.05, 0.13]]);
    assert_eq!(doc["scale"], 1.0);
    assert!(std::fs::read_to_string(svg).unwrap().contains("<polygon"));

    // with the push, the same polygon as csa::build_csa
    let cfg = ScenarioConfig::load(&free).unwrap();
    let (report, _) = comsupport::cli::csa_report(&cfg, 15.0).unwrap();
    let sc = cfg.to_scenario().unwrap();
    let f = sc.hand.pose.rotation * comsupport_core::nalgebra::Vector3::new(-60.0, 0.0, 0.0);
    let lib = comsupport_core::csa::build_csa(&sc.feet, &sc.hand.pose.position, &f, sc.weight()).unwrap();
    let expected: Vec<[f64; 2]> = lib.vertices.iter().map(|p| [p.x, p.y]).collect();
    assert_eq!(report.vertices, expected);
    assert!((report.offset[0] - 60.0 * 1.1 / sc.weight()).abs() < 1e-12);
}

#[test]
fn sweep_boundary_grows_with_foot_friction() {
    let mut cfg = ScenarioConfig::load(&configs().join("push_free.toml")).unwrap();
    let mut boundaries = Vec::new();
    for mu in [0.4, 0.7] {
        for f in &mut cfg.feet {
            f.mu = mu;
        }
        let sc = load_scenario(&cfg).unwrap();
        let b = sweep::bisect(&sc, ComPolicy::Free, 0.0, 400.0).unwrap();
        boundaries.push(b.max_feasible.unwrap());
    }
    assert!(boundaries[0] < boundaries[1], "{boundaries:?}");
}

#[test]
fn sweep_over_the_cli_reports_both_policies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let free = configs().join("push_free.toml");
    let o = run(&["sweep", "--config", arg(&free), "--lo", "0", "--hi", "400", "--format", "csv", "--out", arg(&out)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    let row = |p: &str| -> f64 {
        text.lines().find_map(|l| l.strip_prefix(&format!("{p},"))).unwrap().split(',').next().unwrap().parse().unwrap()
    };
    assert!(row("fixed") < row("free"));
    assert!(text.starts_with("# schema_version=1"));
}

#[test]
fn bundled_configs_load() {
    for name in ["push_free.toml", "push_fixed.toml", "wipe.toml"] {
        let cfg = ScenarioConfig::load(&configs().join(name)).unwrap();
        let sc = load_scenario(&cfg).unwrap();
        assert!(sc.validate().is_ok(), "{name}");
    }
    // a zero-force knot in a sliding config is rejected
    let mut wipe = ScenarioConfig::load(&configs().join("wipe.toml")).unwrap();
    wipe.force_profile.points = vec![[0.0, 0.0], [1.0, 30.0]];
    assert!(wipe.to_scenario().is_err());
}
