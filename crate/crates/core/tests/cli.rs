use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use feel_sc2::allocator::{solve_allocation, AllocationSolution, Regime};
use feel_sc2::cli::ThresholdReport;
use feel_sc2::config::ScenarioConfig;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_feel-sc2"))
}

fn run(args: &[&str]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn write_config(dir: &Path, name: &str, cfg: &ScenarioConfig) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, cfg.to_json().unwrap()).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn allocate_schedule_simulate_pipeline() {
    let dir = TempDir::new().unwrap();
    let alloc = dir.path().join("alloc.json");
    let sched = dir.path().join("sched.csv");
    let sim = dir.path().join("sim.csv");
    assert_eq!(run(&["allocate", "--out", s(&alloc)]).0, 0);
    assert_eq!(run(&["schedule", "--alloc", s(&alloc), "--out", s(&sched)]).0, 0);
    assert_eq!(run(&["simulate", "--scheme", "equal", "--seed", "3", "--out", s(&sim)]).0, 0);

    let sol: AllocationSolution = serde_json::from_str(&fs::read_to_string(&alloc).unwrap()).unwrap();
    let csv = fs::read_to_string(&sched).unwrap();
    let total: u64 = csv.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    assert!(total <= sol.b_sum);
    assert!(dir.path().join("sim.json").exists());
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let mut bytes = Vec::new();
    for i in 0..2 {
        let a = dir.path().join(format!("a{i}.json"));
        let m = dir.path().join(format!("m{i}.csv"));
        let q = dir.path().join(format!("q{i}.csv"));
        assert_eq!(run(&["allocate", "--out", s(&a)]).0, 0);
        assert_eq!(run(&["simulate", "--scheme", "maxpower", "--out", s(&m)]).0, 0);
        assert_eq!(run(&["sense-quality", "--powers-dbm", "0,20", "--seed", "4", "--out", s(&q)]).0, 0);
        bytes.push([a, m, q].map(|p| fs::read(p).unwrap()));
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("o.json");
    assert_eq!(run(&["bogus"]).0, 1);
    assert_eq!(run(&["allocate"]).0, 1);
    assert_eq!(run(&["allocate", "--config", "/nonexistent.json", "--out", s(&out)]).0, 1);

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"system": {"e_max": "12 parsecs"}}"#).unwrap();
    assert_eq!(run(&["allocate", "--config", s(&bad), "--out", s(&out)]).0, 1);

    let mut cfg = ScenarioConfig::default();
    cfg.system.t_max = 1.0;
    let tight = write_config(dir.path(), "tight.json", &cfg);
    assert_eq!(run(&["allocate", "--config", s(&tight), "--out", s(&out)]).0, 2);
    assert!(!out.exists());

    let mut cfg = ScenarioConfig::default();
    cfg.schedule.b0_frac = 1.5;
    let frac = write_config(dir.path(), "frac.json", &cfg);
    assert_eq!(run(&["allocate", "--config", s(&frac), "--out", s(&out)]).0, 0);
    let csv = dir.path().join("s.csv");
    assert_eq!(run(&["schedule", "--alloc", s(&out), "--config", s(&frac), "--out", s(&csv)]).0, 2);
    assert!(!csv.exists());
}

#[test]
fn huge_energy_budget_is_latency_limited() {
    let dir = TempDir::new().unwrap();
    let mut cfg = ScenarioConfig::default();
    cfg.system.e_max = 1e9;
    let path = write_config(dir.path(), "c.json", &cfg);
    let out = dir.path().join("a.json");
    assert_eq!(run(&["allocate", "--config", s(&path), "--out", s(&out)]).0, 0);
    let sol: AllocationSolution = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(sol.regime, Regime::LatencyLimited);
}

#[test]
fn single_step_sweep_matches_allocate() {
    let dir = TempDir::new().unwrap();
    let cfg = ScenarioConfig::default();
    let path = write_config(dir.path(), "c.json", &cfg);
    let alloc = dir.path().join("a.json");
    let sweep = dir.path().join("s.csv");
    let e = cfg.system.e_max.to_string();
    assert_eq!(run(&["allocate", "--config", s(&path), "--out", s(&alloc)]).0, 0);
    let args = ["sweep", "--config", s(&path), "--param", "emax", "--from", &e, "--to", &e, "--steps", "1"];
    assert_eq!(run(&[&args[..], &["--out", s(&sweep)]].concat()).0, 0);
    let sol: AllocationSolution = serde_json::from_str(&fs::read_to_string(&alloc).unwrap()).unwrap();
    let csv = fs::read_to_string(&sweep).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1].parse::<u64>().unwrap(), sol.b_sum);
    assert_eq!(row[2], sol.regime.to_string());
}

#[test]
fn clutter_free_scene_has_perfect_quality() {
    let dir = TempDir::new().unwrap();
    let mut cfg = ScenarioConfig::default();
    cfg.sensing.clutter_psd = 0.0;
    cfg.sensing.scene = cfg.sensing.scene.first_order_only();
    cfg.sensing.trials = 2;
    let path = write_config(dir.path(), "c.json", &cfg);
    let out = dir.path().join("q.csv");
    assert_eq!(run(&["sense-quality", "--config", s(&path), "--powers-dbm", "-10,10", "--out", s(&out)]).0, 0);
    let report: ThresholdReport = serde_json::from_str(&fs::read_to_string(dir.path().join("q.json")).unwrap()).unwrap();
    assert!((report.saturation_ssim - 1.0).abs() < 1e-12);
    assert_eq!(report.threshold_dbm, -10.0);
}

#[test]
fn config_round_trips_through_json() {
    let mut cfg = ScenarioConfig::default();
    cfg.system.e_max = 1234.5;
    cfg.devices.p_c_max = 0.05;
    cfg.sensing.clutter_psd = 2.5e-9;
    let back = ScenarioConfig::from_json(&cfg.to_json().unwrap()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn equivalent_units_give_identical_solutions() {
    let dbm = r#"{"devices": {"p_c_max": "20 dBm", "p_s_min": "20 dBm"}, "system": {"e_max": "1.5 kJ"}}"#;
    let watts = r#"{"devices": {"p_c_max": "0.1 W", "p_s_min": "100 mW"}, "system": {"e_max": "1500 J"}}"#;
    let solve = |text: &str| {
        let cfg = ScenarioConfig::from_json(text).unwrap();
        solve_allocation(&cfg.system_params(), &cfg.device_profiles().unwrap()).unwrap()
    };
    assert_eq!(solve(dbm), solve(watts));
}
