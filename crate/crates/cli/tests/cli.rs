use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pensionlab::analytics::wealth_schedule;
use pensionlab::{gompertz_makeham, solve, CollectiveMode, MarketParams, Preferences, TimeGrid};
use serde_json::{json, Value};

fn retirement(mode: &str) -> Value {
    json!({
        "market": {"mu": 0.082, "r": 0.047, "sigma": 0.15, "r_cpi": 0.02},
        "preferences": {"alpha": -1, "rho": -1, "b": 0},
        "grid": {"t0": 65, "dt": 1, "T": 121},
        "mortality": {"gompertz": {"a": 0.0002, "b": 9e-6, "c": 0.1}},
        "mode": mode,
        "budget": 100,
        "simulation": {"paths": 300, "seed": 5}
    })
}

fn write_config(dir: &Path, name: &str, config: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path
}

fn pensionlab(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pensionlab"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn two_period_rows() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("q.csv"), "age,qx\n0,0\n1,1\n").unwrap();
    let config = json!({
        "market": {"mu": 0, "r": 0, "sigma": 0.2},
        "preferences": {"alpha": -1, "rho": -1, "b": 0},
        "grid": {"t0": 0, "dt": 1, "T": 2},
        "mortality": {"csv": "q.csv"},
        "mode": "individual",
        "budget": 1
    });
    let path = write_config(dir.path(), "run.json", &config);
    let out = dir.path().join("out");
    let result = pensionlab(&["solve"], &path, &out);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    assert_eq!(read(&out.join("value.csv")), "t,i,z,c_star\n0,0,0.25,0.5\n1,0,1,1\n");
    assert_eq!(read(&out.join("meta.csv")), "a_star,xi\n0,0\n");
}

#[test]
fn single_member_fund_matches_individual_output() {
    let dir = tempfile::tempdir().unwrap();
    let columns = |mode: &str| {
        let path = write_config(dir.path(), &format!("{mode}.json"), &retirement(mode));
        let out = dir.path().join(mode.replace(':', "_"));
        assert!(pensionlab(&["solve"], &path, &out).status.success());
        read(&out.join("value.csv"))
            .lines()
            .map(|line| {
                let f: Vec<&str> = line.split(',').collect();
                format!("{},{},{}", f[0], f[2], f[3])
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(columns("finite:1"), columns("individual"));
}

#[test]
fn distribution_round_trips_at_printed_precision() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "run.json", &retirement("infinite"));
    let out = dir.path().join("out");
    assert!(pensionlab(&["distribution"], &path, &out).status.success());

    let grid = TimeGrid::new(65.0, 1.0, 121.0).unwrap();
    let mortality = gompertz_makeham(2e-4, 9e-6, 0.1, &grid).unwrap();
    let market = MarketParams::new(0.082 - 0.02, 0.047 - 0.02, 0.15).unwrap();
    let prefs = Preferences::new(-1.0, -1.0, 0.0).unwrap();
    let table = solve(CollectiveMode::Infinite, &grid, &market, &prefs, &mortality).unwrap();
    let schedule = wealth_schedule(&table, &mortality, 100.0).unwrap();

    let text = read(&out.join("dist.csv"));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,mu_x,sigma_x,mu_gamma,sigma_gamma"));
    for (t, line) in lines.enumerate() {
        let got: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        let want = [
            grid.time(t),
            schedule.mu_x[t],
            schedule.sigma_x[t],
            schedule.mu_gamma[t],
            schedule.sigma_gamma[t],
        ];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() <= 5e-12 * w.abs(), "t {t}: {g} vs {w}");
        }
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");

    let mut bad = retirement("infinite");
    bad["market"]["sigma"] = json!(-0.1);
    let result = pensionlab(&["solve"], &write_config(dir.path(), "bad.json", &bad), &out);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("market.sigma"));

    let mut typo = retirement("infinite");
    typo["budjet"] = json!(1);
    let result = pensionlab(&["solve"], &write_config(dir.path(), "typo.json", &typo), &out);
    assert_eq!(result.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&result.stderr).contains("budjet"));

    let finite = write_config(dir.path(), "finite.json", &retirement("finite:5"));
    assert_eq!(pensionlab(&["distribution"], &finite, &out).status.code(), Some(2));

    let mut diverge = retirement("infinite");
    diverge["market"] = json!({"mu": 30, "r": 25, "sigma": 0.15});
    diverge["preferences"] = json!({"alpha": 0.9, "rho": 0.9, "b": 0});
    let result = pensionlab(&["solve"], &write_config(dir.path(), "diverge.json", &diverge), &out);
    assert_eq!(result.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&result.stderr).contains("grid index"));

    let missing = dir.path().join("missing.json");
    assert_eq!(pensionlab(&["solve"], &missing, &out).status.code(), Some(2));
}

#[test]
fn printed_config_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = retirement("finite:12");
    config["scenarios"] = json!([{"id": "a", "mu": 0.05, "r": 0.02, "mode": "infinite"}]);
    config["convergence"] = json!({"n_list": [1, 4, 16]});
    let path = write_config(dir.path(), "run.json", &config);
    let result = pensionlab(&["solve", "--print-config"], &path, &dir.path().join("unused"));
    assert!(result.status.success());
    let echoed = String::from_utf8(result.stdout).unwrap();
    let again = pensionlab_cli::config::RunConfig::from_json(&echoed).unwrap();
    let original = pensionlab_cli::config::RunConfig::load(&path).unwrap();
    assert_eq!(again, original);
    assert!(!dir.path().join("unused").exists());
}

#[test]
fn simulation_is_repeatable_and_single_paths_are_their_own_quantiles() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), "run.json", &retirement("finite:8"));
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    assert!(pensionlab(&["simulate"], &path, &first).status.success());
    assert!(pensionlab(&["simulate"], &path, &second).status.success());
    assert_eq!(
        read(&first.join("paths_summary.csv")),
        read(&second.join("paths_summary.csv"))
    );

    let mut one = retirement("infinite");
    one["simulation"] = json!({"paths": 1, "seed": 9});
    let path = write_config(dir.path(), "one.json", &one);
    let out = dir.path().join("one");
    assert!(pensionlab(&["simulate"], &path, &out).status.success());
    for line in read(&out.join("paths_summary.csv")).lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert!(f[1..6].iter().all(|q| *q == f[1]), "{line}");
    }
}

#[test]
fn scenario_and_convergence_tables() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = retirement("infinite");
    config["convergence"] = json!({"n_list": [1, 2, 4, 8, 16]});
    config["fund_size"] = json!({"n_list": [1, 10, 40]});
    let path = write_config(dir.path(), "run.json", &config);
    let out = dir.path().join("out");
    assert!(pensionlab(&["scenarios"], &path, &out).status.success());
    let scenarios = read(&out.join("scenarios.csv"));
    let rows: Vec<&str> = scenarios.lines().collect();
    assert_eq!(rows[0], "scenario,mu,r,n,outperformance");
    assert_eq!(rows[4], "4,0,0,inf,0");
    assert_eq!(read(&out.join("improvements.csv")).lines().count(), 1 + 12);
    let fund = read(&out.join("fund_size.csv"));
    assert!(fund.lines().next() == Some("n,outperformance") && fund.lines().last().unwrap().starts_with("inf,"));
    // the n = 1 entry is the individual scenario
    let individual = rows[2].rsplit(',').next().unwrap();
    assert_eq!(fund.lines().nth(1).unwrap(), format!("1,{individual}"));

    let result = pensionlab(&["converge"], &path, &out);
    assert!(result.status.success());
    assert!(String::from_utf8_lossy(&result.stdout).starts_with("fit: "));
    assert_eq!(read(&out.join("convergence.csv")).lines().count(), 6);
}
