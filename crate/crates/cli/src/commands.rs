//! One function per subcommand. Each writes its CSV files into `out` and
//! returns the paths written plus any summary lines for stdout.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pensionlab::analytics::wealth_schedule;
use pensionlab::montecarlo::{simulate, summarize, Record, SimulationConfig};
use pensionlab::studies::{convergence_study, fund_size_study, improvement, run_scenarios};
use pensionlab::{solve, CollectiveMode, Strategy};

use crate::config::{Resolved, RunConfig};
use crate::format::{g12, row};
use crate::CliError;

pub const QUANTILES: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

#[derive(Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: Vec<String>,
}

impl Report {
    fn write(&mut self, out: &Path, name: &str, body: String) -> Result<(), CliError> {
        let path = out.join(name);
        std::fs::write(&path, body)?;
        self.files.push(path);
        Ok(())
    }
}

fn mode_size(mode: CollectiveMode) -> String {
    match mode {
        CollectiveMode::Individual => "1".into(),
        CollectiveMode::Infinite => "inf".into(),
        CollectiveMode::Finite(n) => n.to_string(),
    }
}

pub fn solve_cmd(run: &Resolved, out: &Path) -> Result<Report, CliError> {
    let table = solve(run.mode, &run.grid, &run.market, &run.prefs, &run.mortality)?;
    let mut value = String::from("t,i,z,c_star\n");
    for t in 0..run.grid.len() {
        let time = g12(run.grid.time(t));
        for row_index in 0..run.mode.rows() {
            let i = match run.mode {
                CollectiveMode::Finite(_) => row_index + 1,
                _ => 0,
            };
            let (z, c) = (table.z[t][row_index], table.cstar[t][row_index]);
            writeln!(value, "{time},{i},{},{}", g12(z), g12(c)).unwrap();
        }
    }
    let mut report = Report::default();
    report.write(out, "value.csv", value)?;
    report.write(
        out,
        "meta.csv",
        format!("a_star,xi\n{}\n", row(&[table.astar, table.xi])),
    )?;
    Ok(report)
}

pub fn distribution_cmd(run: &Resolved, out: &Path) -> Result<Report, CliError> {
    if let CollectiveMode::Finite(_) = run.mode {
        return Err(CliError::Validation(format!(
            "mode: the distribution command supports individual and infinite, not {}",
            run.mode
        )));
    }
    let table = solve(run.mode, &run.grid, &run.market, &run.prefs, &run.mortality)?;
    let schedule = wealth_schedule(&table, &run.mortality, run.budget)?;
    let mut body = String::from("t,mu_x,sigma_x,mu_gamma,sigma_gamma\n");
    for t in 0..run.grid.len() {
        let values = [
            run.grid.time(t),
            schedule.mu_x[t],
            schedule.sigma_x[t],
            schedule.mu_gamma[t],
            schedule.sigma_gamma[t],
        ];
        writeln!(body, "{}", row(&values)).unwrap();
    }
    let mut report = Report::default();
    report.write(out, "dist.csv", body)?;
    Ok(report)
}

pub fn simulate_cmd(config: &RunConfig, run: &Resolved, out: &Path) -> Result<Report, CliError> {
    let sim = config.simulation()?;
    let table = solve(run.mode, &run.grid, &run.market, &run.prefs, &run.mortality)?;
    let strategy = Strategy::from_table(&table);
    let settings = SimulationConfig {
        paths: sim.paths,
        seed: sim.seed,
        mode: run.mode,
        x0: run.budget,
        record: Record {
            survivors: true,
            wealth: true,
            consumption: true,
        },
    };
    let result = simulate(&settings, &strategy, &run.market, &run.mortality)?;
    let percentiles = summarize(&result, &QUANTILES)?;
    let schedule = match run.mode {
        CollectiveMode::Finite(_) => None,
        _ => Some(wealth_schedule(&table, &run.mortality, run.budget)?),
    };

    let mut body = String::from("t,q05,q25,q50,q75,q95,mean_log_x,sd_log_x");
    body.push_str(match schedule {
        Some(_) => ",analytic_mu_x,analytic_sigma_x,analytic_median_x\n",
        None => ",mean_survivors,expected_survivors\n",
    });
    for t in 0..run.grid.len() {
        let moments = &result.summary[t].log_wealth;
        let sd = if moments.count == 0 {
            f64::NAN
        } else {
            moments.variance().sqrt()
        };
        let mean = if moments.count == 0 { f64::NAN } else { moments.mean };
        let mut values = vec![run.grid.time(t)];
        values.extend(&percentiles.wealth[t]);
        values.extend([mean, sd]);
        match &schedule {
            Some(s) => values.extend([s.mu_x[t], s.sigma_x[t], s.mu_x[t].exp()]),
            None => {
                let n = run.mode.rows() as f64;
                values.extend([result.summary[t].survivors.mean, n * run.mortality.tail_prob(t)]);
            }
        }
        writeln!(body, "{}", row(&values)).unwrap();
    }
    let mut report = Report::default();
    report.write(out, "paths_summary.csv", body)?;
    Ok(report)
}

pub fn scenarios_cmd(config: &RunConfig, run: &Resolved, out: &Path) -> Result<Report, CliError> {
    let scenarios = config.scenarios()?;
    let reports = run_scenarios(&scenarios, run.market.sigma, &run.prefs, &run.mortality, run.budget)?;
    let mut body = String::from("scenario,mu,r,n,outperformance\n");
    for r in &reports {
        writeln!(
            body,
            "{},{},{},{},{}",
            r.id,
            g12(r.mu),
            g12(r.r),
            mode_size(r.mode),
            g12(r.outperformance)
        )
        .unwrap();
    }
    let mut pairs = String::from("scenario,baseline,improvement\n");
    for a in &reports {
        for b in reports.iter().filter(|b| b.id != a.id) {
            let value = improvement(a.outperformance, b.outperformance)?;
            writeln!(pairs, "{},{},{}", a.id, b.id, g12(value)).unwrap();
        }
    }
    let mut report = Report::default();
    report.write(out, "scenarios.csv", body)?;
    report.write(out, "improvements.csv", pairs)?;

    if let Some(sizes) = config.fund_sizes()? {
        let study = fund_size_study(&sizes, &run.grid, &run.market, &run.prefs, &run.mortality, run.budget)?;
        let mut body = String::from("n,outperformance\n");
        for (n, value) in &study.entries {
            writeln!(body, "{n},{}", g12(*value)).unwrap();
        }
        writeln!(body, "inf,{}", g12(study.asymptote)).unwrap();
        report.write(out, "fund_size.csv", body)?;
        report.summary.push(match study.threshold_n {
            Some(n) => format!("fund size reaching 90% of the infinite-fund outperformance: {n}"),
            None => "no listed fund size reaches 90% of the infinite-fund outperformance".into(),
        });
        if !study.non_monotone_at.is_empty() {
            report
                .summary
                .push(format!("outperformance fell at n = {:?}", study.non_monotone_at));
        }
    }
    Ok(report)
}

pub fn converge_cmd(config: &RunConfig, run: &Resolved, out: &Path) -> Result<Report, CliError> {
    let sizes = config.convergence_sizes()?;
    let study = convergence_study(&sizes, &run.grid, &run.market, &run.prefs, &run.mortality)?;
    let mut body = String::from("n,z_n,abs_diff,bound\n");
    for e in &study.entries {
        writeln!(body, "{},{}", e.n, row(&[e.z_n, e.abs_diff, e.bound])).unwrap();
    }
    let mut report = Report::default();
    report.write(out, "convergence.csv", body)?;
    report.summary.push(format!(
        "fit: abs_diff = {} * n^{}; C = {} from n = {}; strictly decreasing: {}; bound holds: {}",
        g12(study.prefactor),
        g12(study.exponent),
        g12(study.constant),
        study.calibration_n,
        study.is_strictly_decreasing(),
        study.bound_holds()
    ));
    Ok(report)
}
