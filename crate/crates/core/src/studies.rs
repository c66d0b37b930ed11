//! Comparisons against annuities, fund-size and convergence studies.
//!
//! The annuity equivalent of a strategy is the price of the level lifetime
//! income that a member values exactly as much as the strategy. The annuity
//! pays on the consumption grid from `t0`, including the period of death, and
//! is priced at the risk-free rate without loading.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mortality::MortalityTable;
use crate::solver::{solve, CollectiveMode, ValueTable};
use crate::types::{MarketParams, Preferences, TimeGrid};

/// Utility at `t0` of consuming `gamma` at every date while alive.
pub fn annuity_utility(gamma: f64, mortality: &MortalityTable, prefs: &Preferences) -> Result<f64> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::domain(format!("annuity income must be positive, got {gamma}")));
    }
    let grid = mortality.grid();
    let (alpha, rho) = (prefs.alpha, prefs.rho);
    let beta = prefs.beta(grid.dt());
    let mut utility = gamma;
    for t in (0..grid.last_index()).rev() {
        let s = mortality.survival_prob(t);
        utility = (gamma.powf(rho) + beta * s.powf(rho / alpha) * utility.powf(rho)).powf(1.0 / rho);
        if !utility.is_finite() || !(utility > 0.0) {
            return Err(Error::Divergence {
                index: t,
                time: grid.time(t),
                survivors: 0,
            });
        }
    }
    Ok(utility)
}

/// Price of the annuity a member values as much as investing `budget` in the fund.
pub fn annuity_equivalent(table: &ValueTable, mortality: &MortalityTable, budget: f64) -> Result<f64> {
    if !(budget > 0.0) || !budget.is_finite() {
        return Err(Error::domain(format!("budget must be positive, got {budget}")));
    }
    let income = budget * table.initial_value() / annuity_utility(1.0, mortality, &table.prefs)?;
    Ok(income * mortality.annuity_factor(table.market.r))
}

/// `annuity equivalent / budget - 1`.
pub fn annuity_outperformance(table: &ValueTable, mortality: &MortalityTable, budget: f64) -> Result<f64> {
    Ok(annuity_equivalent(table, mortality, budget)? / budget - 1.0)
}

/// Relative gain of outperformance `a` over outperformance `b`.
pub fn improvement(a: f64, b: f64) -> Result<f64> {
    if !(b > -1.0) {
        return Err(Error::domain(format!("baseline outperformance {b} must exceed -1")));
    }
    Ok((1.0 + a) / (1.0 + b) - 1.0)
}

/// A fund or market variant to compare against the base parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub id: String,
    pub mu: f64,
    pub r: f64,
    pub mode: CollectiveMode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub id: String,
    pub mu: f64,
    pub r: f64,
    pub mode: CollectiveMode,
    pub annuity_equivalent: f64,
    pub outperformance: f64,
    /// Improvement over the first scenario in the list.
    pub improvement_vs_baseline: f64,
}

/// Annuity outperformance of each scenario; volatility, preferences and
/// mortality are shared.
pub fn run_scenarios(
    scenarios: &[Scenario],
    sigma: f64,
    prefs: &Preferences,
    mortality: &MortalityTable,
    budget: f64,
) -> Result<Vec<ScenarioReport>> {
    if scenarios.is_empty() {
        return Err(Error::config("at least one scenario is required"));
    }
    let grid = *mortality.grid();
    let mut reports: Vec<ScenarioReport> = Vec::with_capacity(scenarios.len());
    for scenario in scenarios {
        let market = MarketParams::new(scenario.mu, scenario.r, sigma)?;
        let table = solve(scenario.mode, &grid, &market, prefs, mortality)?;
        let equivalent = annuity_equivalent(&table, mortality, budget)?;
        let outperformance = equivalent / budget - 1.0;
        let baseline = reports.first().map_or(outperformance, |r| r.outperformance);
        reports.push(ScenarioReport {
            id: scenario.id.clone(),
            mu: scenario.mu,
            r: scenario.r,
            mode: scenario.mode,
            annuity_equivalent: equivalent,
            outperformance,
            improvement_vs_baseline: improvement(outperformance, baseline)?,
        });
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FundSizeReport {
    /// `(n, outperformance)` in the order of the requested sizes.
    pub entries: Vec<(usize, f64)>,
    /// Outperformance of the infinite fund.
    pub asymptote: f64,
    /// Smallest listed size reaching 90% of the asymptotic outperformance.
    pub threshold_n: Option<usize>,
    /// Sizes at which outperformance fell compared to the previous size.
    pub non_monotone_at: Vec<usize>,
}

/// Annuity outperformance as a function of fund size.
///
/// One finite solve at the largest size covers every smaller fund, since row
/// `i` of a finite table is the value for a fund of `i` members.
pub fn fund_size_study(
    n_list: &[usize],
    grid: &TimeGrid,
    market: &MarketParams,
    prefs: &Preferences,
    mortality: &MortalityTable,
    budget: f64,
) -> Result<FundSizeReport> {
    check_sizes(n_list)?;
    let largest = *n_list.last().expect("non-empty");
    let finite = solve(CollectiveMode::Finite(largest), grid, market, prefs, mortality)?;
    let infinite = solve(CollectiveMode::Infinite, grid, market, prefs, mortality)?;
    let asymptote = annuity_outperformance(&infinite, mortality, budget)?;

    let annuity = annuity_utility(1.0, mortality, prefs)?;
    let factor = mortality.annuity_factor(market.r);
    let entries: Vec<(usize, f64)> = n_list
        .iter()
        .map(|&n| (n, finite.initial_value_for(n) / annuity * factor - 1.0))
        .collect();
    let threshold_n = entries
        .iter()
        .find(|(_, value)| *value >= 0.9 * asymptote)
        .map(|(n, _)| *n);
    let non_monotone_at = entries.windows(2).filter(|w| w[1].1 < w[0].1).map(|w| w[1].0).collect();
    Ok(FundSizeReport {
        entries,
        asymptote,
        threshold_n,
        non_monotone_at,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceEntry {
    pub n: usize,
    pub z_n: f64,
    pub abs_diff: f64,
    /// `constant * n^(-1/2)`.
    pub bound: f64,
}

/// Distance between finite-fund and infinite-fund values at `t0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub entries: Vec<ConvergenceEntry>,
    pub z_infinite: f64,
    /// Fund size used to calibrate `constant`: the smallest listed `n >= 4`.
    pub calibration_n: usize,
    /// `|z_n - z_inf| sqrt(n)` at the calibration size.
    pub constant: f64,
    /// Least-squares fit `|z_n - z_inf| ~ prefactor * n^exponent`.
    pub prefactor: f64,
    pub exponent: f64,
}

impl ConvergenceReport {
    pub fn is_strictly_decreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].abs_diff < w[0].abs_diff)
    }

    /// Whether `|z_n - z_inf| <= C n^(-1/2)` for every listed `n` from the calibration size on.
    pub fn bound_holds(&self) -> bool {
        self.entries
            .iter()
            .filter(|e| e.n >= self.calibration_n)
            .all(|e| e.abs_diff <= e.bound * (1.0 + 1e-12))
    }
}

pub fn convergence_study(
    n_list: &[usize],
    grid: &TimeGrid,
    market: &MarketParams,
    prefs: &Preferences,
    mortality: &MortalityTable,
) -> Result<ConvergenceReport> {
    check_sizes(n_list)?;
    let largest = *n_list.last().expect("non-empty");
    let calibration_n = n_list
        .iter()
        .copied()
        .find(|n| *n >= 4)
        .ok_or_else(|| Error::config("convergence study needs a fund size of at least 4"))?;
    let finite = solve(CollectiveMode::Finite(largest), grid, market, prefs, mortality)?;
    let z_infinite = solve(CollectiveMode::Infinite, grid, market, prefs, mortality)?.initial_value();

    let diffs: Vec<(usize, f64, f64)> = n_list
        .iter()
        .map(|&n| {
            let z = finite.initial_value_for(n);
            (n, z, (z - z_infinite).abs())
        })
        .collect();
    let constant = diffs
        .iter()
        .find(|d| d.0 == calibration_n)
        .map(|d| d.2 * (calibration_n as f64).sqrt())
        .expect("calibration size is listed");
    let entries = diffs
        .iter()
        .map(|&(n, z_n, abs_diff)| ConvergenceEntry {
            n,
            z_n,
            abs_diff,
            bound: constant / (n as f64).sqrt(),
        })
        .collect();

    let points: Vec<(f64, f64)> = diffs
        .iter()
        .filter(|d| d.2 > 0.0)
        .map(|d| ((d.0 as f64).ln(), d.2.ln()))
        .collect();
    let (intercept, exponent) = fit_line(&points)?;
    Ok(ConvergenceReport {
        entries,
        z_infinite,
        calibration_n,
        constant,
        prefactor: intercept.exp(),
        exponent,
    })
}

fn check_sizes(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::config("fund size list is empty"));
    }
    if n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::config("fund sizes must be strictly increasing"));
    }
    if n_list[0] == 0 {
        return Err(Error::config("fund sizes must be >= 1"));
    }
    Ok(())
}

/// Ordinary least squares `y = intercept + slope x`.
fn fit_line(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::config("at least two distinct fund sizes are needed for a fit"));
    }
    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    Ok((mean_y - slope * mean_x, slope))
}
