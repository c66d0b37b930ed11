//! Backward induction for the optimal investment-consumption problem.
//!
//! Utility is positively homogeneous, so the value of wealth `x` at date `t`
//! is `x z_t` and only the per-unit values `z` need computing. Between dates
//! the fund holds the constant Merton proportion `a*`; at each date it
//! consumes the fraction `c*_t = z_t^(rho/(rho-1))` of per-survivor wealth.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mortality::{ln_binomial_pmf, MortalityTable};
use crate::types::{MarketParams, Preferences, TimeGrid};

/// Largest finite fund the solver accepts; cost grows as `n^2` per date.
pub const MAX_FUND_SIZE: usize = 10_000;

/// Fund size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CollectiveMode {
    /// A single investor, no pooling of mortality.
    Individual,
    /// The limiting infinite collective.
    Infinite,
    /// `n` identical investors sharing the wealth of those who die.
    Finite(usize),
}

impl CollectiveMode {
    /// Rows of the value table: one per possible survivor count.
    pub fn rows(&self) -> usize {
        match self {
            CollectiveMode::Finite(n) => *n,
            _ => 1,
        }
    }

    /// Pooling indicator for the modes with a scalar recursion.
    pub fn pooling(&self) -> Option<Pooling> {
        match self {
            CollectiveMode::Individual => Some(Pooling::Individual),
            CollectiveMode::Infinite => Some(Pooling::Collective),
            CollectiveMode::Finite(_) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CollectiveMode::Finite(0) => Err(Error::config("finite fund size must be >= 1")),
            CollectiveMode::Finite(n) if n > MAX_FUND_SIZE => Err(Error::config(format!(
                "finite fund size {n} exceeds the supported maximum {MAX_FUND_SIZE}"
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for CollectiveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CollectiveMode::Individual => f.write_str("individual"),
            CollectiveMode::Infinite => f.write_str("infinite"),
            CollectiveMode::Finite(n) => write!(f, "finite:{n}"),
        }
    }
}

impl FromStr for CollectiveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "individual" => Ok(CollectiveMode::Individual),
            "infinite" => Ok(CollectiveMode::Infinite),
            other => {
                let n = other
                    .strip_prefix("finite:")
                    .and_then(|n| n.parse::<usize>().ok())
                    .ok_or_else(|| {
                        Error::config(format!("mode `{other}` is not one of individual, infinite, finite:<n>"))
                    })?;
                let mode = CollectiveMode::Finite(n);
                mode.validate()?;
                Ok(mode)
            }
        }
    }
}

impl TryFrom<String> for CollectiveMode {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CollectiveMode> for String {
    fn from(mode: CollectiveMode) -> String {
        mode.to_string()
    }
}

/// Whether the wealth of the dead is shared (`C = 1`) or lost (`C = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pooling {
    Individual,
    Collective,
}

impl Pooling {
    pub fn indicator(self) -> f64 {
        match self {
            Pooling::Individual => 0.0,
            Pooling::Collective => 1.0,
        }
    }
}

/// Merton proportion `(mu - r) / ((1 - alpha) sigma^2)`.
pub fn optimal_proportion(market: &MarketParams, alpha: f64) -> f64 {
    (market.mu - market.r) / ((1.0 - alpha) * market.sigma * market.sigma)
}

/// Certainty-equivalent growth rate of the Merton portfolio.
pub fn growth_exponent(market: &MarketParams, alpha: f64) -> f64 {
    market.certainty_growth(optimal_proportion(market, alpha), alpha)
}

/// One-step multiplier `beta^(1/rho) e^(xi dt) s^(1/alpha - C)`.
///
/// Only defined for `s > 0`; the final date is handled by the terminal condition.
pub fn phi(prefs: &Preferences, market: &MarketParams, s: f64, pooling: Pooling, dt: f64) -> f64 {
    debug_assert!(s > 0.0 && s <= 1.0);
    let xi = growth_exponent(market, prefs.alpha);
    let ln_phi = prefs.beta(dt).ln() / prefs.rho + xi * dt + (1.0 / prefs.alpha - pooling.indicator()) * s.ln();
    ln_phi.exp()
}

/// Optimal consumption fraction `z^(rho/(rho-1))` for per-unit value `z`.
pub fn consumption_rate(z: f64, rho: f64) -> f64 {
    z.powf(rho / (rho - 1.0))
}

/// Optimal per-unit values and consumption rates.
///
/// `z`, `cstar` and `y` are indexed `[date][row]`; the scalar modes have a
/// single row and finite funds have row `i - 1` for `i` survivors.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub mode: CollectiveMode,
    pub grid: TimeGrid,
    pub market: MarketParams,
    pub prefs: Preferences,
    pub z: Vec<Vec<f64>>,
    pub cstar: Vec<Vec<f64>>,
    /// Transformed value `z^(rho/(1-rho))`, equal to `1 / cstar`.
    pub y: Vec<Vec<f64>>,
    pub astar: f64,
    pub xi: f64,
}

impl ValueTable {
    /// Row holding the value for `survivors` living members (ignored for the scalar modes).
    pub fn row(&self, survivors: usize) -> usize {
        match self.mode {
            CollectiveMode::Finite(_) => survivors - 1,
            _ => 0,
        }
    }

    /// `z` at `t0` for the full fund.
    pub fn initial_value(&self) -> f64 {
        *self.z[0].last().expect("non-empty row")
    }

    /// `z_{i, t0}` for a fund of `survivors` members, read from a finite table.
    pub fn initial_value_for(&self, survivors: usize) -> f64 {
        self.z[0][self.row(survivors)]
    }
}

/// Solves the value recursion backwards from the final date.
pub fn solve(
    mode: CollectiveMode,
    grid: &TimeGrid,
    market: &MarketParams,
    prefs: &Preferences,
    mortality: &MortalityTable,
) -> Result<ValueTable> {
    mode.validate()?;
    if !mortality.grid().same_as(grid) {
        return Err(Error::config("mortality table is defined on a different grid"));
    }
    let astar = optimal_proportion(market, prefs.alpha);
    let xi = growth_exponent(market, prefs.alpha);
    let (z, y) = match mode.pooling() {
        Some(pooling) => solve_scalar(pooling, grid, market, prefs, mortality)?,
        None => solve_finite(mode.rows(), grid, xi, prefs, mortality)?,
    };
    let cstar = y.iter().map(|row| row.iter().map(|y| 1.0 / y).collect()).collect();
    Ok(ValueTable {
        mode,
        grid: *grid,
        market: *market,
        prefs: *prefs,
        z,
        cstar,
        y,
        astar,
        xi,
    })
}

type Tables = (Vec<Vec<f64>>, Vec<Vec<f64>>);

// y_t = 1 + phi_t^(rho/(1-rho)) y_{t+dt}, z = y^((1-rho)/rho).
fn solve_scalar(
    pooling: Pooling,
    grid: &TimeGrid,
    market: &MarketParams,
    prefs: &Preferences,
    mortality: &MortalityTable,
) -> Result<Tables> {
    let k = prefs.transform_exponent();
    let len = grid.len();
    let mut y = vec![1.0; len];
    for t in (0..grid.last_index()).rev() {
        let s = mortality.survival_prob(t);
        let next = 1.0 + phi(prefs, market, s, pooling, grid.dt()).powf(k) * y[t + 1];
        if !next.is_finite() || !(1.0 / next > 0.0) {
            return Err(divergence(grid, t, 0));
        }
        y[t] = next;
    }
    let mut z = Vec::with_capacity(len);
    for (t, &yt) in y.iter().enumerate() {
        let zt = yt.powf(1.0 / k);
        if !zt.is_finite() || !(zt > 0.0) {
            return Err(divergence(grid, t, 0));
        }
        z.push(vec![zt]);
    }
    Ok((z, y.into_iter().map(|v| vec![v]).collect()))
}

// Runs in log z so z^alpha stays representable for large |alpha|.
fn solve_finite(n: usize, grid: &TimeGrid, xi: f64, prefs: &Preferences, mortality: &MortalityTable) -> Result<Tables> {
    let len = grid.len();
    let alpha = prefs.alpha;
    let k = prefs.transform_exponent();
    let ln_scale = prefs.beta(grid.dt()).ln() / prefs.rho + xi * grid.dt();
    let ln_count: Vec<f64> = (0..=n).map(|i| (i as f64).ln()).collect();
    let ln_fact: Vec<f64> = (0..=n as u64).map(ln_factorial).collect();

    let mut ln_z = vec![vec![0.0; n]; len];
    let mut ln_y = vec![vec![0.0; n]; len];
    for t in (0..grid.last_index()).rev() {
        let s = mortality.survival_prob(t);
        let (ln_s, ln_q) = (s.ln(), (-s).ln_1p());
        let interior = s > 0.0 && s < 1.0;
        let next = &ln_z[t + 1];
        let rows: Vec<std::result::Result<(f64, f64), usize>> = (1..=n)
            .into_par_iter()
            .map(|fund| {
                // ln sum_{i=1}^{fund} (i/fund)^(1-alpha) S(fund, i) z_{i,t+dt}^alpha, summed in index order
                let ln_pmf = |i: usize| {
                    if interior {
                        ln_fact[fund] - ln_fact[i] - ln_fact[fund - i] + i as f64 * ln_s + (fund - i) as f64 * ln_q
                    } else {
                        ln_binomial_pmf(fund as u64, i as u64, s)
                    }
                };
                let terms: Vec<f64> = (1..=fund)
                    .map(|i| (1.0 - alpha) * (ln_count[i] - ln_count[fund]) + ln_pmf(i) + alpha * next[i - 1])
                    .collect();
                let terms = terms.iter().copied();
                let ln_sum = log_sum_exp(terms);
                let ln_theta = ln_scale + ln_sum / alpha;
                let ln_y = softplus(k * ln_theta);
                let ln_z = ln_y / k;
                if ln_y.is_finite() && ln_z.is_finite() && ln_y.exp().is_finite() && ln_z.exp() > 0.0 {
                    Ok((ln_z, ln_y))
                } else {
                    Err(fund)
                }
            })
            .collect();
        for (row, entry) in rows.into_iter().enumerate() {
            let (lz, ly) = entry.map_err(|fund| divergence(grid, t, fund))?;
            ln_z[t][row] = lz;
            ln_y[t][row] = ly;
        }
    }
    let exp_all = |table: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        table
            .into_iter()
            .map(|row| row.into_iter().map(f64::exp).collect())
            .collect()
    };
    Ok((exp_all(ln_z), exp_all(ln_y)))
}

fn divergence(grid: &TimeGrid, index: usize, survivors: usize) -> Error {
    Error::Divergence {
        index,
        time: grid.time(index),
        survivors,
    }
}

pub(crate) fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || !max.is_finite() {
        return max;
    }
    max + terms.map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 35.0 {
        x + (-x).exp()
    } else {
        x.exp().ln_1p()
    }
}

/// Constant-mix strategy: stock proportion per date and consumption fraction
/// per date and survivor row (one row except for finite funds).
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub a: Vec<f64>,
    pub c: Vec<Vec<f64>>,
}

impl Strategy {
    /// The optimal strategy encoded in a value table.
    pub fn from_table(table: &ValueTable) -> Self {
        Self {
            a: vec![table.astar; table.grid.len()],
            c: table.cstar.clone(),
        }
    }

    pub fn consumption(&self, index: usize, row: usize) -> f64 {
        self.c[index][row]
    }

    fn validate(&self, mode: CollectiveMode, grid: &TimeGrid) -> Result<()> {
        if self.a.len() != grid.len() || self.c.len() != grid.len() {
            return Err(Error::config("strategy length does not match the grid"));
        }
        for (t, row) in self.c.iter().enumerate() {
            if row.len() != mode.rows() {
                return Err(Error::config(format!(
                    "strategy has {} consumption rows at index {t}, mode {mode} needs {}",
                    row.len(),
                    mode.rows()
                )));
            }
            if let Some(c) = row.iter().find(|c| !(0.0..=1.0).contains(*c)) {
                return Err(Error::config(format!(
                    "consumption rate {c} at index {t} is outside [0, 1]"
                )));
            }
        }
        if self.a.iter().any(|a| !a.is_finite()) {
            return Err(Error::config("stock proportions must be finite"));
        }
        Ok(())
    }
}

/// Utility per unit of initial wealth earned by following `strategy`.
///
/// Same backward recursion as [`solve`] with the optimisation removed: within
/// a period the constant mix `a` gives `E[G^alpha] = exp(alpha kappa(a) dt)`
/// for the gross return `G`.
pub fn evaluate_policy(
    strategy: &Strategy,
    mode: CollectiveMode,
    grid: &TimeGrid,
    market: &MarketParams,
    prefs: &Preferences,
    mortality: &MortalityTable,
) -> Result<f64> {
    mode.validate()?;
    if !mortality.grid().same_as(grid) {
        return Err(Error::config("mortality table is defined on a different grid"));
    }
    strategy.validate(mode, grid)?;
    let (alpha, rho) = (prefs.alpha, prefs.rho);
    let beta_root = prefs.beta(grid.dt()).powf(1.0 / rho);
    let aggregate = |c: f64, theta: f64| (c.powf(rho) + theta.powf(rho)).powf(1.0 / rho);
    let last = grid.last_index();

    let mut values: Vec<f64> = strategy.c[last].clone();
    for t in (0..last).rev() {
        let s = mortality.survival_prob(t);
        let growth = (market.certainty_growth(strategy.a[t], alpha) * grid.dt()).exp();
        let current: Vec<f64> = match mode.pooling() {
            Some(pooling) => {
                let c = strategy.c[t][0];
                let mortality_factor = s.powf(1.0 / alpha - pooling.indicator());
                let theta = beta_root * growth * mortality_factor * (1.0 - c) * values[0];
                vec![aggregate(c, theta)]
            }
            None => (1..=mode.rows())
                .map(|fund| {
                    let mixture: f64 = (1..=fund)
                        .map(|i| {
                            (i as f64 / fund as f64).powf(1.0 - alpha)
                                * ln_binomial_pmf(fund as u64, i as u64, s).exp()
                                * values[i - 1].powf(alpha)
                        })
                        .sum();
                    let c = strategy.c[t][fund - 1];
                    let theta = beta_root * growth * (1.0 - c) * mixture.powf(1.0 / alpha);
                    aggregate(c, theta)
                })
                .collect(),
        };
        if let Some(row) = current.iter().position(|v| !v.is_finite() || v.is_nan()) {
            return Err(divergence(grid, t, row + 1));
        }
        values = current;
    }
    Ok(*values.last().expect("non-empty"))
}
