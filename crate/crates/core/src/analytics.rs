//! Closed-form laws of wealth and consumption under the optimal strategy.
//! Also how consumption drifts over time, and the resulting elasticity of
//! intertemporal substitution.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mortality::MortalityTable;
use crate::solver::{optimal_proportion, phi, Pooling, ValueTable};
use crate::types::{MarketParams, Preferences, TimeGrid};

/// Parameters of the lognormal laws of wealth `X_t` and consumption `gamma_t`
/// per survivor, one entry per grid date.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LognormalSchedule {
    pub grid: TimeGrid,
    pub mu_x: Vec<f64>,
    pub sigma_x: Vec<f64>,
    pub mu_gamma: Vec<f64>,
    pub sigma_gamma: Vec<f64>,
}

/// Log-growth rate of the Merton portfolio, `xi` with `alpha` set to zero.
pub fn log_growth(market: &MarketParams, alpha: f64) -> f64 {
    let a = optimal_proportion(market, alpha);
    a * (market.mu - market.r) + market.r - 0.5 * a * a * market.sigma * market.sigma
}

/// Distribution of log wealth and log consumption per survivor, starting from
/// wealth `x0` at `t0`.
///
/// Only defined for the individual and infinite modes; wealth in a finite
/// fund depends on the random survivor count and is not lognormal.
pub fn wealth_schedule(table: &ValueTable, mortality: &MortalityTable, x0: f64) -> Result<LognormalSchedule> {
    let pooling = table.mode.pooling().ok_or_else(|| {
        Error::config(format!(
            "the lognormal wealth schedule is only available for individual and infinite modes, not {}",
            table.mode
        ))
    })?;
    if !(x0 > 0.0) || !x0.is_finite() {
        return Err(Error::config(format!("initial wealth must be positive, got {x0}")));
    }
    let grid = table.grid;
    let rho = table.prefs.rho;
    let drift = log_growth(&table.market, table.prefs.alpha) * grid.dt();
    let c = pooling.indicator();

    let mut mu_x = Vec::with_capacity(grid.len());
    mu_x.push(x0.ln());
    for t in 0..grid.last_index() {
        let s = mortality.survival_prob(t);
        let kept = (-table.cstar[t][0]).ln_1p();
        mu_x.push(mu_x[t] - c * s.ln() + kept + drift);
    }
    let sigma_x: Vec<f64> = (0..grid.len())
        .map(|t| table.market.sigma * table.astar.abs() * grid.elapsed(t).sqrt())
        .collect();
    let mu_gamma = mu_x
        .iter()
        .zip(&table.z)
        .map(|(m, z)| rho / (rho - 1.0) * z[0].ln() + m)
        .collect();
    Ok(LognormalSchedule {
        grid,
        mu_x,
        sigma_gamma: sigma_x.clone(),
        sigma_x,
        mu_gamma,
    })
}

/// Expected one-step change of log consumption per survivor at survival `s`.
pub fn consumption_drift(prefs: &Preferences, market: &MarketParams, s: f64, pooling: Pooling, dt: f64) -> f64 {
    let rho = prefs.rho;
    -pooling.indicator() * s.ln()
        + rho / (1.0 - rho) * phi(prefs, market, s, pooling, dt).ln()
        + log_growth(market, prefs.alpha) * dt
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    Increasing,
    Decreasing,
    Constant,
}

/// Exponent `e` with `gamma_{t+dt} = s_t^e gamma_t` in a market with
/// `mu = r = 0` and no discounting.
pub fn consumption_exponent(prefs: &Preferences, pooling: Pooling) -> f64 {
    let (alpha, rho) = (prefs.alpha, prefs.rho);
    (1.0 / alpha - pooling.indicator() / rho) * rho / (1.0 - rho)
}

/// How consumption moves over time when `mu = r = 0`, `beta = 1` and
/// `0 < s < 1`. Since `s < 1`, a positive exponent means decreasing consumption.
pub fn consumption_direction(prefs: &Preferences, pooling: Pooling) -> Direction {
    let e = consumption_exponent(prefs, pooling);
    if e > 0.0 {
        Direction::Decreasing
    } else if e < 0.0 {
        Direction::Increasing
    } else {
        Direction::Constant
    }
}

/// Growth factor `s^e` of consumption over one step; 1 when `s = 1`.
pub fn consumption_growth_factor(prefs: &Preferences, pooling: Pooling, s: f64) -> f64 {
    s.powf(consumption_exponent(prefs, pooling))
}

/// Elasticity of intertemporal substitution of the optimal strategy.
pub fn eis(prefs: &Preferences, market: &MarketParams) -> f64 {
    let (alpha, rho) = (prefs.alpha, prefs.rho);
    let sigma2 = market.sigma * market.sigma;
    (1.0 - (market.mu - market.r) * (1.0 + alpha * (rho - 2.0)) / ((alpha - 1.0).powi(2) * sigma2)) / (1.0 - rho)
}
