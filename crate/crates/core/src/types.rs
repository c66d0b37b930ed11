//! Time grid, market and preference parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const GRID_TOLERANCE: f64 = 1e-9;

/// Discrete consumption dates `t0, t0 + dt, ..., horizon - dt`.
///
/// Death is certain by `horizon`, which is not itself a consumption date.
/// Dates are addressed by step index; real times only appear at I/O.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t0: f64,
    dt: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, dt: f64, horizon: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::config(format!("grid step dt must be positive, got {dt}")));
        }
        if !t0.is_finite() || !horizon.is_finite() {
            return Err(Error::config("grid endpoints must be finite"));
        }
        let ratio = (horizon - t0) / dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > GRID_TOLERANCE || steps < 1.0 {
            return Err(Error::config(format!(
                "(T - t0) / dt = {ratio} is not a positive integer"
            )));
        }
        Ok(Self {
            t0,
            dt,
            steps: steps as usize,
        })
    }

    /// Grid with `len` dates starting at `t0`.
    pub fn with_len(t0: f64, dt: f64, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::config("grid must contain at least one date"));
        }
        Self::new(t0, dt, t0 + dt * len as f64)
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Certain-death horizon `T`.
    pub fn horizon(&self) -> f64 {
        self.t0 + self.dt * self.steps as f64
    }

    /// Number of consumption dates.
    pub fn len(&self) -> usize {
        self.steps
    }

    pub fn is_empty(&self) -> bool {
        self.steps == 0
    }

    pub fn last_index(&self) -> usize {
        self.steps - 1
    }

    pub fn time(&self, index: usize) -> f64 {
        self.t0 + self.dt * index as f64
    }

    /// Elapsed time `t - t0` at a grid index.
    pub fn elapsed(&self, index: usize) -> f64 {
        self.dt * index as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.steps).map(|k| self.time(k)).collect()
    }

    pub(crate) fn same_as(&self, other: &TimeGrid) -> bool {
        self.steps == other.steps
            && (self.t0 - other.t0).abs() <= GRID_TOLERANCE
            && (self.dt - other.dt).abs() <= GRID_TOLERANCE
    }
}

/// Black-Scholes-Merton market with one risky asset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub mu: f64,
    pub r: f64,
    pub sigma: f64,
}

impl MarketParams {
    pub fn new(mu: f64, r: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !r.is_finite() {
            return Err(Error::config("market rates must be finite"));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::config(format!("volatility must be positive, got {sigma}")));
        }
        Ok(Self { mu, r, sigma })
    }

    /// Log-growth rate `a(mu - r) + r - a^2 (1 - alpha) sigma^2 / 2` of a constant-mix
    /// portfolio holding proportion `a` in stock, measured in certainty-equivalent
    /// terms for risk exponent `alpha`.
    pub fn certainty_growth(&self, a: f64, alpha: f64) -> f64 {
        a * (self.mu - self.r) + self.r - 0.5 * a * a * (1.0 - alpha) * self.sigma * self.sigma
    }
}

/// Homogeneous Epstein-Zin preference parameters.
///
/// `alpha` is the monetary-risk-aversion exponent, `rho` the intertemporal
/// exponent and `b` the continuous discount rate. The per-step discount factor
/// is `exp(-b dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preferences {
    pub alpha: f64,
    pub rho: f64,
    pub b: f64,
}

impl Preferences {
    pub fn new(alpha: f64, rho: f64, b: f64) -> Result<Self> {
        check_exponent("alpha", alpha)?;
        check_exponent("rho", rho)?;
        if !(b >= 0.0) || !b.is_finite() {
            return Err(Error::config(format!("discount rate b must be >= 0, got {b}")));
        }
        Ok(Self { alpha, rho, b })
    }

    /// Per-step discount factor in `(0, 1]`.
    pub fn beta(&self, dt: f64) -> f64 {
        (-self.b * dt).exp()
    }

    /// Exponent `rho / (1 - rho)` of the transformed value recursion.
    pub(crate) fn transform_exponent(&self) -> f64 {
        self.rho / (1.0 - self.rho)
    }
}

fn check_exponent(name: &str, value: f64) -> Result<()> {
    if !value.is_finite() || value == 0.0 || value >= 1.0 {
        return Err(Error::config(format!(
            "{name} must lie in (-inf, 1) excluding 0, got {value}"
        )));
    }
    Ok(())
}
