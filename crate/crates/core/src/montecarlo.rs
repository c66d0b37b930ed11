//! Monte Carlo simulation of fund paths under a constant-mix strategy.
//!
//! Within a period the wealth of a constant-mix portfolio is geometric
//! Brownian motion, so each period is sampled exactly. Every path draws from
//! its own ChaCha stream selected by the path index, and paths are reduced in
//! fixed blocks, so results do not depend on the number of threads.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::mortality::MortalityTable;
use crate::solver::{CollectiveMode, Strategy};
use crate::types::{MarketParams, TimeGrid};

const BLOCK: usize = 256;

/// Which per-path series to keep in the result. Summary moments are always kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Record {
    pub survivors: bool,
    pub wealth: bool,
    pub consumption: bool,
}

impl Record {
    pub fn all() -> Self {
        Self {
            survivors: true,
            wealth: true,
            consumption: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub paths: usize,
    pub seed: u64,
    pub mode: CollectiveMode,
    /// Initial wealth per member.
    pub x0: f64,
    pub record: Record,
}

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / total as f64;
        self.m2 += other.m2 + delta * delta * (self.count as f64 * other.count as f64) / total as f64;
        self.count = total;
    }

    /// Unbiased sample variance; zero with fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

/// Per-date summary over all paths.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointSummary {
    /// Survivor count (fraction for the infinite fund), averaged over all paths.
    pub survivors: Moments,
    /// Log wealth per survivor over paths whose fund is still alive.
    pub log_wealth: Moments,
    pub log_consumption: Moments,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub grid: TimeGrid,
    pub mode: CollectiveMode,
    pub paths: usize,
    /// Recorded series, path-major: entry `path * grid.len() + t`.
    pub survivors: Option<Vec<f64>>,
    /// Fund per survivor before consumption.
    pub wealth: Option<Vec<f64>>,
    /// Fund per survivor after consumption and redistribution, at the start of the period.
    pub post_wealth: Option<Vec<f64>>,
    pub consumption: Option<Vec<f64>>,
    pub summary: Vec<PointSummary>,
}

impl SimulationResult {
    fn index(&self, path: usize, t: usize) -> usize {
        path * self.grid.len() + t
    }

    pub fn survivors_at(&self, path: usize, t: usize) -> Option<f64> {
        self.survivors.as_ref().map(|v| v[self.index(path, t)])
    }

    pub fn wealth_at(&self, path: usize, t: usize) -> Option<f64> {
        self.wealth.as_ref().map(|v| v[self.index(path, t)])
    }

    pub fn post_wealth_at(&self, path: usize, t: usize) -> Option<f64> {
        self.post_wealth.as_ref().map(|v| v[self.index(path, t)])
    }

    pub fn consumption_at(&self, path: usize, t: usize) -> Option<f64> {
        self.consumption.as_ref().map(|v| v[self.index(path, t)])
    }
}

struct Trace {
    survivors: Vec<f64>,
    wealth: Vec<f64>,
    post_wealth: Vec<f64>,
    consumption: Vec<f64>,
}

struct BlockOutput {
    summary: Vec<PointSummary>,
    traces: Vec<Trace>,
}

/// Simulates `config.paths` independent fund histories.
pub fn simulate(
    config: &SimulationConfig,
    strategy: &Strategy,
    market: &MarketParams,
    mortality: &MortalityTable,
) -> Result<SimulationResult> {
    if config.paths == 0 {
        return Err(Error::config("simulation needs at least one path"));
    }
    if !(config.x0 > 0.0) || !config.x0.is_finite() {
        return Err(Error::config(format!(
            "initial wealth must be positive, got {}",
            config.x0
        )));
    }
    config.mode.validate()?;
    let grid = *mortality.grid();
    if strategy.a.len() != grid.len()
        || strategy.c.len() != grid.len()
        || strategy.c.iter().any(|row| row.len() != config.mode.rows())
    {
        return Err(Error::config(format!(
            "strategy does not match the grid and mode {}",
            config.mode
        )));
    }

    let keep = config.record.survivors || config.record.wealth || config.record.consumption;
    let blocks = config.paths.div_ceil(BLOCK);
    let outputs: Vec<BlockOutput> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let start = block * BLOCK;
            let end = (start + BLOCK).min(config.paths);
            let mut summary = vec![PointSummary::default(); grid.len()];
            let mut traces = Vec::new();
            for path in start..end {
                let trace = simulate_path(config, strategy, market, mortality, path as u64);
                for (t, point) in summary.iter_mut().enumerate() {
                    point.survivors.push(trace.survivors[t]);
                    if trace.survivors[t] > 0.0 {
                        point.log_wealth.push(trace.wealth[t].ln());
                        point.log_consumption.push(trace.consumption[t].ln());
                    }
                }
                if keep {
                    traces.push(trace);
                }
            }
            BlockOutput { summary, traces }
        })
        .collect();

    let mut summary = vec![PointSummary::default(); grid.len()];
    let capacity = if keep { config.paths * grid.len() } else { 0 };
    let mut survivors = Vec::with_capacity(if config.record.survivors { capacity } else { 0 });
    let mut wealth = Vec::with_capacity(if config.record.wealth { capacity } else { 0 });
    let mut post_wealth = Vec::with_capacity(if config.record.wealth { capacity } else { 0 });
    let mut consumption = Vec::with_capacity(if config.record.consumption { capacity } else { 0 });
    for output in outputs {
        for (acc, block) in summary.iter_mut().zip(&output.summary) {
            acc.survivors.merge(&block.survivors);
            acc.log_wealth.merge(&block.log_wealth);
            acc.log_consumption.merge(&block.log_consumption);
        }
        for trace in output.traces {
            if config.record.survivors {
                survivors.extend(trace.survivors);
            }
            if config.record.wealth {
                wealth.extend(trace.wealth);
                post_wealth.extend(trace.post_wealth);
            }
            if config.record.consumption {
                consumption.extend(trace.consumption);
            }
        }
    }

    Ok(SimulationResult {
        grid,
        mode: config.mode,
        paths: config.paths,
        survivors: config.record.survivors.then_some(survivors),
        wealth: config.record.wealth.then_some(wealth),
        post_wealth: config.record.wealth.then_some(post_wealth),
        consumption: config.record.consumption.then_some(consumption),
        summary,
    })
}

fn simulate_path(
    config: &SimulationConfig,
    strategy: &Strategy,
    market: &MarketParams,
    mortality: &MortalityTable,
    path: u64,
) -> Trace {
    let grid = mortality.grid();
    let len = grid.len();
    let dt = grid.dt();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(path);

    let mut trace = Trace {
        survivors: vec![0.0; len],
        wealth: vec![0.0; len],
        post_wealth: vec![0.0; len],
        consumption: vec![0.0; len],
    };
    let mut alive: u64 = match config.mode {
        CollectiveMode::Finite(n) => n as u64,
        _ => 1,
    };
    let mut x = config.x0;
    for t in 0..len {
        let s = mortality.survival_prob(t);
        trace.survivors[t] = match config.mode {
            CollectiveMode::Infinite => mortality.tail_prob(t),
            _ => alive as f64,
        };
        if alive == 0 {
            continue;
        }
        let row = match config.mode {
            CollectiveMode::Finite(_) => alive as usize - 1,
            _ => 0,
        };
        let gamma = strategy.c[t][row] * x;
        trace.wealth[t] = x;
        trace.consumption[t] = gamma;
        if t == grid.last_index() {
            break;
        }

        let remaining = x - gamma;
        let post = match config.mode {
            CollectiveMode::Infinite => remaining / s,
            _ => {
                let next = Binomial::new(alive, s).expect("valid binomial").sample(&mut rng);
                let post = if next == 0 {
                    0.0
                } else {
                    remaining * alive as f64 / next as f64
                };
                alive = next;
                post
            }
        };
        trace.post_wealth[t] = post;

        let a = strategy.a[t];
        let drift = a * (market.mu - market.r) + market.r - 0.5 * a * a * market.sigma * market.sigma;
        let shock = standard_normal(&mut rng);
        x = post * (drift * dt + a * market.sigma * dt.sqrt() * shock).exp();
    }
    trace
}

/// Inverse-CDF transform of a uniform on the open interval `(0, 1)`.
fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    let bits = rng.gen::<u64>() >> 11;
    let u = (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
    Normal::standard().inverse_cdf(u)
}

/// Empirical quantiles of wealth and consumption per survivor at each date,
/// over paths whose fund is alive. Entries are `NaN` where no path is alive.
#[derive(Debug, Clone, PartialEq)]
pub struct PercentileTable {
    pub probs: Vec<f64>,
    /// `[date][prob]`
    pub wealth: Vec<Vec<f64>>,
    pub consumption: Vec<Vec<f64>>,
}

/// Quantiles by linear interpolation between order statistics: with `m`
/// sorted samples, probability `p` sits at position `(m - 1) p`. Two samples
/// therefore have their midpoint as median.
pub fn summarize(result: &SimulationResult, probs: &[f64]) -> Result<PercentileTable> {
    if let Some(p) = probs.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::config(format!("quantile probability {p} is not in (0, 1)")));
    }
    let (Some(wealth), Some(consumption)) = (&result.wealth, &result.consumption) else {
        return Err(Error::Empty("wealth and consumption were not recorded".into()));
    };
    if wealth.is_empty() {
        return Err(Error::Empty("no paths".into()));
    }
    let len = result.grid.len();
    let column = |series: &[f64], t: usize| -> Vec<f64> {
        let mut values: Vec<f64> = (0..result.paths)
            .filter(|&path| series_alive(result, wealth, path, t))
            .map(|path| series[path * len + t])
            .collect();
        values.sort_by(f64::total_cmp);
        probs.iter().map(|p| quantile(&values, *p)).collect()
    };
    Ok(PercentileTable {
        probs: probs.to_vec(),
        wealth: (0..len).map(|t| column(wealth, t)).collect(),
        consumption: (0..len).map(|t| column(consumption, t)).collect(),
    })
}

fn series_alive(result: &SimulationResult, wealth: &[f64], path: usize, t: usize) -> bool {
    match &result.survivors {
        Some(n) => n[path * result.grid.len() + t] > 0.0,
        None => wealth[path * result.grid.len() + t] > 0.0,
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}
