//! JSON run configuration.

use std::path::{Path, PathBuf};

use pensionlab::studies::Scenario;
use pensionlab::{
    gompertz_makeham, load_mortality_csv, CollectiveMode, MarketParams, MortalityTable, Preferences, TimeGrid,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub market: MarketSection,
    pub preferences: PreferencesSection,
    pub grid: GridSection,
    pub mortality: MortalitySection,
    pub mode: CollectiveMode,
    pub budget: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Real rates; `market.r_cpi` is not applied to these.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenarios: Option<Vec<ScenarioSection>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convergence: Option<SizeList>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fund_size: Option<SizeList>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    pub mu: f64,
    pub r: f64,
    pub sigma: f64,
    /// Inflation rate subtracted from `mu` and `r`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_cpi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreferencesSection {
    pub alpha: f64,
    pub rho: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub t0: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum MortalitySection {
    Gompertz {
        a: f64,
        b: f64,
        c: f64,
    },
    /// `age,qx` table; relative paths are resolved against the config file.
    Csv(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub paths: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub id: String,
    pub mu: f64,
    pub r: f64,
    pub mode: CollectiveMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeList {
    pub n_list: Vec<usize>,
}

/// Everything a command needs, validated.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub grid: TimeGrid,
    pub market: MarketParams,
    pub prefs: Preferences,
    pub mortality: MortalityTable,
    pub mode: CollectiveMode,
    pub budget: f64,
}

fn invalid(key: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{key}: {err}"))
}

fn finite(key: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(key, "must be a finite number"))
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("config: cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Real market after removing inflation.
    pub fn market(&self) -> Result<MarketParams, CliError> {
        let m = &self.market;
        let cpi = finite("market.r_cpi", m.r_cpi.unwrap_or(0.0))?;
        let mu = finite("market.mu", m.mu)? - cpi;
        let r = finite("market.r", m.r)? - cpi;
        if !(m.sigma > 0.0) || !m.sigma.is_finite() {
            return Err(invalid("market.sigma", "must be positive"));
        }
        MarketParams::new(mu, r, m.sigma).map_err(|e| invalid("market", e))
    }

    pub fn preferences(&self) -> Result<Preferences, CliError> {
        let p = &self.preferences;
        for (key, x) in [("alpha", p.alpha), ("rho", p.rho)] {
            if !(x < 1.0) || x == 0.0 || !x.is_finite() {
                return Err(invalid(&format!("preferences.{key}"), "must be below 1 and non-zero"));
            }
        }
        if !(p.b >= 0.0) || !p.b.is_finite() {
            return Err(invalid("preferences.b", "must be non-negative"));
        }
        Preferences::new(p.alpha, p.rho, p.b).map_err(|e| invalid("preferences", e))
    }

    pub fn grid(&self) -> Result<TimeGrid, CliError> {
        let g = &self.grid;
        finite("grid.t0", g.t0)?;
        if !(g.dt > 0.0) || !g.dt.is_finite() {
            return Err(invalid("grid.dt", "must be positive"));
        }
        if !(finite("grid.T", g.horizon)? > g.t0) {
            return Err(invalid("grid.T", "must exceed grid.t0"));
        }
        TimeGrid::new(g.t0, g.dt, g.horizon).map_err(|e| invalid("grid", e))
    }

    /// `base` is the directory relative CSV paths are resolved against.
    pub fn mortality(&self, grid: &TimeGrid, base: &Path) -> Result<MortalityTable, CliError> {
        match &self.mortality {
            MortalitySection::Gompertz { a, b, c } => {
                for (key, x) in [("a", a), ("b", b), ("c", c)] {
                    if !(*x >= 0.0) || !x.is_finite() {
                        return Err(invalid(&format!("mortality.gompertz.{key}"), "must be non-negative"));
                    }
                }
                gompertz_makeham(*a, *b, *c, grid).map_err(|e| invalid("mortality.gompertz", e))
            }
            MortalitySection::Csv(path) => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    base.join(path)
                };
                let file = std::fs::File::open(&full)
                    .map_err(|e| invalid("mortality.csv", format!("cannot open {}: {e}", full.display())))?;
                load_mortality_csv(file, grid).map_err(|e| invalid("mortality.csv", e))
            }
        }
    }

    pub fn resolve(&self, base: &Path) -> Result<Resolved, CliError> {
        let grid = self.grid()?;
        let market = self.market()?;
        let prefs = self.preferences()?;
        self.mode.validate().map_err(|e| invalid("mode", e))?;
        if !(self.budget > 0.0) || !self.budget.is_finite() {
            return Err(invalid("budget", "must be positive"));
        }
        let mortality = self.mortality(&grid, base)?;
        Ok(Resolved {
            grid,
            market,
            prefs,
            mortality,
            mode: self.mode,
            budget: self.budget,
        })
    }

    pub fn simulation(&self) -> Result<&SimulationSection, CliError> {
        let sim = self
            .simulation
            .as_ref()
            .ok_or_else(|| invalid("simulation", "required for the simulate command"))?;
        if sim.paths == 0 {
            return Err(invalid("simulation.paths", "must be at least 1"));
        }
        Ok(sim)
    }

    /// Configured scenarios, or the four reference scenarios at the configured volatility.
    pub fn scenarios(&self) -> Result<Vec<Scenario>, CliError> {
        let list: Vec<Scenario> = match &self.scenarios {
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(k, s)| {
                    finite(&format!("scenarios[{k}].mu"), s.mu)?;
                    finite(&format!("scenarios[{k}].r"), s.r)?;
                    s.mode
                        .validate()
                        .map_err(|e| invalid(&format!("scenarios[{k}].mode"), e))?;
                    Ok(Scenario {
                        id: s.id.clone(),
                        mu: s.mu,
                        r: s.r,
                        mode: s.mode,
                    })
                })
                .collect::<Result<_, CliError>>()?,
            None => default_scenarios(),
        };
        if list.is_empty() {
            return Err(invalid("scenarios", "at least one scenario is required"));
        }
        Ok(list)
    }

    pub fn convergence_sizes(&self) -> Result<Vec<usize>, CliError> {
        match &self.convergence {
            Some(list) => check_sizes("convergence.n_list", &list.n_list),
            None => Ok((0..=10).map(|k| 1usize << k).collect()),
        }
    }

    pub fn fund_sizes(&self) -> Result<Option<Vec<usize>>, CliError> {
        self.fund_size
            .as_ref()
            .map(|list| check_sizes("fund_size.n_list", &list.n_list))
            .transpose()
    }
}

fn check_sizes(key: &str, n_list: &[usize]) -> Result<Vec<usize>, CliError> {
    if n_list.is_empty() {
        return Err(invalid(key, "must not be empty"));
    }
    if n_list.contains(&0) {
        return Err(invalid(key, "sizes must be at least 1"));
    }
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(key, "sizes must be strictly increasing"));
    }
    let largest = *n_list.last().expect("non-empty");
    CollectiveMode::Finite(largest)
        .validate()
        .map_err(|e| invalid(key, e))?;
    Ok(n_list.to_vec())
}

/// Collective and individual funds with and without an equity premium, plus
/// the zero-rate collective fund.
pub fn default_scenarios() -> Vec<Scenario> {
    [
        ("1", 0.062, 0.027, CollectiveMode::Infinite),
        ("2", 0.062, 0.027, CollectiveMode::Individual),
        ("3", 0.027, 0.027, CollectiveMode::Infinite),
        ("4", 0.0, 0.0, CollectiveMode::Infinite),
    ]
    .into_iter()
    .map(|(id, mu, r, mode)| Scenario {
        id: id.to_string(),
        mu,
        r,
        mode,
    })
    .collect()
}
