//! Mortality distributions on the consumption grid.
//!
//! A table holds the death-time pmf `p_t` (probability that death occurs at
//! grid date `t`) together with the derived tail `Pr(tau >= t)` and one-step
//! survival `s_t`. An individual who dies at `t` still consumes at `t`.

use std::io::{Read, Write};

use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::types::TimeGrid;

const PMF_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct MortalityTable {
    grid: TimeGrid,
    pmf: Vec<f64>,
    tail: Vec<f64>,
    survival: Vec<f64>,
}

impl MortalityTable {
    /// Table from a death-time pmf indexed by grid date.
    pub fn from_pmf(grid: TimeGrid, pmf: Vec<f64>) -> Result<Self> {
        if pmf.len() != grid.len() {
            return Err(Error::config(format!(
                "pmf has {} entries but the grid has {} dates",
                pmf.len(),
                grid.len()
            )));
        }
        if let Some(k) = pmf.iter().position(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::config(format!("pmf entry {k} is negative or not finite")));
        }
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > PMF_TOLERANCE {
            return Err(Error::config(format!("pmf sums to {total}, expected 1")));
        }

        // Suffix sums keep small tails accurate.
        let mut tail = vec![0.0; pmf.len()];
        let mut acc = 0.0;
        for k in (0..pmf.len()).rev() {
            acc += pmf[k];
            tail[k] = acc.min(1.0);
        }

        let last = grid.last_index();
        let mut survival = vec![0.0; pmf.len()];
        for k in 0..last {
            let s = tail[k + 1] / tail[k];
            if !(s > 0.0) {
                return Err(Error::config(format!(
                    "survival probability vanishes at grid index {k} before the final date"
                )));
            }
            survival[k] = s;
        }
        Ok(Self {
            grid,
            pmf,
            tail,
            survival,
        })
    }

    /// Table from one-step survival probabilities at every date except the last,
    /// where death is certain.
    pub fn from_survival(grid: TimeGrid, survival: &[f64]) -> Result<Self> {
        if survival.len() + 1 != grid.len() {
            return Err(Error::config(format!(
                "expected {} survival probabilities, got {}",
                grid.len() - 1,
                survival.len()
            )));
        }
        let mut pmf = Vec::with_capacity(grid.len());
        let mut alive = 1.0;
        for (k, &s) in survival.iter().enumerate() {
            if !(s > 0.0 && s <= 1.0) {
                return Err(Error::config(format!(
                    "survival probability {s} at grid index {k} is not in (0, 1]"
                )));
            }
            pmf.push(alive * (1.0 - s));
            alive *= s;
        }
        pmf.push(alive);
        Self::from_pmf(grid, pmf)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    /// One-step survival `s_t`; zero at the final date.
    pub fn survival_prob(&self, index: usize) -> f64 {
        self.survival[index]
    }

    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    /// `Pr(tau >= t)`: probability of being alive to consume at date `index`.
    pub fn tail_prob(&self, index: usize) -> f64 {
        self.tail[index]
    }

    /// Expected discounted number of payments of a unit life annuity paid on
    /// the grid from `t0`, including the period of death.
    pub fn annuity_factor(&self, r: f64) -> f64 {
        (0..self.grid.len())
            .map(|k| (-r * self.grid.elapsed(k)).exp() * self.tail[k])
            .sum()
    }

    /// Writes the table as `age,qx` rows, one per integer age.
    ///
    /// Supported for integer `t0` and steps dividing one year. The final
    /// year is written with `qx = 1`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let dt = self.grid.dt();
        let per_year = (1.0 / dt).round();
        if self.grid.t0().fract() != 0.0 || dt > 1.0 || ((1.0 / dt) - per_year).abs() > 1e-9 {
            return Err(Error::domain(
                "CSV export needs an integer start age and a step dividing one year",
            ));
        }
        let per_year = per_year as usize;
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(["age", "qx"]).map_err(csv_io)?;
        let years = self.grid.len().div_ceil(per_year);
        for year in 0..years {
            let k = year * per_year;
            let qx = if k >= self.grid.last_index() {
                1.0
            } else {
                1.0 - self.survival[k].powf(1.0 / dt)
            };
            let age = self.grid.t0() as i64 + year as i64;
            writer
                .write_record([age.to_string(), format!("{qx:e}")])
                .map_err(csv_io)?;
        }
        writer.flush()?;
        Ok(())
    }
}

fn csv_io(err: csv::Error) -> Error {
    Error::Io(std::io::Error::other(err))
}

/// Reads an `age,qx` table of annual death probabilities and resamples it to
/// `grid`, whose start is the retirement age.
///
/// Annual survival is interpolated geometrically within each year, so a step
/// of length `dt` inside age `x` survives with `(1 - qx)^dt`. Whatever mass
/// remains at the final date is assigned to it.
pub fn load_mortality_csv<R: Read>(input: R, grid: &TimeGrid) -> Result<MortalityTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::Ingest {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.len() != 2 || &headers[0] != "age" || &headers[1] != "qx" {
        return Err(Error::Ingest {
            row: 1,
            message: format!(
                "expected header `age,qx`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    // (age, qx, line)
    let mut rows: Vec<(i64, f64, usize)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Ingest {
            row: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let bad = |message: String| Error::Ingest { row: line, message };
        if record.len() != 2 {
            return Err(bad(format!("expected 2 fields, found {}", record.len())));
        }
        let age: f64 = record[0]
            .parse()
            .map_err(|_| bad(format!("age `{}` is not a number", &record[0])))?;
        if age.fract() != 0.0 || !age.is_finite() {
            return Err(bad(format!("age {age} is not an integer")));
        }
        let qx: f64 = record[1]
            .parse()
            .map_err(|_| bad(format!("qx `{}` is not a number", &record[1])))?;
        if !(0.0..=1.0).contains(&qx) {
            return Err(bad(format!("qx {qx} is outside [0, 1)")));
        }
        if let Some(&(prev, _, _)) = rows.last() {
            if age as i64 <= prev {
                return Err(bad(format!("ages must increase, {age} follows {prev}")));
            }
        }
        rows.push((age as i64, qx, line));
    }

    let lookup = |age: i64| rows.binary_search_by_key(&age, |r| r.0).ok().map(|k| rows[k]);
    let first_age = grid.t0().floor() as i64;
    let end_age = grid.horizon().ceil() as i64;
    for age in first_age..end_age {
        if lookup(age).is_none() {
            return Err(Error::Ingest {
                row: rows.last().map_or(1, |r| r.2) + 1,
                message: format!(
                    "no row for age {age}; the table must cover [{}, {})",
                    grid.t0(),
                    grid.horizon()
                ),
            });
        }
    }

    let last = grid.last_index();
    let mut survival = Vec::with_capacity(last);
    for k in 0..last {
        let start = grid.time(k);
        let end = start + grid.dt();
        let mut log_s = 0.0;
        let mut age = start.floor() as i64;
        while (age as f64) < end {
            let overlap = (end.min(age as f64 + 1.0) - start.max(age as f64)).max(0.0);
            if overlap > 0.0 {
                let (_, qx, line) = lookup(age).expect("coverage checked");
                if qx >= 1.0 {
                    return Err(Error::Ingest {
                        row: line,
                        message: format!("qx = 1 at age {age} forces death before the final date"),
                    });
                }
                log_s += overlap * (-qx).ln_1p();
            }
            age += 1;
        }
        survival.push(log_s.exp());
    }
    MortalityTable::from_survival(*grid, &survival)
}

/// Synthetic table from the Gompertz-Makeham hazard `a + b exp(c t)`, with `t`
/// the grid time (age).
pub fn gompertz_makeham(a: f64, b: f64, c: f64, grid: &TimeGrid) -> Result<MortalityTable> {
    for (name, v) in [("a", a), ("b", b), ("c", c)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::config(format!(
                "Gompertz-Makeham parameter {name} must be finite and >= 0, got {v}"
            )));
        }
    }
    let dt = grid.dt();
    let survival = (0..grid.last_index())
        .map(|k| {
            let t = grid.time(k);
            let gompertz = if c > 0.0 {
                b / c * (c * t).exp() * (c * dt).exp_m1()
            } else {
                b * dt
            };
            let s = (-(a * dt + gompertz)).exp();
            if s > 0.0 {
                Ok(s)
            } else {
                Err(Error::config(format!(
                    "Gompertz-Makeham hazard kills everyone at t = {t}, before the final date"
                )))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    MortalityTable::from_survival(*grid, &survival)
}

/// `ln[C(n, i) s^i (1 - s)^(n - i)]`, `-inf` for impossible transitions.
pub fn ln_binomial_pmf(n: u64, i: u64, s: f64) -> f64 {
    debug_assert!(i <= n);
    if s <= 0.0 {
        return if i == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if s >= 1.0 {
        return if i == n { 0.0 } else { f64::NEG_INFINITY };
    }
    ln_binomial(n, i) + i as f64 * s.ln() + (n - i) as f64 * (-s).ln_1p()
}

/// Probability that `i` of `n` survivors live through a step with survival `s`.
pub fn binomial_transition(n: u64, i: u64, s: f64) -> Result<f64> {
    if i > n {
        return Err(Error::domain(format!("survivor count {i} exceeds fund size {n}")));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::domain(format!("survival probability {s} outside [0, 1]")));
    }
    Ok(ln_binomial_pmf(n, i, s).exp())
}
