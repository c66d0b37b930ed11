//! Brute-force dynamic program for the per-unit utility of a fund member.
//!
//! Works from one member's point of view: at each date and survivor count it
//! searches the consumption fraction and the stock proportion numerically and
//! enumerates every survivor count at the next date. No closed-form optimiser
//! from the library is used.

#![allow(dead_code)]

#[derive(Debug, Clone, Copy)]
pub enum Fund {
    /// `n` members sharing the wealth of those who die.
    Members(usize),
    /// Continuum of members; survivors inherit `1/s` deterministically.
    Continuum,
}

#[derive(Debug, Clone, Copy)]
pub struct Setup {
    pub dt: f64,
    pub mu: f64,
    pub r: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub rho: f64,
    pub b: f64,
}

/// `E[G^alpha]` for the gross return over one step of a constant mix holding
/// proportion `a` in stock; log G is normal.
pub fn power_moment(setup: &Setup, a: f64) -> f64 {
    let m = (a * (setup.mu - setup.r) + setup.r - 0.5 * a * a * setup.sigma * setup.sigma) * setup.dt;
    let v = a * a * setup.sigma * setup.sigma * setup.dt;
    (setup.alpha * m + 0.5 * setup.alpha * setup.alpha * v).exp()
}

/// Maximises `f` over `[lo, hi]`; `f` must be unimodal there.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

fn choose(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Certainty-equivalent growth factor `E[G^alpha]^(1/alpha)`, maximised over the
/// stock proportion by golden section.
pub fn best_growth(setup: &Setup) -> f64 {
    let alpha = setup.alpha;
    let (_, g) = golden_max(|a| power_moment(setup, a).powf(1.0 / alpha), -50.0, 50.0, 1e-12);
    g
}

/// Value per unit of wealth, `[date][survivors - 1]` (one column for the
/// continuum). `survival[t]` is the chance of living from date `t` to `t + 1`.
pub fn value_table(fund: Fund, survival: &[f64], setup: &Setup) -> Vec<Vec<f64>> {
    let len = survival.len() + 1;
    let (alpha, rho) = (setup.alpha, setup.rho);
    let beta = (-setup.b * setup.dt).exp();
    let growth = best_growth(setup);
    let width = match fund {
        Fund::Members(n) => n,
        Fund::Continuum => 1,
    };
    let mut table = vec![vec![1.0; width]; len];
    for t in (0..len - 1).rev() {
        let s = survival[t];
        for k in 1..=width {
            // E over next-date states of (per-unit continuation)^alpha, excluding
            // the member's own death, which contributes an infinitesimal.
            let continuation = match fund {
                Fund::Continuum => s * (table[t + 1][0] / s).powf(alpha),
                Fund::Members(_) => (0..k)
                    .map(|others| {
                        let p =
                            s * choose(k - 1, others) * s.powi(others as i32) * (1.0 - s).powi((k - 1 - others) as i32);
                        let share = k as f64 / (others + 1) as f64;
                        p * (share * table[t + 1][others]).powf(alpha)
                    })
                    .sum::<f64>(),
            };
            let future = growth * continuation.powf(1.0 / alpha);
            let utility = |c: f64| (c.powf(rho) + beta * ((1.0 - c) * future).powf(rho)).powf(1.0 / rho);
            let (_, best) = golden_max(utility, 1e-12, 1.0 - 1e-12, 1e-11);
            table[t][k - 1] = best;
        }
    }
    table
}
