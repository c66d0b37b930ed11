#[path = "support/oracle.rs"]
mod oracle;

use oracle::{Fund, Setup};
use pensionlab::{solve, CollectiveMode, MarketParams, MortalityTable, Preferences, TimeGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Draw {
    setup: Setup,
    survival: Vec<f64>,
}

fn draw(rng: &mut ChaCha8Rng) -> Draw {
    let len = rng.gen_range(3..=5);
    let pick_nonzero = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| loop {
        let x: f64 = rng.gen_range(lo..hi);
        if x.abs() > 0.1 {
            break x;
        }
    };
    let alpha = pick_nonzero(rng, -3.0, 0.7);
    let rho = pick_nonzero(rng, -3.0, 0.7);
    let setup = Setup {
        dt: *[0.5, 1.0].get(rng.gen_range(0..2)).unwrap(),
        mu: rng.gen_range(0.0..0.08),
        r: rng.gen_range(0.0..0.04),
        sigma: rng.gen_range(0.1..0.3),
        alpha,
        rho,
        b: rng.gen_range(0.0..0.05),
    };
    let survival = (0..len - 1).map(|_| rng.gen_range(0.3..0.99)).collect();
    Draw { setup, survival }
}

fn library(mode: CollectiveMode, d: &Draw) -> Vec<Vec<f64>> {
    let grid = TimeGrid::with_len(0.0, d.setup.dt, d.survival.len() + 1).unwrap();
    let mortality = MortalityTable::from_survival(grid, &d.survival).unwrap();
    let market = MarketParams::new(d.setup.mu, d.setup.r, d.setup.sigma).unwrap();
    let prefs = Preferences::new(d.setup.alpha, d.setup.rho, d.setup.b).unwrap();
    solve(mode, &grid, &market, &prefs, &mortality).unwrap().z
}

fn assert_close(got: &[Vec<f64>], want: &[Vec<f64>], tol: f64, label: &str) {
    for (t, (g, w)) in got.iter().zip(want).enumerate() {
        for (i, (g, w)) in g.iter().zip(w).enumerate() {
            let rel = (g - w).abs() / w.abs();
            assert!(rel <= tol, "{label}: t={t} row={i} solver {g} oracle {w} rel {rel:e}");
        }
    }
}

#[test]
fn finite_funds_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..10 {
        let d = draw(&mut rng);
        for n in 1..=3 {
            let want = oracle::value_table(Fund::Members(n), &d.survival, &d.setup);
            let got = library(CollectiveMode::Finite(n), &d);
            assert_close(&got, &want, 1e-8, &format!("draw {k} n={n} {:?}", d.setup));
        }
    }
}

#[test]
fn scalar_modes_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..10 {
        let d = draw(&mut rng);
        let individual = oracle::value_table(Fund::Members(1), &d.survival, &d.setup);
        assert_close(
            &library(CollectiveMode::Individual, &d),
            &individual,
            1e-8,
            &format!("individual {k}"),
        );
        let continuum = oracle::value_table(Fund::Continuum, &d.survival, &d.setup);
        assert_close(
            &library(CollectiveMode::Infinite, &d),
            &continuum,
            1e-8,
            &format!("infinite {k}"),
        );
    }
}

#[test]
fn two_member_fund_by_hand() {
    // s = (0.8, 0.5): death mass 0.2, 0.4, 0.4 over three dates
    let grid = TimeGrid::with_len(0.0, 1.0, 3).unwrap();
    let mortality = MortalityTable::from_pmf(grid, vec![0.2, 0.4, 0.4]).unwrap();
    assert!((mortality.survival_prob(0) - 0.8).abs() < 1e-15);
    assert!((mortality.survival_prob(1) - 0.5).abs() < 1e-15);
    let setup = Setup {
        dt: 1.0,
        mu: 0.0,
        r: 0.0,
        sigma: 0.2,
        alpha: -1.0,
        rho: -1.0,
        b: 0.0,
    };
    let want = oracle::value_table(Fund::Members(2), &[0.8, 0.5], &setup);
    let market = MarketParams::new(0.0, 0.0, 0.2).unwrap();
    let prefs = Preferences::new(-1.0, -1.0, 0.0).unwrap();
    let got = solve(CollectiveMode::Finite(2), &grid, &market, &prefs, &mortality).unwrap();
    assert_close(&got.z, &want, 1e-9, "finite:2");

    // a lone survivor at date 1: phi = s^(1/alpha) = 2, y = 1 + 2^(-1/2), z = y^-2
    let y = 1.0 + 2f64.powf(-0.5);
    assert!((got.z[1][0] - 1.0 / (y * y)).abs() < 1e-14);
}
