//! Shared inputs for the benchmarks.

use pensionlab::{gompertz_makeham, MarketParams, MortalityTable, Preferences, TimeGrid};

/// Retirement at 65 with certain death by 121, real market rates and
/// von Neumann-Morgenstern preferences.
pub fn retirement_setup() -> (TimeGrid, MarketParams, Preferences, MortalityTable) {
    let grid = TimeGrid::new(65.0, 1.0, 121.0).expect("valid grid");
    let market = MarketParams::new(0.062, 0.027, 0.15).expect("valid market");
    let prefs = Preferences::new(-1.0, -1.0, 0.0).expect("valid preferences");
    let mortality = gompertz_makeham(2e-4, 9e-6, 0.1, &grid).expect("valid table");
    (grid, market, prefs, mortality)
}
