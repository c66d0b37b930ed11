//! Optimal investment and consumption for collectivised pension funds whose
//! members hold homogeneous Epstein-Zin preferences.
//!
//! Members invest in a Black-Scholes-Merton market in continuous time and
//! consume on a discrete grid. The wealth of members who die is shared among
//! the survivors. [`solver`] computes the optimal strategy for a single
//! investor, a finite fund of `n` members and the infinite-fund limit;
//! [`analytics`] gives the resulting wealth and consumption distributions;
//! [`montecarlo`] simulates fund paths and [`studies`] compares funds with
//! annuities.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod epr;
pub mod error;
pub mod montecarlo;
pub mod mortality;
pub mod solver;
pub mod studies;
pub mod types;

pub use epr::ExtendedPositiveReal;
pub use error::{Error, Result};
pub use mortality::{binomial_transition, gompertz_makeham, load_mortality_csv, MortalityTable};
pub use solver::{evaluate_policy, solve, CollectiveMode, Pooling, Strategy, ValueTable};
pub use types::{MarketParams, Preferences, TimeGrid};
