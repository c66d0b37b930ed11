//! Extended positive reals: non-negative reals adjoined with symbolic powers
//! `eps^a` of an infinitesimal `eps`, `a != 0`.
//!
//! `eps^a` is infinitesimal for `a > 0` and infinite for `a < 0`. Utility after
//! death is `eps^(1/alpha)`, which is how the Epstein-Zin recursion assigns a
//! value to states where no consumption happens.

use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedPositiveReal {
    Finite(f64),
    /// `eps` raised to a nonzero exponent.
    Eps(f64),
}

use ExtendedPositiveReal::{Eps, Finite};

impl ExtendedPositiveReal {
    pub fn finite(x: f64) -> Result<Self> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::domain(format!("finite extended real must be >= 0, got {x}")));
        }
        Ok(Finite(x))
    }

    pub fn eps(exponent: f64) -> Result<Self> {
        if exponent == 0.0 || !exponent.is_finite() {
            return Err(Error::domain(format!(
                "eps exponent must be finite and nonzero, got {exponent}"
            )));
        }
        Ok(Eps(exponent))
    }

    pub fn is_infinitesimal(&self) -> bool {
        matches!(self, Eps(a) if *a > 0.0)
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Eps(a) if *a < 0.0)
    }

    /// Product. `0 * eps^a` and `eps^a * eps^-a` are left undefined.
    pub fn checked_mul(self, other: Self) -> Result<Self> {
        match (self, other) {
            (Finite(x), Finite(y)) => Ok(Finite(x * y)),
            (Finite(x), Eps(a)) | (Eps(a), Finite(x)) => {
                if x == 0.0 {
                    Err(Error::domain("0 * eps^a is undefined"))
                } else {
                    Ok(Eps(a))
                }
            }
            (Eps(a), Eps(b)) => {
                Self::eps(a + b).map_err(|_| Error::domain(format!("eps^{a} * eps^{b} has zero exponent")))
            }
        }
    }

    pub fn checked_pow(self, exponent: f64) -> Result<Self> {
        match self {
            Finite(x) => {
                if x == 0.0 && exponent < 0.0 {
                    return Err(Error::domain("0 raised to a negative power"));
                }
                Self::finite(x.powf(exponent))
            }
            Eps(a) => {
                Self::eps(a * exponent).map_err(|_| Error::domain(format!("(eps^{a})^{exponent} has zero exponent")))
            }
        }
    }
}

impl Add for ExtendedPositiveReal {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        match (self, other) {
            (Finite(x), Finite(y)) => Finite(x + y),
            (Finite(x), Eps(a)) | (Eps(a), Finite(x)) => {
                if a > 0.0 {
                    Finite(x)
                } else {
                    Eps(a)
                }
            }
            (Eps(a), Eps(b)) => Eps(a.min(b)),
        }
    }
}

impl fmt::Display for ExtendedPositiveReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finite(x) => write!(f, "{x}"),
            Eps(a) => write!(f, "eps^{a}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eps(a: f64) -> ExtendedPositiveReal {
        ExtendedPositiveReal::eps(a).unwrap()
    }

    #[test]
    fn add_rules() {
        assert_eq!(Finite(3.0) + eps(2.0), Finite(3.0));
        assert_eq!(Finite(3.0) + eps(-2.0), eps(-2.0));
        assert_eq!(eps(2.0) + eps(-1.0), eps(-1.0));
        assert_eq!(eps(2.0) + eps(0.5), eps(0.5));
    }

    #[test]
    fn mul_rules() {
        assert_eq!(Finite(2.0).checked_mul(eps(3.0)).unwrap(), eps(3.0));
        assert_eq!(eps(1.5).checked_mul(eps(-0.5)).unwrap(), eps(1.0));
        assert!(eps(2.0).checked_mul(eps(-2.0)).is_err());
        assert!(Finite(0.0).checked_mul(eps(1.0)).is_err());
    }

    #[test]
    fn pow_rules() {
        assert_eq!(eps(3.0).checked_pow(-2.0).unwrap(), eps(-6.0));
        assert!(eps(3.0).checked_pow(0.0).is_err());
        assert_eq!(Finite(4.0).checked_pow(0.5).unwrap(), Finite(2.0));
        assert!(Finite(0.0).checked_pow(-1.0).is_err());
    }

    #[test]
    fn zero_exponent_rejected() {
        assert!(ExtendedPositiveReal::eps(0.0).is_err());
        assert!(ExtendedPositiveReal::finite(-1.0).is_err());
    }

    #[test]
    fn post_death_utility_is_absorbed() {
        // eps^(1/alpha) raised to alpha is eps^1, which vanishes next to any real.
        let alpha = -2.0;
        let dead = eps(1.0 / alpha).checked_pow(alpha).unwrap();
        assert!(dead.is_infinitesimal());
        assert_eq!(Finite(0.7) + dead, Finite(0.7));
    }

    fn operand() -> impl Strategy<Value = ExtendedPositiveReal> {
        // Dyadic values keep floating-point addition exact, so associativity is testable with ==.
        prop_oneof![
            (0u32..1000).prop_map(|k| Finite(k as f64 / 8.0)),
            (-40i32..40)
                .prop_filter("nonzero", |k| *k != 0)
                .prop_map(|k| Eps(k as f64 / 4.0)),
        ]
    }

    proptest! {
        #[test]
        fn add_commutes(a in operand(), b in operand()) {
            prop_assert_eq!(a + b, b + a);
        }

        #[test]
        fn add_associates(a in operand(), b in operand(), c in operand()) {
            prop_assert_eq!((a + b) + c, a + (b + c));
        }

        #[test]
        fn eps_exponents_add(a in -20i32..20, b in -20i32..20) {
            prop_assume!(a != 0 && b != 0 && a + b != 0);
            let (a, b) = (a as f64 / 4.0, b as f64 / 4.0);
            prop_assert_eq!(eps(a).checked_mul(eps(b)).unwrap(), eps(a + b));
        }
    }
}
