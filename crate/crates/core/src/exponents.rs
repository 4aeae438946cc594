//! Similarity exponents of the self-similar family and the singular-locus geometry
//! of the reduced phase-plane equation.
//!
//! Under the ansatz `T = t^-α f(η)`, `q = t^-δ g(η)`, `η = r / t^β` the dimensionless
//! system closes only when
//!
//! ```text
//! α = 1/(ω+1),  β = 1/(2(ω+1)),  δ = (2ω+3)/(2(ω+1)),  ε = ω+1
//! ```
//!
//! Every finite `f64` is a dyadic rational, so the exponents are evaluated exactly in
//! `BigRational` and rounded once. The printed tuples for ω = 0 and ω = −1/2 are
//! therefore reproduced bit-for-bit.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The tuple (ω, α, β, δ, ε) of one self-similar family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityExponents {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub epsilon: f64,
}

/// Exact rational form of [`SimilarityExponents`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactExponents {
    pub omega: BigRational,
    pub alpha: BigRational,
    pub beta: BigRational,
    pub delta: BigRational,
    pub epsilon: BigRational,
}

impl ExactExponents {
    pub fn to_f64(&self) -> SimilarityExponents {
        SimilarityExponents {
            omega: rational_to_f64(&self.omega),
            alpha: rational_to_f64(&self.alpha),
            beta: rational_to_f64(&self.beta),
            delta: rational_to_f64(&self.delta),
            epsilon: rational_to_f64(&self.epsilon),
        }
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn check_omega(omega: f64) -> Result<()> {
    if !omega.is_finite() {
        return Err(Error::Domain(format!("omega must be finite, got {omega}")));
    }
    if omega <= -1.0 {
        return Err(Error::Domain(format!(
            "omega must satisfy omega > -1 (got {omega}); the family degenerates at omega = -1"
        )));
    }
    Ok(())
}

/// Exact exponents for a rational ω.
pub fn derive_exact(omega: &BigRational) -> Result<ExactExponents> {
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let shifted = omega + &one;
    if shifted <= BigRational::zero() {
        return Err(Error::Domain(format!(
            "omega must satisfy omega > -1 (got {omega})"
        )));
    }
    let alpha = shifted.recip();
    let beta = &alpha / &two;
    let delta = &beta + &one;
    Ok(ExactExponents {
        omega: omega.clone(),
        alpha,
        beta,
        delta,
        epsilon: shifted,
    })
}

/// Exponents for ω given as a float. The value is taken as the exact rational it
/// represents.
pub fn derive_exponents(omega: f64) -> Result<SimilarityExponents> {
    check_omega(omega)?;
    let exact = BigRational::from_float(omega)
        .ok_or_else(|| Error::Domain(format!("omega {omega} is not finite")))?;
    Ok(derive_exact(&exact)?.to_f64())
}

impl SimilarityExponents {
    pub fn new(omega: f64) -> Result<Self> {
        derive_exponents(omega)
    }
}

/// Location of the singular locus `(ω+1)x^(ω+1) = ω+2` of the phase-plane equation and
/// the ordinate of the critical point on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularGeometry {
    pub x_star: f64,
    pub y_c: f64,
}

/// `x_star = ((ω+2)/(ω+1))^(1/(ω+1))`, `y_c = 4(ω+1)² x_star^(2ω+1)`.
///
/// When `1/(ω+1)` is an integer the power is taken in exact arithmetic.
pub fn singular_geometry(omega: f64) -> Result<SingularGeometry> {
    check_omega(omega)?;
    let w1 = omega + 1.0;

    let exact = BigRational::from_float(omega).expect("finite omega");
    let shifted = &exact + BigRational::one();
    let inv = shifted.recip();
    let ratio = (&shifted + BigRational::one()) / &shifted;

    let x_star = if inv.is_integer() && inv.to_integer() <= BigInt::from(64) {
        let n = inv.to_integer().to_i32().expect("small integer");
        rational_to_f64(&num_traits::pow(ratio.clone(), n as usize))
    } else {
        (ratio.to_f64().unwrap_or(f64::NAN)).powf(1.0 / w1)
    };
    if !x_star.is_finite() || x_star <= 0.0 {
        return Err(Error::Domain(format!(
            "x_star = ((omega+2)/(omega+1))^(1/(omega+1)) is not representable for omega = {omega}"
        )));
    }

    // 2ω+1 = 2(ω+1) − 1 is an integer only for ω+1 ∈ {1/2, 1, ...}; the common cases
    // ω = 0 and ω = −1/2 give the exponents 1 and 0.
    let power = 2.0 * omega + 1.0;
    let x_pow = if power == 0.0 {
        1.0
    } else if power == 1.0 {
        x_star
    } else {
        x_star.powf(power)
    };
    let y_c = 4.0 * w1 * w1 * x_pow;
    if !y_c.is_finite() || y_c <= 0.0 {
        return Err(Error::Domain(format!(
            "critical ordinate y_c is not representable for omega = {omega}"
        )));
    }
    Ok(SingularGeometry { x_star, y_c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn omega_zero_tuple_is_exact() {
        let e = derive_exponents(0.0).unwrap();
        assert_eq!((e.alpha, e.beta, e.delta, e.epsilon), (1.0, 0.5, 1.5, 1.0));
    }

    #[test]
    fn omega_minus_half_tuple_is_exact() {
        let e = derive_exponents(-0.5).unwrap();
        assert_eq!((e.alpha, e.beta, e.delta, e.epsilon), (2.0, 1.0, 2.0, 0.5));
    }

    #[test]
    fn omega_one_by_substitution() {
        let e = derive_exponents(1.0).unwrap();
        assert_eq!((e.alpha, e.beta, e.delta, e.epsilon), (0.5, 0.25, 1.25, 2.0));
    }

    #[test]
    fn exact_route_keeps_thirds() {
        // ω = −2/3 has no finite binary form; the rational route gives α = 3 exactly.
        let e = derive_exact(&rat(-2, 3)).unwrap();
        assert_eq!(e.alpha, rat(3, 1));
        assert_eq!(e.beta, rat(3, 2));
        assert_eq!(e.delta, rat(5, 2));
        assert_eq!(e.epsilon, rat(1, 3));
    }

    #[test]
    fn rejects_omega_at_or_below_minus_one() {
        assert!(matches!(derive_exponents(-1.0), Err(Error::Domain(_))));
        assert!(matches!(derive_exponents(-3.0), Err(Error::Domain(_))));
        assert!(matches!(derive_exponents(f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(derive_exact(&rat(-1, 1)), Err(Error::Domain(_))));
        assert!(matches!(singular_geometry(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn singular_geometry_printed_cases() {
        let g = singular_geometry(0.0).unwrap();
        assert_eq!((g.x_star, g.y_c), (2.0, 8.0));
        let g = singular_geometry(-0.5).unwrap();
        assert_eq!((g.x_star, g.y_c), (9.0, 1.0));
    }

    /// Bisection on `(ω+1)x^(ω+1) − (ω+2)`, independent of the closed form.
    fn x_star_by_bisection(omega: f64) -> f64 {
        let h = |x: f64| (omega + 1.0) * x.powf(omega + 1.0) - (omega + 2.0);
        let (mut lo, mut hi) = (1.0, 2.0);
        while h(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn omega_one_matches_bisection() {
        let g = singular_geometry(1.0).unwrap();
        let oracle = x_star_by_bisection(1.0);
        assert!((oracle - 1.224_744_871_391_589).abs() < 1e-12);
        assert!((g.x_star - oracle).abs() < 1e-12);
        assert!((g.y_c - 16.0 * oracle.powi(3)).abs() < 1e-10);
    }

    #[test]
    fn very_close_to_minus_one_is_unrepresentable() {
        assert!(matches!(singular_geometry(-0.999), Err(Error::Domain(_))));
    }

    proptest! {
        #[test]
        fn exponent_relations(omega in -0.999f64..10.0) {
            let e = derive_exponents(omega).unwrap();
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1e-300);
            prop_assert!(rel(e.alpha, 2.0 * e.beta) <= 1e-14);
            prop_assert!(rel(e.delta, e.beta + 1.0) <= 1e-14);
            prop_assert!((e.alpha * (omega + 1.0) - 1.0).abs() <= 1e-14);
            prop_assert!((e.alpha * e.epsilon - 1.0).abs() <= 1e-14);
        }

        #[test]
        fn x_star_solves_denominator(omega in -0.9f64..5.0) {
            let g = singular_geometry(omega).unwrap();
            let residual = (omega + 1.0) * g.x_star.powf(omega + 1.0) - (omega + 2.0);
            prop_assert!(residual.abs() < 1e-12, "residual {residual}");
            prop_assert!(g.x_star.is_finite() && g.x_star > 0.0 && g.y_c > 0.0);
            let oracle = x_star_by_bisection(omega);
            prop_assert!((g.x_star - oracle).abs() <= 1e-12 * oracle.max(1.0));
        }
    }
}
