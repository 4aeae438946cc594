//! The two analytic solution families of the phase-plane equation and the explicit
//! ω = −1/2 fields.
//!
//! * ω = 0: `y = 8 + √((x−2)/x) · (c1 − 8 ln(√x + √(x−2)))` for `x > 2`.
//! * ω = −1/2: `y = c2 · x^(−2/3) (3 − √x)^(4/3)` for `0 < x < 9`. This family solves
//!   the homogeneous equation `dy/dx = 2y/(x(√x−3))`; the inhomogeneous ω = −1/2 form
//!   `dy/dx = 2(y−1)/(x(√x−3))` differs from it by exactly `2/(x(√x−3))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Omega0Family {
    pub c1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaHalfFamily {
    pub c2: f64,
}

fn omega0_log(x: f64) -> f64 {
    (x.sqrt() + (x - 2.0).sqrt()).ln()
}

pub fn omega0_eval(family: Omega0Family, x: f64) -> Result<f64> {
    if !(x > 2.0) || !x.is_finite() {
        return Err(Error::Domain(format!("omega = 0 family is defined for x > 2, got {x}")));
    }
    Ok(8.0 + ((x - 2.0) / x).sqrt() * (family.c1 - 8.0 * omega0_log(x)))
}

/// The member of the ω = 0 family through `(x0, y0)`.
pub fn omega0_solve_c1(x0: f64, y0: f64) -> Result<Omega0Family> {
    if !(x0 > 2.0) || !x0.is_finite() {
        return Err(Error::Domain(format!("omega = 0 family is defined for x > 2, got {x0}")));
    }
    if !y0.is_finite() {
        return Err(Error::Domain(format!("y0 must be finite, got {y0}")));
    }
    Ok(Omega0Family { c1: (y0 - 8.0) / ((x0 - 2.0) / x0).sqrt() + 8.0 * omega0_log(x0) })
}

impl OmegaHalfFamily {
    pub fn new(c2: f64) -> Result<Self> {
        if !(c2 > 0.0) || !c2.is_finite() {
            return Err(Error::Domain(format!("c2 must be positive, got {c2}")));
        }
        Ok(Self { c2 })
    }
}

/// `c2 · x^(−2/3) (3 − √x)^(4/3)` on `(0, 9]`, real branch.
///
/// `x = 9` is returned as exactly 0. The expression diverges like `x^(−2/3)` as
/// `x → 0`, so `x ≤ 0` is outside the domain.
pub fn omega_half_eval(family: OmegaHalfFamily, x: f64) -> Result<f64> {
    if x == 9.0 {
        return Ok(0.0);
    }
    if !(x > 0.0 && x < 9.0) {
        return Err(Error::Domain(format!("omega = -1/2 family is defined for 0 < x <= 9, got {x}")));
    }
    let gap = 3.0 - x.sqrt();
    let real_branch = gap.powi(4).cbrt();
    Ok(family.c2 * real_branch / (x * x).cbrt())
}

/// `f(η) = 9/(η^(3/2) + 1)²`, the inverse of the `c2 = 1` family under `y = η²`.
pub fn omega_half_profile(eta: f64) -> f64 {
    let s = eta * eta.sqrt() + 1.0;
    9.0 / (s * s)
}

/// `T = 9t/(r^(3/2) + t^(3/2))²`, `q = 9r/(r^(3/2) + t^(3/2))²`.
pub fn omega_half_fields(r: f64, t: f64) -> Result<(f64, f64)> {
    if !(r >= 0.0 && t >= 0.0) || (r == 0.0 && t == 0.0) || !r.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!(
            "omega = -1/2 fields need r, t >= 0, not both zero; got (r, t) = ({r}, {t})"
        )));
    }
    let s = r * r.sqrt() + t * t.sqrt();
    let d = s * s;
    Ok((9.0 * t / d, 9.0 * r / d))
}
