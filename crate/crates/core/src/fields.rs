//! Space-time fields lifted from shape profiles:
//! `T = t^−α f(η)`, `q = t^−δ g(η)`, `η = r t^−β`, plus the coefficient fields
//! `κ = t^(−ω/(ω+1)) f^ω` and `τ = t^−1 f^(ω+1)` (with `κ0 = τ0 = 1`).

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::closed_forms::omega_half_fields;
use crate::error::{Error, Result};
use crate::exponents::{derive_exponents, SimilarityExponents};
use crate::profile::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldSource {
    NumericProfile,
    ClosedForm,
}

/// `T` and `q` sampled on `r_values × t_values`. Matrices are indexed `[[j, i]]` with
/// `j` over time and `i` over radius.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub r_values: Vec<f64>,
    pub t_values: Vec<f64>,
    pub temperature: Array2<f64>,
    pub flux: Array2<f64>,
    pub exponents: SimilarityExponents,
    pub eta0: Option<f64>,
    pub source: FieldSource,
}

impl FieldGrid {
    pub fn omega(&self) -> f64 {
        self.exponents.omega
    }

    pub fn eta(&self, i: usize, j: usize) -> f64 {
        self.r_values[i] * self.t_values[j].powf(-self.exponents.beta)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.t_values.len(), self.r_values.len())
    }

    /// Structural checks shared by every consumer.
    pub fn validate(&self) -> Result<()> {
        let expected = (self.t_values.len(), self.r_values.len());
        if self.temperature.dim() != expected || self.flux.dim() != expected {
            return Err(Error::Grid(format!(
                "matrix shapes {:?}/{:?} do not match axes {:?}",
                self.temperature.dim(),
                self.flux.dim(),
                expected
            )));
        }
        check_axis("r", &self.r_values)?;
        check_axis("t", &self.t_values)?;
        Ok(())
    }
}

fn check_axis(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Grid(format!("{name} axis is empty")));
    }
    if v.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::Grid(format!("{name} values must be positive and finite")));
    }
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid(format!("{name} values must be strictly increasing")));
    }
    Ok(())
}

/// `n` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

pub fn reconstruct_fields(profile: &Profile, r_values: &[f64], t_values: &[f64]) -> Result<FieldGrid> {
    check_axis("r", r_values)?;
    check_axis("t", t_values)?;
    let e = profile.exponents;
    let (nt, nr) = (t_values.len(), r_values.len());
    let mut temperature = Array2::zeros((nt, nr));
    let mut flux = Array2::zeros((nt, nr));
    for (j, &t) in t_values.iter().enumerate() {
        let t_alpha = t.powf(-e.alpha);
        let t_delta = t.powf(-e.delta);
        let t_beta = t.powf(-e.beta);
        for (i, &r) in r_values.iter().enumerate() {
            let eta = r * t_beta;
            let f = profile.f_at(eta)?;
            temperature[[j, i]] = t_alpha * f;
            flux[[j, i]] = t_delta * e.beta * eta * f;
        }
    }
    Ok(FieldGrid {
        r_values: r_values.to_vec(),
        t_values: t_values.to_vec(),
        temperature,
        flux,
        exponents: e,
        eta0: profile.shock.map(|s| s.eta0),
        source: if profile.is_closed_form() { FieldSource::ClosedForm } else { FieldSource::NumericProfile },
    })
}

/// The explicit ω = −1/2 fields evaluated directly, without a profile.
pub fn omega_half_field_grid(r_values: &[f64], t_values: &[f64]) -> Result<FieldGrid> {
    check_axis("r", r_values)?;
    check_axis("t", t_values)?;
    let (nt, nr) = (t_values.len(), r_values.len());
    let mut temperature = Array2::zeros((nt, nr));
    let mut flux = Array2::zeros((nt, nr));
    for (j, &t) in t_values.iter().enumerate() {
        for (i, &r) in r_values.iter().enumerate() {
            let (tv, qv) = omega_half_fields(r, t)?;
            temperature[[j, i]] = tv;
            flux[[j, i]] = qv;
        }
    }
    Ok(FieldGrid {
        r_values: r_values.to_vec(),
        t_values: t_values.to_vec(),
        temperature,
        flux,
        exponents: derive_exponents(-0.5)?,
        eta0: None,
        source: FieldSource::ClosedForm,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientFields {
    pub kappa: Array2<f64>,
    pub tau: Array2<f64>,
    /// Points where `f = 0` and ω < 0, so `f^ω` has no value. `kappa` is NaN there.
    pub undefined: Array2<bool>,
}

impl CoefficientFields {
    pub fn undefined_count(&self) -> usize {
        self.undefined.iter().filter(|u| **u).count()
    }
}

pub fn coefficient_fields(profile: &Profile, r_values: &[f64], t_values: &[f64]) -> Result<CoefficientFields> {
    check_axis("r", r_values)?;
    check_axis("t", t_values)?;
    let e = profile.exponents;
    let omega = e.omega;
    let shape = (t_values.len(), r_values.len());
    let mut kappa = Array2::zeros(shape);
    let mut tau = Array2::zeros(shape);
    let mut undefined = Array2::from_elem(shape, false);
    for (j, &t) in t_values.iter().enumerate() {
        let t_kappa = t.powf(-omega / (omega + 1.0));
        let t_beta = t.powf(-e.beta);
        for (i, &r) in r_values.iter().enumerate() {
            let f = profile.f_at(r * t_beta)?;
            if f == 0.0 {
                if omega < 0.0 {
                    kappa[[j, i]] = f64::NAN;
                    undefined[[j, i]] = true;
                }
                continue;
            }
            kappa[[j, i]] = t_kappa * f.powf(omega);
            tau[[j, i]] = f.powf(omega + 1.0) / t;
        }
    }
    Ok(CoefficientFields { kappa, tau, undefined })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontSample {
    pub t: f64,
    pub r_front: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontTrajectory {
    pub eta0: f64,
    pub beta: f64,
    pub samples: Vec<FrontSample>,
}

/// `r_front = η0 t^β`, `dr_front/dt = β η0 t^(β−1)`.
pub fn front_trajectory(profile: &Profile, t_values: &[f64]) -> Result<FrontTrajectory> {
    let front = profile.shock.ok_or(Error::NoFront)?;
    check_axis("t", t_values)?;
    let beta = profile.exponents.beta;
    let samples = t_values
        .iter()
        .map(|&t| FrontSample {
            t,
            r_front: front.eta0 * t.powf(beta),
            speed: beta * front.eta0 * t.powf(beta - 1.0),
        })
        .collect();
    Ok(FrontTrajectory { eta0: front.eta0, beta, samples })
}

/// The self-similar group action: values at `(λ^β r, λ t)` are `λ^−α T` and `λ^−δ q`.
pub fn scaling_transform(grid: &FieldGrid, lambda: f64) -> Result<FieldGrid> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Precondition(format!("lambda must be positive, got {lambda}")));
    }
    let e = grid.exponents;
    let r_scale = lambda.powf(e.beta);
    let t_scale = lambda.powf(-e.alpha);
    let q_scale = lambda.powf(-e.delta);
    Ok(FieldGrid {
        r_values: grid.r_values.iter().map(|r| r * r_scale).collect(),
        t_values: grid.t_values.iter().map(|t| t * lambda).collect(),
        temperature: grid.temperature.mapv(|v| v * t_scale),
        flux: grid.flux.mapv(|v| v * q_scale),
        exponents: e,
        eta0: grid.eta0,
        source: grid.source,
    })
}
