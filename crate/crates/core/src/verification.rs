//! Residual oracles.
//!
//! Phase-plane curves are checked with 4th-order finite differences (five-point Fornberg
//! weights, valid on nonuniform samples). Field grids are checked against
//!
//! ```text
//! q_t + T^ε q + T^(ε+ω) T_r = 0,      T_t + q_r + q/r = 0
//! ```
//!
//! with 2nd-order central differences at interior points.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::SimilarityExponents;
use crate::fields::FieldGrid;
use crate::phase_plane::{rhs_linear, PhasePoint, PhaseTrajectory};

/// Width, in grid cells, of the band skipped on each side of a front.
pub const FRONT_BAND_CELLS: usize = 3;

const STENCIL: usize = 5;

/// Weights of the first derivative at `z` over the nodes `x` (Fornberg's recursion).
pub fn first_derivative_weights(z: f64, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![[0.0f64; 2]; n];
    if n == 0 {
        return Vec::new();
    }
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

fn check_samples(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::Spacing(format!("{} abscissae but {} ordinates", xs.len(), ys.len())));
    }
    if xs.len() < STENCIL {
        return Err(Error::Spacing(format!(
            "{} samples are too few for the {STENCIL}-point stencil",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Spacing("samples must be finite".into()));
    }
    let increasing = xs.windows(2).all(|w| w[1] > w[0]);
    let decreasing = xs.windows(2).all(|w| w[1] < w[0]);
    if !increasing && !decreasing {
        return Err(Error::Spacing("samples must be strictly monotone in x".into()));
    }
    Ok(())
}

/// 4th-order derivative estimate of sampled `y(x)` at every sample.
pub fn sampled_derivative(xs: &[f64], ys: &[f64]) -> Result<Vec<f64>> {
    check_samples(xs, ys)?;
    let n = xs.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(STENCIL / 2).min(n - STENCIL);
            let nodes = &xs[lo..lo + STENCIL];
            first_derivative_weights(xs[i], nodes)
                .iter()
                .zip(&ys[lo..lo + STENCIL])
                .map(|(w, y)| w * y)
                .sum()
        })
        .collect())
}

/// Pointwise `|y'(x) − rhs(x, y)|` for an arbitrary right-hand side.
pub fn ode_residuals_with<F>(xs: &[f64], ys: &[f64], rhs: F) -> Result<Vec<f64>>
where
    F: Fn(PhasePoint) -> Result<f64>,
{
    let dy = sampled_derivative(xs, ys)?;
    xs.iter()
        .zip(ys)
        .zip(dy)
        .map(|((&x, &y), d)| Ok((d - rhs(PhasePoint::new(x, y))?).abs()))
        .collect()
}

/// `max |y'(x) − rhs_linear(ω; x, y)|` over the samples.
///
/// Samples must stay off the singular locus; a sample on it surfaces the singularity
/// error of `rhs_linear`.
pub fn ode_residual_linear(omega: f64, xs: &[f64], ys: &[f64]) -> Result<f64> {
    let r = ode_residuals_with(xs, ys, |p| rhs_linear(omega, p))?;
    Ok(r.into_iter().fold(0.0, f64::max))
}

/// Relative ODE residual `|y' − rhs| / max(1, |rhs|)` of a stored trajectory, using its
/// dense output (`subdivisions` extra samples per step) and only the part before locus
/// contact that stays at least `margin · max(1, x_star)` away from the locus.
pub fn trajectory_ode_residual(traj: &PhaseTrajectory, subdivisions: usize, margin: f64) -> Result<f64> {
    let band = margin * traj.geometry.x_star.max(1.0);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for p in traj.refined_points(subdivisions) {
        if (p.x - traj.geometry.x_star).abs() <= band {
            break;
        }
        if let Some(&last) = xs.last() {
            if p.x == last {
                continue;
            }
        }
        xs.push(p.x);
        ys.push(p.y);
    }
    let dy = sampled_derivative(&xs, &ys)?;
    let mut worst: f64 = 0.0;
    for ((&x, &y), d) in xs.iter().zip(&ys).zip(dy) {
        let slope = rhs_linear(traj.omega, PhasePoint::new(x, y))?;
        worst = worst.max((d - slope).abs() / slope.abs().max(1.0));
    }
    Ok(worst)
}

/// Points skipped by `pde_residual`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedBand {
    pub band_cells: usize,
    pub eta0: Option<f64>,
    /// Interior points within the band around the front.
    pub front_points: usize,
    /// Interior points where `T < 0`, or `T = 0` with `ε + ω < 0`.
    pub singular_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub omega: f64,
    pub cattaneo_max: f64,
    pub energy_max: f64,
    /// Root-mean-square over the evaluated points.
    pub cattaneo_l2: f64,
    pub energy_l2: f64,
    pub dr: f64,
    pub dt: f64,
    pub evaluated_points: usize,
    pub excluded_band: ExcludedBand,
}

fn uniform_step(name: &str, v: &[f64]) -> Result<f64> {
    if v.len() < 5 {
        return Err(Error::Grid(format!("{name} axis needs at least 5 points, got {}", v.len())));
    }
    let h = (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64;
    let tol = 1e-6 * h;
    if v.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > tol) {
        return Err(Error::Grid(format!("{name} axis is not uniform")));
    }
    Ok(h)
}

/// `T^p` with `0^p = 0` for `p > 0` and `0^0 = 1`; `None` where undefined.
fn power(t: f64, p: f64) -> Option<f64> {
    if t < 0.0 {
        None
    } else if t == 0.0 {
        match p {
            p if p > 0.0 => Some(0.0),
            p if p == 0.0 => Some(1.0),
            _ => None,
        }
    } else {
        Some(t.powf(p))
    }
}

#[derive(Default, Clone, Copy)]
struct RowTally {
    c_max: f64,
    e_max: f64,
    c_sq: f64,
    e_sq: f64,
    points: usize,
    front: usize,
    singular: usize,
}

/// Finite-difference residuals of the governing system on a uniform grid.
///
/// When `grid.eta0` is set, interior points whose 7×7 neighbourhood (3 cells each way)
/// contains points on both sides of `η = η0` are skipped.
pub fn pde_residual(grid: &FieldGrid, exponents: &SimilarityExponents) -> Result<ResidualReport> {
    grid.validate()?;
    let dr = uniform_step("r", &grid.r_values)?;
    let dt = uniform_step("t", &grid.t_values)?;
    let (nt, nr) = grid.shape();
    let eps = exponents.epsilon;
    let eps_omega = exponents.epsilon + exponents.omega;
    let beta = exponents.beta;
    let band = FRONT_BAND_CELLS;

    let outside = |i: usize, j: usize, eta0: f64| grid.r_values[i] * grid.t_values[j].powf(-beta) > eta0;
    let straddles = |i: usize, j: usize| -> bool {
        let Some(eta0) = grid.eta0 else { return false };
        let side = outside(i, j, eta0);
        let (i0, i1) = (i.saturating_sub(band), (i + band).min(nr - 1));
        let (j0, j1) = (j.saturating_sub(band), (j + band).min(nt - 1));
        (j0..=j1).any(|jj| (i0..=i1).any(|ii| outside(ii, jj, eta0) != side))
    };

    let temp = &grid.temperature;
    let flux = &grid.flux;
    let rows: Vec<RowTally> = (1..nt - 1)
        .into_par_iter()
        .map(|j| {
            let mut tally = RowTally::default();
            for i in 1..nr - 1 {
                if straddles(i, j) {
                    tally.front += 1;
                    continue;
                }
                let tv = temp[[j, i]];
                let qv = flux[[j, i]];
                let (Some(t_eps), Some(t_eps_omega)) = (power(tv, eps), power(tv, eps_omega)) else {
                    tally.singular += 1;
                    continue;
                };
                let t_r = (temp[[j, i + 1]] - temp[[j, i - 1]]) / (2.0 * dr);
                let t_t = (temp[[j + 1, i]] - temp[[j - 1, i]]) / (2.0 * dt);
                let q_r = (flux[[j, i + 1]] - flux[[j, i - 1]]) / (2.0 * dr);
                let q_t = (flux[[j + 1, i]] - flux[[j - 1, i]]) / (2.0 * dt);
                let cattaneo = (q_t + t_eps * qv + t_eps_omega * t_r).abs();
                let energy = (t_t + q_r + qv / grid.r_values[i]).abs();
                tally.c_max = tally.c_max.max(cattaneo);
                tally.e_max = tally.e_max.max(energy);
                tally.c_sq += cattaneo * cattaneo;
                tally.e_sq += energy * energy;
                tally.points += 1;
            }
            tally
        })
        .collect();

    let total = rows.iter().fold(RowTally::default(), |acc, r| RowTally {
        c_max: acc.c_max.max(r.c_max),
        e_max: acc.e_max.max(r.e_max),
        c_sq: acc.c_sq + r.c_sq,
        e_sq: acc.e_sq + r.e_sq,
        points: acc.points + r.points,
        front: acc.front + r.front,
        singular: acc.singular + r.singular,
    });
    if total.points == 0 {
        return Err(Error::AllExcluded);
    }
    let n = total.points as f64;
    Ok(ResidualReport {
        omega: exponents.omega,
        cattaneo_max: total.c_max,
        energy_max: total.e_max,
        cattaneo_l2: (total.c_sq / n).sqrt(),
        energy_l2: (total.e_sq / n).sqrt(),
        dr,
        dt,
        evaluated_points: total.points,
        excluded_band: ExcludedBand {
            band_cells: band,
            eta0: grid.eta0,
            front_points: total.front,
            singular_points: total.singular,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidualNorm {
    CattaneoMax,
    EnergyMax,
    CattaneoL2,
    EnergyL2,
}

impl ResidualNorm {
    pub fn of(self, report: &ResidualReport) -> f64 {
        match self {
            ResidualNorm::CattaneoMax => report.cattaneo_max,
            ResidualNorm::EnergyMax => report.energy_max,
            ResidualNorm::CattaneoL2 => report.cattaneo_l2,
            ResidualNorm::EnergyL2 => report.energy_l2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub norm: ResidualNorm,
    pub spacings: Vec<f64>,
    pub norms: Vec<f64>,
    pub reports: Vec<ResidualReport>,
    /// Least-squares slope of `ln(norm)` against `ln(spacing)`.
    pub estimated_order: f64,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Precondition("need at least two (x, y) pairs".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Numerical("log-log fit needs positive finite values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Precondition("spacings must differ".into()));
    }
    Ok(sxy / sxx)
}

/// Builds a grid per spacing, evaluates `pde_residual` and fits the observed order.
pub fn convergence_study<B>(
    mut builder: B,
    spacings: &[f64],
    exponents: &SimilarityExponents,
    norm: ResidualNorm,
) -> Result<ConvergenceStudy>
where
    B: FnMut(f64) -> Result<FieldGrid>,
{
    if spacings.len() < 3 {
        return Err(Error::Precondition(format!(
            "a convergence study needs at least 3 spacings, got {}",
            spacings.len()
        )));
    }
    if spacings.windows(2).any(|w| w[1] >= w[0]) || spacings.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::Precondition("spacings must be positive and strictly decreasing".into()));
    }
    let reports = spacings
        .iter()
        .map(|&h| pde_residual(&builder(h)?, exponents))
        .collect::<Result<Vec<_>>>()?;
    let norms: Vec<f64> = reports.iter().map(|r| norm.of(r)).collect();
    let estimated_order = log_log_slope(spacings, &norms)?;
    Ok(ConvergenceStudy { norm, spacings: spacings.to_vec(), norms, reports, estimated_order })
}

const IDENTITY_SAMPLES: usize = 201;

fn identity_residual(u: impl Fn(f64) -> f64, v: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let xs: Vec<f64> = (0..IDENTITY_SAMPLES)
        .map(|k| a + (b - a) * k as f64 / (IDENTITY_SAMPLES - 1) as f64)
        .collect();
    let diff: Vec<f64> = xs.iter().map(|&x| u(x) - v(x)).collect();
    match sampled_derivative(&xs, &diff) {
        Ok(d) => d.into_iter().fold(0.0, |m, r| m.max(r.abs())),
        Err(_) => f64::NAN,
    }
}

/// `max |(η g)' − β(η² f)'|` on `[a, b]` for a given flux shape `g`.
pub fn energy_identity_residual<F, G>(f: F, g: G, beta: f64, a: f64, b: f64) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    identity_residual(|eta| eta * g(eta), |eta| beta * eta * eta * f(eta), a, b)
}

/// [`energy_identity_residual`] with the coupling `g = βηf`.
pub fn energy_identity_check<F>(f: F, beta: f64, a: f64, b: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    energy_identity_residual(&f, |eta| beta * eta * f(eta), beta, a, b)
}
