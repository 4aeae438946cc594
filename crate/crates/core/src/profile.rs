//! Shape profiles `f(η)`, `g(η) = βηf(η)` built from phase-plane trajectories, with the
//! shock-front record when the trajectory ends on the singular locus.

use serde::{Deserialize, Serialize};

use crate::closed_forms;
use crate::error::{Error, Result};
use crate::exponents::{derive_exponents, singular_geometry, SimilarityExponents};
use crate::phase_plane::{
    integrate_trajectory, phase_denominator, phase_numerator, FlowDirection, PhasePoint,
    Termination, TrajectoryControls,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrontKind {
    TurningPoint,
    CriticalPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShockFront {
    pub eta0: f64,
    pub y_front: f64,
    /// Value of `f` immediately behind the jump.
    pub amplitude: f64,
    pub kind: FrontKind,
}

/// Monotone cubic Hermite interpolant of `f` as a function of `y = η²`.
///
/// Node slopes are the exact phase-plane slopes `dx/dy = D/N`, limited with the
/// Fritsch–Carlson condition so the interpolant never leaves the data range.
#[derive(Debug, Clone, PartialEq)]
struct HermiteInY {
    y: Vec<f64>,
    f: Vec<f64>,
    slope: Vec<f64>,
}

impl HermiteInY {
    fn new(y: Vec<f64>, f: Vec<f64>, mut slope: Vec<f64>) -> Self {
        let n = y.len();
        for k in 0..n.saturating_sub(1) {
            let h = y[k + 1] - y[k];
            let secant = (f[k + 1] - f[k]) / h;
            if secant == 0.0 {
                slope[k] = 0.0;
                slope[k + 1] = 0.0;
                continue;
            }
            for idx in [k, k + 1] {
                if slope[idx] * secant < 0.0 {
                    slope[idx] = 0.0;
                }
            }
            let a = slope[k] / secant;
            let b = slope[k + 1] / secant;
            let r2 = a * a + b * b;
            if r2 > 9.0 {
                let tau = 3.0 / r2.sqrt();
                slope[k] = tau * a * secant;
                slope[k + 1] = tau * b * secant;
            }
        }
        Self { y, f, slope }
    }

    fn y_max(&self) -> f64 {
        *self.y.last().expect("non-empty")
    }

    fn eval(&self, y: f64) -> f64 {
        let n = self.y.len();
        if n == 1 {
            return self.f[0];
        }
        let k = self.y.partition_point(|&v| v <= y).clamp(1, n - 1) - 1;
        let h = self.y[k + 1] - self.y[k];
        let t = (y - self.y[k]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.f[k] + h10 * h * self.slope[k] + h01 * self.f[k + 1] + h11 * h * self.slope[k + 1]
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Shape {
    Sampled(HermiteInY),
    /// `f = 9/(η^(3/2) + 1)²`, the exact ω = −1/2 profile.
    OmegaHalf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub omega: f64,
    pub exponents: SimilarityExponents,
    pub eta_grid: Vec<f64>,
    pub f_values: Vec<f64>,
    pub g_values: Vec<f64>,
    pub shock: Option<ShockFront>,
    /// How the underlying trajectory ended; `None` for closed-form profiles.
    pub termination: Option<Termination>,
    shape: Shape,
}

impl Profile {
    /// The ω = −1/2 closed-form profile sampled on `eta_grid`.
    pub fn omega_half_closed_form(eta_grid: &[f64]) -> Result<Self> {
        check_grid(eta_grid)?;
        let exponents = derive_exponents(-0.5)?;
        let f_values: Vec<f64> = eta_grid.iter().map(|&e| closed_forms::omega_half_profile(e)).collect();
        let g_values = eta_grid.iter().zip(&f_values).map(|(e, f)| exponents.beta * e * f).collect();
        Ok(Self {
            omega: -0.5,
            exponents,
            eta_grid: eta_grid.to_vec(),
            f_values,
            g_values,
            shock: None,
            termination: None,
            shape: Shape::OmegaHalf,
        })
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.shape, Shape::OmegaHalf)
    }

    pub fn beta(&self) -> f64 {
        self.exponents.beta
    }

    /// Largest η where the profile is defined: unbounded beyond a front (f = 0 there) and
    /// for closed forms.
    pub fn eta_max(&self) -> f64 {
        match (&self.shape, &self.shock) {
            (Shape::OmegaHalf, _) | (_, Some(_)) => f64::INFINITY,
            (Shape::Sampled(h), None) => h.y_max().sqrt(),
        }
    }

    pub fn f_at(&self, eta: f64) -> Result<f64> {
        if !(eta >= 0.0) {
            return Err(Error::Precondition(format!("eta must be nonnegative, got {eta}")));
        }
        match &self.shape {
            Shape::OmegaHalf => Ok(closed_forms::omega_half_profile(eta)),
            Shape::Sampled(h) => {
                if let Some(front) = &self.shock {
                    if eta > front.eta0 {
                        return Ok(0.0);
                    }
                }
                let y = eta * eta;
                if y > h.y_max() {
                    if self.shock.is_some() {
                        // Rounding between eta0 and sqrt(y_front).
                        return Ok(h.eval(h.y_max()));
                    }
                    return Err(Error::Coverage { eta, eta_max: h.y_max().sqrt() });
                }
                Ok(h.eval(y).max(0.0))
            }
        }
    }

    pub fn g_at(&self, eta: f64) -> Result<f64> {
        Ok(self.exponents.beta * eta * self.f_at(eta)?)
    }
}

fn check_grid(eta_grid: &[f64]) -> Result<()> {
    if eta_grid.is_empty() {
        return Err(Error::Grid("eta grid is empty".into()));
    }
    if eta_grid.iter().any(|e| !(*e >= 0.0) || !e.is_finite()) {
        return Err(Error::Grid("eta grid must hold finite nonnegative values".into()));
    }
    if eta_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("eta grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Number of zero samples appended past a front, spaced by 5% of η0.
const ZERO_TAIL: usize = 20;

/// Integrate the shape equation from the center `(f, η) = (f_center, 0)` and convert the
/// trajectory to a profile.
///
/// For ω > −1/2 the center amplitude must lie above `x_star`; below it the trajectory
/// starts on the wrong side of the singular locus.
pub fn build_profile(omega: f64, f_center: f64, controls: &TrajectoryControls) -> Result<Profile> {
    let exponents = derive_exponents(omega)?;
    let geometry = singular_geometry(omega)?;
    if !(f_center > 0.0) || !f_center.is_finite() {
        return Err(Error::Precondition(format!("f_center must be positive, got {f_center}")));
    }
    if omega > -0.5 && f_center <= geometry.x_star {
        return Err(Error::Precondition(format!(
            "f_center = {f_center} must exceed x_star = {} for omega = {omega} \
             (the trajectory would start on the wrong side of the singular locus)",
            geometry.x_star
        )));
    }
    let controls = TrajectoryControls { direction: FlowDirection::Inward, ..*controls };
    let trajectory = integrate_trajectory(omega, PhasePoint::new(f_center, 0.0), &controls)?;
    if trajectory.termination == Termination::StepLimit {
        return Err(Error::Numerical(format!(
            "profile integration for omega = {omega} hit the step limit after {} steps at {:?}",
            trajectory.steps,
            trajectory.end()
        )));
    }

    // A maximum of y(x) before the locus makes the inverse f(η) double valued past it;
    // f is cut to zero there. Otherwise the front sits where the trajectory ended.
    let turning = trajectory.turning_point;
    let y_limit = turning.map_or(f64::INFINITY, |(p, _)| p.y);

    // The profile needs y strictly increasing; roundoff wiggles next to the critical
    // point are dropped.
    let mut samples: Vec<PhasePoint> = Vec::new();
    for p in trajectory.refined_points(controls.dense_subdivisions) {
        if p.y >= y_limit {
            break;
        }
        if samples.last().map_or(true, |q: &PhasePoint| p.y > q.y) {
            samples.push(p);
        }
    }
    if let Some((p, _)) = turning {
        samples.push(p);
    }

    let shock = if turning.is_some() || trajectory.termination.is_front() {
        let last = *samples.last().expect("start sample");
        if !(last.y > 0.0) {
            return Err(Error::Numerical(format!(
                "front for omega = {omega} sits at eta = 0; no profile to build"
            )));
        }
        Some(ShockFront {
            eta0: last.y.sqrt(),
            y_front: last.y,
            amplitude: last.x,
            kind: if turning.is_some() || trajectory.termination == Termination::SingularLocusHit {
                FrontKind::TurningPoint
            } else {
                FrontKind::CriticalPoint
            },
        })
    } else {
        None
    };

    let n = samples.len();
    let ys: Vec<f64> = samples.iter().map(|p| p.y).collect();
    let fs: Vec<f64> = samples.iter().map(|p| p.x).collect();
    let mut slopes = Vec::with_capacity(n);
    for (k, p) in samples.iter().enumerate() {
        let num = phase_numerator(omega, *p);
        let den = phase_denominator(omega, p.x);
        let secant = || {
            if n < 2 {
                0.0
            } else if k == 0 {
                (fs[1] - fs[0]) / (ys[1] - ys[0])
            } else {
                (fs[k] - fs[k - 1]) / (ys[k] - ys[k - 1])
            }
        };
        let slope = if num.abs() > controls.critical_tolerance(&geometry) {
            den / num
        } else {
            secant()
        };
        slopes.push(slope);
    }

    let mut eta_grid: Vec<f64> = ys.iter().map(|y| y.sqrt()).collect();
    let mut f_values = fs.clone();
    if let Some(front) = &shock {
        for k in 1..=ZERO_TAIL {
            eta_grid.push(front.eta0 * (1.0 + 0.05 * k as f64));
            f_values.push(0.0);
        }
    }
    let g_values = eta_grid.iter().zip(&f_values).map(|(e, f)| exponents.beta * e * f).collect();

    Ok(Profile {
        omega,
        exponents,
        eta_grid,
        f_values,
        g_values,
        shock,
        termination: Some(trajectory.termination),
        shape: Shape::Sampled(HermiteInY::new(ys, fs, slopes)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    use crate::closed_forms::{omega0_eval, omega0_solve_c1};

    /// Maximum of the ω = 0 closed-form member through `(f_center, 0)`, by golden
    /// section on `x ∈ (2, f_center)`.
    fn closed_form_turning_point(f_center: f64) -> (f64, f64) {
        let fam = omega0_solve_c1(f_center, 0.0).unwrap();
        let y = |x: f64| omega0_eval(fam, x).unwrap();
        let (mut a, mut b) = (2.0 + 1e-12, f_center);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if y(c) > y(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let x = 0.5 * (a + b);
        (x, y(x))
    }

    #[test]
    fn omega_zero_large_center_cuts_at_turning_point() {
        let p = build_profile(0.0, 10.8, &TrajectoryControls::default()).unwrap();
        assert_eq!(p.f_values[0], 10.8);
        assert_eq!(p.termination, Some(Termination::CriticalPointApproach));
        let front = p.shock.unwrap();
        assert_eq!(front.kind, FrontKind::TurningPoint);
        let (x_turn, y_turn) = closed_form_turning_point(10.8);
        assert!((front.y_front - y_turn).abs() < 1e-8, "{front:?} vs {y_turn}");
        // x at a maximum of y(x) is only determined to ~sqrt(tolerance).
        assert!((front.amplitude - x_turn).abs() < 1e-4, "{front:?} vs {x_turn}");
        assert!(front.amplitude > 2.05);
        for ((e, f), g) in p.eta_grid.iter().zip(&p.f_values).zip(&p.g_values) {
            assert_eq!(*g, 0.5 * e * f);
        }
        assert_eq!(p.f_at(front.eta0 * 1.01).unwrap(), 0.0);
        assert!(p.f_values.windows(2).all(|w| w[1] <= w[0]));
        assert!(p.eta_grid.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn omega_zero_small_center_ends_at_critical_point() {
        let p = build_profile(0.0, 3.13, &TrajectoryControls::default()).unwrap();
        let front = p.shock.unwrap();
        assert_eq!(front.kind, FrontKind::CriticalPoint);
        assert!((front.amplitude - 2.0).abs() < 1e-3);
        assert!((front.eta0 - 8f64.sqrt()).abs() < 1e-4);
    }

    #[test]
    fn zero_slope_at_center() {
        let p = build_profile(0.0, 3.13, &TrajectoryControls::default()).unwrap();
        let f0 = p.f_at(0.0).unwrap();
        let mut last = f64::INFINITY;
        for h in [1e-1, 1e-2, 1e-3, 1e-4] {
            let slope = ((p.f_at(h).unwrap() - f0) / h).abs();
            assert!(slope < last);
            last = slope;
        }
        assert!(last < 1e-3);
    }

    #[test]
    fn rejects_center_below_locus() {
        match build_profile(0.0, 1.5, &TrajectoryControls::default()) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("x_star = 2")),
            other => panic!("{other:?}"),
        }
        assert!(build_profile(0.0, -1.0, &TrajectoryControls::default()).is_err());
    }

    #[test]
    fn interpolant_reproduces_nodes() {
        let p = build_profile(1.0, 4.0, &TrajectoryControls::default()).unwrap();
        let front = p.shock.unwrap();
        for (e, f) in p.eta_grid.iter().zip(&p.f_values) {
            if *e <= front.eta0 {
                assert!((p.f_at(*e).unwrap() - f).abs() <= 1e-12 * f.max(1.0));
            }
        }
    }

    #[test]
    fn closed_form_profile() {
        let grid: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
        let p = Profile::omega_half_closed_form(&grid).unwrap();
        assert_eq!(p.f_at(1.0).unwrap(), 2.25);
        assert!(p.shock.is_none());
        assert!(Profile::omega_half_closed_form(&[1.0, 0.5]).is_err());
    }

    #[test]
    fn coverage_error_without_front() {
        let c = TrajectoryControls { y_max: 1.0, ..Default::default() };
        let p = build_profile(0.0, 10.8, &c).unwrap();
        assert_eq!(p.termination, Some(Termination::OrdinateOverflow));
        assert!(p.shock.is_none());
        assert!((p.eta_max() - 1.0).abs() < 1e-9);
        assert!(p.f_at(0.5).is_ok());
        assert!(matches!(p.f_at(1.5), Err(Error::Coverage { .. })));
    }
}
