//! Phase plane `(x, y) = (f, η²)` of the reduced shape equation.
//!
//! The linear form `dy/dx = N(x, y) / D(x)` with
//!
//! ```text
//! N = y − 4(ω+1)² x^(2ω+1),     D = x[(ω+1)x^(ω+1) − ω − 2]
//! ```
//!
//! has a vertical tangent wherever `D` vanishes, so trajectories are integrated as the
//! autonomous system `dx/ds = −D`, `dy/ds = −N` (same orbits, finite field). On that
//! system the line `x = x_star` is invariant and the critical point `(x_star, y_c)` is a
//! stable node with eigenvalues `−(ω+1)(ω+2)` and `−1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{derive_exponents, singular_geometry, SingularGeometry};
use crate::integrator::{DenseStep, Dopri5, Dopri5Options};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
}

impl PhasePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// `N(x, y) = y − 4(ω+1)² x^(2ω+1)`.
pub fn phase_numerator(omega: f64, p: PhasePoint) -> f64 {
    let w1 = omega + 1.0;
    p.y - 4.0 * w1 * w1 * p.x.powf(2.0 * omega + 1.0)
}

/// `D(x) = x[(ω+1)x^(ω+1) − ω − 2]`.
pub fn phase_denominator(omega: f64, x: f64) -> f64 {
    let w1 = omega + 1.0;
    x * (w1 * x.powf(w1) - (omega + 2.0))
}

fn is_degenerate(value: f64, scale: f64) -> bool {
    value.abs() <= 64.0 * f64::EPSILON * scale.abs().max(f64::MIN_POSITIVE)
}

fn check_omega(omega: f64) -> Result<()> {
    derive_exponents(omega).map(|_| ())
}

/// `dy/dx` of the linear phase-plane equation.
pub fn rhs_linear(omega: f64, p: PhasePoint) -> Result<f64> {
    check_omega(omega)?;
    let w1 = omega + 1.0;
    let d = phase_denominator(omega, p.x);
    let scale = p.x * (w1 * p.x.powf(w1) + omega + 2.0);
    let n = phase_numerator(omega, p);
    if is_degenerate(d, scale) || p.x == 0.0 {
        return Err(Error::Singularity {
            location: format!("x = {}, y = {} (denominator vanishes)", p.x, p.y),
            numerator: n,
        });
    }
    Ok(n / d)
}

/// `df/d(η²)` of the nonlinear shape equation
/// `f'(β²η² − f^(2ω+1)) = (βf/2)[f^(ω+1) − (2β+1)]`.
pub fn rhs_nonlinear(omega: f64, eta: f64, f: f64) -> Result<f64> {
    let e = derive_exponents(omega)?;
    let beta = e.beta;
    let a = beta * beta * eta * eta;
    let b = f.powf(2.0 * omega + 1.0);
    let bracket = a - b;
    let numerator = 0.5 * beta * f * (f.powf(omega + 1.0) - (2.0 * beta + 1.0));
    if is_degenerate(bracket, a.max(b)) {
        return Err(Error::Singularity {
            location: format!("eta = {eta}, f = {f} (beta^2 eta^2 = f^(2 omega + 1))"),
            numerator,
        });
    }
    Ok(numerator / bracket)
}

/// Orientation of the regularized flow. `Inward` is `dx/ds = −D`: from the right of the
/// singular locus it moves toward it with `y` increasing. `Outward` reverses time and
/// leaves the critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum FlowDirection {
    #[default]
    Inward,
    Outward,
}

impl FlowDirection {
    fn sign(self) -> f64 {
        match self {
            FlowDirection::Inward => 1.0,
            FlowDirection::Outward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryControls {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    pub x_min: f64,
    pub y_max: f64,
    /// Defaults to `1e-9 · max(1, x_star)`.
    pub front_tol: Option<f64>,
    /// Defaults to `1e-6 · max(1, y_c)`.
    pub critical_tol: Option<f64>,
    pub direction: FlowDirection,
    /// Extra dense-output samples per accepted step when building profiles.
    pub dense_subdivisions: usize,
}

impl Default for TrajectoryControls {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 200_000,
            x_min: 1e-8,
            y_max: 1e250,
            front_tol: None,
            critical_tol: None,
            direction: FlowDirection::Inward,
            dense_subdivisions: 3,
        }
    }
}

impl TrajectoryControls {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidControls(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("rel_tol", self.rel_tol)?;
        positive("abs_tol", self.abs_tol)?;
        positive("x_min", self.x_min)?;
        if !(self.y_max > 0.0) {
            return Err(Error::InvalidControls(format!("y_max must be positive, got {}", self.y_max)));
        }
        if let Some(t) = self.front_tol {
            positive("front_tol", t)?;
        }
        if let Some(t) = self.critical_tol {
            positive("critical_tol", t)?;
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidControls("max_steps must be at least 1".into()));
        }
        Ok(())
    }

    pub fn front_tolerance(&self, geometry: &SingularGeometry) -> f64 {
        self.front_tol.unwrap_or(1e-9 * geometry.x_star.max(1.0))
    }

    pub fn critical_tolerance(&self, geometry: &SingularGeometry) -> f64 {
        self.critical_tol.unwrap_or(1e-6 * geometry.y_c.max(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    SingularLocusHit,
    CriticalPointApproach,
    AmplitudeUnderflow,
    OrdinateOverflow,
    StepLimit,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::SingularLocusHit => "SingularLocusHit",
            Termination::CriticalPointApproach => "CriticalPointApproach",
            Termination::AmplitudeUnderflow => "AmplitudeUnderflow",
            Termination::OrdinateOverflow => "OrdinateOverflow",
            Termination::StepLimit => "StepLimit",
        }
    }

    pub fn is_front(self) -> bool {
        matches!(self, Termination::SingularLocusHit | Termination::CriticalPointApproach)
    }
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Termination {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "SingularLocusHit" => Termination::SingularLocusHit,
            "CriticalPointApproach" => Termination::CriticalPointApproach,
            "AmplitudeUnderflow" => Termination::AmplitudeUnderflow,
            "OrdinateOverflow" => Termination::OrdinateOverflow,
            "StepLimit" => Termination::StepLimit,
            other => return Err(Error::Parse(format!("unknown termination {other:?}"))),
        })
    }
}

/// Dense-output segment `[s0, s_end]`; `s_end` may cut an event step short.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    step: DenseStep<2>,
    s_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrajectory {
    pub omega: f64,
    pub geometry: SingularGeometry,
    pub direction: FlowDirection,
    pub points: Vec<PhasePoint>,
    /// Pseudo-arclength parameter of each stored point.
    pub s: Vec<f64>,
    pub termination: Termination,
    /// First contact with the singular locus, when it happened before the end.
    pub locus_contact: Option<PhasePoint>,
    /// First maximum of `y` along the flow (a zero of `N` crossed while `y` was rising),
    /// located on the dense output, with its pseudo-arclength. Only searched before
    /// locus contact.
    pub turning_point: Option<(PhasePoint, f64)>,
    /// Roundoff pushed a coordinate below zero at least once and it was clamped.
    pub clamped: bool,
    pub steps: usize,
    segments: Vec<Segment>,
}

impl PhaseTrajectory {
    pub fn start(&self) -> PhasePoint {
        self.points[0]
    }

    pub fn end(&self) -> PhasePoint {
        *self.points.last().expect("trajectory holds at least its start")
    }

    /// Dense-output sample at pseudo-arclength `s`, `None` outside the stored range.
    pub fn sample(&self, s: f64) -> Option<PhasePoint> {
        let idx = self.segments.partition_point(|seg| seg.s_end < s);
        let seg = self.segments.get(idx)?;
        if s < seg.step.s0 {
            return None;
        }
        let u = seg.step.eval(s);
        Some(PhasePoint::new(u[0], u[1]))
    }

    /// Dense samples: `subdivisions` interior points per stored segment plus the nodes.
    pub fn refined_points(&self, subdivisions: usize) -> Vec<PhasePoint> {
        let mut out = vec![self.points[0]];
        for seg in &self.segments {
            let s0 = seg.step.s0;
            let span = seg.s_end - s0;
            for k in 1..=subdivisions {
                let s = s0 + span * k as f64 / (subdivisions + 1) as f64;
                let u = seg.step.eval(s);
                out.push(PhasePoint::new(u[0].max(0.0), u[1].max(0.0)));
            }
            let u = seg.step.eval(seg.s_end);
            out.push(PhasePoint::new(u[0].max(0.0), u[1].max(0.0)));
        }
        // Node values come from the integrator; keep them exact.
        let stride = subdivisions + 1;
        for (k, p) in self.points.iter().enumerate().skip(1) {
            if let Some(slot) = out.get_mut(k * stride) {
                *slot = *p;
            }
        }
        out
    }

    /// Largest relative mismatch between the dense-output tangent `(dy/ds)/(dx/ds)` and
    /// `rhs_linear` at segment midpoints where `|D| > margin`.
    pub fn tangent_mismatch(&self, margin: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for seg in &self.segments {
            let theta = 0.5 * (seg.s_end - seg.step.s0) / seg.step.h;
            let u = seg.step.eval_theta(theta);
            let du = seg.step.deriv_theta(theta);
            let p = PhasePoint::new(u[0], u[1]);
            if phase_denominator(self.omega, p.x).abs() <= margin || du[0] == 0.0 {
                continue;
            }
            if let Ok(slope) = rhs_linear(self.omega, p) {
                let tangent = du[1] / du[0];
                let rel = (tangent - slope).abs() / slope.abs().max(1.0);
                worst = worst.max(rel);
            }
        }
        worst
    }
}

type Field = Box<dyn Fn(&[f64; 2]) -> [f64; 2]>;

fn regularized_field(omega: f64, direction: FlowDirection) -> Field {
    let sign = direction.sign();
    Box::new(move |u: &[f64; 2]| {
        let p = PhasePoint::new(u[0], u[1]);
        [-sign * phase_denominator(omega, p.x), -sign * phase_numerator(omega, p)]
    })
}

/// Bisection for the first `theta` in `(lo, hi]` where `g` turns nonnegative, given
/// `g(lo) < 0 <= g(hi)`.
fn locate(step: &DenseStep<2>, mut lo: f64, mut hi: f64, g: &dyn Fn(PhasePoint) -> f64) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let u = step.eval_theta(mid);
        if g(PhasePoint::new(u[0], u[1])) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON {
            break;
        }
    }
    hi
}

struct Recorder {
    points: Vec<PhasePoint>,
    s: Vec<f64>,
    segments: Vec<Segment>,
}

impl Recorder {
    fn push(&mut self, step: DenseStep<2>, s_end: f64, p: PhasePoint) {
        let last = *self.points.last().expect("start recorded");
        if p == last {
            return;
        }
        self.points.push(p);
        self.s.push(s_end);
        self.segments.push(Segment { step, s_end });
    }

    fn truncate(&mut self, len: usize) {
        self.points.truncate(len);
        self.s.truncate(len);
        self.segments.truncate(len - 1);
    }
}

fn dopri_options(controls: &TrajectoryControls) -> Dopri5Options {
    Dopri5Options {
        rel_tol: controls.rel_tol,
        abs_tol: controls.abs_tol,
        ..Default::default()
    }
}

/// Integrate the regularized phase-plane flow from `start` until the first event.
///
/// Events, in priority order: contact with the singular locus (`|x − x_star| ≤
/// front_tol`), `x ≤ x_min`, `y ≥ y_max`, and exhaustion of `max_steps` or of the step
/// size. On locus contact with `|N| > critical_tol` the flow is followed along the
/// invariant line: if it reaches `|N| ≤ critical_tol` the result is
/// `CriticalPointApproach`, otherwise `SingularLocusHit` at the contact point.
pub fn integrate_trajectory(
    omega: f64,
    start: PhasePoint,
    controls: &TrajectoryControls,
) -> Result<PhaseTrajectory> {
    controls.validate()?;
    let geometry = singular_geometry(omega)?;
    if !(start.x > 0.0) || !start.x.is_finite() || !(start.y >= 0.0) || !start.y.is_finite() {
        return Err(Error::Precondition(format!(
            "trajectory start must have x > 0 and y >= 0, got ({}, {})",
            start.x, start.y
        )));
    }
    let front_tol = controls.front_tolerance(&geometry);
    let crit_tol = controls.critical_tolerance(&geometry);
    let x_star = geometry.x_star;

    let mut rec = Recorder { points: vec![start], s: vec![0.0], segments: Vec::new() };
    let mut turning: Option<(PhasePoint, f64)> = None;
    let finish = |rec: Recorder, termination, contact, turning, clamped, steps| PhaseTrajectory {
        omega,
        geometry,
        direction: controls.direction,
        points: rec.points,
        s: rec.s,
        termination,
        locus_contact: contact,
        turning_point: turning,
        clamped,
        steps,
        segments: rec.segments,
    };

    let near_locus = |p: PhasePoint| (p.x - x_star).abs() <= front_tol;
    let critical = |p: PhasePoint| phase_numerator(omega, p).abs() <= crit_tol;

    if near_locus(start) && critical(start) {
        return Ok(finish(rec, Termination::CriticalPointApproach, None, None, false, 0));
    }
    if start.x <= controls.x_min {
        return Ok(finish(rec, Termination::AmplitudeUnderflow, None, None, false, 0));
    }
    if start.y >= controls.y_max {
        return Ok(finish(rec, Termination::OrdinateOverflow, None, None, false, 0));
    }

    let side = (start.x - x_star).signum();
    let g_front = move |p: PhasePoint| front_tol - side * (p.x - x_star);
    let g_xmin = |p: PhasePoint| controls.x_min - p.x;
    let g_ymax = |p: PhasePoint| p.y - controls.y_max;
    // dy/ds = −sign·N, so y stops rising where sign·N turns nonnegative.
    let flow_sign = controls.direction.sign();
    let g_turn = move |p: PhasePoint| flow_sign * phase_numerator(omega, p);

    let mut steps = 0usize;
    let mut clamped = false;
    let mut s = 0.0;
    let (contact_p, contact_s, contact_len) = if near_locus(start) {
        (start, 0.0, 1)
    } else {
        let mut solver =
            Dopri5::new(regularized_field(omega, controls.direction), 0.0, [start.x, start.y], dopri_options(controls));
        loop {
            if steps >= controls.max_steps {
                return Ok(finish(rec, Termination::StepLimit, None, turning, clamped, steps));
            }
            let step = match solver.step() {
                Ok(st) => st,
                Err(_) => return Ok(finish(rec, Termination::StepLimit, None, turning, clamped, steps)),
            };
            steps += 1;
            let end = step.end();
            let end_p = PhasePoint::new(end[0], end[1]);

            let events: [(Termination, &dyn Fn(PhasePoint) -> f64); 3] = [
                (Termination::SingularLocusHit, &g_front),
                (Termination::AmplitudeUnderflow, &g_xmin),
                (Termination::OrdinateOverflow, &g_ymax),
            ];
            let mut hit: Option<(Termination, f64)> = None;
            for (kind, g) in events {
                let triggered = g(end_p) >= 0.0 || !end_p.x.is_finite() || !end_p.y.is_finite();
                if triggered {
                    let theta = locate(&step, 0.0, 1.0, g);
                    if hit.map_or(true, |(_, t)| theta < t) {
                        hit = Some((kind, theta));
                    }
                }
            }

            if turning.is_none() {
                let start_p = {
                    let u = step.start();
                    PhasePoint::new(u[0], u[1])
                };
                if g_turn(start_p) < 0.0 && g_turn(end_p) >= 0.0 {
                    let theta = locate(&step, 0.0, 1.0, &g_turn);
                    if hit.map_or(true, |(_, t)| theta < t) {
                        let u = step.eval_theta(theta);
                        let p = PhasePoint::new(u[0], u[1]);
                        if (p.x - x_star).abs() > front_tol {
                            turning = Some((p, step.s0 + theta * step.h));
                        }
                    }
                }
            }

            if let Some((kind, theta)) = hit {
                let u = step.eval_theta(theta);
                let p = PhasePoint::new(u[0].max(0.0), u[1].max(0.0));
                let s_hit = step.s0 + theta * step.h;
                rec.push(step, s_hit, p);
                s = s_hit;
                if kind == Termination::SingularLocusHit {
                    if critical(p) {
                        return Ok(finish(rec, Termination::CriticalPointApproach, None, turning, clamped, steps));
                    }
                    break (p, s_hit, rec.points.len());
                }
                return Ok(finish(rec, kind, None, turning, clamped, steps));
            }

            let mut p = end_p;
            if p.x < 0.0 || p.y < 0.0 {
                clamped = true;
                p = PhasePoint::new(p.x.max(0.0), p.y.max(0.0));
                rec.push(step, step.s1(), p);
                solver = Dopri5::new(
                    regularized_field(omega, controls.direction),
                    step.s1(),
                    [p.x, p.y],
                    dopri_options(controls),
                );
            } else {
                rec.push(step, step.s1(), p);
            }
        }
    };

    // Follow the invariant line x = x_star toward (or away from) the critical point.
    let n_contact = phase_numerator(omega, contact_p).abs();
    let g_crit = |p: PhasePoint| crit_tol - phase_numerator(omega, p).abs();
    let mut solver = Dopri5::new(
        regularized_field(omega, controls.direction),
        contact_s.max(s),
        [contact_p.x, contact_p.y],
        dopri_options(controls),
    );
    while steps < controls.max_steps {
        let step = match solver.step() {
            Ok(st) => st,
            Err(_) => break,
        };
        steps += 1;
        let end = step.end();
        let end_p = PhasePoint::new(end[0], end[1]);
        if !end_p.x.is_finite() || !end_p.y.is_finite() {
            break;
        }
        if g_crit(end_p) >= 0.0 {
            let theta = locate(&step, 0.0, 1.0, &g_crit);
            let u = step.eval_theta(theta);
            rec.push(step, step.s0 + theta * step.h, PhasePoint::new(u[0].max(0.0), u[1].max(0.0)));
            return Ok(finish(
                rec,
                Termination::CriticalPointApproach,
                Some(contact_p),
                turning,
                clamped,
                steps,
            ));
        }
        if (end_p.x - x_star).abs() > front_tol || phase_numerator(omega, end_p).abs() > 2.0 * n_contact {
            break;
        }
        rec.push(step, step.s1(), end_p);
    }
    rec.truncate(contact_len);
    Ok(finish(rec, Termination::SingularLocusHit, Some(contact_p), turning, clamped, steps))
}
