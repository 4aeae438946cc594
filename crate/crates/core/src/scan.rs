//! Classification of self-similar families by ω and bisection for the exponent where
//! shock-forming families give way to continuous ones.
//!
//! Launch policy: for ω > −1/2 a trajectory starts at the center `(f_center, 0)` and
//! flows toward the singular locus. For ω ≤ −1/2 it starts a distance `δ·x_star` from
//! the critical point along the slow eigendirection and flows away from it. The choice
//! of launch, not only ω, therefore decides the verdict; `LaunchPolicy` can force either
//! launch for every ω.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{derive_exponents, singular_geometry};
use crate::phase_plane::{integrate_trajectory, FlowDirection, PhasePoint, Termination, TrajectoryControls};
use crate::profile::{build_profile, ShockFront};

/// Value of ω the bracket is compared against.
pub const REFERENCE_CRITICAL_OMEGA: f64 = -0.5;

/// `OrdinateOverflow` with `x ≤ CONTINUOUS_X_FRACTION · x_star` counts as `f → 0`.
pub const CONTINUOUS_X_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassificationKind {
    Shock,
    Continuous,
    NonDecaying,
    Indeterminate,
}

impl ClassificationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassificationKind::Shock => "Shock",
            ClassificationKind::Continuous => "Continuous",
            ClassificationKind::NonDecaying => "NonDecaying",
            ClassificationKind::Indeterminate => "Indeterminate",
        }
    }
}

impl fmt::Display for ClassificationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassificationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "Shock" => ClassificationKind::Shock,
            "Continuous" => ClassificationKind::Continuous,
            "NonDecaying" => ClassificationKind::NonDecaying,
            "Indeterminate" => ClassificationKind::Indeterminate,
            other => return Err(Error::Parse(format!("unknown classification {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum LaunchPolicy {
    /// Center launch for ω > −1/2, critical-point launch otherwise.
    #[default]
    Auto,
    Center,
    Critical,
}

impl FromStr for LaunchPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => LaunchPolicy::Auto,
            "center" => LaunchPolicy::Center,
            "critical" => LaunchPolicy::Critical,
            other => return Err(Error::Parse(format!("unknown launch policy {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Launch {
    Center,
    Critical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanControls {
    pub trajectory: TrajectoryControls,
    /// Center amplitude is `max(2·x_star, default_f_center)` unless overridden.
    pub default_f_center: f64,
    /// Relative offset `δ` of the critical-point launch.
    pub critical_offset: f64,
    pub launch: LaunchPolicy,
}

impl Default for ScanControls {
    fn default() -> Self {
        Self {
            trajectory: TrajectoryControls::default(),
            default_f_center: 10.0,
            critical_offset: 1e-3,
            launch: LaunchPolicy::Auto,
        }
    }
}

impl ScanControls {
    pub fn validate(&self) -> Result<()> {
        self.trajectory.validate()?;
        if !(self.default_f_center > 0.0) || !self.default_f_center.is_finite() {
            return Err(Error::InvalidControls("default_f_center must be positive".into()));
        }
        if !(self.critical_offset > 0.0 && self.critical_offset < 1.0) {
            return Err(Error::InvalidControls("critical_offset must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub launch: Launch,
    pub start: PhasePoint,
    pub end: PhasePoint,
    pub termination: Termination,
    pub locus_contact: Option<PhasePoint>,
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub omega: f64,
    pub kind: ClassificationKind,
    /// Center amplitude for a center launch, launch abscissa for a critical launch.
    pub f_center_used: f64,
    pub front: Option<ShockFront>,
    pub diagnostics: Diagnostics,
}

/// Launch point next to the critical point on the `x < x_star` side: `δ·x_star` along the
/// slow eigendirection, lifted by `δ·y_c`. On the slow line itself the second-order term
/// decides whether the branch reaches `y = 0` or `x = 0`; the lift selects the branch
/// with `f → 0`.
pub fn critical_launch_point(omega: f64, offset: f64) -> Result<PhasePoint> {
    let g = singular_geometry(omega)?;
    let w1 = omega + 1.0;
    let lambda = w1 * (omega + 2.0);
    if (lambda - 1.0).abs() < 1e-9 {
        return Err(Error::Domain(format!(
            "critical point of omega = {omega} has a degenerate node; no slow direction"
        )));
    }
    let n_x = -4.0 * w1 * w1 * (2.0 * omega + 1.0) * g.x_star.powf(2.0 * omega);
    let slope = n_x / (lambda - 1.0);
    let x = g.x_star * (1.0 - offset);
    let y = g.y_c + slope * (x - g.x_star) + offset * g.y_c;
    if !(y > 0.0) {
        return Err(Error::Numerical(format!(
            "critical launch for omega = {omega} lands at y = {y}; reduce the offset"
        )));
    }
    Ok(PhasePoint::new(x, y))
}

fn kind_from_termination(termination: Termination, end: PhasePoint, x_star: f64) -> ClassificationKind {
    match termination {
        Termination::SingularLocusHit | Termination::CriticalPointApproach => ClassificationKind::Shock,
        Termination::AmplitudeUnderflow => ClassificationKind::Continuous,
        Termination::OrdinateOverflow if end.x <= CONTINUOUS_X_FRACTION * x_star => ClassificationKind::Continuous,
        Termination::OrdinateOverflow => ClassificationKind::NonDecaying,
        Termination::StepLimit => ClassificationKind::Indeterminate,
    }
}

fn classify_center(omega: f64, f_center: f64, controls: &ScanControls) -> Result<ClassificationResult> {
    let geometry = singular_geometry(omega)?;
    let tc = TrajectoryControls { direction: FlowDirection::Inward, ..controls.trajectory };
    let start = PhasePoint::new(f_center, 0.0);
    let traj = integrate_trajectory(omega, start, &tc)?;
    let diagnostics = Diagnostics {
        launch: Launch::Center,
        start,
        end: traj.end(),
        termination: traj.termination,
        locus_contact: traj.locus_contact,
        steps: traj.steps,
    };
    let mut kind = kind_from_termination(traj.termination, traj.end(), geometry.x_star);
    let mut front = None;
    if traj.termination != Termination::StepLimit && (traj.turning_point.is_some() || traj.termination.is_front()) {
        front = build_profile(omega, f_center, &tc)?.shock;
        kind = match front {
            Some(s) if s.amplitude > 0.0 => ClassificationKind::Shock,
            _ => ClassificationKind::Indeterminate,
        };
    }
    Ok(ClassificationResult { omega, kind, f_center_used: f_center, front, diagnostics })
}

fn classify_critical(omega: f64, controls: &ScanControls) -> Result<ClassificationResult> {
    let geometry = singular_geometry(omega)?;
    let start = critical_launch_point(omega, controls.critical_offset)?;
    let tc = TrajectoryControls { direction: FlowDirection::Outward, ..controls.trajectory };
    let traj = integrate_trajectory(omega, start, &tc)?;
    let end = traj.end();
    let kind = kind_from_termination(traj.termination, end, geometry.x_star);
    let front = match kind {
        ClassificationKind::Shock => Some(ShockFront {
            eta0: end.y.sqrt(),
            y_front: end.y,
            amplitude: end.x,
            kind: crate::profile::FrontKind::TurningPoint,
        }),
        _ => None,
    };
    let diagnostics = Diagnostics {
        launch: Launch::Critical,
        start,
        end,
        termination: traj.termination,
        locus_contact: traj.locus_contact,
        steps: traj.steps,
    };
    Ok(ClassificationResult { omega, kind, f_center_used: start.x, front, diagnostics })
}

/// Classify the family of exponent `omega`. A given `f_center` forces a center launch.
pub fn classify(omega: f64, f_center: Option<f64>, controls: &ScanControls) -> Result<ClassificationResult> {
    derive_exponents(omega)?;
    controls.validate()?;
    let geometry = singular_geometry(omega)?;
    let launch = match (f_center, controls.launch) {
        (Some(_), _) | (None, LaunchPolicy::Center) => Launch::Center,
        (None, LaunchPolicy::Critical) => Launch::Critical,
        (None, LaunchPolicy::Auto) if omega > REFERENCE_CRITICAL_OMEGA => Launch::Center,
        (None, LaunchPolicy::Auto) => Launch::Critical,
    };
    match launch {
        Launch::Center => {
            let f = f_center.unwrap_or_else(|| (2.0 * geometry.x_star).max(controls.default_f_center));
            if !(f > 0.0) || !f.is_finite() {
                return Err(Error::Precondition(format!("f_center must be positive, got {f}")));
            }
            classify_center(omega, f, controls)
        }
        Launch::Critical => classify_critical(omega, controls),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub omega: f64,
    pub result: Option<ClassificationResult>,
    pub error: Option<String>,
    /// The entry breaks the expectation that Shock verdicts occupy the top of the ω
    /// range.
    pub indeterminate_region: bool,
}

impl SweepEntry {
    pub fn kind(&self) -> Option<ClassificationKind> {
        self.result.map(|r| r.kind)
    }
}

/// Classify every value, in input order. Per-value errors are kept in the entry.
pub fn sweep(omega_values: &[f64], f_center: Option<f64>, controls: &ScanControls) -> Vec<SweepEntry> {
    let mut entries: Vec<SweepEntry> = omega_values
        .par_iter()
        .map(|&omega| match classify(omega, f_center, controls) {
            Ok(r) => SweepEntry { omega, result: Some(r), error: None, indeterminate_region: false },
            Err(e) => SweepEntry { omega, result: None, error: Some(e.to_string()), indeterminate_region: false },
        })
        .collect();
    flag_monotonicity(&mut entries);
    entries
}

fn flag_monotonicity(entries: &mut [SweepEntry]) {
    let classified: Vec<(usize, f64, bool)> = entries
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.kind().map(|k| (i, e.omega, k == ClassificationKind::Shock)))
        .collect();
    for &(i, omega, shock) in &classified {
        let broken = if shock {
            classified.iter().any(|&(_, o, s)| o > omega && !s)
        } else {
            classified.iter().any(|&(_, o, s)| o < omega && s)
        };
        entries[i].indeterminate_region = broken;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalBracket {
    pub lower: f64,
    pub upper: f64,
    pub lower_kind: ClassificationKind,
    pub upper_kind: ClassificationKind,
    pub midpoint: f64,
    pub reference: f64,
    /// The reference value lies inside the final bracket.
    pub agrees: bool,
    pub iterations: usize,
    /// Bisection stopped because both probes of an iteration were indeterminate.
    pub stalled: bool,
    pub evaluations: Vec<ClassificationResult>,
}

impl CriticalBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Bisection on ω between two differently classified exponents.
///
/// A midpoint whose verdict matches neither end is recorded; the quarter points are then
/// probed and the bracket shrinks on whichever side they decide.
pub fn bracket_critical(lower: f64, upper: f64, iterations: usize, controls: &ScanControls) -> Result<CriticalBracket> {
    if !(lower < upper) {
        return Err(Error::Precondition(format!("bracket needs lower < upper, got [{lower}, {upper}]")));
    }
    let mut evaluations = Vec::new();
    let lo_res = classify(lower, None, controls)?;
    let hi_res = classify(upper, None, controls)?;
    evaluations.push(lo_res);
    evaluations.push(hi_res);
    let (lo_kind, hi_kind) = (lo_res.kind, hi_res.kind);
    if lo_kind == ClassificationKind::Indeterminate || hi_kind == ClassificationKind::Indeterminate {
        return Err(Error::Precondition(format!(
            "bracket endpoints must be determinate, got {lo_kind} at {lower} and {hi_kind} at {upper}"
        )));
    }
    if lo_kind == hi_kind {
        return Err(Error::SameClassification(format!("{lo_kind} at both {lower} and {upper}")));
    }

    let (mut lo, mut hi) = (lower, upper);
    let mut done = 0;
    let mut stalled = false;
    let probe = |omega: f64, evaluations: &mut Vec<ClassificationResult>| -> Option<ClassificationKind> {
        let kind = match classify(omega, None, controls) {
            Ok(r) => {
                evaluations.push(r);
                r.kind
            }
            Err(_) => return None,
        };
        (kind == lo_kind || kind == hi_kind).then_some(kind)
    };
    while done < iterations {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match probe(mid, &mut evaluations) {
            Some(k) if k == lo_kind => lo = mid,
            Some(_) => hi = mid,
            None => {
                let left = 0.5 * (lo + mid);
                let right = 0.5 * (mid + hi);
                match probe(left, &mut evaluations) {
                    Some(k) if k == hi_kind => hi = left,
                    Some(_) => match probe(right, &mut evaluations) {
                        Some(k) if k == lo_kind => lo = right,
                        Some(_) => {
                            lo = left;
                            hi = right;
                        }
                        None => lo = left,
                    },
                    None => match probe(right, &mut evaluations) {
                        Some(k) if k == lo_kind => lo = right,
                        _ => {
                            stalled = true;
                            break;
                        }
                    },
                }
            }
        }
        done += 1;
    }
    let midpoint = 0.5 * (lo + hi);
    Ok(CriticalBracket {
        lower: lo,
        upper: hi,
        lower_kind: lo_kind,
        upper_kind: hi_kind,
        midpoint,
        reference: REFERENCE_CRITICAL_OMEGA,
        agrees: lo <= REFERENCE_CRITICAL_OMEGA && REFERENCE_CRITICAL_OMEGA <= hi,
        iterations: done,
        stalled,
        evaluations,
    })
}
