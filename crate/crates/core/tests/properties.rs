use approx::assert_relative_eq;
use proptest::prelude::*;

use cattaneo_similarity::fields::{front_trajectory, linspace, reconstruct_fields, FieldGrid, FieldSource};
use cattaneo_similarity::phase_plane::{phase_denominator, phase_numerator};
use cattaneo_similarity::profile::FrontKind;
use cattaneo_similarity::scan::{sweep, ScanControls};
use cattaneo_similarity::verification::{pde_residual, trajectory_ode_residual};
use cattaneo_similarity::*;
use ndarray::Array2;

fn omega_zero_profile() -> Profile {
    build_profile(0.0, 3.13, &TrajectoryControls::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn regularized_tangent_is_the_linear_slope(omega in -0.9f64..5.0, u in 0.0f64..1.0, y in 0.0f64..50.0) {
        let g = singular_geometry(omega).unwrap();
        let x = g.x_star * (1.01 + 4.0 * u);
        let p = PhasePoint::new(x, y);
        let dx = -phase_denominator(omega, x);
        let dy = -phase_numerator(omega, p);
        let slope = rhs_linear(omega, p).unwrap();
        prop_assert!(((dy / dx) - slope).abs() <= 1e-9 * slope.abs().max(1e-300));
    }

    #[test]
    fn nonlinear_and_linear_forms_are_reciprocal(omega in -0.9f64..5.0, u in 0.0f64..1.0, y in 0.01f64..50.0) {
        let g = singular_geometry(omega).unwrap();
        let x = g.x_star * (1.01 + 4.0 * u);
        let p = PhasePoint::new(x, y);
        let n = phase_numerator(omega, p);
        prop_assume!(n.abs() > 1e-6 * y.max(1.0));
        let forward = rhs_nonlinear(omega, y.sqrt(), x).unwrap();
        let inverse = rhs_linear(omega, p).unwrap();
        prop_assert!((forward * inverse - 1.0).abs() < 1e-9, "{}", forward * inverse);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scaling_invariance(lambda in 0.1f64..10.0, r in 0.05f64..2.5, t in 0.5f64..3.0) {
        let p = omega_zero_profile();
        let e = p.exponents;
        let base = reconstruct_fields(&p, &[r], &[t]).unwrap();
        let moved = reconstruct_fields(&p, &[lambda.powf(e.beta) * r], &[lambda * t]).unwrap();
        let (t0, q0) = (base.temperature[[0, 0]], base.flux[[0, 0]]);
        let (t1, q1) = (moved.temperature[[0, 0]], moved.flux[[0, 0]]);
        prop_assert!((t1 * lambda.powf(e.alpha) - t0).abs() <= 1e-10 * t0.abs().max(1.0));
        prop_assert!((q1 * lambda.powf(e.delta) - q0).abs() <= 1e-10 * q0.abs().max(1.0));
    }

    #[test]
    fn coupling_identity(r in 0.05f64..4.0, t in 0.2f64..5.0) {
        let p = omega_zero_profile();
        let e = p.exponents;
        let g = reconstruct_fields(&p, &[r], &[t]).unwrap();
        let eta = g.eta(0, 0);
        let lhs = g.flux[[0, 0]] * t.powf(e.delta);
        let rhs = e.beta * eta * g.temperature[[0, 0]] * t.powf(e.alpha);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn front_position_maps_back_to_eta0(t in 0.01f64..100.0) {
        let p = omega_zero_profile();
        let ft = front_trajectory(&p, &[t]).unwrap();
        let s = ft.samples[0];
        let eta = s.r_front * t.powf(-ft.beta);
        prop_assert!((eta - ft.eta0).abs() <= 1e-14 * ft.eta0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    // Smooth non-solutions: a + b·sin(c r + d t) for T, independent q.
    #[test]
    fn residual_detects_non_solutions(
        a in 1.0f64..3.0, b in 0.2f64..0.5, c in 0.5f64..2.0, d in 0.5f64..2.0, k in 0.5f64..2.0,
    ) {
        let e = derive_exponents(0.0).unwrap();
        let mut norms = Vec::new();
        for n in [41usize, 81, 161] {
            let axis = linspace(1.0, 2.0, n);
            let temperature = Array2::from_shape_fn((n, n), |(j, i)| a + b * (c * axis[i] + d * axis[j]).sin());
            let flux = Array2::from_shape_fn((n, n), |(j, i)| k * axis[i] * axis[j]);
            let grid = FieldGrid {
                r_values: axis.clone(),
                t_values: axis.clone(),
                temperature,
                flux,
                exponents: e,
                eta0: None,
                source: FieldSource::NumericProfile,
            };
            norms.push(pde_residual(&grid, &e).unwrap().cattaneo_max);
        }
        prop_assert!(norms.iter().all(|v| *v > 1e-2), "{norms:?}");
        prop_assert!((norms[2] / norms[0] - 1.0).abs() < 0.1, "{norms:?}");
    }
}

#[test]
fn front_amplitude_on_monotone_members() {
    // Centers a little above the singular locus give curves without a turning point; the
    // front then sits on the critical point.
    for omega in [0.0, 0.25, 0.5, 1.0] {
        let g = singular_geometry(omega).unwrap();
        for factor in [1.2, 1.5, 2.0] {
            let p = build_profile(omega, factor * g.x_star, &TrajectoryControls::default()).unwrap();
            let front = p.shock.unwrap();
            assert_eq!(front.kind, FrontKind::CriticalPoint, "omega {omega}, factor {factor}");
            assert!((front.amplitude - g.x_star).abs() < 1e-3, "omega {omega}: {front:?}");
            assert!((front.y_front - g.y_c).abs() < 1e-3 * g.y_c.max(1.0));
        }
    }
}

#[test]
fn turning_point_members_stop_at_the_y_maximum() {
    for omega in [0.0, 0.25, 0.5, 1.0] {
        let g = singular_geometry(omega).unwrap();
        let traj = integrate_trajectory(omega, PhasePoint::new(8.0 * g.x_star, 0.0), &TrajectoryControls::default())
            .unwrap();
        let p = build_profile(omega, 8.0 * g.x_star, &TrajectoryControls::default()).unwrap();
        let front = p.shock.unwrap();
        assert_eq!(front.kind, FrontKind::TurningPoint);
        // Golden-section search for max y on the dense output around the highest node.
        let k = (0..traj.points.len()).max_by(|&a, &b| traj.points[a].y.total_cmp(&traj.points[b].y)).unwrap();
        let (mut lo, mut hi) = (traj.s[k.saturating_sub(1)], traj.s[(k + 1).min(traj.s.len() - 1)]);
        let y_at = |s: f64| traj.sample(s).unwrap().y;
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..200 {
            let a = hi - phi * (hi - lo);
            let b = lo + phi * (hi - lo);
            if y_at(a) < y_at(b) {
                lo = a;
            } else {
                hi = b;
            }
        }
        let y_peak = y_at(0.5 * (lo + hi));
        assert_relative_eq!(front.y_front, y_peak, max_relative = 1e-9);
        assert!(front.amplitude > g.x_star);
    }
}

#[test]
fn center_slope_vanishes_under_refinement() {
    let p = build_profile(0.0, 3.13, &TrajectoryControls::default()).unwrap();
    let f0 = p.f_at(0.0).unwrap();
    let slopes: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|h| ((p.f_at(*h).unwrap() - f0) / h).abs())
        .collect();
    assert!(slopes.windows(2).all(|w| w[1] < w[0]), "{slopes:?}");
    assert!(slopes[3] < 1e-3, "{slopes:?}");
}

#[test]
fn stored_trajectories_satisfy_the_linear_equation() {
    // The dense output is 4th order and the slope N/D is ill-conditioned next to the
    // locus, so the bound is looser than the integrator tolerance.
    let controls = TrajectoryControls::default();
    for (omega, x0, y0) in [(0.0, 3.0, 0.5), (0.0, 10.8, 0.0), (0.5, 4.0, 0.0), (1.0, 3.0, 0.0)] {
        let traj = integrate_trajectory(omega, PhasePoint::new(x0, y0), &controls).unwrap();
        let r = trajectory_ode_residual(&traj, 15, 0.1).unwrap();
        assert!(r < 1e-7, "omega {omega}, start ({x0}, {y0}): {r}");
    }
}

#[test]
fn sweeps_repeat_bit_for_bit() {
    let c = ScanControls::default();
    let omegas = linspace(-0.9, 1.0, 12);
    let a = sweep(&omegas, None, &c);
    let b = sweep(&omegas, None, &c);
    for (x, y) in a.iter().zip(&b) {
        let (rx, ry) = (x.result.unwrap(), y.result.unwrap());
        assert_eq!(rx.kind, ry.kind);
        assert_eq!(rx.front.map(|f| f.eta0.to_bits()), ry.front.map(|f| f.eta0.to_bits()));
        assert_eq!(rx.front.map(|f| f.amplitude.to_bits()), ry.front.map(|f| f.amplitude.to_bits()));
    }
}
