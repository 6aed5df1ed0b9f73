use std::f64::consts::PI;

use num_complex::Complex64;
use phaseflow::hermite::{ho_eigen_eta, Oscillator};
use phaseflow::quantization::{
    action_integral, bohr_sommerfeld_levels, closed_orbit, pdhdp_invariance_check, phase_winding, separability_check,
    CoordinateTransform, Observable, OrbitConfig,
};
use phaseflow::reference::eigensolve;
use phaseflow::transform::lift;
use phaseflow::{HamiltonianModel, PhaseField, PhaseGrid, PhasePoint, PositionGrid, WavepacketFamily};

fn cfg() -> OrbitConfig {
    OrbitConfig::default()
}

fn harmonic() -> HamiltonianModel {
    HamiltonianModel::harmonic(1.0, 1.0).unwrap()
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[test]
fn harmonic_action_is_two_pi_e_over_omega() {
    let model = HamiltonianModel::harmonic(1.0, 1.7).unwrap();
    for e in [0.3f64, 3.0, 8.0] {
        let j = action_integral(&model, e, 0, &cfg()).unwrap();
        assert!((j - 2.0 * PI * e / 1.7).abs() < 1e-8, "E={e}: {j}");
    }
}

#[test]
fn quartic_action_matches_turning_point_quadrature() {
    let model = HamiltonianModel::quartic(1.0, 1.0).unwrap();
    let e = 1.0f64;
    let a = e.powf(0.25);
    // q = a sin(theta) removes the square-root endpoints
    let f = |th: f64| (2.0 * e).sqrt() * th.cos() * (1.0 + th.sin().powi(2)).sqrt() * a * th.cos();
    let oracle = 2.0 * adaptive_simpson(&f, -PI / 2.0, PI / 2.0, 1e-12);
    let j = action_integral(&model, e, 0, &cfg()).unwrap();
    assert!((j - oracle).abs() < 1e-6, "{j} vs {oracle}");
}

#[test]
fn action_grows_with_energy() {
    for model in [harmonic(), HamiltonianModel::quartic(1.0, 1.0).unwrap()] {
        let js: Vec<f64> = (1..12).map(|k| action_integral(&model, 0.7 * k as f64, 0, &cfg()).unwrap()).collect();
        assert!(js.windows(2).all(|w| w[1] > w[0]));
    }
}

#[test]
fn harmonic_levels_are_integer_multiples() {
    let spec = bohr_sommerfeld_levels(&harmonic(), 10, 1.0, &cfg()).unwrap();
    assert_eq!(spec.levels.len(), 11);
    for (n, level) in spec.levels.iter().enumerate() {
        assert_eq!(level.quanta, vec![n]);
        assert!((level.energy - n as f64).abs() < 1e-10, "n={n}: {}", level.energy);
    }
}

#[test]
fn levels_scale_with_hbar_and_omega() {
    let model = HamiltonianModel::harmonic(2.0, 0.5).unwrap();
    let spec = bohr_sommerfeld_levels(&model, 4, 0.3, &cfg()).unwrap();
    for (n, level) in spec.levels.iter().enumerate() {
        assert!((level.energy - n as f64 * 0.3 * 0.5).abs() < 1e-10);
    }
}

#[test]
fn anisotropic_levels_add() {
    let w2 = 2f64.sqrt();
    let model = HamiltonianModel::anisotropic_2d(1.0, 1.0, w2).unwrap();
    let spec = bohr_sommerfeld_levels(&model, 3, 1.0, &cfg()).unwrap();
    assert_eq!(spec.levels.len(), 16);
    for level in &spec.levels {
        let expect = level.quanta[0] as f64 + level.quanta[1] as f64 * w2;
        assert!((level.energy - expect).abs() < 1e-8);
    }
    assert!(spec.levels.windows(2).all(|w| w[0].energy <= w[1].energy));
}

#[test]
fn quartic_levels_increase_and_approach_the_exact_spectrum() {
    let model = HamiltonianModel::quartic(1.0, 1.0).unwrap();
    let mut spec = bohr_sommerfeld_levels(&model, 10, 1.0, &cfg()).unwrap();
    assert!(spec.levels.windows(2).all(|w| w[1].energy > w[0].energy));
    let xg = PositionGrid::new_1d(-6.0, 6.0, 256).unwrap();
    let exact: Vec<f64> = eigensolve(&model, &xg, 11, 1.0).unwrap().iter().map(|p| p.energy).collect();
    spec.attach_exact(&exact);
    let errs: Vec<f64> = spec.levels[2..].iter().map(|l| l.rel_error.unwrap()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn free_model_cannot_be_quantized() {
    let err = bohr_sommerfeld_levels(&HamiltonianModel::free(1.0).unwrap(), 3, 1.0, &cfg()).unwrap_err();
    assert_eq!(err.code(), "UnsupportedModel");
}

fn phase_grid() -> PhaseGrid {
    PhaseGrid::new_1d((-9.0, 9.0, 145), (-9.0, 9.0, 145)).unwrap()
}

#[test]
fn eigenstate_winds_n_times() {
    let g = phase_grid();
    for n in 0..6 {
        let eta = ho_eigen_eta(n, &Oscillator::unit(), &g).unwrap();
        let w = phase_winding(&eta, &harmonic(), n as f64, &cfg(), 1e-8).unwrap();
        assert_eq!(w.winding, n as i64);
        assert!((w.raw - n as f64).abs() < 1e-3, "n={n}: {}", w.raw);
    }
}

#[test]
fn uniform_phase_does_not_wind() {
    let eta = PhaseField::from_fn(phase_grid(), |z| Complex64::from_polar((-0.1 * (z.q[0].powi(2) + z.p[0].powi(2))).exp(), 0.4));
    let w = phase_winding(&eta, &harmonic(), 2.0, &cfg(), 1e-8).unwrap();
    assert_eq!(w.winding, 0);
    assert!(w.raw.abs() < 1e-12);
}

#[test]
fn winding_errors() {
    let g = phase_grid();
    let eta = ho_eigen_eta(1, &Oscillator::unit(), &g).unwrap();
    assert_eq!(phase_winding(&eta, &harmonic(), 50.0, &cfg(), 1e-8).unwrap_err().code(), "OrbitOutsideGrid");
    let eta = ho_eigen_eta(2, &Oscillator::unit(), &g).unwrap();
    let ring = PhaseField::from_fn(g, |z| Complex64::new(z.q[0].powi(2) + z.p[0].powi(2) - 2.0, 0.0));
    assert_eq!(phase_winding(&ring, &harmonic(), 1.0, &cfg(), 1e-8).unwrap_err().code(), "AmplitudeZeroOnOrbit");
    assert!(phase_winding(&eta, &harmonic(), 2.0, &cfg(), 1e-8).is_ok());
}

#[test]
fn levels_actions_and_windings_agree() {
    let model = harmonic();
    let h = 2.0 * PI;
    let spec = bohr_sommerfeld_levels(&model, 4, 1.0, &cfg()).unwrap();
    let xg = PositionGrid::new_1d(-12.0, 12.0, 256).unwrap();
    let states = eigensolve(&model, &xg, 5, 1.0).unwrap();
    let family = WavepacketFamily::new(Oscillator::unit().coherent_sigma(), 1.0).unwrap();
    let g = PhaseGrid::new_1d((-7.0, 7.0, 97), (-7.0, 7.0, 97)).unwrap();
    for (n, level) in spec.levels.iter().enumerate() {
        let j = action_integral(&model, level.energy, 0, &cfg()).unwrap();
        assert!((j - n as f64 * h).abs() < 1e-8);
        let eta = lift(&states[n].state, &family, &g).unwrap();
        assert_eq!(phase_winding(&eta, &model, level.energy, &cfg(), 1e-8).unwrap().winding, n as i64);
    }
}

#[test]
fn beta_grows_like_the_reduced_action() {
    let orbit = closed_orbit(&harmonic(), 2.0, 0, &OrbitConfig { dt: 1e-3, ..cfg() }).unwrap();
    let mut checked = 0;
    for k in 1..orbit.points.len() - 1 {
        let (a, b) = (&orbit.points[k - 1], &orbit.points[k + 1]);
        let z = &orbit.points[k];
        if z.p[0] < 0.3 || a.p[0] < 0.0 || b.p[0] < 0.0 {
            continue;
        }
        let slope = (orbit.beta[k + 1] - orbit.beta[k - 1]) / (b.q[0] - a.q[0]);
        assert!((slope - z.p[0]).abs() < 1e-3, "q={} slope {slope} p {}", z.q[0], z.p[0]);
        checked += 1;
    }
    assert!(checked > 100);
}

#[test]
fn per_dof_energies_are_separable_constants() {
    let model = HamiltonianModel::anisotropic_2d(1.0, 1.0, 2f64.sqrt()).unwrap();
    let r = separability_check(&model, &[Observable::DofEnergy(0), Observable::DofEnergy(1)], 200, 3.0, 42).unwrap();
    assert!(r.max_abs <= 1e-12, "{}", r.max_abs);
    let one = separability_check(&harmonic(), &[Observable::Hamiltonian], 50, 3.0, 42).unwrap();
    assert_eq!(one.max_abs, 0.0);
}

#[test]
fn position_is_not_a_constant_of_motion() {
    let model = HamiltonianModel::anisotropic_2d(1.0, 1.0, 2f64.sqrt()).unwrap();
    let r = separability_check(&model, &[Observable::Position(0)], 50, 3.0, 42).unwrap();
    assert!(r.entries[0][0] > 0.1);
    assert_eq!(r.entries[0][1], 0.0);
}

#[test]
fn separability_is_seeded() {
    let model = HamiltonianModel::anisotropic_2d(1.0, 1.0, 2.0).unwrap();
    let a = separability_check(&model, &[Observable::Position(1)], 30, 2.0, 7).unwrap();
    let b = separability_check(&model, &[Observable::Position(1)], 30, 2.0, 7).unwrap();
    assert_eq!(a, b);
}

#[test]
fn p_dh_dp_survives_point_transformations() {
    let one = harmonic();
    let pts = [PhasePoint::new_1d(0.4, 1.3), PhasePoint::new_1d(-1.1, -0.2)];
    let r = pdhdp_invariance_check(&one, &CoordinateTransform::Scaling([2.0, 1.0]), &pts).unwrap();
    assert!(r.max_rel <= 1e-12, "{}", r.max_rel);

    let two = HamiltonianModel::anisotropic_2d(1.0, 1.0, 1.0).unwrap();
    let r = pdhdp_invariance_check(&two, &CoordinateTransform::Polar, &[PhasePoint::new_2d([1.0, 0.0], [0.0, 1.0])]).unwrap();
    // at q = (1, 0), p = (0, 1): P_r = 0, P_theta = 1, and sum p dH/dp = |p|^2 = 1
    assert!((r.original[0] - 1.0).abs() < 1e-15);
    assert!(r.max_rel <= 1e-10, "{}", r.max_rel);

    let aniso = HamiltonianModel::anisotropic_2d(1.3, 0.7, 2.1).unwrap();
    let pts = [PhasePoint::new_2d([0.3, -1.2], [0.8, 0.5]), PhasePoint::new_2d([-2.0, 0.4], [-1.0, 0.3])];
    let r = pdhdp_invariance_check(&aniso, &CoordinateTransform::Polar, &pts).unwrap();
    assert!(r.max_rel <= 1e-10, "{}", r.max_rel);
}
