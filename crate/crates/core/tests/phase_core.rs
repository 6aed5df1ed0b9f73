use num_complex::Complex64;
use phaseflow::hermite::{hermite, hermite_complex, ho_eigen_eta, Oscillator};
use phaseflow::{HamiltonianModel, PhaseGrid, PhasePoint};

/// Composite Simpson on a wide interval; the integrand is a Gaussian times a polynomial.
fn gauss_hermite_quadrature(n: usize, alpha: f64, z: Complex64) -> Complex64 {
    let (a, b, m) = (-12.0 + z.re, 12.0 + z.re, 24_000usize);
    let h = (b - a) / m as f64;
    let f = |x: f64| (-(Complex64::new(x, 0.0) - z).powi(2)).exp() * hermite(n, alpha * x).unwrap();
    let mut s = f(a) + f(b);
    for k in 1..m {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn gaussian_hermite_integral_identity() {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    for n in 0..=6 {
        for alpha in [0.5f64, 0.9] {
            for z in [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.5)] {
                let lhs = gauss_hermite_quadrature(n, alpha, z);
                let s = (1.0 - alpha * alpha).sqrt();
                let rhs = sqrt_pi * s.powi(n as i32) * hermite_complex(n, z * alpha / s).unwrap();
                // odd degrees vanish at z = 0, so measure against the size of the prefactor
                let scale = rhs.norm().max(sqrt_pi * s.powi(n as i32));
                assert!((lhs - rhs).norm() <= 1e-8 * scale, "n={n} a={alpha} z={z}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn analytic_amplitudes_have_unit_norm() {
    let g = PhaseGrid::new_1d((-10.0, 10.0, 201), (-10.0, 10.0, 201)).unwrap();
    for n in 0..6 {
        let eta = ho_eigen_eta(n, &Oscillator::unit(), &g).unwrap();
        assert!((eta.phase_norm_sqr(1.0) - 1.0).abs() < 1e-6, "n={n}");
    }
    let osc = Oscillator::new(2.0, 0.5, 0.7).unwrap();
    let g = PhaseGrid::new_1d((-12.0, 12.0, 241), (-9.0, 9.0, 241)).unwrap();
    let eta = ho_eigen_eta(2, &osc, &g).unwrap();
    assert!((eta.phase_norm_sqr(0.7) - 1.0).abs() < 1e-6);
}

#[test]
fn modulus_depends_only_on_the_energy() {
    let osc = Oscillator::unit();
    let model = HamiltonianModel::harmonic(1.0, 1.0).unwrap();
    for n in 0..5 {
        for e in [0.3f64, 1.0, 2.5] {
            let r = (2.0 * e).sqrt();
            let reference = osc.eta_at(n, r, 0.0).norm();
            for k in 1..12 {
                let th = k as f64 * 0.53;
                let z = PhasePoint::new_1d(r * th.cos(), r * th.sin());
                assert!((model.energy(&z) - e).abs() < 1e-12);
                let m = osc.eta_at(n, z.q[0], z.p[0]).norm();
                assert!((m - reference).abs() <= 1e-10 * reference.max(1e-300));
            }
        }
    }
}

fn models() -> Vec<HamiltonianModel> {
    vec![
        HamiltonianModel::harmonic(1.3, 0.8).unwrap(),
        HamiltonianModel::free(0.7).unwrap(),
        HamiltonianModel::quartic(1.1, 0.4).unwrap(),
        HamiltonianModel::anisotropic_2d(0.9, 1.0, 2.0f64.sqrt()).unwrap(),
        HamiltonianModel::linear(&[0.5, -1.0], &[0.3, 0.2]).unwrap(),
    ]
}

#[test]
fn gradient_matches_finite_differences() {
    let z = PhasePoint::new_2d([0.7, -0.4], [1.2, 0.3]);
    for model in models() {
        let d = model.dim();
        let g = model.gradient(&z);
        let h = 1e-5;
        for i in 0..d {
            let mut zp = z;
            let mut zm = z;
            zp.q[i] += h;
            zm.q[i] -= h;
            let fd = (model.energy(&zp) - model.energy(&zm)) / (2.0 * h);
            assert!((fd - g.q[i]).abs() <= 1e-6 * g.q[i].abs().max(1.0), "{} dq{i}", model.name());
            let mut zp = z;
            let mut zm = z;
            zp.p[i] += h;
            zm.p[i] -= h;
            let fd = (model.energy(&zp) - model.energy(&zm)) / (2.0 * h);
            assert!((fd - g.p[i]).abs() <= 1e-6 * g.p[i].abs().max(1.0), "{} dp{i}", model.name());
        }
    }
}

#[test]
fn hessian_matches_finite_differences() {
    let z = PhasePoint::new_2d([0.7, -0.4], [1.2, 0.3]);
    for model in models() {
        let d = model.dim();
        let hs = model.hessian(&z);
        let h = 1e-5;
        for j in 0..d {
            let shift = |dq: f64, dp: f64| {
                let mut w = z;
                w.q[j] += dq;
                w.p[j] += dp;
                model.gradient(&w)
            };
            let (gqp, gqm) = (shift(h, 0.0), shift(-h, 0.0));
            let (gpp, gpm) = (shift(0.0, h), shift(0.0, -h));
            for i in 0..d {
                let qq = (gqp.q[i] - gqm.q[i]) / (2.0 * h);
                let pp = (gpp.p[i] - gpm.p[i]) / (2.0 * h);
                // d^2 H / dp_i dq_j
                let qp = (gqp.p[i] - gqm.p[i]) / (2.0 * h);
                assert!((qq - hs.qq[i][j]).abs() <= 1e-6 * hs.qq[i][j].abs().max(1.0), "{}", model.name());
                assert!((pp - hs.pp[i][j]).abs() <= 1e-6 * hs.pp[i][j].abs().max(1.0), "{}", model.name());
                assert!((qp - hs.qp[j][i]).abs() <= 1e-6 * hs.qp[j][i].abs().max(1.0), "{}", model.name());
            }
        }
    }
}
