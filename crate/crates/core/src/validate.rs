//! Invariant suites that can be run outside the test harness, one per module.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::{flow_map, liouville_step_with, FlowConfig};
use crate::diff::DifferenceOrder;
use crate::dynamics::{se_evolve, tise_residual, Gauge, ResidualForm};
use crate::error::Result;
use crate::field::{DensityField, PhaseField};
use crate::grid::{PhaseGrid, PositionGrid};
use crate::hermite::{hermite, hermite_complex, ho_eigen_eta, Oscillator};
use crate::model::{HamiltonianModel, PhasePoint};
use crate::quantization::{
    action_integral, bohr_sommerfeld_levels, closed_orbit, pdhdp_invariance_check, phase_winding, separability_check,
    CoordinateTransform, Observable, OrbitConfig,
};
use crate::reference::{eigensolve, schrodinger_evolve};
use crate::transform::{lift, project, project_q};
use crate::wavepacket::WavepacketFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    PhaseCore,
    Transform,
    Classical,
    SeDynamics,
    Quantization,
    Reference,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::PhaseCore,
        Suite::Transform,
        Suite::Classical,
        Suite::SeDynamics,
        Suite::Quantization,
        Suite::Reference,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::PhaseCore => "phase-core",
            Suite::Transform => "transform",
            Suite::Classical => "classical",
            Suite::SeDynamics => "se-dynamics",
            Suite::Quantization => "quantization",
            Suite::Reference => "reference",
        }
    }

    /// Accepts a suite name or `all`.
    pub fn parse(name: &str) -> Option<Vec<Suite>> {
        if name == "all" {
            return Some(Self::ALL.to_vec());
        }
        Self::ALL.iter().find(|s| s.name() == name).map(|s| vec![*s])
    }
}

/// One invariant: passes when `value <= tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub suite: &'static str,
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Error code and message when the check could not run.
    pub error: Option<String>,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        match &self.error {
            Some(e) => write!(f, "{status} {}/{}: {e}", self.suite, self.name),
            None => write!(
                f,
                "{status} {}/{}: {:.3e} (tolerance {:.1e})",
                self.suite, self.name, self.value, self.tolerance
            ),
        }
    }
}

fn outcome(suite: Suite, name: &'static str, tolerance: f64, run: impl FnOnce() -> Result<f64>) -> CheckOutcome {
    match run() {
        Ok(value) => CheckOutcome {
            suite: suite.name(),
            name,
            value,
            tolerance,
            passed: value <= tolerance,
            error: None,
        },
        Err(e) => CheckOutcome {
            suite: suite.name(),
            name,
            value: f64::NAN,
            tolerance,
            passed: false,
            error: Some(format!("error[{}]: {e}", e.code())),
        },
    }
}

/// Runs every check of `suite`. Randomized checks draw from `seed`.
pub fn run_suite(suite: Suite, seed: u64) -> Vec<CheckOutcome> {
    match suite {
        Suite::PhaseCore => phase_core(),
        Suite::Transform => transform(seed),
        Suite::Classical => classical(),
        Suite::SeDynamics => se_dynamics(),
        Suite::Quantization => quantization(seed),
        Suite::Reference => reference(),
    }
}

fn harmonic() -> HamiltonianModel {
    HamiltonianModel::Harmonic { mass: 1.0, omega: 1.0 }
}

fn unit_family() -> Result<WavepacketFamily> {
    WavepacketFamily::new(Oscillator::unit().coherent_sigma(), 1.0)
}

fn phase_core() -> Vec<CheckOutcome> {
    let s = Suite::PhaseCore;
    let mut out = Vec::new();
    out.push(outcome(s, "gaussian-hermite-identity", 1e-8, || {
        let mut worst = 0.0f64;
        for n in 0..=6 {
            for alpha in [0.5f64, 0.9] {
                for z in [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.5)] {
                    let (a, b, m) = (-12.0 + z.re, 12.0 + z.re, 24_000usize);
                    let h = (b - a) / m as f64;
                    let f = |x: f64| -> Result<Complex64> {
                        Ok((-(Complex64::new(x, 0.0) - z).powi(2)).exp() * hermite(n, alpha * x)?)
                    };
                    let mut sum = f(a)? + f(b)?;
                    for k in 1..m {
                        sum += f(a + k as f64 * h)? * if k % 2 == 1 { 4.0 } else { 2.0 };
                    }
                    let lhs = sum * h / 3.0;
                    let c = (1.0 - alpha * alpha).sqrt();
                    let rhs = PI.sqrt() * c.powi(n as i32) * hermite_complex(n, z * alpha / c)?;
                    let scale = rhs.norm().max(PI.sqrt() * c.powi(n as i32));
                    worst = worst.max((lhs - rhs).norm() / scale);
                }
            }
        }
        Ok(worst)
    }));
    out.push(outcome(s, "eigenstate-phase-norm", 1e-6, || {
        let g = PhaseGrid::new_1d((-10.0, 10.0, 201), (-10.0, 10.0, 201))?;
        let mut worst = 0.0f64;
        for n in 0..6 {
            worst = worst.max((ho_eigen_eta(n, &Oscillator::unit(), &g)?.phase_norm_sqr(1.0) - 1.0).abs());
        }
        Ok(worst)
    }));
    out.push(outcome(s, "gradient-finite-differences", 1e-6, || {
        let z = PhasePoint::new_2d([0.7, -0.4], [1.2, 0.3]);
        let models = [
            harmonic(),
            HamiltonianModel::quartic(1.1, 0.4)?,
            HamiltonianModel::anisotropic_2d(0.9, 1.0, 2f64.sqrt())?,
        ];
        let mut worst = 0.0f64;
        for model in models {
            let g = model.gradient(&z);
            let h = 1e-5;
            for i in 0..model.dim() {
                let (mut a, mut b) = (z, z);
                a.q[i] += h;
                b.q[i] -= h;
                let fd = (model.energy(&a) - model.energy(&b)) / (2.0 * h);
                worst = worst.max((fd - g.q[i]).abs() / g.q[i].abs().max(1.0));
                let (mut a, mut b) = (z, z);
                a.p[i] += h;
                b.p[i] -= h;
                let fd = (model.energy(&a) - model.energy(&b)) / (2.0 * h);
                worst = worst.max((fd - g.p[i]).abs() / g.p[i].abs().max(1.0));
            }
        }
        Ok(worst)
    }));
    out.push(outcome(s, "modulus-depends-on-energy", 1e-10, || {
        let osc = Oscillator::unit();
        let mut worst = 0.0f64;
        for n in 0..5 {
            for e in [0.3f64, 1.0, 2.5] {
                let r = (2.0 * e).sqrt();
                let reference = osc.eta_at(n, r, 0.0).norm();
                for k in 1..12 {
                    let th = k as f64 * 0.53;
                    let m = osc.eta_at(n, r * th.cos(), r * th.sin()).norm();
                    worst = worst.max((m - reference).abs() / reference);
                }
            }
        }
        Ok(worst)
    }));
    out
}

fn transform(seed: u64) -> Vec<CheckOutcome> {
    let s = Suite::Transform;
    let mut out = Vec::new();
    let setup = || -> Result<(PositionGrid, PhaseGrid, WavepacketFamily)> {
        Ok((
            PositionGrid::new_1d(-12.0, 12.0, 512)?,
            PhaseGrid::new_1d((-9.0, 9.0, 96), (-9.0, 9.0, 96))?,
            unit_family()?,
        ))
    };
    out.push(outcome(s, "round-trip", 1e-6, || {
        let (xg, g, fam) = setup()?;
        let mut worst = 0.0f64;
        for n in 0..3 {
            let psi = Oscillator::unit().eigenstate(n, &xg)?;
            let back = project(&lift(&psi, &fam, &g)?, &fam, &xg)?;
            worst = worst.max(back.l2_distance(&psi)? / psi.l2());
        }
        Ok(worst)
    }));
    out.push(outcome(s, "inner-products", 1e-6, || {
        let (xg, g, fam) = setup()?;
        let a = Oscillator::unit().eigenstate(1, &xg)?;
        let b = crate::field::PositionWavefunction::from_fn(xg.clone(), |x| {
            Complex64::from_polar((-(x[0] - 0.5).powi(2)).exp(), 0.8 * x[0])
        })
        .normalized();
        let direct = a.inner(&b)?;
        let (la, lb) = (lift(&a, &fam, &g)?, lift(&b, &fam, &g)?);
        let lifted = la.inner(&lb)? / (2.0 * PI);
        Ok((lifted - direct).norm())
    }));
    out.push(outcome(s, "project-q-idempotent", 1e-6, || {
        let (_, g, fam) = setup()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blobs: Vec<(f64, f64, Complex64)> = (0..6)
            .map(|_| {
                (
                    rng.random_range(-1.5..1.5),
                    rng.random_range(-1.5..1.5),
                    Complex64::from_polar(rng.random_range(0.2..1.0), rng.random_range(-PI..PI)),
                )
            })
            .collect();
        let eta = PhaseField::from_fn(g, |z| {
            blobs
                .iter()
                .map(|(q, p, c)| c * (-((z.q[0] - q).powi(2) + (z.p[0] - p).powi(2)) / 1.5).exp())
                .sum()
        });
        let once = project_q(&eta, &fam)?;
        let twice = project_q(&once, &fam)?;
        Ok(twice.l2_distance(&once)? / eta.l2())
    }));
    out
}

fn classical() -> Vec<CheckOutcome> {
    let s = Suite::Classical;
    let mut out = Vec::new();
    out.push(outcome(s, "rk4-order", 0.0, || {
        let model = harmonic();
        let z0 = PhasePoint::new_1d(1.0, 0.5);
        let t = 2.0f64;
        let exact = PhasePoint::new_1d(t.cos() + 0.5 * t.sin(), -t.sin() + 0.5 * t.cos());
        let err = |dt: f64| flow_map(&model, &z0, t, dt).distance(&exact);
        // halving the step must gain at least 2^4 / 2
        Ok((8.0 - err(0.1) / err(0.05)).max(0.0))
    }));
    out.push(outcome(s, "forward-backward", 1e-10, || {
        let model = HamiltonianModel::quartic(1.0, 0.5)?;
        let z0 = PhasePoint::new_1d(0.4, -1.1);
        let there = flow_map(&model, &z0, 2.7, 1e-3);
        Ok(flow_map(&model, &there, -2.7, 1e-3).distance(&z0))
    }));
    out.push(outcome(s, "liouville-matches-modulus", 1e-6, || {
        let g = PhaseGrid::new_1d((-8.0, 8.0, 129), (-8.0, 8.0, 129))?;
        let eta = PhaseField::from_fn(g, |z| {
            let r2 = (z.q[0] - 1.5).powi(2) + (z.p[0] + 0.5).powi(2);
            Complex64::from_polar((-r2).exp(), 0.3 * z.q[0] - 0.2 * z.p[0] * z.p[0])
        });
        let model = harmonic();
        let cfg = FlowConfig {
            dt: 2.0 * PI / 6283.0,
            ..FlowConfig::default()
        };
        let amp = se_evolve(&eta, &model, 1.0, 2.0 * PI, &cfg, Gauge::None)?;
        let rho = liouville_step_with(&DensityField::from_amplitude(&eta), &model, 6283, &cfg)?;
        amp.density().max_abs_difference(rho.field())
    }));
    out
}

fn se_dynamics() -> Vec<CheckOutcome> {
    let s = Suite::SeDynamics;
    let mut out = Vec::new();
    let fine = || PhaseGrid::new_1d((-10.0, 10.0, 401), (-10.0, 10.0, 401));
    out.push(outcome(s, "first-order-eigenvalues", 1e-5, || {
        let g = fine()?;
        let mut worst = 0.0f64;
        for n in 0..4 {
            let eta = ho_eigen_eta(n, &Oscillator::unit(), &g)?;
            let r = tise_residual(&eta, n as f64, &harmonic(), 1.0, ResidualForm::FirstOrder, DifferenceOrder::Sixth)?;
            worst = worst.max(r.relative);
        }
        Ok(worst)
    }));
    out.push(outcome(s, "naive-kvn-residual-is-large", 1e-4, || {
        let g = fine()?;
        let eta = ho_eigen_eta(1, &Oscillator::unit(), &g)?;
        let plain = tise_residual(&eta, 1.0, &harmonic(), 1.0, ResidualForm::FirstOrder, DifferenceOrder::Sixth)?;
        let kvn = tise_residual(&eta, 1.0, &harmonic(), 1.0, ResidualForm::KvnNaive, DifferenceOrder::Sixth)?;
        Ok(plain.relative / kvn.relative)
    }));
    let blob = |g: PhaseGrid| {
        PhaseField::from_fn(g, |z| {
            let r2 = (z.q[0] - 1.5).powi(2) + (z.p[0] + 0.5).powi(2);
            Complex64::from_polar((-r2).exp(), 0.3 * z.q[0])
        })
    };
    out.push(outcome(s, "norm-per-period", 1e-6, || {
        let eta = blob(PhaseGrid::new_1d((-8.0, 8.0, 129), (-8.0, 8.0, 129))?);
        let after = se_evolve(&eta, &harmonic(), 1.0, 2.0 * PI, &FlowConfig::default(), Gauge::None)?;
        Ok((after.phase_norm_sqr(1.0) - eta.phase_norm_sqr(1.0)).abs() / eta.phase_norm_sqr(1.0))
    }));
    out.push(outcome(s, "gauges-share-modulus", 1e-8, || {
        let eta = blob(PhaseGrid::new_1d((-8.0, 8.0, 129), (-8.0, 8.0, 129))?);
        let model = HamiltonianModel::quartic(1.0, 0.1)?;
        let plain = se_evolve(&eta, &model, 1.0, 1.2, &FlowConfig::default(), Gauge::None)?;
        let kvn = se_evolve(&eta, &model, 1.0, 1.2, &FlowConfig::default(), Gauge::Kvn)?;
        plain.modulus().max_abs_difference(&kvn.modulus())
    }));
    out
}

fn quantization(seed: u64) -> Vec<CheckOutcome> {
    let s = Suite::Quantization;
    let cfg = OrbitConfig::default();
    let mut out = Vec::new();
    out.push(outcome(s, "action-monotone", 0.0, || {
        let mut violations = 0.0;
        for model in [harmonic(), HamiltonianModel::quartic(1.0, 1.0)?] {
            let js = (1..12)
                .map(|k| action_integral(&model, 0.7 * k as f64, 0, &cfg))
                .collect::<Result<Vec<_>>>()?;
            violations += js.windows(2).filter(|w| w[1] <= w[0]).count() as f64;
        }
        Ok(violations)
    }));
    out.push(outcome(s, "harmonic-levels", 1e-10, || {
        let spec = bohr_sommerfeld_levels(&harmonic(), 10, 1.0, &cfg)?;
        Ok(spec
            .levels
            .iter()
            .enumerate()
            .map(|(n, l)| (l.energy - n as f64).abs())
            .fold(0.0, f64::max))
    }));
    out.push(outcome(s, "consistency-triangle", 1e-8, || {
        let model = harmonic();
        let spec = bohr_sommerfeld_levels(&model, 4, 1.0, &cfg)?;
        let xg = PositionGrid::new_1d(-12.0, 12.0, 256)?;
        let states = eigensolve(&model, &xg, 5, 1.0)?;
        let fam = unit_family()?;
        let g = PhaseGrid::new_1d((-7.0, 7.0, 97), (-7.0, 7.0, 97))?;
        let mut worst = 0.0f64;
        for (n, level) in spec.levels.iter().enumerate() {
            let j = action_integral(&model, level.energy, 0, &cfg)?;
            worst = worst.max((j - 2.0 * PI * n as f64).abs());
            let w = phase_winding(&lift(&states[n].state, &fam, &g)?, &model, level.energy, &cfg, 1e-8)?;
            if w.winding != n as i64 {
                worst = f64::INFINITY;
            }
        }
        Ok(worst)
    }));
    out.push(outcome(s, "beta-slope-is-momentum", 1e-3, || {
        let orbit = closed_orbit(&harmonic(), 2.0, 0, &cfg)?;
        let mut worst = 0.0f64;
        for k in 1..orbit.points.len() - 1 {
            let (a, b, z) = (&orbit.points[k - 1], &orbit.points[k + 1], &orbit.points[k]);
            if z.p[0] < 0.3 || a.p[0] < 0.0 || b.p[0] < 0.0 {
                continue;
            }
            let slope = (orbit.beta[k + 1] - orbit.beta[k - 1]) / (b.q[0] - a.q[0]);
            worst = worst.max((slope - z.p[0]).abs());
        }
        Ok(worst)
    }));
    out.push(outcome(s, "separability", 1e-12, || {
        let model = HamiltonianModel::anisotropic_2d(1.0, 1.0, 2f64.sqrt())?;
        Ok(separability_check(&model, &[Observable::DofEnergy(0), Observable::DofEnergy(1)], 200, 3.0, seed)?.max_abs)
    }));
    out.push(outcome(s, "p-dh-dp-polar", 1e-10, || {
        let model = HamiltonianModel::anisotropic_2d(1.0, 1.0, 1.0)?;
        let pts = [PhasePoint::new_2d([1.0, 0.0], [0.0, 1.0])];
        Ok(pdhdp_invariance_check(&model, &CoordinateTransform::Polar, &pts)?.max_rel)
    }));
    out
}

fn reference() -> Vec<CheckOutcome> {
    let s = Suite::Reference;
    let mut out = Vec::new();
    let xg = || PositionGrid::new_1d(-12.0, 12.0, 256);
    out.push(outcome(s, "harmonic-spectrum", 1e-8, || {
        let pairs = eigensolve(&harmonic(), &xg()?, 5, 1.0)?;
        Ok(pairs
            .iter()
            .enumerate()
            .map(|(n, p)| (p.energy - (n as f64 + 0.5)).abs())
            .fold(0.0, f64::max))
    }));
    out.push(outcome(s, "lift-matches-analytic", 1e-5, || {
        let pairs = eigensolve(&harmonic(), &xg()?, 4, 1.0)?;
        let fam = unit_family()?;
        let g = PhaseGrid::new_1d((-8.0, 8.0, 97), (-8.0, 8.0, 97))?;
        let mut worst = 0.0f64;
        for (n, pair) in pairs.iter().enumerate() {
            let eta = lift(&pair.state, &fam, &g)?;
            let exact = ho_eigen_eta(n, &Oscillator::unit(), &g)?;
            worst = worst.max(eta.l2_distance(&exact)? / exact.l2());
        }
        Ok(worst)
    }));
    out.push(outcome(s, "missing-zero-point-phase", 1e-4, || {
        let model = harmonic();
        let fam = unit_family()?;
        let g = PhaseGrid::new_1d((-8.0, 8.0, 129), (-8.0, 8.0, 129))?;
        let cfg = FlowConfig::default().with_stencil(crate::interp::Stencil::Quintic);
        let t = 1.3;
        let psi = Oscillator::unit().eigenstate(1, &xg()?)?;
        let semi = se_evolve(&lift(&psi, &fam, &g)?, &model, 1.0, t, &cfg, Gauge::None)?;
        let exact = lift(&schrodinger_evolve(&psi, &model, 1.0, t, 1e-4)?, &fam, &g)?;
        let corrected = semi.scale(Complex64::from_polar(1.0, -0.5 * t));
        Ok(corrected.max_abs_difference(&exact)? / exact.max_modulus())
    }));
    out
}
