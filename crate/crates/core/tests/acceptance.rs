//! One line per acceptance criterion, printed whether or not it passes.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use phaseflow::classical::{liouville_step_with, FlowConfig};
use phaseflow::diff::DifferenceOrder;
use phaseflow::dynamics::{se_evolve, tise_residual, Gauge, ResidualForm};
use phaseflow::hermite::{ho_eigen_eta, Oscillator};
use phaseflow::quantization::{
    bohr_sommerfeld_levels, pdhdp_invariance_check, phase_winding, separability_check, CoordinateTransform, Observable,
    OrbitConfig,
};
use phaseflow::reference::{eigensolve, schrodinger_evolve};
use phaseflow::transform::{lift, project, suppression_profile, suppression_timescale, SuppressionOptions};
use phaseflow::{DensityField, HamiltonianModel, PhaseField, PhaseGrid, PhasePoint, PositionGrid, WavepacketFamily};

type Check = Result<(bool, String), String>;

fn harmonic() -> HamiltonianModel {
    HamiltonianModel::harmonic(1.0, 1.0).unwrap()
}

fn unit_family() -> WavepacketFamily {
    WavepacketFamily::new(Oscillator::unit().coherent_sigma(), 1.0).unwrap()
}

fn wrap(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

fn err(e: phaseflow::Error) -> String {
    format!("error[{}]: {e}", e.code())
}

fn ac1() -> Check {
    let start = Instant::now();
    let xg = PositionGrid::new_1d(-12.0, 12.0, 2048).map_err(err)?;
    let g = PhaseGrid::new_1d((-9.0, 9.0, 192), (-9.0, 9.0, 192)).map_err(err)?;
    let fam = unit_family();
    let mut worst = 0.0f64;
    for n in 0..3 {
        let psi = Oscillator::unit().eigenstate(n, &xg).map_err(err)?;
        let back = project(&lift(&psi, &fam, &g).map_err(err)?, &fam, &xg).map_err(err)?;
        worst = worst.max(back.l2_distance(&psi).map_err(err)? / psi.l2());
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= 1e-6 && secs <= 30.0,
        format!("round trip max relative L2 error {worst:.3e} (<= 1e-6), {secs:.1} s (<= 30 s)"),
    ))
}

fn ac2() -> Check {
    let xg = PositionGrid::new_1d(-12.0, 12.0, 512).map_err(err)?;
    let g = PhaseGrid::new_1d((-9.0, 9.0, 145), (-9.0, 9.0, 145)).map_err(err)?;
    let fam = unit_family();
    let mut worst = 0.0f64;
    for n in 0..6 {
        let psi = Oscillator::unit().eigenstate(n, &xg).map_err(err)?;
        let eta = lift(&psi, &fam, &g).map_err(err)?;
        let exact = ho_eigen_eta(n, &Oscillator::unit(), &g).map_err(err)?;
        worst = worst.max(eta.l2_distance(&exact).map_err(err)? / exact.l2());
    }
    Ok((worst <= 1e-5, format!("lift vs closed-form eta_n, n = 0..5: max relative {worst:.3e} (<= 1e-5)")))
}

fn ac3() -> Check {
    let g = PhaseGrid::new_1d((-10.0, 10.0, 401), (-10.0, 10.0, 401)).map_err(err)?;
    let model = harmonic();
    let order = DifferenceOrder::Sixth;
    let (mut first, mut half, mut second) = (0.0f64, 0.0f64, 0.0f64);
    for n in 0..6 {
        let eta = ho_eigen_eta(n, &Oscillator::unit(), &g).map_err(err)?;
        let e = n as f64;
        first = first.max(tise_residual(&eta, e, &model, 1.0, ResidualForm::FirstOrder, order).map_err(err)?.relative);
        let r = tise_residual(&eta, e + 0.5, &model, 1.0, ResidualForm::FirstOrder, order).map_err(err)?;
        half = half.max((r.relative - 0.5).abs());
        second = second.max(tise_residual(&eta, e + 0.5, &model, 1.0, ResidualForm::SecondOrder, order).map_err(err)?.relative);
    }
    Ok((
        first <= 1e-5 && half <= 1e-5 && second <= 1e-5,
        format!(
            "order-1 at n: {first:.3e}; order-1 at n + 1/2 minus 1/2: {half:.3e}; order-2 at n + 1/2: {second:.3e} (each <= 1e-5)"
        ),
    ))
}

fn blob(g: &PhaseGrid) -> PhaseField {
    PhaseField::from_fn(g.clone(), |z| {
        let r2 = (z.q[0] - 1.5).powi(2) + (z.p[0] + 0.5).powi(2);
        Complex64::from_polar((-r2).exp(), 0.3 * z.q[0] - 0.2 * z.p[0] * z.p[0])
    })
}

/// Whole number of steps closest to 1e-3 that lands exactly on one period.
fn period_config() -> (FlowConfig, usize) {
    let n = 6283;
    (
        FlowConfig {
            dt: 2.0 * PI / n as f64,
            ..FlowConfig::default()
        },
        n,
    )
}

fn ac4() -> Check {
    let g = PhaseGrid::new_1d((-8.0, 8.0, 129), (-8.0, 8.0, 129)).map_err(err)?;
    let eta = blob(&g);
    let model = harmonic();
    let (cfg, n) = period_config();
    let amp = se_evolve(&eta, &model, 1.0, 2.0 * PI, &cfg, Gauge::None).map_err(err)?;
    let rho = liouville_step_with(&DensityField::from_amplitude(&eta), &model, n, &cfg).map_err(err)?;
    let diff = amp.density().max_abs_difference(rho.field()).map_err(err)?;
    Ok((diff <= 1e-6, format!("max | |eta(T)|^2 - rho(T) | = {diff:.3e} (<= 1e-6)")))
}

fn ac5() -> Check {
    let model = HamiltonianModel::free(1.0).map_err(err)?;
    let g = PhaseGrid::new_1d((-5.0, 9.0, 141), (-3.0, 7.0, 101)).map_err(err)?;
    let mut worst = 0.0f64;
    for hbar in [1.0f64, 0.5] {
        let eta = PhaseField::from_fn(g.clone(), |z| {
            Complex64::from_polar((-(z.q[0] * z.q[0] + (z.p[0] - 2.0).powi(2))).exp(), 0.4 * z.q[0])
        });
        let out = se_evolve(&eta, &model, hbar, 1.0, &FlowConfig::default(), Gauge::None).map_err(err)?;
        let argmax = |f: &PhaseField| {
            f.values()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .map(|(k, _)| k)
                .unwrap()
        };
        let (k0, k1) = (argmax(&eta), argmax(&out));
        let dphase = (out.values()[k1] / eta.values()[k0]).arg();
        worst = worst.max(wrap(dphase - 2.0 / hbar).abs());
    }
    Ok((worst <= 1e-4, format!("peak phase change minus 2/hbar (hbar = 1, 0.5): {worst:.3e} (<= 1e-4)")))
}

fn ac6() -> Check {
    let start = Instant::now();
    let cfg = OrbitConfig::default();
    let ho = bohr_sommerfeld_levels(&harmonic(), 10, 1.0, &cfg).map_err(err)?;
    let ho_err = ho.levels.iter().enumerate().map(|(n, l)| (l.energy - n as f64).abs()).fold(0.0, f64::max);
    let w2 = 2f64.sqrt();
    let aniso = bohr_sommerfeld_levels(&HamiltonianModel::anisotropic_2d(1.0, 1.0, w2).map_err(err)?, 5, 1.0, &cfg).map_err(err)?;
    let aniso_err = aniso
        .levels
        .iter()
        .map(|l| (l.energy - (l.quanta[0] as f64 + w2 * l.quanta[1] as f64)).abs())
        .fold(0.0, f64::max);
    let quartic = HamiltonianModel::quartic(1.0, 1.0).map_err(err)?;
    let mut spec = bohr_sommerfeld_levels(&quartic, 10, 1.0, &cfg).map_err(err)?;
    let coarse = eigensolve(&quartic, &PositionGrid::new_1d(-6.0, 6.0, 192).map_err(err)?, 11, 1.0).map_err(err)?;
    let fine = eigensolve(&quartic, &PositionGrid::new_1d(-6.0, 6.0, 384).map_err(err)?, 11, 1.0).map_err(err)?;
    let resolution_gap = coarse.iter().zip(&fine).map(|(a, b)| (a.energy - b.energy).abs() / b.energy).fold(0.0, f64::max);
    let exact: Vec<f64> = fine.iter().map(|p| p.energy).collect();
    spec.attach_exact(&exact);
    let errs: Vec<f64> = spec.levels[2..].iter().map(|l| l.rel_error.unwrap()).collect();
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    let last = *errs.last().unwrap();
    let secs = start.elapsed().as_secs_f64();
    let pass = ho_err <= 1e-10 && aniso_err <= 1e-8 && monotone && last <= 0.03 && resolution_gap <= 1e-9 && secs <= 60.0;
    Ok((
        pass,
        format!(
            "harmonic {ho_err:.1e} (<= 1e-10); anisotropic {aniso_err:.1e} (<= 1e-8); quartic errors n=2..10 monotone: {monotone}, \
             n=10: {:.2}% (<= 3%), oracle resolution gap {resolution_gap:.1e}; {secs:.1} s (<= 60 s)",
            100.0 * last
        ),
    ))
}

fn ac7() -> Check {
    let g = PhaseGrid::new_1d((-9.0, 9.0, 145), (-9.0, 9.0, 145)).map_err(err)?;
    let mut exact = true;
    let mut worst = 0.0f64;
    for n in 0..6 {
        let eta = ho_eigen_eta(n, &Oscillator::unit(), &g).map_err(err)?;
        let w = phase_winding(&eta, &harmonic(), n as f64, &OrbitConfig::default(), 1e-8).map_err(err)?;
        exact &= w.winding == n as i64;
        worst = worst.max((w.raw - n as f64).abs());
    }
    Ok((
        exact && worst <= 1e-3,
        format!("windings equal n for n = 0..5: {exact}; max |raw - n| {worst:.3e} (<= 1e-3)"),
    ))
}

fn ac8() -> Check {
    let model = harmonic();
    let fam = WavepacketFamily::new(1.0, 1.0).map_err(err)?;
    let mut pass = true;
    let mut parts = Vec::new();
    for probe in [PhasePoint::new_1d(1.0, 0.0), PhasePoint::new_1d(1.0, 1.0)] {
        let t = suppression_timescale(&model, &fam, &probe).map_err(err)?;
        let offsets: Vec<f64> = (-8..=8).map(|k| k as f64 * 0.25 / t).collect();
        let c = suppression_profile(&model, &fam, &probe, &offsets, &SuppressionOptions::default()).map_err(err)?;
        let fitted = c.fitted_t.unwrap_or(f64::NAN);
        let rel = (fitted - t).abs() / t;
        pass &= rel <= 0.05;
        parts.push(format!(
            "({}, {}): fitted {fitted:.4} vs T {t:.4}, off by {:.1}% (<= 5%)",
            probe.q[0],
            probe.p[0],
            100.0 * rel
        ));
    }
    Ok((pass, parts.join("; ")))
}

fn ac9() -> Check {
    let one = harmonic();
    let two = HamiltonianModel::anisotropic_2d(1.0, 1.0, 2f64.sqrt()).map_err(err)?;
    let identity = pdhdp_invariance_check(&one, &CoordinateTransform::Identity, &[PhasePoint::new_1d(0.3, 1.7)]).map_err(err)?.max_rel;
    let scaling = pdhdp_invariance_check(&one, &CoordinateTransform::Scaling([2.0, 1.0]), &[PhasePoint::new_1d(0.3, 1.7)])
        .map_err(err)?
        .max_rel;
    let polar = pdhdp_invariance_check(&two, &CoordinateTransform::Polar, &[PhasePoint::new_2d([1.0, 0.0], [0.0, 1.0])])
        .map_err(err)?
        .max_rel;
    let sep = separability_check(&two, &[Observable::DofEnergy(0), Observable::DofEnergy(1)], 200, 3.0, 42).map_err(err)?.max_abs;
    let worst = identity.max(scaling).max(polar);
    Ok((
        worst <= 1e-10 && sep <= 1e-12,
        format!("p dH/dp identity {identity:.1e}, scaling {scaling:.1e}, polar {polar:.1e} (<= 1e-10); separability {sep:.1e} (<= 1e-12)"),
    ))
}

fn ac10() -> Check {
    let g = PhaseGrid::new_1d((-8.0, 8.0, 129), (-8.0, 8.0, 129)).map_err(err)?;
    let eta = PhaseField::from_fn(g, |z| Complex64::new((-(z.q[0] - 1.0).powi(2) - z.p[0].powi(2)).exp(), 0.0));
    let (cfg, _) = period_config();
    let kvn = se_evolve(&eta, &harmonic(), 1.0, 2.0 * PI, &cfg, Gauge::Kvn).map_err(err)?;
    let plain = se_evolve(&eta, &harmonic(), 1.0, 2.0 * PI, &cfg, Gauge::None).map_err(err)?;
    let cut = 1e-6 * kvn.max_modulus();
    let phase = kvn.values().iter().filter(|v| v.norm() > cut).map(|v| v.arg().abs()).fold(0.0, f64::max);
    let modulus = kvn.modulus().max_abs_difference(&plain.modulus()).map_err(err)?;
    Ok((
        phase <= 1e-6 && modulus <= 1e-8,
        format!("max |arg eta| {phase:.1e} rad (<= 1e-6); max ||eta_kvn| - |eta|| {modulus:.1e} (<= 1e-8)"),
    ))
}

fn ac11() -> Check {
    let model = harmonic();
    let fam = unit_family();
    let xg = PositionGrid::new_1d(-12.0, 12.0, 256).map_err(err)?;
    let g = PhaseGrid::new_1d((-8.0, 8.0, 129), (-8.0, 8.0, 129)).map_err(err)?;
    let (cfg, _) = period_config();
    let psi = Oscillator::unit().eigenstate(0, &xg).map_err(err)?;
    let start = lift(&psi, &fam, &g).map_err(err)?;
    let semi = se_evolve(&start, &model, 1.0, 2.0 * PI, &cfg, Gauge::None).map_err(err)?;
    let exact = lift(&schrodinger_evolve(&psi, &model, 1.0, 2.0 * PI, 1e-4).map_err(err)?, &fam, &g).map_err(err)?;
    let overlap = semi.inner(&exact).map_err(err)?;
    let miss = wrap(overlap.arg() - PI).abs();
    Ok((miss <= 1e-3, format!("global phase between the two {:.6} rad, |phase - pi| {miss:.1e} (<= 1e-3)", wrap(overlap.arg()))))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("AC1 round-trip isometry", ac1),
        ("AC2 analytic lift match", ac2),
        ("AC3 first-order eigenvalue", ac3),
        ("AC4 Liouville equivalence", ac4),
        ("AC5 action-phase law", ac5),
        ("AC6 Bohr-Sommerfeld", ac6),
        ("AC7 phase winding", ac7),
        ("AC8 suppression width", ac8),
        ("AC9 invariance and separability", ac9),
        ("AC10 KvN gauge", ac10),
        ("AC11 zero-point phase", ac11),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let (pass, detail) = run().unwrap_or_else(|e| (false, e));
        // write past the test harness capture so every line shows
        let _ = writeln!(std::io::stderr(), "{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
