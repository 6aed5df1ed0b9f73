//! Action integrals over per-degree-of-freedom orbits, Bohr-Sommerfeld
//! levels, phase winding of amplitudes around orbits, and the separability
//! and `p . dH/dp` invariance checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classical::rk4;
use crate::error::{Error, Result};
use crate::field::PhaseField;
use crate::interp::{interpolate, Stencil};
use crate::model::{HamiltonianModel, PhasePoint};

/// Integration and root-finding settings for orbit computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitConfig {
    pub dt: f64,
    /// Give up looking for a return after this long.
    pub max_time: f64,
    /// Relative width at which the energy bisection stops.
    pub energy_tol: f64,
}

impl Default for OrbitConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            max_time: 1e4,
            energy_tol: 1e-13,
        }
    }
}

/// One closed orbit of a single degree of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct Orbit {
    pub dof: usize,
    pub energy: f64,
    pub period: f64,
    /// `J = oint p dq`
    pub action: f64,
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    /// `int p dH/dp dt` from the start, sampled with `points`.
    pub beta: Vec<f64>,
}

fn dof_point(dof: usize, q: f64, p: f64) -> PhasePoint {
    let mut z = PhasePoint::zero();
    z.q[dof] = q;
    z.p[dof] = p;
    z
}

fn trace(model: &HamiltonianModel, energy: f64, dof: usize, cfg: &OrbitConfig, keep: bool) -> Result<Orbit> {
    if dof >= model.dim() {
        return Err(Error::invalid("dof", format!("model has {} degrees of freedom", model.dim())));
    }
    if !(cfg.dt > 0.0 && cfg.max_time > 0.0) {
        return Err(Error::invalid("dt", "step and time limit must be positive"));
    }
    let mass = model.mass().ok_or(Error::UnsupportedModel {
        model: model.name(),
        operation: "orbit tracing",
    })?;
    let minimum = model.potential_minimum();
    if !energy.is_finite() || energy < minimum {
        return Err(Error::EnergyBelowMinimum { energy, minimum });
    }
    let mut orbit = Orbit {
        dof,
        energy,
        period: 0.0,
        action: 0.0,
        times: vec![0.0],
        points: vec![dof_point(dof, 0.0, 0.0)],
        beta: vec![0.0],
    };
    if energy == minimum {
        return Ok(orbit);
    }
    // every supported potential has its minimum V = 0 at the origin
    let p0 = (2.0 * mass * (energy - minimum)).sqrt();
    orbit.points[0] = dof_point(dof, 0.0, p0);
    let f = |y: &[f64; 3]| {
        let z = dof_point(dof, y[0], y[1]);
        let g = model.gradient(&z);
        [g.p[dof], -g.q[dof], y[1] * g.p[dof]]
    };
    let mut y = [0.0, p0, 0.0];
    let mut t = 0.0;
    while t < cfg.max_time {
        let next = rk4(&y, cfg.dt, &f);
        if y[0] < 0.0 && next[0] >= 0.0 {
            let (mut lo, mut hi) = (0.0, cfg.dt);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if rk4(&y, mid, &f)[0] < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= f64::EPSILON * (t + cfg.dt) {
                    break;
                }
            }
            let tc = 0.5 * (lo + hi);
            let end = rk4(&y, tc, &f);
            orbit.period = t + tc;
            orbit.action = end[2];
            if keep {
                orbit.times.push(orbit.period);
                orbit.points.push(dof_point(dof, end[0], end[1]));
                orbit.beta.push(end[2]);
            }
            return Ok(orbit);
        }
        y = next;
        t += cfg.dt;
        if keep {
            orbit.times.push(t);
            orbit.points.push(dof_point(dof, y[0], y[1]));
            orbit.beta.push(y[2]);
        }
    }
    Err(Error::NoClosedOrbit {
        energy,
        max_time: cfg.max_time,
    })
}

/// The closed orbit of degree of freedom `dof` at energy `energy`, with the
/// other pairs held at the origin. It starts at `q = 0, p > 0` and ends at the
/// next upward crossing of `q = 0`.
pub fn closed_orbit(model: &HamiltonianModel, energy: f64, dof: usize, cfg: &OrbitConfig) -> Result<Orbit> {
    trace(model, energy, dof, cfg, true)
}

/// `J = oint p dq = int_0^T p dH/dp dt` over one orbit of `dof`.
pub fn action_integral(model: &HamiltonianModel, energy: f64, dof: usize, cfg: &OrbitConfig) -> Result<f64> {
    Ok(trace(model, energy, dof, cfg, false)?.action)
}

/// One quantized level.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    /// Quantum number of every degree of freedom.
    pub quanta: Vec<usize>,
    pub energy: f64,
    pub exact: Option<f64>,
    pub rel_error: Option<f64>,
}

/// Bohr-Sommerfeld levels, ordered by energy.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub model: HamiltonianModel,
    pub levels: Vec<Level>,
}

impl SpectrumResult {
    /// Attaches reference energies level by level, in order.
    pub fn attach_exact(&mut self, exact: &[f64]) {
        for (level, &e) in self.levels.iter_mut().zip(exact) {
            level.exact = Some(e);
            level.rel_error = Some((level.energy - e).abs() / e.abs());
        }
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }
}

/// Solves `J(E) = target` by bisection.
pub fn solve_action(model: &HamiltonianModel, target: f64, dof: usize, cfg: &OrbitConfig) -> Result<f64> {
    let minimum = model.potential_minimum();
    if target <= 0.0 {
        return Ok(minimum);
    }
    let mut lo = minimum;
    let mut hi = minimum + 1.0;
    let mut doublings = 0;
    while action_integral(model, hi, dof, cfg)? < target {
        lo = hi;
        hi = minimum + 2.0 * (hi - minimum);
        doublings += 1;
        if doublings > 60 {
            return Err(Error::RootNotBracketed { target, upper: hi });
        }
    }
    while hi - lo > cfg.energy_tol * hi.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if action_integral(model, mid, dof, cfg)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Levels with `J_i = n_i h`, `h = 2 pi hbar`, for every `n_i <= n_max`.
/// Two-dimensional models must be separable; their levels are sums of the
/// per-degree-of-freedom energies.
pub fn bohr_sommerfeld_levels(model: &HamiltonianModel, n_max: usize, hbar: f64, cfg: &OrbitConfig) -> Result<SpectrumResult> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::invalid("hbar", format!("must be positive, got {hbar}")));
    }
    if !model.is_confining() {
        return Err(Error::UnsupportedModel {
            model: model.name(),
            operation: "Bohr-Sommerfeld quantization (needs a confining potential)",
        });
    }
    let h = 2.0 * std::f64::consts::PI * hbar;
    let per_dof: Vec<Vec<f64>> = (0..model.dim())
        .map(|dof| (0..=n_max).map(|n| solve_action(model, n as f64 * h, dof, cfg)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut levels: Vec<Level> = match per_dof.len() {
        1 => per_dof[0]
            .iter()
            .enumerate()
            .map(|(n, &e)| Level {
                quanta: vec![n],
                energy: e,
                exact: None,
                rel_error: None,
            })
            .collect(),
        _ => {
            let mut v = Vec::new();
            for (n1, e1) in per_dof[0].iter().enumerate() {
                for (n2, e2) in per_dof[1].iter().enumerate() {
                    v.push(Level {
                        quanta: vec![n1, n2],
                        energy: e1 + e2,
                        exact: None,
                        rel_error: None,
                    });
                }
            }
            v
        }
    };
    levels.sort_by(|a, b| a.energy.total_cmp(&b.energy).then_with(|| a.quanta.cmp(&b.quanta)));
    Ok(SpectrumResult { model: *model, levels })
}

/// Net winding of `arg eta` around a closed orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Winding {
    pub winding: i64,
    /// Total phase change over `2 pi`, before rounding.
    pub raw: f64,
}

/// Follows `arg eta` (interpolated) around the `H = energy` orbit of a
/// one-dimensional model and counts its turns.
pub fn phase_winding(eta: &PhaseField, model: &HamiltonianModel, energy: f64, cfg: &OrbitConfig, floor: f64) -> Result<Winding> {
    if model.dim() != 1 || eta.grid().dim() != 1 {
        return Err(Error::UnsupportedModel {
            model: model.name(),
            operation: "phase winding (one degree of freedom only)",
        });
    }
    let orbit = closed_orbit(model, energy, 0, cfg)?;
    let cut = floor * eta.max_modulus();
    let mut values = Vec::with_capacity(orbit.points.len());
    for z in &orbit.points {
        let v = interpolate(eta.lattice(), eta.values(), &[z.q[0], z.p[0]], Stencil::Cubic)
            .ok_or(Error::OrbitOutsideGrid { energy })?;
        if v.norm() <= cut {
            return Err(Error::AmplitudeZeroOnOrbit {
                amplitude: v.norm(),
                floor: cut,
            });
        }
        values.push(v);
    }
    let total: f64 = values.windows(2).map(|w| (w[1] / w[0]).arg()).sum::<f64>()
        + values.last().zip(values.first()).map(|(a, b)| (b / a).arg()).unwrap_or(0.0);
    let raw = total / (2.0 * std::f64::consts::PI);
    Ok(Winding {
        winding: raw.round() as i64,
        raw,
    })
}

/// A phase-space function with an analytic gradient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observable {
    /// Energy in one degree of freedom of a separable model.
    DofEnergy(usize),
    Position(usize),
    Momentum(usize),
    Hamiltonian,
}

impl Observable {
    /// `(dc/dq, dc/dp)` at `z`.
    pub fn gradient(&self, model: &HamiltonianModel, z: &PhasePoint) -> PhasePoint {
        let mut g = PhasePoint::zero();
        match *self {
            Observable::DofEnergy(i) => {
                // H is a sum of per-pair terms for every supported model
                let full = model.gradient(z);
                g.q[i] = full.q[i];
                g.p[i] = full.p[i];
            }
            Observable::Position(i) => g.q[i] = 1.0,
            Observable::Momentum(i) => g.p[i] = 1.0,
            Observable::Hamiltonian => g = model.gradient(z),
        }
        g
    }

    fn index(&self) -> Option<usize> {
        match *self {
            Observable::DofEnergy(i) | Observable::Position(i) | Observable::Momentum(i) => Some(i),
            Observable::Hamiltonian => None,
        }
    }
}

/// Largest `|{c_i, H}_j|` found at random points, per `(i, j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityReport {
    /// `entries[i][j] = max |{c_i, H}_j|`
    pub entries: Vec<Vec<f64>>,
    pub max_abs: f64,
}

/// Evaluates the per-pair brackets `{c_i, H}_j = dc_i/dq_j dH/dp_j - dc_i/dp_j dH/dq_j`
/// at `n_points` random points in `[-extent, extent]^{2D}`.
pub fn separability_check(
    model: &HamiltonianModel,
    constants: &[Observable],
    n_points: usize,
    extent: f64,
    seed: u64,
) -> Result<SeparabilityReport> {
    let d = model.dim();
    if let Some(bad) = constants.iter().filter_map(Observable::index).find(|&i| i >= d) {
        return Err(Error::invalid("constants", format!("index {bad} exceeds the model dimension {d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = vec![vec![0.0f64; d]; constants.len()];
    for _ in 0..n_points {
        let mut z = PhasePoint::zero();
        for i in 0..d {
            z.q[i] = rng.random_range(-extent..=extent);
            z.p[i] = rng.random_range(-extent..=extent);
        }
        let gh = model.gradient(&z);
        for (i, c) in constants.iter().enumerate() {
            let gc = c.gradient(model, &z);
            for j in 0..d {
                let v = gc.q[j] * gh.p[j] - gc.p[j] * gh.q[j];
                entries[i][j] = entries[i][j].max(v.abs());
            }
        }
    }
    let max_abs = entries.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    Ok(SeparabilityReport { entries, max_abs })
}

/// Point transformation `Q = f(q)` extended to momenta by the generating
/// function `F = sum_i f_i(q) P_i`, so that `p_i = sum_j (df_j/dq_i) P_j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoordinateTransform {
    Identity,
    /// `Q_i = a_i q_i`
    Scaling([f64; 2]),
    /// `Q_1 = r, Q_2 = theta` in two dimensions.
    Polar,
}

impl CoordinateTransform {
    fn forward(&self, q: &[f64; 2], d: usize) -> [f64; 2] {
        match *self {
            CoordinateTransform::Identity => *q,
            CoordinateTransform::Scaling(a) => {
                let mut out = [0.0; 2];
                for i in 0..d {
                    out[i] = a[i] * q[i];
                }
                out
            }
            CoordinateTransform::Polar => [q[0].hypot(q[1]), q[1].atan2(q[0])],
        }
    }

    fn inverse(&self, big_q: &[f64; 2], d: usize) -> [f64; 2] {
        match *self {
            CoordinateTransform::Identity => *big_q,
            CoordinateTransform::Scaling(a) => {
                let mut out = [0.0; 2];
                for i in 0..d {
                    out[i] = big_q[i] / a[i];
                }
                out
            }
            CoordinateTransform::Polar => [big_q[0] * big_q[1].cos(), big_q[0] * big_q[1].sin()],
        }
    }

    /// `jac[j][i] = df_j/dq_i`
    fn jacobian(&self, q: &[f64; 2], d: usize) -> [[f64; 2]; 2] {
        match *self {
            CoordinateTransform::Identity => [[1.0, 0.0], [0.0, 1.0]],
            CoordinateTransform::Scaling(a) => {
                let mut j = [[0.0; 2]; 2];
                for i in 0..d {
                    j[i][i] = a[i];
                }
                j
            }
            CoordinateTransform::Polar => {
                let r2 = q[0] * q[0] + q[1] * q[1];
                let r = r2.sqrt();
                [[q[0] / r, q[1] / r], [-q[1] / r2, q[0] / r2]]
            }
        }
    }
}

/// `sum p dH/dp` in both coordinate systems at each point.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub original: Vec<f64>,
    pub transformed: Vec<f64>,
    pub max_rel: f64,
}

/// Compares `sum_i p_i dH/dp_i` with `sum_i P_i dH~/dP_i`, where
/// `H~(Q, P) = H(q(Q), p(Q, P))` is differentiated numerically in `P`.
pub fn pdhdp_invariance_check(
    model: &HamiltonianModel,
    xf: &CoordinateTransform,
    points: &[PhasePoint],
) -> Result<InvarianceReport> {
    let d = model.dim();
    if matches!(xf, CoordinateTransform::Polar) && d != 2 {
        return Err(Error::invalid("transform", "the polar map needs two degrees of freedom"));
    }
    let mut original = Vec::with_capacity(points.len());
    let mut transformed = Vec::with_capacity(points.len());
    let mut max_rel = 0.0f64;
    for z in points {
        let jac = xf.jacobian(&z.q, d);
        let det = if d == 1 { jac[0][0] } else { jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0] };
        if !det.is_finite() || det.abs() < 1e-12 {
            return Err(Error::SingularJacobian { q: z.q[..d].to_vec() });
        }
        // p_i = sum_j jac[j][i] P_j; solve for P
        let big_p = if d == 1 {
            [z.p[0] / jac[0][0], 0.0]
        } else {
            let (a, b, c, e) = (jac[0][0], jac[1][0], jac[0][1], jac[1][1]);
            // [p0; p1] = [[a, b], [c, e]] [P0; P1]
            [(e * z.p[0] - b * z.p[1]) / det, (a * z.p[1] - c * z.p[0]) / det]
        };
        let big_q = xf.forward(&z.q, d);
        let h_tilde = |pp: &[f64; 2]| {
            let q = xf.inverse(&big_q, d);
            let jq = xf.jacobian(&q, d);
            let mut w = PhasePoint::zero();
            for i in 0..d {
                w.q[i] = q[i];
                w.p[i] = (0..d).map(|j| jq[j][i] * pp[j]).sum();
            }
            model.energy(&w)
        };
        let mut sum_t = 0.0;
        for i in 0..d {
            let h = 1e-3 * big_p[i].abs().max(1.0);
            let at = |s: f64| {
                let mut pp = big_p;
                pp[i] += s * h;
                h_tilde(&pp)
            };
            let deriv = (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * h);
            sum_t += big_p[i] * deriv;
        }
        let sum_o = model.p_dh_dp(z);
        let rel = (sum_t - sum_o).abs() / sum_o.abs().max(f64::MIN_POSITIVE);
        max_rel = max_rel.max(if sum_o == 0.0 { (sum_t - sum_o).abs() } else { rel });
        original.push(sum_o);
        transformed.push(sum_t);
    }
    Ok(InvarianceReport {
        original,
        transformed,
        max_rel,
    })
}
