//! Hamiltonian trajectories, action quadrature, Poisson brackets on grids and
//! semi-Lagrangian transport along the flow.

use std::ops::Mul;

use rayon::prelude::*;

use crate::diff::{derivative, DifferenceOrder};
use crate::error::{Error, Result};
use crate::field::{DensityField, Field, RealPhaseField, Sample, DEFAULT_BOUNDARY_EPS};
use crate::grid::{Grid, PhaseGrid};
use crate::interp::{interpolate_index, Stencil};
use crate::model::{HamiltonianModel, PhasePoint};

/// Step size and tolerances of the fixed-step RK4 flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub dt: f64,
    /// Allowed relative energy drift along a trajectory.
    pub energy_tol: f64,
    /// Interpolant used when transporting fields.
    pub stencil: Stencil,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            energy_tol: 1e-8,
            stencil: Stencil::Cubic,
        }
    }
}

impl FlowConfig {
    pub fn new(dt: f64, energy_tol: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            energy_tol,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_stencil(mut self, stencil: Stencil) -> Self {
        self.stencil = stencil;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.energy_tol.is_finite() && self.energy_tol > 0.0) {
            return Err(Error::invalid("energy_tol", format!("must be positive, got {}", self.energy_tol)));
        }
        Ok(())
    }

    /// Number of equal steps covering `t` and the resulting step length.
    fn steps(&self, t: f64) -> (usize, f64) {
        let n = (t.abs() / self.dt).ceil().max(1.0) as usize;
        (n, t / n as f64)
    }
}

/// A sampled classical path.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<PhasePoint>,
    /// `int (p . dH/dp - H) dt` along the path.
    pub action: f64,
    /// `H` at the first point.
    pub energy: f64,
}

impl Trajectory {
    pub fn final_point(&self) -> PhasePoint {
        *self.points.last().expect("trajectories hold at least two points")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Classical RK4 step for an arbitrary autonomous system.
#[inline]
pub(crate) fn rk4<const N: usize>(y: &[f64; N], h: f64, f: &impl Fn(&[f64; N]) -> [f64; N]) -> [f64; N] {
    let shift = |a: &[f64; N], k: &[f64; N], s: f64| {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * k[i];
        }
        out
    };
    let k1 = f(y);
    let k2 = f(&shift(y, &k1, 0.5 * h));
    let k3 = f(&shift(y, &k2, 0.5 * h));
    let k4 = f(&shift(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// One RK4 step of Hamilton's equations.
#[inline]
pub fn rk4_step(model: &HamiltonianModel, z: &PhasePoint, h: f64) -> PhasePoint {
    let k1 = model.flow(z);
    let k2 = model.flow(&z.axpy(0.5 * h, &k1));
    let k3 = model.flow(&z.axpy(0.5 * h, &k2));
    let k4 = model.flow(&z.axpy(h, &k3));
    let mut out = *z;
    for i in 0..2 {
        out.q[i] += h / 6.0 * (k1.q[i] + 2.0 * k2.q[i] + 2.0 * k3.q[i] + k4.q[i]);
        out.p[i] += h / 6.0 * (k1.p[i] + 2.0 * k2.p[i] + 2.0 * k3.p[i] + k4.p[i]);
    }
    out
}

/// Flows `z` for time `t` (negative runs backwards) in steps of at most `dt`.
pub fn flow_map(model: &HamiltonianModel, z: &PhasePoint, t: f64, dt: f64) -> PhasePoint {
    let n = (t.abs() / dt).ceil().max(1.0) as usize;
    let h = t / n as f64;
    let mut z = *z;
    for _ in 0..n {
        z = rk4_step(model, &z, h);
    }
    z
}

/// Composite Simpson weights (in units of the spacing) for `n` intervals,
/// closing with the 3/8 rule when `n` is odd.
pub(crate) fn simpson_weights(n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    match n {
        0 => {}
        1 => {
            w[0] = 0.5;
            w[1] = 0.5;
        }
        _ => {
            let m = if n % 2 == 0 { n } else { n - 3 };
            for k in 0..m {
                if k % 2 == 0 {
                    w[k] += 1.0 / 3.0;
                    w[k + 1] += 4.0 / 3.0;
                    w[k + 2] += 1.0 / 3.0;
                }
            }
            if m < n {
                for (k, c) in [3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0].into_iter().enumerate() {
                    w[m + k] += c;
                }
            }
        }
    }
    w
}

/// Simpson quadrature of equally spaced samples.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    simpson_weights(values.len() - 1).iter().zip(values).map(|(w, v)| w * v).sum::<f64>() * h
}

fn relative_drift(energy: f64, e0: f64) -> f64 {
    let scale = if e0 != 0.0 { e0.abs() } else { 1.0 };
    (energy - e0).abs() / scale
}

/// Integrates Hamilton's equations from `z0` for `t_final` with fixed RK4 steps.
pub fn integrate_trajectory(
    model: &HamiltonianModel,
    z0: &PhasePoint,
    t_final: f64,
    cfg: &FlowConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(t_final.is_finite() && t_final > 0.0) {
        return Err(Error::invalid("t_final", format!("must be positive, got {t_final}")));
    }
    let (n, h) = cfg.steps(t_final);
    let energy = model.energy(z0);
    let mut times = Vec::with_capacity(n + 1);
    let mut points = Vec::with_capacity(n + 1);
    let mut lag = Vec::with_capacity(n + 1);
    let mut z = *z0;
    for k in 0..=n {
        if k > 0 {
            z = rk4_step(model, &z, h);
        }
        let drift = relative_drift(model.energy(&z), energy);
        if drift > cfg.energy_tol {
            return Err(Error::EnergyDrift {
                drift,
                tol: cfg.energy_tol,
            });
        }
        times.push(k as f64 * h);
        points.push(z);
        lag.push(model.lagrangian(&z));
    }
    Ok(Trajectory {
        times,
        points,
        action: simpson(&lag, h),
        energy,
    })
}

/// `int (p . dH/dp - H) dt` along `traj` by Simpson's rule.
///
/// Needs at least three uniformly spaced samples, and the direction of motion
/// may not turn by more than `2 pi / 100` between consecutive samples.
pub fn accumulate_action(traj: &Trajectory, model: &HamiltonianModel) -> Result<f64> {
    let n = traj.points.len();
    if n < 3 || traj.times.len() != n {
        return Err(Error::TooFewSamples {
            reason: format!("{n} samples, at least 3 are needed"),
        });
    }
    let h = traj.times[1] - traj.times[0];
    if !(h > 0.0) || traj.times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0)) {
        return Err(Error::invalid("trajectory", "samples must be equally spaced in time"));
    }
    let max_turn = 2.0 * std::f64::consts::PI / 100.0;
    for w in traj.points.windows(2) {
        let a = model.flow(&w[0]);
        let b = model.flow(&w[1]);
        let (na, nb) = (a.norm(), b.norm());
        if na == 0.0 || nb == 0.0 {
            continue;
        }
        let dot = (0..2).map(|i| a.q[i] * b.q[i] + a.p[i] * b.p[i]).sum::<f64>() / (na * nb);
        let turn = dot.clamp(-1.0, 1.0).acos();
        if turn > max_turn {
            return Err(Error::TooFewSamples {
                reason: format!("the flow turns by {turn:.3e} rad between samples (limit {max_turn:.3e})"),
            });
        }
    }
    let lag: Vec<f64> = traj.points.iter().map(|z| model.lagrangian(z)).collect();
    Ok(simpson(&lag, h))
}

/// First time after `t = 0` that `z(t)` returns to `z0`, crossing the plane
/// through `z0` normal to the initial velocity in the positive direction.
pub fn find_period(model: &HamiltonianModel, z0: &PhasePoint, cfg: &FlowConfig, max_time: f64) -> Result<f64> {
    cfg.validate()?;
    let v0 = model.flow(z0);
    if v0.norm() == 0.0 {
        return Err(Error::NoClosedOrbit {
            energy: model.energy(z0),
            max_time,
        });
    }
    let section = |z: &PhasePoint| (0..2).map(|i| (z.q[i] - z0.q[i]) * v0.q[i] + (z.p[i] - z0.p[i]) * v0.p[i]).sum::<f64>();
    let scale = z0.norm().max(1.0);
    let mut t = 0.0;
    let mut z = *z0;
    while t < max_time {
        let next = rk4_step(model, &z, cfg.dt);
        if section(&z) < 0.0 && section(&next) >= 0.0 {
            let (mut lo, mut hi) = (0.0, cfg.dt);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if section(&rk4_step(model, &z, mid)) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= f64::EPSILON * (t + hi) {
                    break;
                }
            }
            let tc = 0.5 * (lo + hi);
            if rk4_step(model, &z, tc).distance(z0) <= 1e-8 * scale {
                return Ok(t + tc);
            }
        }
        z = next;
        t += cfg.dt;
    }
    Err(Error::NoClosedOrbit {
        energy: model.energy(z0),
        max_time,
    })
}

/// `{B, C} = sum_i dB/dq_i dC/dp_i - dB/dp_i dC/dq_i` with finite differences.
pub fn poisson_bracket<T>(b: &Field<PhaseGrid, T>, c: &Field<PhaseGrid, T>, order: DifferenceOrder) -> Result<Field<PhaseGrid, T>>
where
    T: Sample + Mul<Output = T>,
{
    b.same_grid(c)?;
    let grid = b.grid();
    let lat = grid.lattice();
    let d = grid.dim();
    let mut out = vec![T::default(); lat.len()];
    for i in 0..d {
        let bq = derivative(lat, b.values(), i, order);
        let bp = derivative(lat, b.values(), d + i, order);
        let cq = derivative(lat, c.values(), i, order);
        let cp = derivative(lat, c.values(), d + i, order);
        for k in 0..out.len() {
            out[k] += bq[k] * cp[k] - bp[k] * cq[k];
        }
    }
    Ok(Field::from_parts(grid.clone(), out, b.time()))
}

/// `{B, H}` using finite differences for `B` and the model's analytic gradient.
pub fn bracket_with_hamiltonian<T: Sample>(
    b: &Field<PhaseGrid, T>,
    model: &HamiltonianModel,
    order: DifferenceOrder,
) -> Result<Field<PhaseGrid, T>> {
    let grid = b.grid();
    if grid.dim() != model.dim() {
        return Err(Error::GridMismatch);
    }
    let lat = grid.lattice();
    let d = grid.dim();
    let derivs: Vec<(Vec<T>, Vec<T>)> = (0..d)
        .map(|i| (derivative(lat, b.values(), i, order), derivative(lat, b.values(), d + i, order)))
        .collect();
    let out = (0..lat.len())
        .map(|k| {
            let g = model.gradient(&grid.phase_point(k));
            let mut acc = T::default();
            for (i, (bq, bp)) in derivs.iter().enumerate() {
                acc += bq[k] * g.p[i] - bp[k] * g.q[i];
            }
            acc
        })
        .collect();
    Ok(Field::from_parts(grid.clone(), out, b.time()))
}

/// Where each grid point's characteristic started a time `t` earlier, and
/// what it accumulated on the way.
pub(crate) struct Characteristics {
    /// Fractional lattice indices of the foot, `None` when it left the grid.
    pub feet: Vec<Option<[f64; 4]>>,
    /// `int (p . dH/dp - H) dt` from the foot to the node.
    pub lagrangian: Vec<f64>,
    /// `int p . dH/dp dt` from the foot to the node.
    pub pdhdp: Vec<f64>,
}

/// Traces every node of `grid` back along the flow for time `t`.
pub(crate) fn backtrack(grid: &PhaseGrid, model: &HamiltonianModel, t: f64, cfg: &FlowConfig) -> Result<Characteristics> {
    cfg.validate()?;
    if grid.dim() != model.dim() {
        return Err(Error::GridMismatch);
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("t", format!("must be nonnegative, got {t}")));
    }
    let d = grid.dim();
    let lat = grid.lattice();
    let (n, h) = if t == 0.0 { (0, 0.0) } else { cfg.steps(t) };
    let w = simpson_weights(n);
    let results: Vec<(Option<[f64; 4]>, f64, f64)> = (0..lat.len())
        .into_par_iter()
        .map(|k| {
            let mut z = grid.phase_point(k);
            let mut lag = 0.0;
            let mut pdh = 0.0;
            for (j, wj) in w.iter().enumerate() {
                if j > 0 {
                    z = rk4_step(model, &z, -h);
                }
                let e = model.energy(&z);
                let ph = model.p_dh_dp(&z);
                lag += wj * (ph - e);
                pdh += wj * ph;
            }
            let mut frac = [0.0; 4];
            let mut inside = true;
            for i in 0..d {
                match (grid.q_axis(i).locate(z.q[i]), grid.p_axis(i).locate(z.p[i])) {
                    (Some(a), Some(b)) => {
                        frac[i] = a;
                        frac[d + i] = b;
                    }
                    _ => inside = false,
                }
            }
            (inside.then_some(frac), lag * h, pdh * h)
        })
        .collect();
    let mut feet = Vec::with_capacity(results.len());
    let mut lagrangian = Vec::with_capacity(results.len());
    let mut pdhdp = Vec::with_capacity(results.len());
    for (f, l, p) in results {
        feet.push(f);
        lagrangian.push(l);
        pdhdp.push(p);
    }
    Ok(Characteristics {
        feet,
        lagrangian,
        pdhdp,
    })
}

/// Samples `values` at the feet of `ch` (zero for feet off the grid).
pub(crate) fn remap<T: Sample>(grid: &PhaseGrid, values: &[T], ch: &Characteristics, stencil: Stencil) -> Vec<T> {
    let lat = grid.lattice();
    let rank = lat.rank();
    ch.feet
        .par_iter()
        .map(|foot| match foot {
            Some(f) => interpolate_index(lat, values, &f[..rank], stencil),
            None => T::default(),
        })
        .collect()
}

/// Fraction of `sum w |v|^k` in the boundary band, with `k = 1` for
/// densities and `k = 2` for amplitudes.
pub(crate) fn edge_fraction(grid: &PhaseGrid, weights: &[f64], mass: impl Fn(usize) -> f64) -> (f64, f64) {
    let lat = grid.lattice();
    let mut total = 0.0;
    let mut edge = 0.0;
    for (i, w) in weights.iter().enumerate() {
        let m = w * mass(i);
        total += m;
        if lat.in_boundary_band(i) {
            edge += m;
        }
    }
    (total, if total > 0.0 { edge / total } else { 0.0 })
}

/// Rejects transports whose input or output reaches the grid edge, or that
/// lose mass through it.
pub(crate) fn check_outflow(before: (f64, f64), after: (f64, f64), eps: f64) -> Result<()> {
    let (m0, e0) = before;
    let (m1, e1) = after;
    if e0 > eps {
        return Err(Error::OutflowDetected {
            detail: format!("input holds a fraction {e0:.3e} of its mass in the boundary band (limit {eps:.1e})"),
        });
    }
    if e1 > eps {
        return Err(Error::OutflowDetected {
            detail: format!("transported state holds a fraction {e1:.3e} of its mass in the boundary band (limit {eps:.1e})"),
        });
    }
    if m0 > 0.0 && m1 < m0 * (1.0 - 1e-4) {
        return Err(Error::OutflowDetected {
            detail: format!("mass fell from {m0:.6e} to {m1:.6e}; characteristics left the grid"),
        });
    }
    Ok(())
}

/// Evolves `rho` under Liouville's equation for `n_steps` steps of `dt`.
pub fn liouville_step(rho: &DensityField, model: &HamiltonianModel, dt: f64, n_steps: usize) -> Result<DensityField> {
    let cfg = FlowConfig {
        dt,
        ..FlowConfig::default()
    };
    liouville_step_with(rho, model, n_steps, &cfg)
}

/// [`liouville_step`] with an explicit configuration; the step is `cfg.dt`.
///
/// Every node is traced back over the whole interval and the initial density
/// is interpolated once, so interpolation error does not build up with the
/// number of steps.
pub fn liouville_step_with(rho: &DensityField, model: &HamiltonianModel, n_steps: usize, cfg: &FlowConfig) -> Result<DensityField> {
    let field = rho.field();
    let grid = field.grid();
    let weights = grid.lattice().weights();
    let before = edge_fraction(grid, &weights, |i| field.values()[i]);
    check_outflow(before, (before.0, 0.0), DEFAULT_BOUNDARY_EPS)?;
    let t = cfg.dt * n_steps as f64;
    let ch = backtrack(grid, model, t, cfg)?;
    let values = remap(grid, field.values(), &ch, cfg.stencil);
    let out = DensityField::from_clamped(RealPhaseField::from_parts(grid.clone(), values, field.time() + t));
    let after = edge_fraction(grid, &weights, |i| out.field().values()[i]);
    check_outflow(before, after, DEFAULT_BOUNDARY_EPS)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        for n in [2usize, 3, 4, 5, 7, 10] {
            let h = 2.0 / n as f64;
            let v: Vec<f64> = (0..=n).map(|k| (k as f64 * h).powi(3) - k as f64 * h).collect();
            assert!((simpson(&v, h) - 2.0).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn simpson_weights_sum_to_interval() {
        for n in 1..12 {
            assert!((simpson_weights(n).iter().sum::<f64>() - n as f64).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(FlowConfig::new(0.0, 1e-8).is_err());
        assert!(FlowConfig::new(1e-3, -1.0).is_err());
    }

    #[test]
    fn detects_energy_drift() {
        let model = HamiltonianModel::quartic(1.0, 1.0).unwrap();
        let cfg = FlowConfig::new(0.5, 1e-10).unwrap();
        let err = integrate_trajectory(&model, &PhasePoint::new_1d(1.5, 0.0), 5.0, &cfg).unwrap_err();
        assert_eq!(err.code(), "EnergyDrift");
    }

    #[test]
    fn period_of_harmonic_orbit() {
        let model = HamiltonianModel::harmonic(1.0, 2.0).unwrap();
        let t = find_period(&model, &PhasePoint::new_1d(0.7, 0.3), &FlowConfig::default(), 10.0).unwrap();
        assert!((t - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn stationary_point_has_no_orbit() {
        let model = HamiltonianModel::harmonic(1.0, 1.0).unwrap();
        let err = find_period(&model, &PhasePoint::zero(), &FlowConfig::default(), 10.0).unwrap_err();
        assert_eq!(err.code(), "NoClosedOrbit");
    }
}
