//! Maps between position-space wavefunctions and phase-space amplitudes.
//!
//! * [`lift`] computes `eta(q, p) = int u*_qp(x) psi(x) dx`.
//! * [`project`] computes `psi(x) = int (dq dp / 2 pi hbar)^D u_qp(x) eta(q, p)`.
//! * [`project_q`] applies the Gaussian kernel `K` that projects an arbitrary
//!   phase-space function onto the image of [`lift`].
//!
//! All integrals are trapezoid sums. The packets factorize over degrees of
//! freedom, so every map is applied one `(x_d) <-> (q_d, p_d)` pair at a time.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{PhaseField, PositionWavefunction, DEFAULT_BOUNDARY_EPS};
use crate::grid::{Axis, Grid, PhaseGrid, PositionGrid};
use crate::model::{HamiltonianModel, PhasePoint};
use crate::wavepacket::WavepacketFamily;

/// Relative size below which Gaussian tails are dropped from the sums.
const TAIL_CUTOFF: f64 = 1e-18;

fn gauge_factors(eta_grid: &PhaseGrid, family: &WavepacketFamily, sign: f64) -> Option<Vec<Complex64>> {
    if family.gauge().is_none() {
        return None;
    }
    let n = eta_grid.lattice().len();
    Some(
        (0..n)
            .map(|i| {
                let z = eta_grid.phase_point(i);
                Complex64::from_polar(1.0, sign * family.gauge().phi(&z, family.hbar()))
            })
            .collect(),
    )
}

/// Reorders a row-major array of the given shape so that output axis `k` is
/// input axis `perm[k]`.
fn permute(values: &[Complex64], shape: &[usize], perm: &[usize]) -> Vec<Complex64> {
    let rank = shape.len();
    let mut in_strides = vec![1; rank];
    for k in (0..rank.saturating_sub(1)).rev() {
        in_strides[k] = in_strides[k + 1] * shape[k + 1];
    }
    let out_shape: Vec<usize> = perm.iter().map(|&a| shape[a]).collect();
    let mut idx = vec![0usize; rank];
    let mut out = Vec::with_capacity(values.len());
    for _ in 0..values.len() {
        let src: usize = (0..rank).map(|k| idx[k] * in_strides[perm[k]]).sum();
        out.push(values[src]);
        for k in (0..rank).rev() {
            idx[k] += 1;
            if idx[k] < out_shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

/// Index range of `xs` where the packet envelope centered at `c` is not negligible.
fn envelope_range(x: &Axis, c: f64, sigma: f64) -> (usize, usize) {
    // exp(-d^2 / 4 sigma^2) < TAIL_CUTOFF beyond this distance
    let reach = 2.0 * sigma * (-TAIL_CUTOFF.ln()).sqrt();
    let h = x.spacing();
    let lo = ((c - reach - x.min()) / h).floor().max(0.0) as usize;
    let hi = (((c + reach - x.min()) / h).ceil() + 1.0).clamp(0.0, x.len() as f64) as usize;
    (lo.min(x.len()), hi)
}

/// One degree of freedom of the lift: `(outer, nx, inner) -> (outer, nq, np, inner)`.
#[allow(clippy::too_many_arguments)]
fn lift_pair(
    input: &[Complex64],
    outer: usize,
    inner: usize,
    x: &Axis,
    q: &Axis,
    p: &Axis,
    family: &WavepacketFamily,
) -> Vec<Complex64> {
    let hbar = family.hbar();
    let (nx, nq, np) = (x.len(), q.len(), p.len());
    let xs = x.coords();
    let wx = x.trapezoid_weights();
    let ps = p.coords();
    let qs = q.coords();
    // e^{-i p x / hbar}, indexed [ip][ix]
    let wave: Vec<Complex64> = ps
        .iter()
        .flat_map(|&pv| xs.iter().map(move |&xv| Complex64::from_polar(1.0, -pv * xv / hbar)))
        .collect();
    let mut out = vec![Complex64::default(); outer * nq * np * inner];
    let rows: Vec<Vec<Complex64>> = (0..nq)
        .into_par_iter()
        .map(|iq| {
            let qv = qs[iq];
            let (lo, hi) = envelope_range(x, qv, family.sigma());
            let env: Vec<f64> = (lo..hi).map(|ix| family.envelope_1d(xs[ix] - qv) * wx[ix]).collect();
            let mut row = vec![Complex64::default(); outer * np * inner];
            let mut w = vec![Complex64::default(); hi - lo];
            for o in 0..outer {
                for i in 0..inner {
                    for (k, ix) in (lo..hi).enumerate() {
                        w[k] = input[(o * nx + ix) * inner + i] * env[k];
                    }
                    for ip in 0..np {
                        let wrow = &wave[ip * nx + lo..ip * nx + hi];
                        let s: Complex64 = wrow.iter().zip(&w).map(|(a, b)| a * b).sum();
                        row[(o * np + ip) * inner + i] = s * Complex64::from_polar(1.0, ps[ip] * qv / hbar);
                    }
                }
            }
            row
        })
        .collect();
    for (iq, row) in rows.into_iter().enumerate() {
        for o in 0..outer {
            for ip in 0..np {
                for i in 0..inner {
                    out[((o * nq + iq) * np + ip) * inner + i] = row[(o * np + ip) * inner + i];
                }
            }
        }
    }
    out
}

/// One degree of freedom of the projection: `(outer, nq, np, inner) -> (outer, nx, inner)`.
#[allow(clippy::too_many_arguments)]
fn project_pair(
    input: &[Complex64],
    outer: usize,
    inner: usize,
    q: &Axis,
    p: &Axis,
    x: &Axis,
    family: &WavepacketFamily,
) -> Vec<Complex64> {
    let hbar = family.hbar();
    let (nx, nq, np) = (x.len(), q.len(), p.len());
    let xs = x.coords();
    let qs = q.coords();
    let ps = p.coords();
    let wq = q.trapezoid_weights();
    let wp = p.trapezoid_weights();
    let norm = 1.0 / (2.0 * std::f64::consts::PI * hbar);
    // e^{i p x / hbar}, indexed [ix][ip]
    let wave: Vec<Complex64> = xs
        .iter()
        .flat_map(|&xv| ps.iter().map(move |&pv| Complex64::from_polar(1.0, pv * xv / hbar)))
        .collect();
    let lanes: Vec<Vec<Complex64>> = (0..outer * inner)
        .into_par_iter()
        .map(|lane| {
            let (o, i) = (lane / inner, lane % inner);
            let mut acc = vec![Complex64::default(); nx];
            let mut t = vec![Complex64::default(); np];
            for iq in 0..nq {
                let qv = qs[iq];
                let mut any = false;
                for ip in 0..np {
                    let v = input[((o * nq + iq) * np + ip) * inner + i];
                    any |= v != Complex64::default();
                    t[ip] = v * Complex64::from_polar(wp[ip], -ps[ip] * qv / hbar);
                }
                if !any {
                    continue;
                }
                let (lo, hi) = envelope_range(x, qv, family.sigma());
                for ix in lo..hi {
                    let s: Complex64 = wave[ix * np..(ix + 1) * np].iter().zip(&t).map(|(a, b)| a * b).sum();
                    acc[ix] += s * (family.envelope_1d(xs[ix] - qv) * wq[iq] * norm);
                }
            }
            acc
        })
        .collect();
    let mut out = vec![Complex64::default(); outer * nx * inner];
    for (lane, acc) in lanes.into_iter().enumerate() {
        let (o, i) = (lane / inner, lane % inner);
        for (ix, v) in acc.into_iter().enumerate() {
            out[(o * nx + ix) * inner + i] = v;
        }
    }
    out
}

/// Interleaves `[q_1..q_D, p_1..p_D]` into `[q_1, p_1, .., q_D, p_D]`.
fn interleave_perm(dim: usize) -> Vec<usize> {
    (0..dim).flat_map(|d| [d, dim + d]).collect()
}

/// Inverse of [`interleave_perm`].
fn deinterleave_perm(dim: usize) -> Vec<usize> {
    (0..dim).map(|d| 2 * d).chain((0..dim).map(|d| 2 * d + 1)).collect()
}

/// Lifts `psi` onto phase space: `eta(q, p) = int u*_qp(x) psi(x) dx`.
pub fn lift(psi: &PositionWavefunction, family: &WavepacketFamily, grid: &PhaseGrid) -> Result<PhaseField> {
    let dim = grid.dim();
    if psi.grid().dim() != dim {
        return Err(Error::GridMismatch);
    }
    psi.check_boundary(DEFAULT_BOUNDARY_EPS)?;
    family.check_resolved(psi.grid())?;
    let xlat = psi.lattice();
    let mut data = psi.values().to_vec();
    // layout after step d: [q_1, p_1, .., q_d, p_d, x_{d+1}, .., x_D]
    for d in 0..dim {
        let outer: usize = (0..d).map(|k| grid.q_axis(k).len() * grid.p_axis(k).len()).product();
        let inner: usize = (d + 1..dim).map(|k| xlat.axis(k).len()).product();
        data = lift_pair(&data, outer, inner, xlat.axis(d), grid.q_axis(d), grid.p_axis(d), family);
    }
    if dim > 1 {
        let shape: Vec<usize> = (0..dim).flat_map(|d| [grid.q_axis(d).len(), grid.p_axis(d).len()]).collect();
        data = permute(&data, &shape, &deinterleave_perm(dim));
    }
    if let Some(g) = gauge_factors(grid, family, -1.0) {
        data.iter_mut().zip(g).for_each(|(v, f)| *v *= f);
    }
    Ok(PhaseField::from_parts(grid.clone(), data, psi.time()))
}

/// Projects `eta` back to position space,
/// `psi(x) = int (dq dp / 2 pi hbar)^D u_qp(x) eta(q, p)`.
pub fn project(eta: &PhaseField, family: &WavepacketFamily, xgrid: &PositionGrid) -> Result<PositionWavefunction> {
    let grid = eta.grid();
    let dim = grid.dim();
    if xgrid.dim() != dim {
        return Err(Error::GridMismatch);
    }
    eta.check_boundary(DEFAULT_BOUNDARY_EPS)?;
    let mut data = eta.values().to_vec();
    if let Some(g) = gauge_factors(grid, family, 1.0) {
        data.iter_mut().zip(g).for_each(|(v, f)| *v *= f);
    }
    if dim > 1 {
        data = permute(&data, &eta.lattice().shape(), &interleave_perm(dim));
    }
    // layout before step d: [q_1, p_1, .., q_d, p_d, x_{d+1}, .., x_D]
    for d in (0..dim).rev() {
        let outer: usize = (0..d).map(|k| grid.q_axis(k).len() * grid.p_axis(k).len()).product();
        let inner: usize = (d + 1..dim).map(|k| xgrid.axis(k).len()).product();
        data = project_pair(&data, outer, inner, grid.q_axis(d), grid.p_axis(d), xgrid.axis(d), family);
    }
    Ok(PositionWavefunction::from_parts(xgrid.clone(), data, eta.time()))
}

/// Overlap `<u_qp | u_q'p'>` of two packets, in closed Gaussian form.
pub fn kernel(family: &WavepacketFamily, z: &PhasePoint, zp: &PhasePoint, dim: usize) -> Complex64 {
    let s2 = family.sigma() * family.sigma();
    let hbar = family.hbar();
    let mut re = 0.0;
    let mut im = 0.0;
    for i in 0..dim {
        let dq = zp.q[i] - z.q[i];
        let dp = zp.p[i] - z.p[i];
        re -= dq * dq / (8.0 * s2) + s2 * dp * dp / (2.0 * hbar * hbar);
        im -= (zp.p[i] + z.p[i]) * dq / (2.0 * hbar);
    }
    let g = family.gauge();
    if !g.is_none() {
        im += g.phi(zp, hbar) - g.phi(z, hbar);
    }
    Complex64::from_polar(re.exp(), im)
}

/// A kernel evaluation between a base point and a displaced point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelProbe {
    pub base: PhasePoint,
    pub displaced: PhasePoint,
    pub value: Complex64,
}

impl KernelProbe {
    pub fn evaluate(family: &WavepacketFamily, base: PhasePoint, displaced: PhasePoint, dim: usize) -> Self {
        Self {
            base,
            displaced,
            value: kernel(family, &base, &displaced, dim),
        }
    }
}

/// Applies the kernel of one degree of freedom to every `(q_d, p_d)` plane.
fn project_q_pair(data: &mut [Complex64], grid: &PhaseGrid, d: usize, family: &WavepacketFamily) {
    let lat = grid.lattice();
    let (qa, pa) = (grid.q_axis(d), grid.p_axis(d));
    let (nq, np) = (qa.len(), pa.len());
    let (hq, hp) = (qa.spacing(), pa.spacing());
    let (sq, sp) = (lat.strides()[d], lat.strides()[grid.dim() + d]);
    let hbar = family.hbar();
    let s2 = family.sigma() * family.sigma();
    let reach_q = ((8.0 * s2 * -TAIL_CUTOFF.ln()).sqrt() / hq).ceil() as isize;
    let reach_p = ((2.0 * hbar * hbar / s2 * -TAIL_CUTOFF.ln()).sqrt() / hp).ceil() as isize;
    let rq = reach_q.min(nq as isize - 1);
    let rp = reach_p.min(np as isize - 1);
    let gq: Vec<f64> = (-rq..=rq).map(|k| (-((k as f64 * hq).powi(2)) / (8.0 * s2)).exp()).collect();
    let gp: Vec<f64> = (-rp..=rp).map(|k| (-s2 * (k as f64 * hp).powi(2) / (2.0 * hbar * hbar)).exp()).collect();
    let ps = pa.coords();
    // e^{-i p_j dq / 2 hbar}, indexed [dq + rq][j]
    let phase: Vec<Complex64> = (-rq..=rq)
        .flat_map(|k| {
            let dq = k as f64 * hq;
            ps.iter().map(move |&pv| Complex64::from_polar(1.0, -pv * dq / (2.0 * hbar))).collect::<Vec<_>>()
        })
        .collect();
    let wq = qa.trapezoid_weights();
    let wp = pa.trapezoid_weights();
    let norm = 1.0 / (2.0 * std::f64::consts::PI * hbar);

    // planes are enumerated by their base offsets (all indices except q_d, p_d at zero)
    let mut bases = Vec::new();
    let mut idx = vec![0usize; lat.rank()];
    for flat in 0..lat.len() {
        lat.unravel(flat, &mut idx);
        if idx[d] == 0 && idx[grid.dim() + d] == 0 {
            bases.push(flat);
        }
    }
    let planes: Vec<Vec<Complex64>> = bases
        .par_iter()
        .map(|&base| {
            let mut v = vec![Complex64::default(); nq * np];
            for iq in 0..nq {
                for ip in 0..np {
                    v[iq * np + ip] = data[base + iq * sq + ip * sp] * (wq[iq] * wp[ip] * norm);
                }
            }
            let mut out = vec![Complex64::default(); nq * np];
            for iq in 0..nq as isize {
                let kq_lo = (-iq).max(-rq);
                let kq_hi = (nq as isize - 1 - iq).min(rq);
                for ip in 0..np as isize {
                    let kp_lo = (-ip).max(-rp);
                    let kp_hi = (np as isize - 1 - ip).min(rp);
                    let mut acc = Complex64::default();
                    for kq in kq_lo..=kq_hi {
                        let prow = &phase[((kq + rq) as usize) * np..((kq + rq) as usize + 1) * np];
                        let jq = (iq + kq) as usize;
                        let mut inner = Complex64::default();
                        for kp in kp_lo..=kp_hi {
                            let jp = (ip + kp) as usize;
                            inner += v[jq * np + jp] * prow[jp] * gp[(kp + rp) as usize];
                        }
                        acc += inner * prow[ip as usize] * gq[(kq + rq) as usize];
                    }
                    out[iq as usize * np + ip as usize] = acc;
                }
            }
            out
        })
        .collect();
    for (&base, plane) in bases.iter().zip(planes) {
        for iq in 0..nq {
            for ip in 0..np {
                data[base + iq * sq + ip * sp] = plane[iq * np + ip];
            }
        }
    }
}

/// Projects an arbitrary phase-space function onto the image of [`lift`],
/// `eta~(z) = int (dz'/2 pi hbar)^D K(z, z') eta(z')`.
pub fn project_q(eta: &PhaseField, family: &WavepacketFamily) -> Result<PhaseField> {
    eta.check_boundary(DEFAULT_BOUNDARY_EPS)?;
    let grid = eta.grid();
    let mut data = eta.values().to_vec();
    if let Some(g) = gauge_factors(grid, family, 1.0) {
        data.iter_mut().zip(g).for_each(|(v, f)| *v *= f);
    }
    for d in 0..grid.dim() {
        project_q_pair(&mut data, grid, d, family);
    }
    if let Some(g) = gauge_factors(grid, family, -1.0) {
        data.iter_mut().zip(g).for_each(|(v, f)| *v *= f);
    }
    Ok(PhaseField::from_parts(grid.clone(), data, eta.time()))
}

/// The projected amplitude at a single (not necessarily grid) point `z`.
pub fn project_q_at(eta: &PhaseField, family: &WavepacketFamily, z: &PhasePoint) -> Complex64 {
    let grid = eta.grid();
    let dim = grid.dim();
    let w = eta.lattice().weights();
    let norm = (2.0 * std::f64::consts::PI * family.hbar()).powi(dim as i32);
    eta.values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != Complex64::default())
        .map(|(i, v)| kernel(family, z, &grid.phase_point(i), dim) * v * (w[i] / norm))
        .sum()
}

/// Knobs of the trajectory-ribbon construction behind [`suppression_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuppressionOptions {
    /// Half length of the ribbon segment, in units of `T`.
    pub half_length: f64,
    /// Grid cells per kernel width `min(2 sigma, hbar / sigma)`.
    pub cells_per_width: f64,
}

impl Default for SuppressionOptions {
    fn default() -> Self {
        Self {
            half_length: 4.0,
            cells_per_width: 12.0,
        }
    }
}

/// Magnitude of the projected ribbon state against the energy offset `E - H`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuppressionCurve {
    pub probe: PhasePoint,
    pub offsets: Vec<f64>,
    /// `|P eta(E - H)| / |P eta(0)|` for each offset.
    pub ratios: Vec<f64>,
    /// Width from a least-squares fit of `ln ratio = -(E - H)^2 T^2 / 4 hbar^2`.
    pub fitted_t: Option<f64>,
    /// `[(1/8 sigma^2) |dH/dp|^2 + (sigma^2 / 2 hbar^2) |dH/dq|^2]^{-1/2}`.
    pub analytic_t: f64,
    /// Width once the kernel's `i (dH/dq . dH/dp) tau^2 / 2 hbar` phase is kept:
    /// `T / sqrt(1 + c^2 T^4)` with `c = dH/dq . dH/dp / 2 hbar`.
    pub corrected_t: f64,
    /// `|P eta|` at zero offset.
    pub peak: f64,
}

/// The timescale `T` at `z`; `StationaryPoint` when both gradients vanish.
pub fn suppression_timescale(model: &HamiltonianModel, family: &WavepacketFamily, z: &PhasePoint) -> Result<f64> {
    let g = model.gradient(z);
    let d = model.dim();
    let gp2: f64 = g.p[..d].iter().map(|v| v * v).sum();
    let gq2: f64 = g.q[..d].iter().map(|v| v * v).sum();
    if gp2 == 0.0 && gq2 == 0.0 {
        return Err(Error::StationaryPoint {
            q: z.q[..d].to_vec(),
            p: z.p[..d].to_vec(),
        });
    }
    let s2 = family.sigma() * family.sigma();
    let h2 = family.hbar() * family.hbar();
    Ok((gp2 / (8.0 * s2) + s2 * gq2 / (2.0 * h2)).powf(-0.5))
}

/// Builds the ribbon state along the linearized trajectory through `probe`
/// (a one-cell-wide Gaussian ridge carrying the phase
/// `exp(i (E - H + p dH/dp) tau / hbar)`), projects it at the probe and
/// reports the suppression against `E - H`.
pub fn suppression_profile(
    model: &HamiltonianModel,
    family: &WavepacketFamily,
    probe: &PhasePoint,
    offsets: &[f64],
    opts: &SuppressionOptions,
) -> Result<SuppressionCurve> {
    if model.dim() != 1 {
        return Err(Error::UnsupportedModel {
            model: model.name(),
            operation: "suppression profiles (one degree of freedom only)",
        });
    }
    let t = suppression_timescale(model, family, probe)?;
    let hbar = family.hbar();
    let g = model.gradient(probe);
    let v = PhasePoint::new_1d(g.p[0], -g.q[0]);
    let speed = v.norm();
    let tau_max = opts.half_length * t;
    let h = (2.0 * family.sigma()).min(hbar / family.sigma()) / opts.cells_per_width;
    let ridge = h;
    let margin = 8.0 * h + 4.0 * ridge;
    let ends = [probe.axpy(-tau_max, &v), probe.axpy(tau_max, &v)];
    let axis = |lo: f64, hi: f64| {
        let (lo, hi) = (lo - margin, hi + margin);
        let n = ((hi - lo) / h).ceil() as usize + 1;
        (lo, lo + (n - 1) as f64 * h, n.max(crate::grid::MIN_POINTS))
    };
    let grid = PhaseGrid::new_1d(
        axis(ends[0].q[0].min(ends[1].q[0]), ends[0].q[0].max(ends[1].q[0])),
        axis(ends[0].p[0].min(ends[1].p[0]), ends[0].p[0].max(ends[1].p[0])),
    )?;
    let pdhdp = model.p_dh_dp(probe);
    let two_pi_hbar = 2.0 * std::f64::consts::PI * hbar;
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * ridge * speed);
    let build = |offset: f64| {
        PhaseField::from_fn(grid.clone(), |z| {
            let dz = PhasePoint::new_1d(z.q[0] - probe.q[0], z.p[0] - probe.p[0]);
            let tau = (dz.q[0] * v.q[0] + dz.p[0] * v.p[0]) / (speed * speed);
            if tau.abs() > tau_max {
                return Complex64::default();
            }
            let s = dz.axpy(-tau, &v).norm();
            let amp = two_pi_hbar * norm * (-s * s / (2.0 * ridge * ridge)).exp();
            Complex64::from_polar(amp, (offset + pdhdp) * tau / hbar)
        })
    };
    let measure = |offset: f64| project_q_at(&build(offset), family, probe).norm();
    let peak = measure(0.0);
    let ratios: Vec<f64> = offsets.iter().map(|&o| measure(o) / peak).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for (&o, &r) in offsets.iter().zip(&ratios) {
        if o != 0.0 && r > 1e-8 {
            num -= r.ln() * o * o;
            den += o.powi(4);
        }
    }
    let fitted_t = (den > 0.0 && num > 0.0).then(|| 2.0 * hbar * (num / den).sqrt());
    let c = g.q[0] * g.p[0] / (2.0 * hbar);
    let corrected_t = t / (1.0 + c * c * t.powi(4)).sqrt();
    Ok(SuppressionCurve {
        probe: *probe,
        offsets: offsets.to_vec(),
        ratios,
        fitted_t,
        analytic_t: t,
        corrected_t,
        peak,
    })
}
