//! Exact quantum mechanics on a position grid: a Fourier-spectral eigensolver
//! and a split-step propagator for `H = p^2/2m + V(x)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::field::PositionWavefunction;
use crate::grid::PositionGrid;
use crate::model::HamiltonianModel;

/// Boundary mass fraction above which propagation is refused.
pub const OUTFLOW_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub energy: f64,
    /// Unit trapezoid norm, sign fixed so the outermost lobe on the right is positive.
    pub state: PositionWavefunction,
}

fn potential_of(model: &HamiltonianModel, op: &'static str) -> Result<(f64, impl Fn(f64) -> f64)> {
    let model = *model;
    let mass = model.mass().filter(|_| model.dim() == 1 && model.potential(0.0).is_some());
    let mass = mass.ok_or(Error::UnsupportedModel {
        model: model.name(),
        operation: op,
    })?;
    Ok((mass, move |x| model.potential(x).unwrap_or(0.0)))
}

fn check_grid(xgrid: &PositionGrid) -> Result<()> {
    if xgrid.dim() != 1 {
        return Err(Error::invalid("xgrid", "the reference solvers are one-dimensional"));
    }
    Ok(())
}

/// Angular wavenumbers in FFT order for `n` points of spacing `h`.
fn wavenumbers(n: usize, h: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * h);
    (0..n)
        .map(|m| {
            let s = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            s * dk
        })
        .collect()
}

/// Lowest `k` eigenpairs of the spectral Hamiltonian on the periodic box
/// spanned by `xgrid` (period `n h`).
pub fn eigensolve(model: &HamiltonianModel, xgrid: &PositionGrid, k: usize, hbar: f64) -> Result<Vec<EigenPair>> {
    check_grid(xgrid)?;
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::invalid("hbar", format!("must be positive, got {hbar}")));
    }
    if !model.is_confining() {
        return Err(Error::UnsupportedModel {
            model: model.name(),
            operation: "eigensolve (needs a confining potential)",
        });
    }
    let (mass, v) = potential_of(model, "eigensolve")?;
    let axis = *xgrid.axis(0);
    let n = axis.len();
    if k == 0 || k > n / 4 {
        return Err(Error::invalid("k", format!("need 1 <= k <= {} for {n} grid points", n / 4)));
    }
    let h = axis.spacing();
    let kin: Vec<f64> = wavenumbers(n, h)
        .iter()
        .map(|&kk| hbar * hbar * kk * kk / (2.0 * mass))
        .collect();
    let ks = wavenumbers(n, h);
    // T_{jl} depends only on (j - l) mod n
    let row: Vec<f64> = (0..n)
        .map(|d| {
            kin.iter()
                .zip(&ks)
                .map(|(e, kk)| e * (kk * d as f64 * h).cos())
                .sum::<f64>()
                / n as f64
        })
        .collect();
    let xs = axis.coords();
    let mut hm = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        for l in 0..n {
            let d = (j + n - l) % n;
            hm[(j, l)] = row[d];
        }
        hm[(j, j)] += v(xs[j]);
    }
    let eig = SymmetricEigen::new(hm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let spacing_of = |i: usize| {
        let e = |j: usize| eig.eigenvalues[order[j]];
        if i + 1 < n {
            e(i + 1) - e(i)
        } else {
            e(i) - e(i - 1)
        }
    };
    let band = axis.boundary_band();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut pairs = Vec::with_capacity(k);
    for (i, &col) in order.iter().take(k).enumerate() {
        let energy = eig.eigenvalues[col];
        let vec = eig.eigenvectors.column(col);
        let total: f64 = vec.iter().map(|c| c * c).sum();
        // two error sources: amplitude at the box edge and spectral content near the cutoff
        let edge: f64 = (0..band).chain(n - band..n).map(|j| vec[j] * vec[j]).sum::<f64>() / total;
        let mut spec: Vec<Complex64> = vec.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        fft.process(&mut spec);
        let kmax = PI / h;
        let high: f64 = spec
            .iter()
            .zip(&ks)
            .filter(|(_, kk)| kk.abs() > 0.75 * kmax)
            .map(|(c, _)| c.norm_sqr())
            .sum::<f64>()
            / (n as f64 * total);
        let estimate = (edge + high) * energy.abs().max(spacing_of(i));
        let limit = 1e-6 * spacing_of(i);
        if estimate > limit {
            return Err(Error::GridTooCoarse { estimate, limit });
        }
        let cut = 1e-3 * vec.amax();
        let outer = (0..n).rev().find(|&j| vec[j].abs() > cut).unwrap_or(0);
        let sign = vec[outer].signum();
        let values = vec.iter().map(|&c| Complex64::new(sign * c, 0.0)).collect();
        let state = PositionWavefunction::new(xgrid.clone(), values, 0.0)?.normalized();
        pairs.push(EigenPair { energy, state });
    }
    Ok(pairs)
}

/// `H psi` with the kinetic term applied spectrally on the periodic box.
pub fn apply_hamiltonian(psi: &PositionWavefunction, model: &HamiltonianModel, hbar: f64) -> Result<PositionWavefunction> {
    check_grid(psi.grid())?;
    let (mass, v) = potential_of(model, "spectral Hamiltonian")?;
    let axis = *psi.grid().axis(0);
    let n = axis.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut buf = psi.values().to_vec();
    planner.plan_fft_forward(n).process(&mut buf);
    for (c, k) in buf.iter_mut().zip(wavenumbers(n, axis.spacing())) {
        *c *= hbar * hbar * k * k / (2.0 * mass * n as f64);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    for ((c, x), s) in buf.iter_mut().zip(axis.coords()).zip(psi.values()) {
        *c += v(x) * s;
    }
    PositionWavefunction::new(psi.grid().clone(), buf, psi.time())
}

/// Strang split-step propagation of `psi` by `t` with steps of at most `dt`.
pub fn schrodinger_evolve(
    psi: &PositionWavefunction,
    model: &HamiltonianModel,
    hbar: f64,
    t: f64,
    dt: f64,
) -> Result<PositionWavefunction> {
    check_grid(psi.grid())?;
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::invalid("hbar", format!("must be positive, got {hbar}")));
    }
    if !(dt.is_finite() && dt > 0.0) || !t.is_finite() {
        return Err(Error::invalid("dt", "step must be positive and time finite"));
    }
    let (mass, v) = potential_of(model, "split-step propagation")?;
    let outflow = |f: &PositionWavefunction, when: &str| {
        let frac = f.boundary_mass();
        if frac > OUTFLOW_LIMIT {
            Err(Error::OutflowDetected {
                detail: format!("{frac:.3e} of the norm is at the box edge {when}"),
            })
        } else {
            Ok(())
        }
    };
    outflow(psi, "initially")?;
    let axis = *psi.grid().axis(0);
    let n = axis.len();
    let steps = (t.abs() / dt).ceil().max(1.0) as usize;
    let tau = t / steps as f64;
    let xs = axis.coords();
    let half_v: Vec<Complex64> = xs
        .iter()
        .map(|&x| Complex64::from_polar(1.0, -v(x) * tau / (2.0 * hbar)))
        .collect();
    let kick: Vec<Complex64> = wavenumbers(n, axis.spacing())
        .iter()
        .map(|&k| Complex64::from_polar(1.0, -hbar * k * k * tau / (2.0 * mass)) / n as f64)
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];
    let mut buf = psi.values().to_vec();
    if t != 0.0 {
        for _ in 0..steps {
            buf.iter_mut().zip(&half_v).for_each(|(a, b)| *a *= b);
            forward.process_with_scratch(&mut buf, &mut scratch);
            buf.iter_mut().zip(&kick).for_each(|(a, b)| *a *= b);
            inverse.process_with_scratch(&mut buf, &mut scratch);
            buf.iter_mut().zip(&half_v).for_each(|(a, b)| *a *= b);
        }
    }
    let out = PositionWavefunction::new(psi.grid().clone(), buf, psi.time() + t)?;
    outflow(&out, "after propagation")?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavenumbers_wrap_at_nyquist() {
        let k = wavenumbers(4, 0.5);
        assert_eq!(k[0], 0.0);
        assert!((k[1] - PI).abs() < 1e-15);
        assert!((k[3] + PI).abs() < 1e-15);
    }

    #[test]
    fn free_particle_is_rejected() {
        let g = PositionGrid::new_1d(-5.0, 5.0, 64).unwrap();
        let err = eigensolve(&HamiltonianModel::free(1.0).unwrap(), &g, 3, 1.0).unwrap_err();
        assert_eq!(err.code(), "UnsupportedModel");
    }

    #[test]
    fn coarse_grid_is_reported() {
        let g = PositionGrid::new_1d(-10.0, 10.0, 40).unwrap();
        let err = eigensolve(&HamiltonianModel::harmonic(1.0, 1.0).unwrap(), &g, 8, 1.0).unwrap_err();
        assert_eq!(err.code(), "GridTooCoarse");
    }
}
