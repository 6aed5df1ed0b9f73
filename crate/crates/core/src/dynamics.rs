//! Transport of phase-space amplitudes: first-order evolution in the plain,
//! energy and KvN gauges, the second-order correction operator and the
//! time-independent residuals.

use num_complex::Complex64;

use crate::classical::{backtrack, bracket_with_hamiltonian, check_outflow, edge_fraction, remap, FlowConfig};
use crate::diff::{derivative, mixed_derivative, DifferenceOrder};
use crate::error::{Error, Result};
use crate::field::{Field, PhaseField, RealPhaseField, Sample, DEFAULT_BOUNDARY_EPS};
use crate::grid::{Grid, PhaseGrid};
use crate::model::HamiltonianModel;

/// Gauge of the evolved amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Gauge {
    /// `d eta/dt = (i/hbar)(p . dH/dp - H) eta - {eta, H}`
    #[default]
    None,
    /// Packets carry `exp(-i H t / hbar)`; the source reduces to `(i/hbar) p . dH/dp`.
    Energy,
    /// Packets carry `exp(i S / hbar)`; pure transport `d eta/dt = -{eta, H}`.
    Kvn,
}

/// Hamilton's principal function `S(q, p, t)`: the action accumulated along
/// the characteristic that ends at `(q, p)` after time `t`, with `S(., 0) = 0`.
pub fn action_table(grid: &PhaseGrid, model: &HamiltonianModel, t: f64, cfg: &FlowConfig) -> Result<RealPhaseField> {
    let ch = backtrack(grid, model, t, cfg)?;
    Ok(RealPhaseField::from_parts(grid.clone(), ch.lagrangian, t))
}

/// First-order evolution of `eta` for `t_final`.
///
/// Each node is traced back over the whole interval, `eta` is interpolated at
/// the foot and multiplied by the gauge's accumulated phase.
pub fn se_evolve(
    eta: &PhaseField,
    model: &HamiltonianModel,
    hbar: f64,
    t_final: f64,
    cfg: &FlowConfig,
    gauge: Gauge,
) -> Result<PhaseField> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::invalid("hbar", format!("must be positive, got {hbar}")));
    }
    let grid = eta.grid();
    let weights = grid.lattice().weights();
    let before = edge_fraction(grid, &weights, |i| eta.values()[i].norm_sqr());
    check_outflow(before, (before.0, 0.0), DEFAULT_BOUNDARY_EPS)?;
    let ch = backtrack(grid, model, t_final, cfg)?;
    let mut values = remap(grid, eta.values(), &ch, cfg.stencil);
    let source = match gauge {
        Gauge::None => Some(&ch.lagrangian),
        Gauge::Energy => Some(&ch.pdhdp),
        Gauge::Kvn => None,
    };
    if let Some(s) = source {
        for (v, s) in values.iter_mut().zip(s) {
            *v *= Complex64::from_polar(1.0, s / hbar);
        }
    }
    let after = edge_fraction(grid, &weights, |i| values[i].norm_sqr());
    check_outflow(before, after, DEFAULT_BOUNDARY_EPS)?;
    Ok(PhaseField::from_parts(grid.clone(), values, eta.time() + t_final))
}

/// The second-order correction terms `X` of the transport equation, so that
/// `d eta/dt = (first-order right-hand side) + X`:
///
/// ```text
/// X = [(-i/2hbar) p_i p_j H_{p_i p_j} - (1/2) H_{q_i p_i}] eta
///   + p_i [H_{p_i p_j} eta_{q_j} - H_{p_i q_j} eta_{p_j}]
///   + (i hbar/2) [H_{p_i p_j} eta_{q_i q_j} - 2 H_{p_i q_j} eta_{q_i p_j} + H_{q_i q_j} eta_{p_i p_j}]
/// ```
pub fn se_rhs_order2(eta: &PhaseField, model: &HamiltonianModel, hbar: f64, order: DifferenceOrder) -> Result<PhaseField> {
    let grid = eta.grid();
    if grid.dim() != model.dim() {
        return Err(Error::GridMismatch);
    }
    let d = grid.dim();
    let lat = grid.lattice();
    let v = eta.values();
    let first: Vec<Vec<Complex64>> = (0..2 * d).map(|a| derivative(lat, v, a, order)).collect();
    // second[a][b] for a <= b over the 2D axes
    let mut second = vec![vec![Vec::new(); 2 * d]; 2 * d];
    for a in 0..2 * d {
        for b in a..2 * d {
            second[a][b] = mixed_derivative(lat, v, a, b, order);
        }
    }
    let dd = |a: usize, b: usize, k: usize| if a <= b { second[a][b][k] } else { second[b][a][k] };
    let i_unit = Complex64::i();
    let out = (0..lat.len())
        .map(|k| {
            let z = grid.phase_point(k);
            let h = model.hessian(&z);
            // H_{p_i q_j} = qp[j][i]
            let mut acc = Complex64::default();
            let mut scalar = Complex64::default();
            for i in 0..d {
                scalar -= 0.5 * h.qp[i][i];
                for j in 0..d {
                    scalar -= i_unit * (z.p[i] * z.p[j] * h.pp[i][j] / (2.0 * hbar));
                    acc += z.p[i] * (h.pp[i][j] * first[j][k] - h.qp[j][i] * first[d + j][k]);
                    acc += 0.5 * i_unit * hbar
                        * (h.pp[i][j] * dd(i, j, k) - 2.0 * h.qp[j][i] * dd(i, d + j, k) + h.qq[i][j] * dd(d + i, d + j, k));
                }
            }
            acc + scalar * v[k]
        })
        .collect();
    Ok(PhaseField::from_parts(grid.clone(), out, eta.time()))
}

/// Which time-independent equation a residual refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualForm {
    /// `E eta - (H - p . dH/dp) eta - (hbar/i){eta, H}`
    FirstOrder,
    /// First order minus `i hbar X` with `X` from [`se_rhs_order2`].
    SecondOrder,
    /// `E eta - (hbar/i){eta, H}`: the KvN transport equation read as an
    /// eigenvalue problem, which drops `H - p . dH/dp`.
    KvnNaive,
}

/// A residual field with its norms.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport<T: Sample> {
    pub residual: Field<PhaseGrid, T>,
    /// `sqrt(int |r|^2 dq dp)` by the trapezoid rule.
    pub norm: f64,
    /// `norm` divided by the same norm of the reference field.
    pub relative: f64,
    pub max_abs: f64,
}

impl<T: Sample> ResidualReport<T> {
    fn new(residual: Field<PhaseGrid, T>, reference_norm: f64) -> Self {
        let norm = residual.mass().sqrt();
        let max_abs = residual.max_modulus();
        let relative = if reference_norm > 0.0 { norm / reference_norm } else { norm };
        Self {
            residual,
            norm,
            relative,
            max_abs,
        }
    }
}

/// Residual of the time-independent equation for trial energy `energy`.
pub fn tise_residual(
    eta: &PhaseField,
    energy: f64,
    model: &HamiltonianModel,
    hbar: f64,
    form: ResidualForm,
    order: DifferenceOrder,
) -> Result<ResidualReport<Complex64>> {
    let grid = eta.grid();
    let bracket = bracket_with_hamiltonian(eta, model, order)?;
    let x = match form {
        ResidualForm::SecondOrder => Some(se_rhs_order2(eta, model, hbar, order)?),
        _ => None,
    };
    let i_unit = Complex64::i();
    let values = (0..grid.lattice().len())
        .map(|k| {
            let z = grid.phase_point(k);
            let v = eta.values()[k];
            // (hbar/i){eta,H} = -i hbar {eta,H}
            let mut r = energy * v + i_unit * hbar * bracket.values()[k];
            if form != ResidualForm::KvnNaive {
                r -= (model.energy(&z) - model.p_dh_dp(&z)) * v;
            }
            if let Some(x) = &x {
                r -= i_unit * hbar * x.values()[k];
            }
            r
        })
        .collect();
    Ok(ResidualReport::new(
        PhaseField::from_parts(grid.clone(), values, eta.time()),
        eta.mass().sqrt(),
    ))
}

/// Residuals of the split into amplitude and phase, `eta = A exp(i beta / hbar)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudePhaseResiduals {
    /// `{A, H}`
    pub amplitude: ResidualReport<f64>,
    /// `E - H + p . dH/dp - {beta, H}`
    pub phase: ResidualReport<f64>,
    /// Points where both residuals were evaluated.
    pub mask: Vec<bool>,
}

/// Evaluates `{A, H}` and `E - H + p . dH/dp - {beta, H}` by finite
/// differences, unwrapping `arg eta` locally around every point.
///
/// Points where `|eta|` (or any stencil neighbor) falls below
/// `floor * max |eta|` are masked and hold zero.
pub fn amplitude_phase_residuals(
    eta: &PhaseField,
    energy: f64,
    model: &HamiltonianModel,
    hbar: f64,
    floor: f64,
    order: DifferenceOrder,
) -> Result<AmplitudePhaseResiduals> {
    let grid = eta.grid();
    if grid.dim() != model.dim() {
        return Err(Error::GridMismatch);
    }
    let lat = grid.lattice();
    let d = grid.dim();
    let coeffs = order.first();
    let reach = coeffs.len();
    let cut = floor * eta.max_modulus();
    let amp: Vec<f64> = eta.values().iter().map(|v| v.norm()).collect();
    let arg: Vec<f64> = eta.values().iter().map(|v| v.arg()).collect();
    let strong: Vec<bool> = amp.iter().map(|&a| a > cut).collect();
    let mut idx = vec![0usize; lat.rank()];
    let mut mask = vec![false; lat.len()];
    let mut r_a = vec![0.0; lat.len()];
    let mut r_b = vec![0.0; lat.len()];
    let mut ref_a = vec![0.0; lat.len()];
    let mut ref_b = vec![0.0; lat.len()];
    let two_pi = 2.0 * std::f64::consts::PI;
    'points: for k in 0..lat.len() {
        if !strong[k] {
            continue;
        }
        lat.unravel(k, &mut idx);
        let mut da = [0.0; 4];
        let mut db = [0.0; 4];
        for a in 0..2 * d {
            let n = lat.axis(a).len();
            if idx[a] < reach || idx[a] + reach >= n {
                continue 'points;
            }
            let s = lat.strides()[a];
            let h = lat.axis(a).spacing();
            for (j, c) in coeffs.iter().enumerate() {
                let (plus, minus) = (k + (j + 1) * s, k - (j + 1) * s);
                if !strong[plus] || !strong[minus] {
                    continue 'points;
                }
                let wrap = |x: f64| x - two_pi * (x / two_pi).round();
                let bp = wrap(arg[plus] - arg[k]);
                let bm = wrap(arg[minus] - arg[k]);
                da[a] += c * (amp[plus] - amp[minus]) / h;
                db[a] += c * (bp - bm) / h;
            }
        }
        let z = grid.phase_point(k);
        let g = model.gradient(&z);
        let mut br_a = 0.0;
        let mut br_b = 0.0;
        for i in 0..d {
            br_a += da[i] * g.p[i] - da[d + i] * g.q[i];
            br_b += hbar * (db[i] * g.p[i] - db[d + i] * g.q[i]);
        }
        let source = energy - model.energy(&z) + model.p_dh_dp(&z);
        mask[k] = true;
        r_a[k] = br_a;
        r_b[k] = source - br_b;
        ref_a[k] = amp[k];
        ref_b[k] = source.abs().max(br_b.abs());
    }
    if !mask.iter().any(|&m| m) {
        return Err(Error::AllMasked { floor });
    }
    let field = |v: Vec<f64>| RealPhaseField::from_parts(grid.clone(), v, eta.time());
    let ref_a = field(ref_a).mass().sqrt();
    let ref_b = field(ref_b).mass().sqrt();
    Ok(AmplitudePhaseResiduals {
        amplitude: ResidualReport::new(field(r_a), ref_a),
        phase: ResidualReport::new(field(r_b), ref_b),
        mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermite::{ho_eigen_eta, Oscillator};

    fn grid() -> PhaseGrid {
        PhaseGrid::new_1d((-9.0, 9.0, 181), (-9.0, 9.0, 181)).unwrap()
    }

    #[test]
    fn linear_hamiltonian_has_no_second_order_terms() {
        let model = HamiltonianModel::linear(&[0.7], &[-0.3]).unwrap();
        let eta = ho_eigen_eta(2, &Oscillator::unit(), &grid()).unwrap();
        let x = se_rhs_order2(&eta, &model, 1.0, DifferenceOrder::Fourth).unwrap();
        assert!(x.values().iter().all(|v| *v == Complex64::default()));
    }

    #[test]
    fn residual_is_linear_in_energy() {
        let model = HamiltonianModel::harmonic(1.0, 1.0).unwrap();
        let eta = ho_eigen_eta(1, &Oscillator::unit(), &grid()).unwrap();
        let a = tise_residual(&eta, 1.0, &model, 1.0, ResidualForm::FirstOrder, DifferenceOrder::Sixth).unwrap();
        let b = tise_residual(&eta, 1.25, &model, 1.0, ResidualForm::FirstOrder, DifferenceOrder::Sixth).unwrap();
        let diff = b.residual.l2_distance(&a.residual).unwrap();
        assert!((diff - 0.25 * eta.l2()).abs() < 1e-12 * eta.l2());
    }

    #[test]
    fn evolving_for_zero_time_is_identity() {
        let model = HamiltonianModel::harmonic(1.0, 1.0).unwrap();
        let eta = ho_eigen_eta(1, &Oscillator::unit(), &grid()).unwrap();
        let out = se_evolve(&eta, &model, 1.0, 0.0, &FlowConfig::default(), Gauge::None).unwrap();
        assert!(out.max_abs_difference(&eta).unwrap() < 1e-14);
    }

    #[test]
    fn everything_masked_is_an_error() {
        let model = HamiltonianModel::harmonic(1.0, 1.0).unwrap();
        let eta = PhaseField::zeros(grid());
        let err = amplitude_phase_residuals(&eta, 0.0, &model, 1.0, 1e-8, DifferenceOrder::Fourth).unwrap_err();
        assert_eq!(err.code(), "AllMasked");
    }
}
