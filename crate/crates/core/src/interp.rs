//! Tensor-product Lagrange interpolation on a [`Lattice`].
//!
//! Samples outside the grid are treated as zero; every field handled by the
//! toolkit is required to vanish at the boundary band anyway.

use crate::field::Sample;
use crate::grid::Lattice;

/// Number of nodes per axis used by the interpolant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    /// Four-point (bicubic in two dimensions), error `O(h^4)`.
    #[default]
    Cubic,
    /// Six-point, error `O(h^6)`.
    Quintic,
}

impl Stencil {
    pub fn points(self) -> usize {
        match self {
            Stencil::Cubic => 4,
            Stencil::Quintic => 6,
        }
    }
}

const MAX_RANK: usize = 4;
const MAX_POINTS: usize = 6;

/// Lagrange weights for nodes `start..start + k` at fractional index `s`.
#[inline]
fn weights(s: f64, k: usize) -> (isize, [f64; MAX_POINTS]) {
    let base = s.floor() as isize;
    let start = base - (k as isize / 2 - 1);
    let mut w = [0.0; MAX_POINTS];
    for (j, wj) in w.iter_mut().enumerate().take(k) {
        let xj = (start + j as isize) as f64;
        let mut num = 1.0;
        let mut den = 1.0;
        for m in 0..k {
            if m != j {
                let xm = (start + m as isize) as f64;
                num *= s - xm;
                den *= xj - xm;
            }
        }
        *wj = num / den;
    }
    (start, w)
}

/// Interpolates `values` at the fractional indices `frac` (one per axis).
pub fn interpolate_index<T: Sample>(lat: &Lattice, values: &[T], frac: &[f64], stencil: Stencil) -> T {
    let rank = lat.rank();
    debug_assert!(rank <= MAX_RANK && frac.len() == rank);
    let k = stencil.points();
    let mut starts = [0isize; MAX_RANK];
    let mut ws = [[0.0; MAX_POINTS]; MAX_RANK];
    for a in 0..rank {
        let (s, w) = weights(frac[a], k);
        starts[a] = s;
        ws[a] = w;
    }
    let shape = lat.shape();
    let strides = lat.strides();
    let mut acc = T::default();
    let mut odo = [0usize; MAX_RANK];
    'outer: loop {
        let mut w = 1.0;
        let mut flat = 0usize;
        let mut inside = true;
        for a in 0..rank {
            let i = starts[a] + odo[a] as isize;
            if i < 0 || i as usize >= shape[a] {
                inside = false;
                break;
            }
            w *= ws[a][odo[a]];
            flat += i as usize * strides[a];
        }
        if inside {
            acc += values[flat] * w;
        }
        for a in (0..rank).rev() {
            odo[a] += 1;
            if odo[a] < k {
                continue 'outer;
            }
            odo[a] = 0;
        }
        break;
    }
    acc
}

/// Interpolates at physical coordinates; `None` if the point is outside the grid.
pub fn interpolate<T: Sample>(lat: &Lattice, values: &[T], coords: &[f64], stencil: Stencil) -> Option<T> {
    let mut frac = [0.0; MAX_RANK];
    for (a, &x) in coords.iter().enumerate() {
        frac[a] = lat.axis(a).locate(x)?;
    }
    Some(interpolate_index(lat, values, &frac[..coords.len()], stencil))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::RealPhaseField;
    use crate::grid::{Grid, PhaseGrid};

    #[test]
    fn reproduces_grid_values() {
        let g = PhaseGrid::new_1d((-2.0, 2.0, 17), (-1.0, 3.0, 21)).unwrap();
        let f = RealPhaseField::from_fn(g.clone(), |z| (z.q[0] * 1.3).sin() + z.p[0].powi(2));
        let lat = g.lattice();
        for flat in [0, 40, 200, lat.len() - 1] {
            let mut x = [0.0; 2];
            lat.point(flat, &mut x);
            for st in [Stencil::Cubic, Stencil::Quintic] {
                let v = interpolate(lat, f.values(), &x, st).unwrap();
                assert!((v - f.values()[flat]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn exact_for_cubic_polynomials_in_the_interior() {
        let g = PhaseGrid::new_1d((-2.0, 2.0, 17), (-2.0, 2.0, 17)).unwrap();
        let poly = |q: f64, p: f64| 1.0 + q - 2.0 * q * q * p + p.powi(3) - 0.5 * q.powi(3);
        let f = RealPhaseField::from_fn(g.clone(), |z| poly(z.q[0], z.p[0]));
        for &(q, p) in &[(0.13, -0.71), (1.01, 0.2), (-0.66, 1.2)] {
            let v = interpolate(g.lattice(), f.values(), &[q, p], Stencil::Cubic).unwrap();
            assert!((v - poly(q, p)).abs() < 1e-12);
        }
    }

    #[test]
    fn outside_is_none() {
        let g = PhaseGrid::new_1d((-2.0, 2.0, 17), (-2.0, 2.0, 17)).unwrap();
        let f = RealPhaseField::zeros(g.clone());
        assert!(interpolate(g.lattice(), f.values(), &[2.5, 0.0], Stencil::Cubic).is_none());
    }

    #[test]
    fn quintic_converges_faster() {
        let err = |n: usize, st: Stencil| {
            let g = PhaseGrid::new_1d((-6.0, 6.0, n), (-6.0, 6.0, n)).unwrap();
            let gauss = |q: f64, p: f64| (-(q * q + p * p) / 2.0).exp();
            let f = RealPhaseField::from_fn(g.clone(), |z| gauss(z.q[0], z.p[0]));
            let (q, p) = (0.3712, -0.5911);
            (interpolate(g.lattice(), f.values(), &[q, p], st).unwrap() - gauss(q, p)).abs()
        };
        assert!(err(97, Stencil::Quintic) < err(97, Stencil::Cubic));
        let ratio = err(49, Stencil::Cubic) / err(97, Stencil::Cubic);
        assert!(ratio > 10.0, "cubic convergence ratio {ratio}");
    }
}
