//! Uniform tensor-product grids for position space and phase space.
//!
//! Points are stored row-major: the last axis varies fastest. A phase grid
//! with `D` degrees of freedom has `2D` axes ordered `q_1..q_D, p_1..p_D`.

use crate::error::{Error, Result};

/// Smallest number of points accepted along any axis.
pub const MIN_POINTS: usize = 8;

/// Largest supported number of spatial dimensions.
pub const MAX_DIM: usize = 2;

/// One uniformly sampled coordinate axis, `coord(i) = min + i * spacing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    min: f64,
    max: f64,
    n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        Self::checked(0, min, max, n)
    }

    fn checked(axis: usize, min: f64, max: f64, n: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || min >= max {
            return Err(Error::InvalidExtent { axis, min, max });
        }
        if n < MIN_POINTS {
            return Err(Error::TooCoarse {
                axis,
                count: n,
                minimum: MIN_POINTS,
            });
        }
        Ok(Self { min, max, n })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        self.min + i as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Fractional index of `x`, or `None` outside `[min, max]`.
    #[inline]
    pub fn locate(&self, x: f64) -> Option<f64> {
        let s = (x - self.min) / self.spacing();
        let last = (self.n - 1) as f64;
        // tolerate round-off at the end points
        if s < -1e-9 || s > last + 1e-9 {
            None
        } else {
            Some(s.clamp(0.0, last))
        }
    }

    /// Trapezoid weights including the spacing.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.n];
        w[0] = 0.5 * h;
        w[self.n - 1] = 0.5 * h;
        w
    }

    /// Number of cells at each end that count as the boundary band.
    pub fn boundary_band(&self) -> usize {
        (self.n / 20).max(2)
    }
}

/// Row-major tensor-product lattice shared by every grid type.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    len: usize,
}

impl Lattice {
    fn new(axes: Vec<Axis>) -> Self {
        let mut strides = vec![1; axes.len()];
        for k in (0..axes.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * axes[k + 1].len();
        }
        let len = axes.iter().map(Axis::len).product();
        Self { axes, strides, len }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn rank(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    /// Multi-index of the flat index `flat`, written into `out`.
    #[inline]
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for (k, s) in self.strides.iter().enumerate() {
            out[k] = flat / s;
            flat %= s;
        }
    }

    #[inline]
    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Coordinates of the flat index, written into `out`.
    #[inline]
    pub fn point(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for (k, s) in self.strides.iter().enumerate() {
            out[k] = self.axes[k].coord(rem / s);
            rem %= s;
        }
    }

    /// Trapezoid quadrature weight of every point (product over axes).
    pub fn weights(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = self.axes.iter().map(Axis::trapezoid_weights).collect();
        let mut idx = vec![0; self.rank()];
        (0..self.len)
            .map(|flat| {
                self.unravel(flat, &mut idx);
                idx.iter().enumerate().map(|(k, &i)| per_axis[k][i]).product()
            })
            .collect()
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// True when the flat index lies in the boundary band of any axis.
    pub fn in_boundary_band(&self, flat: usize) -> bool {
        let mut rem = flat;
        for (k, s) in self.strides.iter().enumerate() {
            let i = rem / s;
            rem %= s;
            let a = &self.axes[k];
            let band = a.boundary_band();
            if i < band || i >= a.len() - band {
                return true;
            }
        }
        false
    }
}

/// Anything that owns a [`Lattice`].
pub trait Grid: Clone + PartialEq + Send + Sync {
    fn lattice(&self) -> &Lattice;
}

/// Uniform grid over the `2D`-dimensional phase space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseGrid {
    dim: usize,
    lattice: Lattice,
}

impl PhaseGrid {
    /// Builds a grid from per-dimension `(min, max, count)` triples for the
    /// positions and momenta.
    pub fn new(q: &[(f64, f64, usize)], p: &[(f64, f64, usize)]) -> Result<Self> {
        if q.len() != p.len() || q.is_empty() || q.len() > MAX_DIM {
            return Err(Error::invalid(
                "dimension",
                format!("need 1..={MAX_DIM} matching q/p axes, got {} and {}", q.len(), p.len()),
            ));
        }
        let axes = q
            .iter()
            .chain(p)
            .enumerate()
            .map(|(k, &(lo, hi, n))| Axis::checked(k, lo, hi, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: q.len(),
            lattice: Lattice::new(axes),
        })
    }

    /// Square grid for one degree of freedom.
    pub fn new_1d(q: (f64, f64, usize), p: (f64, f64, usize)) -> Result<Self> {
        Self::new(&[q], &[p])
    }

    /// Same `(min, max, count)` for every axis of a `dim`-dimensional system.
    pub fn cube(dim: usize, min: f64, max: f64, n: usize) -> Result<Self> {
        let spec = vec![(min, max, n); dim];
        Self::new(&spec, &spec)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q_axis(&self, i: usize) -> &Axis {
        self.lattice.axis(i)
    }

    pub fn p_axis(&self, i: usize) -> &Axis {
        self.lattice.axis(self.dim + i)
    }

    /// Splits a flat index into its position and momentum coordinates.
    #[inline]
    pub fn phase_point(&self, flat: usize) -> crate::model::PhasePoint {
        let mut x = [0.0; 2 * MAX_DIM];
        self.lattice.point(flat, &mut x[..2 * self.dim]);
        let mut z = crate::model::PhasePoint::zero();
        for i in 0..self.dim {
            z.q[i] = x[i];
            z.p[i] = x[self.dim + i];
        }
        z
    }

    /// Index of the grid point nearest to `z`, if `z` is inside the grid.
    pub fn nearest(&self, z: &crate::model::PhasePoint) -> Option<usize> {
        let mut idx = [0usize; 2 * MAX_DIM];
        for k in 0..2 * self.dim {
            let x = if k < self.dim { z.q[k] } else { z.p[k - self.dim] };
            idx[k] = self.lattice.axis(k).locate(x)?.round() as usize;
        }
        Some(self.lattice.ravel(&idx[..2 * self.dim]))
    }

    /// Phase-space measure of one cell, `(dq dp / 2 pi hbar)^D`.
    pub fn cell_measure(&self, hbar: f64) -> f64 {
        self.lattice.cell_volume() / (2.0 * std::f64::consts::PI * hbar).powi(self.dim as i32)
    }
}

impl Grid for PhaseGrid {
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }
}

/// Uniform grid over position space.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionGrid {
    lattice: Lattice,
}

impl PositionGrid {
    pub fn new(x: &[(f64, f64, usize)]) -> Result<Self> {
        if x.is_empty() || x.len() > MAX_DIM {
            return Err(Error::invalid(
                "dimension",
                format!("need 1..={MAX_DIM} axes, got {}", x.len()),
            ));
        }
        let axes = x
            .iter()
            .enumerate()
            .map(|(k, &(lo, hi, n))| Axis::checked(k, lo, hi, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lattice: Lattice::new(axes),
        })
    }

    pub fn new_1d(min: f64, max: f64, n: usize) -> Result<Self> {
        Self::new(&[(min, max, n)])
    }

    pub fn dim(&self) -> usize {
        self.lattice.rank()
    }

    pub fn axis(&self, i: usize) -> &Axis {
        self.lattice.axis(i)
    }
}

impl Grid for PositionGrid {
    fn lattice(&self) -> &Lattice {
        &self.lattice
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_of_nine_point_unit_grid() {
        let g = PhaseGrid::new_1d((-1.0, 1.0, 9), (-1.0, 1.0, 9)).unwrap();
        assert_eq!(g.q_axis(0).spacing(), 0.25);
        assert_eq!(g.p_axis(0).spacing(), 0.25);
        assert_eq!(g.q_axis(0).coord(3), -0.25);
    }

    #[test]
    fn hundred_and_one_points_over_ten() {
        let a = Axis::new(-5.0, 5.0, 101).unwrap();
        assert!((a.spacing() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn reversed_extent_rejected() {
        let err = PhaseGrid::new_1d((1.0, -1.0, 9), (-1.0, 1.0, 9)).unwrap_err();
        assert_eq!(err.code(), "InvalidExtent");
        let err = PhaseGrid::new_1d((-1.0, 1.0, 9), (2.0, 2.0, 9)).unwrap_err();
        assert!(matches!(err, Error::InvalidExtent { axis: 1, .. }));
    }

    #[test]
    fn too_few_points_rejected() {
        let err = PositionGrid::new_1d(-1.0, 1.0, 7).unwrap_err();
        assert_eq!(err.code(), "TooCoarse");
    }

    #[test]
    fn ravel_unravel_round_trip() {
        let g = PhaseGrid::cube(2, -1.0, 1.0, 9).unwrap();
        let lat = g.lattice();
        let mut idx = [0; 4];
        for flat in [0, 17, 999, lat.len() - 1] {
            lat.unravel(flat, &mut idx);
            assert_eq!(lat.ravel(&idx), flat);
        }
        assert_eq!(lat.len(), 9usize.pow(4));
    }

    #[test]
    fn phase_point_splits_axes() {
        let g = PhaseGrid::new_1d((-1.0, 1.0, 9), (-2.0, 2.0, 9)).unwrap();
        let z = g.phase_point(9 + 8);
        assert_eq!(z.q[0], -0.75);
        assert_eq!(z.p[0], 2.0);
        assert_eq!(g.nearest(&z), Some(17));
    }
}
