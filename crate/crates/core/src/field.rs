//! Sampled fields on position and phase grids.

use std::ops::{Add, AddAssign, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, Lattice, PhaseGrid, PositionGrid};
use crate::model::PhasePoint;

/// Default allowed fraction of mass in the boundary band.
pub const DEFAULT_BOUNDARY_EPS: f64 = 1e-8;

/// Scalar types a field can hold.
pub trait Sample:
    Copy
    + Send
    + Sync
    + Default
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<f64, Output = Self>
    + AddAssign
    + 'static
{
    fn modulus_sqr(self) -> f64;
    fn finite(self) -> bool;
}

impl Sample for f64 {
    #[inline]
    fn modulus_sqr(self) -> f64 {
        self * self
    }

    fn finite(self) -> bool {
        self.is_finite()
    }
}

impl Sample for Complex64 {
    #[inline]
    fn modulus_sqr(self) -> f64 {
        self.norm_sqr()
    }

    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Values sampled at every point of a grid, tagged with a time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<G: Grid, T: Sample> {
    grid: G,
    values: Vec<T>,
    time: f64,
}

/// Complex amplitude `eta(q, p)` on phase space.
pub type PhaseField = Field<PhaseGrid, Complex64>;
/// Real scalar on phase space (actions, amplitudes, phases).
pub type RealPhaseField = Field<PhaseGrid, f64>;
/// Complex wavefunction `psi(x)` on position space.
pub type PositionWavefunction = Field<PositionGrid, Complex64>;

impl<G: Grid, T: Sample> Field<G, T> {
    pub fn new(grid: G, values: Vec<T>, time: f64) -> Result<Self> {
        let expected = grid.lattice().len();
        if values.len() != expected {
            return Err(Error::invalid(
                "values",
                format!("expected {expected} samples, got {}", values.len()),
            ));
        }
        if let Some(i) = values.iter().position(|v| !v.finite()) {
            return Err(Error::invalid("values", format!("sample {i} is not finite")));
        }
        Ok(Self { grid, values, time })
    }

    /// Builds a field without re-validating finiteness; used internally
    /// where values are finite by construction.
    pub(crate) fn from_parts(grid: G, values: Vec<T>, time: f64) -> Self {
        debug_assert_eq!(values.len(), grid.lattice().len());
        Self { grid, values, time }
    }

    pub fn zeros(grid: G) -> Self {
        let n = grid.lattice().len();
        Self {
            grid,
            values: vec![T::default(); n],
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &G {
        &self.grid
    }

    pub fn lattice(&self) -> &Lattice {
        self.grid.lattice()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn map<U: Sample>(&self, f: impl Fn(T) -> U) -> Field<G, U> {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            time: self.time,
        }
    }

    pub fn same_grid<U: Sample>(&self, other: &Field<G, U>) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Fraction of `sum |v|^2` sitting in the boundary band of the grid.
    pub fn boundary_mass(&self) -> f64 {
        let lat = self.grid.lattice();
        let mut total = 0.0;
        let mut edge = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let m = v.modulus_sqr();
            total += m;
            if m > 0.0 && lat.in_boundary_band(i) {
                edge += m;
            }
        }
        if total > 0.0 {
            edge / total
        } else {
            0.0
        }
    }

    /// Fails with `GridTooSmall` when the boundary band holds more than `limit`.
    pub fn check_boundary(&self, limit: f64) -> Result<()> {
        let mass = self.boundary_mass();
        if mass > limit {
            Err(Error::GridTooSmall { mass, limit })
        } else {
            Ok(())
        }
    }

    /// Trapezoid integral of `|v|^2` over the grid (plain coordinate measure).
    pub fn mass(&self) -> f64 {
        self.grid
            .lattice()
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w * v.modulus_sqr())
            .sum()
    }

    /// Discrete `sqrt(sum |v|^2)` without quadrature weights.
    pub fn l2(&self) -> f64 {
        self.values.iter().map(|v| v.modulus_sqr()).sum::<f64>().sqrt()
    }

    /// Discrete `sqrt(sum |a - b|^2)`.
    pub fn l2_distance(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).modulus_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// Largest `|a - b|` over the grid.
    pub fn max_abs_difference(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| (a - b).modulus_sqr().sqrt())
            .fold(0.0, f64::max))
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|v| v.modulus_sqr()).fold(0.0, f64::max).sqrt()
    }
}

impl<G: Grid> Field<G, Complex64> {
    /// `sum conj(a) b` times the trapezoid weights.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.same_grid(other)?;
        let w = self.grid.lattice().weights();
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(&w)
            .map(|((a, b), w)| a.conj() * b * *w)
            .sum())
    }

    pub fn scale(mut self, c: Complex64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= c);
        self
    }

    pub fn modulus(&self) -> Field<G, f64> {
        self.map(|v| v.norm())
    }

    pub fn density(&self) -> Field<G, f64> {
        self.map(|v| v.norm_sqr())
    }
}

impl<T: Sample> Field<PhaseGrid, T> {
    /// Samples `f(q, p)` at every phase-grid point.
    pub fn from_fn(grid: PhaseGrid, f: impl Fn(&PhasePoint) -> T) -> Self {
        let values = (0..grid.lattice().len()).map(|i| f(&grid.phase_point(i))).collect();
        Self {
            grid,
            values,
            time: 0.0,
        }
    }

    /// `sum |v|^2 (dq dp / 2 pi hbar)^D` by the trapezoid rule.
    pub fn phase_norm_sqr(&self, hbar: f64) -> f64 {
        let scale = (2.0 * std::f64::consts::PI * hbar).powi(self.grid.dim() as i32);
        self.mass() / scale
    }
}

impl<T: Sample> Field<PositionGrid, T> {
    /// Samples `f(x)` at every position-grid point.
    pub fn from_fn(grid: PositionGrid, f: impl Fn(&[f64]) -> T) -> Self {
        let lat = grid.lattice().clone();
        let mut x = vec![0.0; lat.rank()];
        let values = (0..lat.len())
            .map(|i| {
                lat.point(i, &mut x);
                f(&x)
            })
            .collect();
        Self {
            grid,
            values,
            time: 0.0,
        }
    }
}

impl PositionWavefunction {
    /// Rescales to unit trapezoid norm.
    pub fn normalized(mut self) -> Self {
        let n = self.mass().sqrt();
        if n > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= n);
        }
        self
    }
}

/// Nonnegative phase-space probability density `rho = |eta|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField(RealPhaseField);

impl DensityField {
    pub fn new(field: RealPhaseField) -> Result<Self> {
        if let Some(i) = field.values().iter().position(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::invalid("density", format!("sample {i} is negative or not finite")));
        }
        Ok(Self(field))
    }

    pub fn from_amplitude(eta: &PhaseField) -> Self {
        Self(eta.density())
    }

    pub(crate) fn from_clamped(mut field: RealPhaseField) -> Self {
        field.values_mut().iter_mut().for_each(|v| *v = v.max(0.0));
        Self(field)
    }

    pub fn field(&self) -> &RealPhaseField {
        &self.0
    }

    pub fn into_field(self) -> RealPhaseField {
        self.0
    }

    /// Trapezoid integral of the density itself (not of its square).
    pub fn total(&self) -> f64 {
        self.0
            .lattice()
            .weights()
            .iter()
            .zip(self.0.values())
            .map(|(w, v)| w * v)
            .sum()
    }
}
