//! Hermite polynomials and the harmonic-oscillator eigenstates in position
//! space and in phase space.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{PhaseField, PositionWavefunction, DEFAULT_BOUNDARY_EPS};
use crate::grid::{PhaseGrid, PositionGrid};

/// Highest supported polynomial degree.
pub const MAX_DEGREE: usize = 30;

fn check_degree(n: usize) -> Result<()> {
    if n > MAX_DEGREE {
        Err(Error::DegreeTooHigh {
            degree: n,
            max: MAX_DEGREE,
        })
    } else {
        Ok(())
    }
}

/// Physicists' Hermite polynomial `H_n(x)` (leading coefficient `2^n`),
/// by the recurrence `H_{k+1} = 2x H_k - 2k H_{k-1}`.
pub fn hermite(n: usize, x: f64) -> Result<f64> {
    check_degree(n)?;
    let (mut prev, mut cur) = (0.0, 1.0);
    for k in 0..n {
        let next = 2.0 * x * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// [`hermite`] at a complex argument.
pub fn hermite_complex(n: usize, z: Complex64) -> Result<Complex64> {
    check_degree(n)?;
    let (mut prev, mut cur) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    for k in 0..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Parameters of the oscillator `p^2/2m + m w^2 q^2/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl Oscillator {
    pub fn new(mass: f64, omega: f64, hbar: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("omega", omega), ("hbar", hbar)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(Self { mass, omega, hbar })
    }

    /// Natural units `m = w = hbar = 1`.
    pub fn unit() -> Self {
        Self {
            mass: 1.0,
            omega: 1.0,
            hbar: 1.0,
        }
    }

    /// Oscillator length `zeta = sqrt(hbar / m w)`.
    pub fn zeta(&self) -> f64 {
        (self.hbar / (self.mass * self.omega)).sqrt()
    }

    /// Wavepacket width that turns the packets into this oscillator's
    /// coherent states, `zeta / sqrt(2)`.
    pub fn coherent_sigma(&self) -> f64 {
        self.zeta() / std::f64::consts::SQRT_2
    }

    /// Exact level `(n + 1/2) hbar w`.
    pub fn level(&self, n: usize) -> f64 {
        (n as f64 + 0.5) * self.hbar * self.omega
    }

    /// Normalized eigenfunction `psi_n(x)`, evaluated through the stable
    /// recurrence of normalized Hermite functions.
    pub fn eigenfunction(&self, n: usize, x: f64) -> Result<f64> {
        check_degree(n)?;
        let scale = (self.mass * self.omega / self.hbar).sqrt();
        let xi = scale * x;
        let mut prev = 0.0;
        let mut cur = std::f64::consts::PI.powf(-0.25) * (-0.5 * xi * xi).exp();
        for k in 0..n {
            let kf = k as f64;
            let next = (2.0 / (kf + 1.0)).sqrt() * xi * cur - (kf / (kf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
        }
        Ok(cur * scale.sqrt())
    }

    /// `psi_n` sampled on a position grid.
    pub fn eigenstate(&self, n: usize, grid: &PositionGrid) -> Result<PositionWavefunction> {
        check_degree(n)?;
        if grid.dim() != 1 {
            return Err(Error::invalid("grid", "oscillator eigenstates are one-dimensional"));
        }
        let f = PositionWavefunction::from_fn(grid.clone(), |x| {
            Complex64::new(self.eigenfunction(n, x[0]).unwrap_or(0.0), 0.0)
        });
        f.check_boundary(DEFAULT_BOUNDARY_EPS)?;
        Ok(f)
    }

    /// Closed-form phase-space eigenstate at one point,
    /// `(1/sqrt n!) (m w / 2 hbar)^{n/2} (q - i p / m w)^n
    ///  exp[-(m w^2 q^2/2 - i w p q + p^2/2m) / 2 hbar w]`.
    pub fn eta_at(&self, n: usize, q: f64, p: f64) -> Complex64 {
        let Self { mass, omega, hbar } = *self;
        let c = (mass * omega / (2.0 * hbar)).sqrt() * Complex64::new(q, -p / (mass * omega));
        let mut poly = Complex64::new(1.0, 0.0);
        for k in 1..=n {
            poly *= c / (k as f64).sqrt();
        }
        let arg = Complex64::new(
            -(0.5 * mass * omega * omega * q * q + p * p / (2.0 * mass)),
            omega * p * q,
        ) / (2.0 * hbar * omega);
        poly * arg.exp()
    }
}

/// Closed-form harmonic-oscillator eigenstate `eta_n` sampled on `grid`.
pub fn ho_eigen_eta(n: usize, osc: &Oscillator, grid: &PhaseGrid) -> Result<PhaseField> {
    check_degree(n)?;
    if grid.dim() != 1 {
        return Err(Error::invalid("grid", "oscillator eigenstates are one-dimensional"));
    }
    let eta = PhaseField::from_fn(grid.clone(), |z| osc.eta_at(n, z.q[0], z.p[0]));
    eta.check_boundary(DEFAULT_BOUNDARY_EPS)?;
    Ok(eta)
}
