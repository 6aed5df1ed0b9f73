//! Autonomous Hamiltonians `H(q, p)` with analytic first and second
//! derivatives.

use crate::error::{Error, Result};
use crate::grid::MAX_DIM;

/// A point `(q, p)` in phase space. Components beyond the model dimension
/// are zero. The same layout carries gradients `(dH/dq, dH/dp)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhasePoint {
    pub q: [f64; MAX_DIM],
    pub p: [f64; MAX_DIM],
}

impl PhasePoint {
    pub const fn zero() -> Self {
        Self {
            q: [0.0; MAX_DIM],
            p: [0.0; MAX_DIM],
        }
    }

    pub fn new_1d(q: f64, p: f64) -> Self {
        Self {
            q: [q, 0.0],
            p: [p, 0.0],
        }
    }

    pub fn new_2d(q: [f64; 2], p: [f64; 2]) -> Self {
        Self { q, p }
    }

    #[inline]
    pub fn axpy(&self, a: f64, other: &PhasePoint) -> PhasePoint {
        let mut out = *self;
        for i in 0..MAX_DIM {
            out.q[i] += a * other.q[i];
            out.p[i] += a * other.p[i];
        }
        out
    }

    pub fn distance(&self, other: &PhasePoint) -> f64 {
        let mut s = 0.0;
        for i in 0..MAX_DIM {
            s += (self.q[i] - other.q[i]).powi(2) + (self.p[i] - other.p[i]).powi(2);
        }
        s.sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.distance(&PhasePoint::zero())
    }
}

/// Second derivatives of `H`. `qp[i][j]` is `d2H / dq_i dp_j`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Hessian {
    pub qq: [[f64; MAX_DIM]; MAX_DIM],
    pub qp: [[f64; MAX_DIM]; MAX_DIM],
    pub pp: [[f64; MAX_DIM]; MAX_DIM],
}

/// The Hamiltonians the toolkit knows how to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HamiltonianModel {
    /// `p^2/2m + m w^2 q^2 / 2`
    Harmonic { mass: f64, omega: f64 },
    /// `p^2/2m`
    Free { mass: f64 },
    /// `p^2/2m + lambda q^4`
    Quartic { mass: f64, lambda: f64 },
    /// `sum_i p_i^2/2m + m w_i^2 q_i^2 / 2` in two dimensions.
    Anisotropic2d { mass: f64, omega: [f64; 2] },
    /// `v . p + f . q`, every second derivative vanishes.
    Linear {
        dim: usize,
        velocity: [f64; MAX_DIM],
        force: [f64; MAX_DIM],
    },
}

impl HamiltonianModel {
    pub fn harmonic(mass: f64, omega: f64) -> Result<Self> {
        positive("mass", mass)?;
        positive("omega", omega)?;
        Ok(Self::Harmonic { mass, omega })
    }

    pub fn free(mass: f64) -> Result<Self> {
        positive("mass", mass)?;
        Ok(Self::Free { mass })
    }

    pub fn quartic(mass: f64, lambda: f64) -> Result<Self> {
        positive("mass", mass)?;
        positive("lambda", lambda)?;
        Ok(Self::Quartic { mass, lambda })
    }

    pub fn anisotropic_2d(mass: f64, omega1: f64, omega2: f64) -> Result<Self> {
        positive("mass", mass)?;
        positive("omega", omega1)?;
        positive("omega", omega2)?;
        Ok(Self::Anisotropic2d {
            mass,
            omega: [omega1, omega2],
        })
    }

    pub fn linear(velocity: &[f64], force: &[f64]) -> Result<Self> {
        if velocity.len() != force.len() || velocity.is_empty() || velocity.len() > MAX_DIM {
            return Err(Error::invalid("linear", "velocity and force need 1 or 2 matching components"));
        }
        let mut v = [0.0; MAX_DIM];
        let mut f = [0.0; MAX_DIM];
        v[..velocity.len()].copy_from_slice(velocity);
        f[..force.len()].copy_from_slice(force);
        Ok(Self::Linear {
            dim: velocity.len(),
            velocity: v,
            force: f,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Harmonic { .. } => "harmonic",
            Self::Free { .. } => "free",
            Self::Quartic { .. } => "quartic",
            Self::Anisotropic2d { .. } => "anisotropic2d",
            Self::Linear { .. } => "linear",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Anisotropic2d { .. } => 2,
            Self::Linear { dim, .. } => *dim,
            _ => 1,
        }
    }

    /// Particle mass for kinetic-plus-potential models.
    pub fn mass(&self) -> Option<f64> {
        match self {
            Self::Harmonic { mass, .. }
            | Self::Free { mass }
            | Self::Quartic { mass, .. }
            | Self::Anisotropic2d { mass, .. } => Some(*mass),
            Self::Linear { .. } => None,
        }
    }

    /// `V(x)` for one-dimensional models of the form `p^2/2m + V(x)`.
    pub fn potential(&self, x: f64) -> Option<f64> {
        match *self {
            Self::Harmonic { mass, omega } => Some(0.5 * mass * omega * omega * x * x),
            Self::Free { .. } => Some(0.0),
            Self::Quartic { lambda, .. } => Some(lambda * x.powi(4)),
            _ => None,
        }
    }

    /// Whether every degree of freedom is bound.
    pub fn is_confining(&self) -> bool {
        matches!(
            self,
            Self::Harmonic { .. } | Self::Quartic { .. } | Self::Anisotropic2d { .. }
        )
    }

    /// Minimum of the potential, located at the origin for every confining model.
    pub fn potential_minimum(&self) -> f64 {
        0.0
    }

    pub fn energy(&self, z: &PhasePoint) -> f64 {
        match *self {
            Self::Harmonic { mass, omega } => {
                z.p[0] * z.p[0] / (2.0 * mass) + 0.5 * mass * omega * omega * z.q[0] * z.q[0]
            }
            Self::Free { mass } => z.p[0] * z.p[0] / (2.0 * mass),
            Self::Quartic { mass, lambda } => z.p[0] * z.p[0] / (2.0 * mass) + lambda * z.q[0].powi(4),
            Self::Anisotropic2d { mass, omega } => (0..2)
                .map(|i| z.p[i] * z.p[i] / (2.0 * mass) + 0.5 * mass * omega[i] * omega[i] * z.q[i] * z.q[i])
                .sum(),
            Self::Linear {
                dim,
                velocity,
                force,
            } => (0..dim).map(|i| velocity[i] * z.p[i] + force[i] * z.q[i]).sum(),
        }
    }

    /// `(dH/dq, dH/dp)` packed into a [`PhasePoint`].
    #[inline]
    pub fn gradient(&self, z: &PhasePoint) -> PhasePoint {
        let mut g = PhasePoint::zero();
        match *self {
            Self::Harmonic { mass, omega } => {
                g.q[0] = mass * omega * omega * z.q[0];
                g.p[0] = z.p[0] / mass;
            }
            Self::Free { mass } => {
                g.p[0] = z.p[0] / mass;
            }
            Self::Quartic { mass, lambda } => {
                g.q[0] = 4.0 * lambda * z.q[0].powi(3);
                g.p[0] = z.p[0] / mass;
            }
            Self::Anisotropic2d { mass, omega } => {
                for i in 0..2 {
                    g.q[i] = mass * omega[i] * omega[i] * z.q[i];
                    g.p[i] = z.p[i] / mass;
                }
            }
            Self::Linear {
                dim,
                velocity,
                force,
            } => {
                g.q[..dim].copy_from_slice(&force[..dim]);
                g.p[..dim].copy_from_slice(&velocity[..dim]);
            }
        }
        g
    }

    pub fn hessian(&self, z: &PhasePoint) -> Hessian {
        let mut h = Hessian::default();
        match *self {
            Self::Harmonic { mass, omega } => {
                h.qq[0][0] = mass * omega * omega;
                h.pp[0][0] = 1.0 / mass;
            }
            Self::Free { mass } => {
                h.pp[0][0] = 1.0 / mass;
            }
            Self::Quartic { mass, lambda } => {
                h.qq[0][0] = 12.0 * lambda * z.q[0] * z.q[0];
                h.pp[0][0] = 1.0 / mass;
            }
            Self::Anisotropic2d { mass, omega } => {
                for i in 0..2 {
                    h.qq[i][i] = mass * omega[i] * omega[i];
                    h.pp[i][i] = 1.0 / mass;
                }
            }
            Self::Linear { .. } => {}
        }
        h
    }

    /// Hamiltonian vector field `(dH/dp, -dH/dq)`.
    #[inline]
    pub fn flow(&self, z: &PhasePoint) -> PhasePoint {
        let g = self.gradient(z);
        let mut v = PhasePoint::zero();
        for i in 0..MAX_DIM {
            v.q[i] = g.p[i];
            v.p[i] = -g.q[i];
        }
        v
    }

    /// `p . dH/dp`
    #[inline]
    pub fn p_dh_dp(&self, z: &PhasePoint) -> f64 {
        let g = self.gradient(z);
        (0..self.dim()).map(|i| z.p[i] * g.p[i]).sum()
    }

    /// The Lagrangian along the flow, `p . dH/dp - H`.
    #[inline]
    pub fn lagrangian(&self, z: &PhasePoint) -> f64 {
        self.p_dh_dp(z) - self.energy(z)
    }

    /// Energy held in degree of freedom `dof` of a separable model.
    pub fn dof_energy(&self, dof: usize, z: &PhasePoint) -> Option<f64> {
        match *self {
            Self::Anisotropic2d { mass, omega } if dof < 2 => Some(
                z.p[dof] * z.p[dof] / (2.0 * mass) + 0.5 * mass * omega[dof] * omega[dof] * z.q[dof] * z.q[dof],
            ),
            _ if dof == 0 && self.dim() == 1 => Some(self.energy(z)),
            _ => None,
        }
    }

    /// Angular frequency of small oscillations in each degree of freedom.
    pub fn small_oscillation_frequency(&self, dof: usize) -> Option<f64> {
        match *self {
            Self::Harmonic { omega, .. } if dof == 0 => Some(omega),
            Self::Anisotropic2d { omega, .. } if dof < 2 => Some(omega[dof]),
            _ => None,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
    }
}
