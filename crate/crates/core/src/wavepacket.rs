//! The Gaussian wavepacket family `u_qp(x) = u_0(x - q) exp(i p.(x - q)/hbar + i phi)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{PositionWavefunction, RealPhaseField, DEFAULT_BOUNDARY_EPS};
use crate::grid::{Grid, PositionGrid};
use crate::interp::{interpolate, Stencil};
use crate::model::{HamiltonianModel, PhasePoint};

/// Extra phase `phi(q, p, t)` attached to every packet.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum GaugePhase {
    #[default]
    None,
    /// `phi = -H(q, p) t / hbar`
    Energy { model: HamiltonianModel, time: f64 },
    /// `phi = S(q, p) / hbar` for a tabulated action `S`.
    Action(RealPhaseField),
}

impl GaugePhase {
    /// `phi` at `z`. Points outside a tabulated action get `phi = 0`.
    pub fn phi(&self, z: &PhasePoint, hbar: f64) -> f64 {
        match self {
            GaugePhase::None => 0.0,
            GaugePhase::Energy { model, time } => -model.energy(z) * time / hbar,
            GaugePhase::Action(s) => {
                let d = s.grid().dim();
                let mut x = [0.0; 4];
                x[..d].copy_from_slice(&z.q[..d]);
                x[d..2 * d].copy_from_slice(&z.p[..d]);
                interpolate(s.lattice(), s.values(), &x[..2 * d], Stencil::Cubic).unwrap_or(0.0) / hbar
            }
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, GaugePhase::None)
    }
}

/// Parameters of the packet family: spatial width, action unit and gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct WavepacketFamily {
    sigma: f64,
    hbar: f64,
    gauge: GaugePhase,
}

impl WavepacketFamily {
    pub fn new(sigma: f64, hbar: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
        }
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::invalid("hbar", format!("must be positive, got {hbar}")));
        }
        Ok(Self {
            sigma,
            hbar,
            gauge: GaugePhase::None,
        })
    }

    pub fn with_gauge(mut self, gauge: GaugePhase) -> Self {
        self.gauge = gauge;
        self
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn gauge(&self) -> &GaugePhase {
        &self.gauge
    }

    /// One-dimensional factor of `u_0`, `(2 pi sigma^2)^{-1/4} exp(-x^2 / 4 sigma^2)`.
    #[inline]
    pub fn envelope_1d(&self, x: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        (2.0 * std::f64::consts::PI * s2).powf(-0.25) * (-x * x / (4.0 * s2)).exp()
    }

    /// `u_0(x)` in `x.len()` dimensions.
    pub fn envelope(&self, x: &[f64]) -> f64 {
        x.iter().map(|&xi| self.envelope_1d(xi)).product()
    }

    /// `u_qp(x)` including the gauge phase.
    pub fn packet_value(&self, z: &PhasePoint, x: &[f64]) -> Complex64 {
        let mut env = 1.0;
        let mut phase = self.gauge.phi(z, self.hbar);
        for (i, &xi) in x.iter().enumerate() {
            let d = xi - z.q[i];
            env *= self.envelope_1d(d);
            phase += z.p[i] * d / self.hbar;
        }
        Complex64::from_polar(env, phase)
    }

    /// Samples `u_qp` on a position grid.
    pub fn make_wavepacket(&self, z: &PhasePoint, xgrid: &PositionGrid) -> Result<PositionWavefunction> {
        let u = PositionWavefunction::from_fn(xgrid.clone(), |x| self.packet_value(z, x));
        if u.mass() == 0.0 {
            return Err(Error::GridTooSmall {
                mass: 1.0,
                limit: DEFAULT_BOUNDARY_EPS,
            });
        }
        u.check_boundary(DEFAULT_BOUNDARY_EPS)?;
        Ok(u)
    }

    /// Checks that the packets are resolved by the grid spacing.
    pub fn check_resolved(&self, xgrid: &PositionGrid) -> Result<()> {
        let lat = xgrid.lattice();
        for a in lat.axes() {
            if self.sigma < 2.0 * a.spacing() {
                return Err(Error::QuadratureUnderresolved {
                    sigma: self.sigma,
                    dx: a.spacing(),
                });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xgrid() -> PositionGrid {
        PositionGrid::new_1d(-12.0, 12.0, 481).unwrap()
    }

    #[test]
    fn centered_packet_is_real_gaussian() {
        let fam = WavepacketFamily::new(1.0, 1.0).unwrap();
        let u = fam.make_wavepacket(&PhasePoint::zero(), &xgrid()).unwrap();
        let lat = u.lattice().clone();
        for (i, v) in u.values().iter().enumerate() {
            let x = lat.axis(0).coord(i);
            let want = (2.0 * std::f64::consts::PI).powf(-0.25) * (-x * x / 4.0).exp();
            assert!((v.re - want).abs() < 1e-15);
            assert_eq!(v.im, 0.0);
        }
    }

    #[test]
    fn moving_packet_value_at_its_center() {
        let fam = WavepacketFamily::new(1.0, 1.0).unwrap();
        let v = fam.packet_value(&PhasePoint::new_1d(1.0, 2.0), &[1.0]);
        assert!((v.re - (2.0 * std::f64::consts::PI).powf(-0.25)).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn unit_norm_under_quadrature() {
        for sigma in [0.3, 1.0 / 2f64.sqrt(), 1.7] {
            let fam = WavepacketFamily::new(sigma, 0.7).unwrap();
            let u = fam.make_wavepacket(&PhasePoint::new_1d(0.4, -1.1), &xgrid()).unwrap();
            assert!((u.mass() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn two_dimensional_packet_norm() {
        let g = PositionGrid::new(&[(-8.0, 8.0, 97), (-8.0, 8.0, 97)]).unwrap();
        let fam = WavepacketFamily::new(0.8, 1.0).unwrap();
        let u = fam.make_wavepacket(&PhasePoint::new_2d([0.5, -0.3], [1.0, 0.2]), &g).unwrap();
        assert!((u.mass() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn packet_too_close_to_edge() {
        let fam = WavepacketFamily::new(1.0, 1.0).unwrap();
        let err = fam.make_wavepacket(&PhasePoint::new_1d(10.0, 0.0), &xgrid()).unwrap_err();
        assert_eq!(err.code(), "GridTooSmall");
    }

    #[test]
    fn energy_gauge_adds_phase() {
        let model = HamiltonianModel::harmonic(1.0, 1.0).unwrap();
        let fam = WavepacketFamily::new(1.0, 1.0).unwrap().with_gauge(GaugePhase::Energy { model, time: 0.5 });
        let z = PhasePoint::new_1d(1.0, 1.0);
        let v = fam.packet_value(&z, &[1.0]);
        assert!((v.arg() + 0.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(WavepacketFamily::new(0.0, 1.0).is_err());
        assert!(WavepacketFamily::new(1.0, -1.0).is_err());
        let fam = WavepacketFamily::new(0.01, 1.0).unwrap();
        assert_eq!(fam.check_resolved(&xgrid()).unwrap_err().code(), "QuadratureUnderresolved");
    }
}
