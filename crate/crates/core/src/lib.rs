//! Phase-space wavefunctions built from Gaussian wavepackets, their classical
//! transport, and semiclassical quantization.

pub mod classical;
pub mod diff;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod grid;
pub mod hermite;
pub mod interp;
pub mod model;
pub mod quantization;
pub mod reference;
pub mod transform;
pub mod validate;
pub mod wavepacket;

pub use error::{Error, Result};
pub use field::{DensityField, Field, PhaseField, PositionWavefunction, RealPhaseField};
pub use grid::{Grid, PhaseGrid, PositionGrid};
pub use model::{HamiltonianModel, PhasePoint};
pub use wavepacket::{GaugePhase, WavepacketFamily};
