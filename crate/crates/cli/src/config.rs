//! Run configuration: an optional TOML file with one section per module,
//! overridden field by field from the command line.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use phaseflow::dynamics::Gauge;
use phaseflow::hermite::Oscillator;
use phaseflow::interp::Stencil;
use phaseflow::{HamiltonianModel, PhaseGrid, PositionGrid, WavepacketFamily};

use crate::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub family: FamilySection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub propagation: PropagationSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: Option<String>,
    pub mass: Option<f64>,
    pub omega: Option<f64>,
    pub omega2: Option<f64>,
    pub lambda: Option<f64>,
    pub velocity: Option<Vec<f64>>,
    pub force: Option<Vec<f64>>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySection {
    pub sigma: Option<f64>,
    pub hbar: Option<f64>,
    pub gauge: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub xmin: Option<f64>,
    pub xmax: Option<f64>,
    pub nx: Option<usize>,
    pub qmin: Option<f64>,
    pub qmax: Option<f64>,
    pub nq: Option<usize>,
    pub pmin: Option<f64>,
    pub pmax: Option<f64>,
    pub np: Option<usize>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationSection {
    pub t: Option<f64>,
    pub dt: Option<f64>,
    pub stencil: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }
}

macro_rules! overlay {
    ($dst:expr, $src:expr, $($field:ident),+) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )+
    };
}

impl ModelSection {
    pub fn overlay(&mut self, o: &ModelSection) {
        overlay!(self, o, kind, mass, omega, omega2, lambda, velocity, force);
    }

    pub fn build(&self) -> Result<HamiltonianModel, CliError> {
        let mass = self.mass.unwrap_or(1.0);
        let omega = self.omega.unwrap_or(1.0);
        let kind = self.kind.as_deref().unwrap_or("harmonic");
        let model = match kind {
            "harmonic" => HamiltonianModel::harmonic(mass, omega),
            "free" => HamiltonianModel::free(mass),
            "quartic" => HamiltonianModel::quartic(mass, self.lambda.unwrap_or(1.0)),
            "anisotropic" => HamiltonianModel::anisotropic_2d(mass, omega, self.omega2.unwrap_or(2f64.sqrt())),
            "linear" => {
                let v = self.velocity.clone().unwrap_or_else(|| vec![1.0]);
                let f = self.force.clone().unwrap_or_else(|| vec![0.0; v.len()]);
                HamiltonianModel::linear(&v, &f)
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown model '{other}' (expected harmonic, free, quartic, anisotropic or linear)"
                )))
            }
        };
        Ok(model?)
    }

    /// Oscillator whose eigenstates serve as `n=` states and whose width sets the default `sigma`.
    pub fn oscillator(&self, hbar: f64) -> Result<Oscillator, CliError> {
        Ok(Oscillator::new(self.mass.unwrap_or(1.0), self.omega.unwrap_or(1.0), hbar)?)
    }
}

impl FamilySection {
    pub fn overlay(&mut self, o: &FamilySection) {
        overlay!(self, o, sigma, hbar, gauge);
    }

    pub fn hbar(&self) -> f64 {
        self.hbar.unwrap_or(1.0)
    }

    pub fn build(&self, model: &ModelSection) -> Result<WavepacketFamily, CliError> {
        let hbar = self.hbar();
        let sigma = match self.sigma {
            Some(s) => s,
            None => model.oscillator(hbar)?.coherent_sigma(),
        };
        Ok(WavepacketFamily::new(sigma, hbar)?)
    }

    pub fn gauge(&self) -> Result<Gauge, CliError> {
        match self.gauge.as_deref().unwrap_or("none") {
            "none" => Ok(Gauge::None),
            "energy" => Ok(Gauge::Energy),
            "kvn" => Ok(Gauge::Kvn),
            other => Err(CliError::Usage(format!("unknown gauge '{other}' (expected none, energy or kvn)"))),
        }
    }
}

impl GridSection {
    pub fn overlay(&mut self, o: &GridSection) {
        overlay!(self, o, xmin, xmax, nx, qmin, qmax, nq, pmin, pmax, np);
    }

    pub fn position(&self, dim: usize) -> Result<PositionGrid, CliError> {
        let axis = (self.xmin.unwrap_or(-12.0), self.xmax.unwrap_or(12.0), self.nx.unwrap_or(512));
        Ok(PositionGrid::new(&vec![axis; dim])?)
    }

    pub fn phase(&self, dim: usize) -> Result<PhaseGrid, CliError> {
        let q = (self.qmin.unwrap_or(-8.0), self.qmax.unwrap_or(8.0), self.nq.unwrap_or(129));
        let p = (self.pmin.unwrap_or(-8.0), self.pmax.unwrap_or(8.0), self.np.unwrap_or(129));
        Ok(PhaseGrid::new(&vec![q; dim], &vec![p; dim])?)
    }
}

impl PropagationSection {
    pub fn overlay(&mut self, o: &PropagationSection) {
        overlay!(self, o, t, dt, stencil);
    }

    pub fn stencil(&self) -> Result<Stencil, CliError> {
        match self.stencil.as_deref().unwrap_or("quintic") {
            "cubic" => Ok(Stencil::Cubic),
            "quintic" => Ok(Stencil::Quintic),
            other => Err(CliError::Usage(format!("unknown stencil '{other}' (expected cubic or quintic)"))),
        }
    }
}
