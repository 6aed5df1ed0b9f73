mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{FamilySection, FileConfig, GridSection, ModelSection, PropagationSection};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(phaseflow::Error),
    Io(String),
    /// A command ran to completion but reported failed checks.
    Failed(String),
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "UsageError",
            CliError::Domain(e) => e.code(),
            CliError::Io(_) => "IoError",
            CliError::Failed(_) => "ChecksFailed",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Failed(m) => write!(f, "error[{}]: {m}", self.code()),
            CliError::Domain(e) => write!(f, "error[{}]: {e}", self.code()),
        }
    }
}

impl From<phaseflow::Error> for CliError {
    fn from(e: phaseflow::Error) -> Self {
        CliError::Domain(e)
    }
}

#[derive(Parser, Debug)]
#[command(name = "phaseflow", version, about = "Phase-space amplitudes, transport and semiclassical spectra")]
pub struct Cli {
    /// TOML file with [model], [family], [grid], [propagation] and [output] sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default: the config's output.dir, else the working directory).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Omit the generation-time comment from CSV files.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(flatten)]
    pub opts: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags that override the config file.
#[derive(Args, Debug, Default)]
pub struct Overrides {
    /// harmonic, free, quartic, anisotropic or linear.
    #[arg(long, global = true)]
    pub model: Option<String>,
    #[arg(long, global = true)]
    pub mass: Option<f64>,
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Second frequency of the anisotropic model.
    #[arg(long, global = true)]
    pub omega2: Option<f64>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub velocity: Option<Vec<f64>>,
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub force: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    pub hbar: Option<f64>,
    /// none, energy or kvn.
    #[arg(long, global = true)]
    pub gauge: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub xmin: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub xmax: Option<f64>,
    #[arg(long, global = true)]
    pub nx: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub qmin: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub qmax: Option<f64>,
    #[arg(long, global = true)]
    pub nq: Option<usize>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub pmin: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub pmax: Option<f64>,
    #[arg(long, global = true)]
    pub np: Option<usize>,
    #[arg(long, global = true)]
    pub t: Option<f64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// cubic or quintic.
    #[arg(long, global = true)]
    pub stencil: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Lift a position state to phase space; writes eta.bin and eta.csv.
    Lift {
        /// `n=K` (oscillator eigenstate) or `coherent=q,p`.
        #[arg(long, default_value = "n=0", allow_hyphen_values = true)]
        state: String,
    },
    /// Project a phase-space amplitude back to position space; writes psi.csv.
    Project {
        /// Phase-field dump to project; without it the analytic `--state` amplitude is used.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "n=0")]
        state: String,
    },
    /// Transport an oscillator eigen-amplitude; writes eta_final.bin, eta_final.csv and summary.csv.
    Evolve {
        #[arg(long, default_value = "n=0")]
        state: String,
    },
    /// Semiclassical levels; writes levels.csv.
    Quantize {
        #[arg(long, default_value_t = 10)]
        nmax: usize,
        /// Add exact levels from the reference eigensolver.
        #[arg(long)]
        compare_exact: bool,
    },
    /// Evaluate the reproducing kernel K(z, z'); writes kernel.csv.
    Kernel {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        z: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        zp: Vec<f64>,
    },
    /// Off-shell suppression profile at a probe point; writes suppression.csv.
    Suppression {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "1,0")]
        probe: Vec<f64>,
    },
    /// Run invariant suites; writes validate.csv and fails if any check fails.
    Validate {
        /// phase-core, transform, classical, se-dynamics, quantization, reference or all.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

/// Fully merged configuration, validated before any command runs.
pub struct RunConfig {
    pub model: ModelSection,
    pub family: FamilySection,
    pub grid: GridSection,
    pub propagation: PropagationSection,
    pub out: PathBuf,
    pub seed: u64,
    pub timestamp: bool,
}

impl RunConfig {
    pub fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let file = match &cli.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let o = &cli.opts;
        let mut model = file.model;
        model.overlay(&ModelSection {
            kind: o.model.clone(),
            mass: o.mass,
            omega: o.omega,
            omega2: o.omega2,
            lambda: o.lambda,
            velocity: o.velocity.clone(),
            force: o.force.clone(),
        });
        let mut family = file.family;
        family.overlay(&FamilySection {
            sigma: o.sigma,
            hbar: o.hbar,
            gauge: o.gauge.clone(),
        });
        let mut grid = file.grid;
        grid.overlay(&GridSection {
            xmin: o.xmin,
            xmax: o.xmax,
            nx: o.nx,
            qmin: o.qmin,
            qmax: o.qmax,
            nq: o.nq,
            pmin: o.pmin,
            pmax: o.pmax,
            np: o.np,
        });
        let mut propagation = file.propagation;
        propagation.overlay(&PropagationSection {
            t: o.t,
            dt: o.dt,
            stencil: o.stencil.clone(),
        });
        let out = cli.out.clone().or(file.output.dir).unwrap_or_else(|| PathBuf::from("."));
        let cfg = Self {
            model,
            family,
            grid,
            propagation,
            out,
            seed: cli.seed,
            timestamp: !cli.no_timestamp,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// Builds every configured object once so bad parameters fail up front.
    fn check(&self) -> Result<(), CliError> {
        let model = self.model.build()?;
        self.family.build(&self.model)?;
        self.family.gauge()?;
        self.propagation.stencil()?;
        self.grid.position(model.dim())?;
        self.grid.phase(model.dim())?;
        for (name, v) in [("t", self.propagation.t), ("dt", self.propagation.dt)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::Usage(format!("--{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("PHASEFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("PHASEFLOW_THREADS must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Io(format!("cannot start thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let cfg = RunConfig::resolve(&cli)?;
    commands::dispatch(&cli.command, &cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
