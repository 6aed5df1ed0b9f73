//! One function per subcommand.

use num_complex::Complex64;
use phaseflow::classical::FlowConfig;
use phaseflow::dynamics::se_evolve;
use phaseflow::hermite::ho_eigen_eta;
use phaseflow::quantization::{bohr_sommerfeld_levels, OrbitConfig};
use phaseflow::reference::eigensolve;
use phaseflow::transform::{kernel, lift, project, suppression_profile, suppression_timescale, SuppressionOptions};
use phaseflow::validate::{run_suite, Suite};
use phaseflow::{HamiltonianModel, PhaseField, PhasePoint, PositionGrid, PositionWavefunction};

use crate::output::{num, phase_rows, read_phase_dump, Sink};
use crate::{CliError, Command, RunConfig};

/// Relative energy drift allowed along characteristics.
const ENERGY_TOL: f64 = 1e-8;

pub fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<(), CliError> {
    let mut sink = Sink::new(&cfg.out, cfg.timestamp)?;
    match cmd {
        Command::Lift { state } => cmd_lift(cfg, &mut sink, state),
        Command::Project { input, state } => cmd_project(cfg, &mut sink, input.as_deref(), state),
        Command::Evolve { state } => cmd_evolve(cfg, &mut sink, state),
        Command::Quantize { nmax, compare_exact } => cmd_quantize(cfg, &mut sink, *nmax, *compare_exact),
        Command::Kernel { z, zp } => cmd_kernel(cfg, &mut sink, z, zp),
        Command::Suppression { probe } => cmd_suppression(cfg, &mut sink, probe),
        Command::Validate { suite } => cmd_validate(cfg, &mut sink, suite),
    }
}

enum State {
    Eigen(usize),
    Coherent(f64, f64),
}

fn parse_state(s: &str) -> Result<State, CliError> {
    let bad = || CliError::Usage(format!("state '{s}' must be n=K or coherent=q,p"));
    let (key, value) = s.split_once('=').ok_or_else(bad)?;
    match key.trim() {
        "n" => value.trim().parse().map(State::Eigen).map_err(|_| bad()),
        "coherent" => {
            let parts: Vec<f64> = value.split(',').map(|v| v.trim().parse()).collect::<Result<_, _>>().map_err(|_| bad())?;
            match parts[..] {
                [q, p] => Ok(State::Coherent(q, p)),
                _ => Err(bad()),
            }
        }
        _ => Err(bad()),
    }
}

fn one_dimensional(model: &HamiltonianModel, what: &str) -> Result<(), CliError> {
    if model.dim() != 1 {
        return Err(CliError::Usage(format!("{what} supports one-dimensional models only, got {}", model.name())));
    }
    Ok(())
}

fn eigen_only(state: State) -> Result<usize, CliError> {
    match state {
        State::Eigen(n) => Ok(n),
        State::Coherent(..) => Err(CliError::Usage("this command takes an eigenstate, n=K".into())),
    }
}

fn cmd_lift(cfg: &RunConfig, sink: &mut Sink, state: &str) -> Result<(), CliError> {
    let model = cfg.model.build()?;
    one_dimensional(&model, "lift")?;
    let family = cfg.family.build(&cfg.model)?;
    let xgrid = cfg.grid.position(1)?;
    let psi = match parse_state(state)? {
        State::Eigen(n) => cfg.model.oscillator(cfg.family.hbar())?.eigenstate(n, &xgrid)?,
        State::Coherent(q, p) => family.make_wavepacket(&PhasePoint::new_1d(q, p), &xgrid)?,
    };
    let eta = lift(&psi, &family, &cfg.grid.phase(1)?)?;
    write_phase(sink, "eta", &eta)?;
    println!("lifted {state}: phase norm {}", num(eta.phase_norm_sqr(family.hbar())));
    Ok(())
}

fn write_phase(sink: &mut Sink, stem: &str, eta: &PhaseField) -> Result<(), CliError> {
    sink.dump(&format!("{stem}.bin"), eta.lattice(), eta.values())?;
    let (header, rows) = phase_rows(eta);
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    sink.csv(&format!("{stem}.csv"), &header, rows)
}

fn position_rows(psi: &PositionWavefunction) -> Vec<Vec<String>> {
    let lat = psi.lattice();
    let mut x = vec![0.0; lat.rank()];
    psi.values()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            lat.point(k, &mut x);
            let mut row: Vec<String> = x.iter().map(|&c| num(c)).collect();
            row.push(num(v.re));
            row.push(num(v.im));
            row
        })
        .collect()
}

fn cmd_project(cfg: &RunConfig, sink: &mut Sink, input: Option<&std::path::Path>, state: &str) -> Result<(), CliError> {
    let family = cfg.family.build(&cfg.model)?;
    let eta = match input {
        Some(path) => read_phase_dump(path)?,
        None => {
            let model = cfg.model.build()?;
            one_dimensional(&model, "project")?;
            let n = eigen_only(parse_state(state)?)?;
            ho_eigen_eta(n, &cfg.model.oscillator(cfg.family.hbar())?, &cfg.grid.phase(1)?)?
        }
    };
    let dim = eta.grid().dim();
    let xgrid = cfg.grid.position(dim)?;
    let psi = project(&eta, &family, &xgrid)?;
    let header: Vec<&str> = match dim {
        1 => vec!["x", "re", "im"],
        _ => vec!["x1", "x2", "re", "im"],
    };
    sink.csv("psi.csv", &header, position_rows(&psi))?;
    println!("projected onto {} points: norm {}", psi.values().len(), num(psi.mass()));
    Ok(())
}

fn cmd_evolve(cfg: &RunConfig, sink: &mut Sink, state: &str) -> Result<(), CliError> {
    let model = cfg.model.build()?;
    one_dimensional(&model, "evolve")?;
    let n = eigen_only(parse_state(state)?)?;
    let hbar = cfg.family.hbar();
    let eta0 = ho_eigen_eta(n, &cfg.model.oscillator(hbar)?, &cfg.grid.phase(1)?)?;
    let t = cfg.propagation.t.unwrap_or(2.0 * std::f64::consts::PI);
    let flow = FlowConfig::new(cfg.propagation.dt.unwrap_or(1e-3), ENERGY_TOL)?.with_stencil(cfg.propagation.stencil()?);
    let eta = se_evolve(&eta0, &model, hbar, t, &flow, cfg.family.gauge()?)?;
    let rel = eta.l2_distance(&eta0)? / eta0.l2();
    write_phase(sink, "eta_final", &eta)?;
    sink.csv(
        "summary.csv",
        &["state", "t", "dt", "rel_l2_difference"],
        [vec![n.to_string(), num(t), num(flow.dt), num(rel)]],
    )?;
    println!("relative L2 difference between final and initial field: {}", num(rel));
    Ok(())
}

/// Exact levels of one degree of freedom from the reference eigensolver.
fn exact_levels(model: &HamiltonianModel, xgrid: &PositionGrid, count: usize, hbar: f64) -> Result<Vec<f64>, CliError> {
    Ok(eigensolve(model, xgrid, count, hbar)?.into_iter().map(|p| p.energy).collect())
}

fn cmd_quantize(cfg: &RunConfig, sink: &mut Sink, nmax: usize, compare: bool) -> Result<(), CliError> {
    let model = cfg.model.build()?;
    let hbar = cfg.family.hbar();
    let mut spectrum = bohr_sommerfeld_levels(&model, nmax, hbar, &OrbitConfig::default())?;
    if compare {
        let xgrid = cfg.grid.position(1)?;
        let per_dof = match model {
            HamiltonianModel::Anisotropic2d { mass, omega } => omega
                .iter()
                .map(|&w| exact_levels(&HamiltonianModel::harmonic(mass, w)?, &xgrid, nmax + 1, hbar))
                .collect::<Result<Vec<_>, _>>()?,
            _ => vec![exact_levels(&model, &xgrid, nmax + 1, hbar)?],
        };
        let exact: Vec<f64> = spectrum
            .levels
            .iter()
            .map(|l| l.quanta.iter().zip(&per_dof).map(|(&n, e)| e[n]).sum())
            .collect();
        spectrum.attach_exact(&exact);
    }
    let dim = model.dim();
    let mut header: Vec<&str> = if dim == 1 { vec!["n"] } else { vec!["n1", "n2"] };
    header.push("E_semiclassical");
    if compare {
        header.extend(["E_exact", "rel_error"]);
    }
    let rows = spectrum.levels.iter().map(|l| {
        let mut row: Vec<String> = l.quanta.iter().map(|n| n.to_string()).collect();
        row.push(num(l.energy));
        if compare {
            row.push(num(l.exact.unwrap_or(f64::NAN)));
            row.push(num(l.rel_error.unwrap_or(f64::NAN)));
        }
        row
    });
    sink.csv("levels.csv", &header, rows)?;
    println!("{} levels of {} written to levels.csv", spectrum.levels.len(), model.name());
    Ok(())
}

fn phase_point(v: &[f64], flag: &str) -> Result<PhasePoint, CliError> {
    match *v {
        [q, p] => Ok(PhasePoint::new_1d(q, p)),
        [q1, q2, p1, p2] => Ok(PhasePoint::new_2d([q1, q2], [p1, p2])),
        _ => Err(CliError::Usage(format!("--{flag} takes q,p or q1,q2,p1,p2, got {} values", v.len()))),
    }
}

fn cmd_kernel(cfg: &RunConfig, sink: &mut Sink, z: &[f64], zp: &[f64]) -> Result<(), CliError> {
    let family = cfg.family.build(&cfg.model)?;
    if z.len() != zp.len() {
        return Err(CliError::Usage("--z and --zp must have the same dimension".into()));
    }
    let (a, b) = (phase_point(z, "z")?, phase_point(zp, "zp")?);
    let k: Complex64 = kernel(&family, &a, &b, z.len() / 2);
    sink.csv(
        "kernel.csv",
        &["re", "im", "abs"],
        [vec![num(k.re), num(k.im), num(k.norm())]],
    )?;
    println!("K = {} + {} i", num(k.re), num(k.im));
    Ok(())
}

fn cmd_suppression(cfg: &RunConfig, sink: &mut Sink, probe: &[f64]) -> Result<(), CliError> {
    let model = cfg.model.build()?;
    one_dimensional(&model, "suppression")?;
    let family = cfg.family.build(&cfg.model)?;
    let z = phase_point(probe, "probe")?;
    let t = suppression_timescale(&model, &family, &z)?;
    let offsets: Vec<f64> = (-8..=8).map(|k| k as f64 * 0.25 / t).collect();
    let curve = suppression_profile(&model, &family, &z, &offsets, &SuppressionOptions::default())?;
    let rows = curve.offsets.iter().zip(&curve.ratios).map(|(o, r)| vec![num(*o), num(*r)]);
    sink.csv("suppression.csv", &["offset", "ratio"], rows)?;
    println!(
        "fitted T {}; analytic T {}; chirp-corrected T {}",
        curve.fitted_t.map_or("none".to_string(), num),
        num(curve.analytic_t),
        num(curve.corrected_t)
    );
    Ok(())
}

fn cmd_validate(cfg: &RunConfig, sink: &mut Sink, suite: &str) -> Result<(), CliError> {
    let suites = Suite::parse(suite).ok_or_else(|| CliError::Usage(format!("unknown suite '{suite}'")))?;
    let mut outcomes = Vec::new();
    for s in suites {
        for o in run_suite(s, cfg.seed) {
            println!("{o}");
            outcomes.push(o);
        }
    }
    let rows = outcomes.iter().map(|o| {
        vec![
            o.suite.to_string(),
            o.name.to_string(),
            num(o.value),
            num(o.tolerance),
            o.passed.to_string(),
            o.error.clone().unwrap_or_default(),
        ]
    });
    sink.csv("validate.csv", &["suite", "check", "value", "tolerance", "passed", "error"], rows)?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(CliError::Failed(format!("{failed} of {} checks failed", outcomes.len())));
    }
    Ok(())
}
