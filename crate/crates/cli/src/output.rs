//! CSV tables and the binary grid dump.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use phaseflow::grid::Lattice;
use phaseflow::{Grid, PhaseField, PhaseGrid};

use crate::CliError;

pub const MAGIC: &[u8; 8] = b"PHFLD\0\0\x01";

/// 17 significant digits in scientific notation.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct Sink {
    dir: PathBuf,
    timestamp: bool,
    pub written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: &Path, timestamp: bool) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            timestamp,
            written: Vec::new(),
        })
    }

    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(BufWriter::new(file))
    }

    /// Writes a header row and records, preceded by a timestamp comment unless disabled.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        let mut out = self.create(name)?;
        if self.timestamp {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            writeln!(out, "# generated at unix time {secs}").map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header).map_err(io)?;
        for row in rows {
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }

    pub fn dump(&mut self, name: &str, lattice: &Lattice, values: &[Complex64]) -> Result<(), CliError> {
        let mut out = self.create(name)?;
        write_dump(&mut out, lattice, values).map_err(io)?;
        out.flush().map_err(io)
    }
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

/// Magic, `u32` rank, `u32` count per axis, `(f64 min, f64 max)` per axis,
/// then row-major `(f64 re, f64 im)` pairs, all little-endian.
pub fn write_dump(out: &mut impl Write, lattice: &Lattice, values: &[Complex64]) -> std::io::Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&(lattice.rank() as u32).to_le_bytes())?;
    for a in lattice.axes() {
        out.write_all(&(a.len() as u32).to_le_bytes())?;
    }
    for a in lattice.axes() {
        out.write_all(&a.min().to_le_bytes())?;
        out.write_all(&a.max().to_le_bytes())?;
    }
    for v in values {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

/// Reads a phase-space dump (even rank, positions before momenta).
pub fn read_phase_dump(path: &Path) -> Result<PhaseField, CliError> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    let bad = |why: &str| CliError::Usage(format!("{} is not a phase-field dump: {why}", path.display()));
    let mut at = 0usize;
    let mut take = |n: usize| -> Result<&[u8], CliError> {
        let s = bytes.get(at..at + n).ok_or_else(|| bad("truncated"))?;
        at += n;
        Ok(s)
    };
    if take(8)? != MAGIC {
        return Err(bad("wrong magic"));
    }
    let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().unwrap()) as usize;
    let f64_at = |s: &[u8]| f64::from_le_bytes(s.try_into().unwrap());
    let rank = u32_at(take(4)?);
    if rank == 0 || rank % 2 != 0 || rank > 4 {
        return Err(bad("rank must be 2 or 4"));
    }
    let counts = (0..rank).map(|_| take(4).map(u32_at)).collect::<Result<Vec<_>, _>>()?;
    let mut extents = Vec::with_capacity(rank);
    for _ in 0..rank {
        let lo = f64_at(take(8)?);
        let hi = f64_at(take(8)?);
        extents.push((lo, hi));
    }
    let len: usize = counts.iter().product();
    let mut values = Vec::with_capacity(len);
    for _ in 0..len {
        let re = f64_at(take(8)?);
        let im = f64_at(take(8)?);
        values.push(Complex64::new(re, im));
    }
    let d = rank / 2;
    let axes: Vec<(f64, f64, usize)> = (0..rank).map(|k| (extents[k].0, extents[k].1, counts[k])).collect();
    let grid = PhaseGrid::new(&axes[..d], &axes[d..])?;
    Ok(PhaseField::new(grid, values, 0.0)?)
}

/// One row per phase-grid point: coordinates, then real and imaginary parts.
pub fn phase_rows(eta: &PhaseField) -> (Vec<String>, Vec<Vec<String>>) {
    let g = eta.grid();
    let d = g.dim();
    let mut header: Vec<String> = Vec::new();
    for i in 0..d {
        header.push(if d == 1 { "q".into() } else { format!("q{}", i + 1) });
    }
    for i in 0..d {
        header.push(if d == 1 { "p".into() } else { format!("p{}", i + 1) });
    }
    header.extend(["re".to_string(), "im".to_string()]);
    let rows = (0..g.lattice().len())
        .map(|k| {
            let z = g.phase_point(k);
            let mut row: Vec<String> = z.q[..d].iter().chain(&z.p[..d]).map(|&v| num(v)).collect();
            row.push(num(eta.values()[k].re));
            row.push(num(eta.values()[k].im));
            row
        })
        .collect();
    (header, rows)
}
