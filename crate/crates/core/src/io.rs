//! Run configuration and output file formats.
//!
//! Configuration files are flat `key = value` lines. Blank lines and lines
//! starting with `#` are ignored. Recognized keys:
//!
//! | key | type | default |
//! |---|---|---|
//! | `problem` | problem id | required |
//! | `k` | degree | 2 |
//! | `nx`, `ny` | cells | the problem's recommended mesh |
//! | `cfl` | number in (0, 1] | 0.45 |
//! | `t_end` | time | the problem's final time |
//! | `limiter.enabled` | `true`/`false` | the problem's setting |
//! | `limiter.c0` | positive number | the problem's setting |
//! | `gamma` | number > 1 | the problem's value |
//! | `output.dir` | path | `output` |
//! | `output.every_n_steps` | steps, 0 disables periodic output | 10 |
//! | `seed` | integer | 0 |
//! | `max_steps` | step cap | none |
//!
//! All numeric output uses 17 significant digits and `\n` line endings.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::diagnostics::DiagnosticsRow;
use crate::error::{Error, Result};
use crate::grid::{CellField, Mesh};
use crate::integrate::DEFAULT_CFL;
use crate::operators::SbpOperators;
use crate::state::{pressure, BX, BY, BZ};

pub const DEFAULT_DEGREE: usize = 2;
pub const DEFAULT_OUTPUT_EVERY: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub problem: String,
    pub k: usize,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub cfl: f64,
    pub t_end: Option<f64>,
    pub limiter_enabled: Option<bool>,
    pub limiter_c0: Option<f64>,
    pub gamma: Option<f64>,
    pub output_dir: PathBuf,
    pub output_every: usize,
    pub seed: u64,
    pub max_steps: Option<usize>,
}

impl Config {
    pub fn new(problem: &str) -> Self {
        Self {
            problem: problem.to_string(),
            k: DEFAULT_DEGREE,
            nx: None,
            ny: None,
            cfl: DEFAULT_CFL,
            t_end: None,
            limiter_enabled: None,
            limiter_c0: None,
            gamma: None,
            output_dir: PathBuf::from("output"),
            output_every: DEFAULT_OUTPUT_EVERY,
            seed: 0,
            max_steps: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::new("");
        let mut seen = HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Config(format!("line {}: {msg}", lineno + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(err(format!("duplicate key '{key}'")));
            }
            cfg.set(key, value).map_err(err)?;
        }
        if cfg.problem.is_empty() {
            return Err(Error::Config("missing required key 'problem'".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("cannot read {}: {e}", path.display()))))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> std::result::Result<T, String> {
            v.parse().map_err(|_| format!("invalid value '{v}' for '{key}'"))
        }
        match key {
            "problem" => self.problem = value.to_string(),
            "k" => self.k = num(key, value)?,
            "nx" => self.nx = Some(num(key, value)?),
            "ny" => self.ny = Some(num(key, value)?),
            "cfl" => self.cfl = num(key, value)?,
            "t_end" => self.t_end = Some(num(key, value)?),
            "limiter.enabled" => self.limiter_enabled = Some(num(key, value)?),
            "limiter.c0" => self.limiter_c0 = Some(num(key, value)?),
            "gamma" => self.gamma = Some(num(key, value)?),
            "output.dir" => self.output_dir = PathBuf::from(value),
            "output.every_n_steps" => self.output_every = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "max_steps" => self.max_steps = Some(num(key, value)?),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad(format!("cfl must lie in (0, 1], got {}", self.cfl));
        }
        if let Some(t) = self.t_end {
            if !(t >= 0.0 && t.is_finite()) {
                return bad(format!("t_end must be a finite non-negative number, got {t}"));
            }
        }
        if let Some(g) = self.gamma {
            if !(g > 1.0 && g.is_finite()) {
                return bad(format!("gamma must exceed 1, got {g}"));
            }
        }
        if let Some(c0) = self.limiter_c0 {
            if !(c0 > 0.0 && c0.is_finite()) {
                return bad(format!("limiter.c0 must be positive, got {c0}"));
            }
        }
        if self.nx == Some(0) || self.ny == Some(0) {
            return bad("nx and ny must be positive".into());
        }
        Ok(())
    }
}

pub fn write_diagnostics_csv<W: Write>(mut w: W, rows: &[DiagnosticsRow]) -> Result<()> {
    writeln!(w, "{}", DiagnosticsRow::HEADER)?;
    for row in rows {
        writeln!(w, "{}", row.csv_line())?;
    }
    Ok(())
}

/// Names of the point-data arrays in snapshot files.
pub const SNAPSHOT_FIELDS: [&str; 10] = ["rho", "mx", "my", "mz", "E", "Bx", "By", "Bz", "p", "Bmag"];

/// Nodal snapshot on the global Gauss-Lobatto node cloud, with `x` varying fastest.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub dims: (usize, usize),
    pub points: Vec<[f64; 2]>,
    pub values: Vec<[f64; 10]>,
}

impl Snapshot {
    pub fn new(field: &CellField, mesh: &Mesh, ops: &SbpOperators, gamma: f64) -> Self {
        let np = field.np;
        let dims = (mesh.nx * np, mesh.ny * np);
        let mut points = Vec::with_capacity(dims.0 * dims.1);
        let mut values = Vec::with_capacity(dims.0 * dims.1);
        for gj in 0..dims.1 {
            let (j, j1) = (gj / np, gj % np);
            for gi in 0..dims.0 {
                let (i, i1) = (gi / np, gi % np);
                points.push([mesh.node_x(ops, i as isize, i1), mesh.node_y(ops, j as isize, j1)]);
                let u = field.node(i, j, i1, j1);
                let mut v = [0.0; 10];
                v[..8].copy_from_slice(&u.0);
                v[8] = pressure(u, gamma);
                v[9] = (u[BX] * u[BX] + u[BY] * u[BY] + u[BZ] * u[BZ]).sqrt();
                values.push(v);
            }
        }
        Self { dims, points, values }
    }

    /// Legacy ASCII structured-grid file with one scalar array per field.
    pub fn write_vtk<W: Write>(&self, mut w: W, title: &str) -> Result<()> {
        let n = self.points.len();
        writeln!(w, "# vtk DataFile Version 3.0")?;
        writeln!(w, "{}", title.replace('\n', " "))?;
        writeln!(w, "ASCII")?;
        writeln!(w, "DATASET STRUCTURED_GRID")?;
        writeln!(w, "DIMENSIONS {} {} 1", self.dims.0, self.dims.1)?;
        writeln!(w, "POINTS {n} double")?;
        for p in &self.points {
            writeln!(w, "{:.16e} {:.16e} {:.16e}", p[0], p[1], 0.0)?;
        }
        writeln!(w, "POINT_DATA {n}")?;
        for (c, name) in SNAPSHOT_FIELDS.iter().enumerate() {
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for v in &self.values {
                writeln!(w, "{:.16e}", v[c])?;
            }
        }
        Ok(())
    }

    /// Plain CSV with columns `x, y` followed by the snapshot fields.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,{}", SNAPSHOT_FIELDS.join(","))?;
        for (p, v) in self.points.iter().zip(&self.values) {
            write!(w, "{:.16e},{:.16e}", p[0], p[1])?;
            for x in v {
                write!(w, ",{x:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// L2 errors of density, x-momentum, `B_x` and energy on an `n x n` mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub errors: [f64; 4],
}

pub const CONVERGENCE_HEADER: &str = "N,err_rho,ord_rho,err_mx,ord_mx,err_Bx,ord_Bx,err_E,ord_E";

/// Observed orders between consecutive rows; the first row has none.
pub fn convergence_orders(rows: &[ConvergenceRow]) -> Vec<[Option<f64>; 4]> {
    let mut out = vec![[None; 4]; rows.len()];
    for r in 1..rows.len() {
        let ratio = (rows[r].n as f64 / rows[r - 1].n as f64).ln();
        for c in 0..4 {
            out[r][c] = Some((rows[r - 1].errors[c] / rows[r].errors[c]).ln() / ratio);
        }
    }
    out
}

/// Convergence table; missing orders are written as `-`.
pub fn write_convergence_csv<W: Write>(mut w: W, rows: &[ConvergenceRow]) -> Result<()> {
    writeln!(w, "{CONVERGENCE_HEADER}")?;
    for (row, ord) in rows.iter().zip(convergence_orders(rows)) {
        write!(w, "{}", row.n)?;
        for c in 0..4 {
            write!(w, ",{:.16e}", row.errors[c])?;
            match ord[c] {
                Some(o) => write!(w, ",{o:.16e}")?,
                None => write!(w, ",-")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}
