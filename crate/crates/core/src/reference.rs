//! One-dimensional reference solution for the rotated shock tube.
//!
//! The tube is solved along its normal coordinate `s = (2x + y - 1) / sqrt(5)`
//! with a first-order Rusanov finite-volume scheme at high resolution.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::problems::{brio_wu_t_end, BRIO_WU_GAMMA};
use crate::state::{cons_to_prim, fast_speed, physical_flux, prim_to_cons, ConsState, Primitive, BX};

/// Default reference resolution.
pub const REFERENCE_CELLS: usize = 10_000;
/// Half-width of the normal-coordinate interval covered by the reference.
pub const REFERENCE_HALF_WIDTH: f64 = 0.6;

const CFL: f64 = 0.5;
const NORMAL_FIELD: f64 = 0.75;
const CSV_HEADER: &str = "s,rho,un,ut,uz,bn,bt,bz,p";

/// Cell averages of the 1D tube in its own frame: index 0 of `u` and `b` is the
/// normal component, index 1 the tangential one.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceProfile {
    pub s_min: f64,
    pub ds: f64,
    pub time: f64,
    pub cells: Vec<Primitive>,
}

fn tube_states() -> (Primitive, Primitive) {
    (
        Primitive::new(1.0, [0.0; 3], 1.0, [NORMAL_FIELD, 1.0, 0.0]),
        Primitive::new(0.125, [0.0; 3], 0.1, [NORMAL_FIELD, -1.0, 0.0]),
    )
}

fn rusanov(ul: &ConsState, ur: &ConsState, gamma: f64) -> Result<(ConsState, f64)> {
    let (wl, wr) = (cons_to_prim(ul, gamma)?, cons_to_prim(ur, gamma)?);
    let a = (wl.u[0].abs() + fast_speed(&wl, gamma, 0)?).max(wr.u[0].abs() + fast_speed(&wr, gamma, 0)?);
    let (fl, fr) = (physical_flux(ul, gamma, 0)?, physical_flux(ur, gamma, 0)?);
    let mut f = [0.0; 8];
    for c in 0..8 {
        f[c] = 0.5 * (fl[c] + fr[c]) - 0.5 * a * (ur[c] - ul[c]);
    }
    f[BX] = 0.0;
    Ok((ConsState(f), a))
}

/// Solves the tube on `cells` cells of `[-0.6, 0.6]` up to time `t`.
pub fn brio_wu_tube(cells: usize, t: f64) -> Result<ReferenceProfile> {
    if cells < 2 {
        return Err(Error::Config(format!("reference needs at least 2 cells, got {cells}")));
    }
    if t.is_nan() || t < 0.0 {
        return Err(Error::Config(format!("reference time must be non-negative, got {t}")));
    }
    let gamma = BRIO_WU_GAMMA;
    let s_min = -REFERENCE_HALF_WIDTH;
    let ds = 2.0 * REFERENCE_HALF_WIDTH / cells as f64;
    let (wl, wr) = tube_states();
    let (ul, ur) = (prim_to_cons(&wl, gamma), prim_to_cons(&wr, gamma));
    let mut u: Vec<ConsState> = (0..cells)
        .map(|i| if s_min + (i as f64 + 0.5) * ds < 0.0 { ul } else { ur })
        .collect();
    let mut fluxes = vec![ConsState([0.0; 8]); cells + 1];
    let mut time = 0.0;
    while time < t {
        let mut amax = 0.0f64;
        for i in 0..=cells {
            let left = u[i.saturating_sub(1)];
            let right = u[i.min(cells - 1)];
            let (f, a) = rusanov(&left, &right, gamma)?;
            fluxes[i] = f;
            amax = amax.max(a);
        }
        let dt = (CFL * ds / amax).min(t - time);
        let r = dt / ds;
        for (i, cell) in u.iter_mut().enumerate() {
            for c in 0..8 {
                cell[c] -= r * (fluxes[i + 1][c] - fluxes[i][c]);
            }
        }
        time += dt;
    }
    let cells = u.iter().map(|c| cons_to_prim(c, gamma)).collect::<Result<Vec<_>>>()?;
    Ok(ReferenceProfile { s_min, ds, time: t, cells })
}

/// Reference at the final time of the rotated shock tube.
pub fn brio_wu_reference(cells: usize) -> Result<ReferenceProfile> {
    brio_wu_tube(cells, brio_wu_t_end())
}

/// Loads the reference from `path` when it matches `cells`, otherwise computes and stores it.
pub fn cached_reference(path: &Path, cells: usize) -> Result<ReferenceProfile> {
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        if let Ok(profile) = ReferenceProfile::from_csv(&text) {
            if profile.cells.len() == cells && profile.time == brio_wu_t_end() {
                return Ok(profile);
            }
        }
    }
    let profile = brio_wu_reference(cells)?;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, profile.to_csv())?;
    Ok(profile)
}

/// Normal coordinate of the point `(x, y)` relative to the initial discontinuity.
pub fn normal_coordinate(x: f64, y: f64) -> f64 {
    (2.0 * x + y - 1.0) / 5f64.sqrt()
}

fn to_plane(v: [f64; 3]) -> [f64; 3] {
    let s5 = 5f64.sqrt();
    [(2.0 * v[0] - v[1]) / s5, (v[0] + 2.0 * v[1]) / s5, v[2]]
}

impl ReferenceProfile {
    /// Cell value containing the normal coordinate `s`, in the tube frame.
    pub fn sample(&self, s: f64) -> Primitive {
        let i = ((s - self.s_min) / self.ds).floor();
        let i = i.clamp(0.0, (self.cells.len() - 1) as f64) as usize;
        self.cells[i]
    }

    /// Value at the plane point `(x, y)`, with vectors rotated to the `x, y` frame.
    pub fn at_point(&self, x: f64, y: f64) -> Primitive {
        let w = self.sample(normal_coordinate(x, y));
        Primitive::new(w.rho, to_plane(w.u), w.p, to_plane(w.b))
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        self.s_min + (i as f64 + 0.5) * self.ds
    }

    /// L1 distance of `quantity` to `other`, relative to the L1 norm of `other`,
    /// integrated on the finer of the two grids.
    pub fn relative_l1(&self, other: &ReferenceProfile, quantity: fn(&Primitive) -> f64) -> f64 {
        let (fine, coarse) = if self.ds <= other.ds { (self, other) } else { (other, self) };
        let (mut diff, mut norm) = (0.0, 0.0);
        for (i, w) in fine.cells.iter().enumerate() {
            let v = quantity(&coarse.sample(fine.cell_center(i)));
            diff += (quantity(w) - v).abs();
            norm += quantity(&other.sample(fine.cell_center(i))).abs();
        }
        diff / norm
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# cells={} time={:.16e}\n{CSV_HEADER}\n", self.cells.len(), self.time);
        for (i, w) in self.cells.iter().enumerate() {
            let vals = [self.cell_center(i), w.rho, w.u[0], w.u[1], w.u[2], w.b[0], w.b[1], w.b[2], w.p];
            let line: Vec<String> = vals.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Config(format!("malformed reference file: {msg}"));
        let mut lines = text.lines();
        let meta = lines.next().ok_or_else(|| bad("empty"))?;
        let time = meta
            .split_whitespace()
            .find_map(|tok| tok.strip_prefix("time="))
            .ok_or_else(|| bad("missing time"))?
            .parse::<f64>()
            .map_err(|_| bad("bad time"))?;
        if lines.next() != Some(CSV_HEADER) {
            return Err(bad("unexpected header"));
        }
        let mut centers = Vec::new();
        let mut cells = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let v: Vec<f64> = line
                .split(',')
                .map(|t| t.parse::<f64>().map_err(|_| bad("bad number")))
                .collect::<Result<_>>()?;
            if v.len() != 9 {
                return Err(bad("wrong column count"));
            }
            centers.push(v[0]);
            cells.push(Primitive::new(v[1], [v[2], v[3], v[4]], v[8], [v[5], v[6], v[7]]));
        }
        if cells.len() < 2 {
            return Err(bad("too few cells"));
        }
        let ds = centers[1] - centers[0];
        Ok(Self { s_min: centers[0] - 0.5 * ds, ds, time, cells })
    }
}
