//! Uniform Cartesian mesh, nodal cell storage, modal edge storage and ghost cells.

use crate::error::{Error, Location, Result};
use crate::operators::{gauss_legendre, legendre_eval, SbpOperators};
use crate::state::{cons_to_prim, ConsState, BX, BY, MX, MY};
use std::fmt;
use std::sync::Arc;

/// Pointwise state used for Dirichlet ghost cells.
pub type Profile = Arc<dyn Fn(f64, f64) -> ConsState + Send + Sync>;

#[derive(Clone)]
pub enum BoundaryKind {
    Periodic,
    Dirichlet(Profile),
    Reflective,
    /// Periodic in y with an x-translation: leaving through the top re-enters
    /// through the bottom `shift` cells to the right, and vice versa.
    ShiftedPeriodic { shift: i64 },
}

impl fmt::Debug for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryKind::Periodic => write!(f, "Periodic"),
            BoundaryKind::Dirichlet(_) => write!(f, "Dirichlet(..)"),
            BoundaryKind::Reflective => write!(f, "Reflective"),
            BoundaryKind::ShiftedPeriodic { shift } => write!(f, "ShiftedPeriodic({shift})"),
        }
    }
}

impl BoundaryKind {
    fn is_periodic(&self) -> bool {
        matches!(self, BoundaryKind::Periodic | BoundaryKind::ShiftedPeriodic { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Boundaries {
    pub left: BoundaryKind,
    pub right: BoundaryKind,
    pub bottom: BoundaryKind,
    pub top: BoundaryKind,
}

impl Boundaries {
    pub fn periodic() -> Self {
        Self {
            left: BoundaryKind::Periodic,
            right: BoundaryKind::Periodic,
            bottom: BoundaryKind::Periodic,
            top: BoundaryKind::Periodic,
        }
    }

    pub fn is_fully_periodic(&self) -> bool {
        matches!(self.left, BoundaryKind::Periodic)
            && matches!(self.bottom, BoundaryKind::Periodic)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub dx: f64,
    pub dy: f64,
    pub bc: Boundaries,
}

impl Mesh {
    pub fn new(nx: usize, ny: usize, xr: [f64; 2], yr: [f64; 2], bc: Boundaries) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidMesh(format!("cell counts must be positive, got {nx}x{ny}")));
        }
        if !(xr[1] > xr[0] && yr[1] > yr[0]) {
            return Err(Error::InvalidMesh(format!("empty domain {xr:?} x {yr:?}")));
        }
        match (&bc.left, &bc.right) {
            (BoundaryKind::ShiftedPeriodic { .. }, _) | (_, BoundaryKind::ShiftedPeriodic { .. }) => {
                return Err(Error::InvalidMesh(
                    "shifted-periodic boundaries are supported only at bottom/top".into(),
                ))
            }
            (l, r) if l.is_periodic() != r.is_periodic() => {
                return Err(Error::InvalidMesh("left/right periodicity must match".into()))
            }
            _ => {}
        }
        match (&bc.bottom, &bc.top) {
            (BoundaryKind::Periodic, BoundaryKind::Periodic) => {}
            (BoundaryKind::ShiftedPeriodic { shift: a }, BoundaryKind::ShiftedPeriodic { shift: b })
                if a == b => {}
            (b, t) if b.is_periodic() || t.is_periodic() => {
                return Err(Error::InvalidMesh("bottom/top periodicity must match".into()))
            }
            _ => {}
        }
        Ok(Self {
            nx,
            ny,
            x0: xr[0],
            x1: xr[1],
            y0: yr[0],
            y1: yr[1],
            dx: (xr[1] - xr[0]) / nx as f64,
            dy: (yr[1] - yr[0]) / ny as f64,
            bc,
        })
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    /// Physical x coordinate of node `i1` in (possibly ghost) column `i`.
    #[inline]
    pub fn node_x(&self, ops: &SbpOperators, i: isize, i1: usize) -> f64 {
        self.x0 + (i as f64 + 0.5) * self.dx + 0.5 * self.dx * ops.nodes[i1]
    }

    #[inline]
    pub fn node_y(&self, ops: &SbpOperators, j: isize, j1: usize) -> f64 {
        self.y0 + (j as f64 + 0.5) * self.dy + 0.5 * self.dy * ops.nodes[j1]
    }

    /// Interior neighbour across `side`, if the boundary connects to one.
    pub fn neighbor(&self, i: usize, j: usize, side: Side) -> Option<(usize, usize)> {
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        let (mut ni, mut nj) = (i as i64, j as i64);
        match side {
            Side::Left => ni -= 1,
            Side::Right => ni += 1,
            Side::Bottom => nj -= 1,
            Side::Top => nj += 1,
        }
        if nj < 0 || nj >= ny {
            let kind = if nj < 0 { &self.bc.bottom } else { &self.bc.top };
            match kind {
                BoundaryKind::Periodic => nj = nj.rem_euclid(ny),
                BoundaryKind::ShiftedPeriodic { shift } => {
                    if nj >= ny {
                        ni += shift;
                        nj -= ny;
                    } else {
                        ni -= shift;
                        nj += ny;
                    }
                }
                _ => return None,
            }
        }
        if ni < 0 || ni >= nx {
            if matches!(self.bc.left, BoundaryKind::Periodic) {
                ni = ni.rem_euclid(nx);
            } else {
                return None;
            }
        }
        Some((ni as usize, nj as usize))
    }
}

/// Nodal values of every cell, cell-major with `i` fastest; nodes within a cell
/// are stored with `i1` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField {
    pub nx: usize,
    pub ny: usize,
    pub np: usize,
    pub data: Vec<ConsState>,
}

impl CellField {
    pub fn zeros(nx: usize, ny: usize, np: usize) -> Self {
        Self {
            nx,
            ny,
            np,
            data: vec![ConsState::ZERO; nx * ny * np * np],
        }
    }

    #[inline]
    pub fn cell(&self, i: usize, j: usize) -> &[ConsState] {
        let n = self.np * self.np;
        let start = (j * self.nx + i) * n;
        &self.data[start..start + n]
    }

    #[inline]
    pub fn cell_mut(&mut self, i: usize, j: usize) -> &mut [ConsState] {
        let n = self.np * self.np;
        let start = (j * self.nx + i) * n;
        &mut self.data[start..start + n]
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize, i1: usize, j1: usize) -> &ConsState {
        &self.data[((j * self.nx + i) * self.np + j1) * self.np + i1]
    }

    #[inline]
    pub fn node_mut(&mut self, i: usize, j: usize, i1: usize, j1: usize) -> &mut ConsState {
        &mut self.data[((j * self.nx + i) * self.np + j1) * self.np + i1]
    }

    /// `a x + b y`.
    pub fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        Self {
            nx: x.nx,
            ny: x.ny,
            np: x.np,
            data: x
                .data
                .iter()
                .zip(&y.data)
                .map(|(u, v)| *u * a + *v * b)
                .collect(),
        }
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        for (u, v) in self.data.iter_mut().zip(&x.data) {
            *u += *v * a;
        }
    }
}

/// Legendre coefficients of the normal field on every edge.
///
/// Vertical edge `(i, j)` for `i in 0..=nx` lies at the left side of cell `i`;
/// horizontal edge `(i, j)` for `j in 0..=ny` at the bottom of cell row `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeField {
    pub nx: usize,
    pub ny: usize,
    pub nm: usize,
    pub bx: Vec<f64>,
    pub by: Vec<f64>,
}

impl EdgeField {
    pub fn zeros(nx: usize, ny: usize, nm: usize) -> Self {
        Self {
            nx,
            ny,
            nm,
            bx: vec![0.0; (nx + 1) * ny * nm],
            by: vec![0.0; nx * (ny + 1) * nm],
        }
    }

    #[inline]
    pub fn bx(&self, i: usize, j: usize) -> &[f64] {
        let s = (j * (self.nx + 1) + i) * self.nm;
        &self.bx[s..s + self.nm]
    }

    #[inline]
    pub fn bx_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let s = (j * (self.nx + 1) + i) * self.nm;
        &mut self.bx[s..s + self.nm]
    }

    #[inline]
    pub fn by(&self, i: usize, j: usize) -> &[f64] {
        let s = (j * self.nx + i) * self.nm;
        &self.by[s..s + self.nm]
    }

    #[inline]
    pub fn by_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let s = (j * self.nx + i) * self.nm;
        &mut self.by[s..s + self.nm]
    }

    pub fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        let comb = |p: &[f64], q: &[f64]| p.iter().zip(q).map(|(u, v)| a * u + b * v).collect();
        Self {
            nx: x.nx,
            ny: x.ny,
            nm: x.nm,
            bx: comb(&x.bx, &y.bx),
            by: comb(&x.by, &y.by),
        }
    }

    /// Cell-average constraint `dy (bx+ - bx-) + dx (by+ - by-)` of one cell.
    pub fn cell_constraint(&self, mesh: &Mesh, i: usize, j: usize) -> f64 {
        mesh.dy * (self.bx(i + 1, j)[0] - self.bx(i, j)[0])
            + mesh.dx * (self.by(i, j + 1)[0] - self.by(i, j)[0])
    }

    /// Largest absolute cell-average constraint over the mesh.
    pub fn max_constraint(&self, mesh: &Mesh) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.ny {
            for i in 0..self.nx {
                worst = worst.max(self.cell_constraint(mesh, i, j).abs());
            }
        }
        worst
    }

    /// Makes edges that represent the same physical interface identical.
    pub fn sync_periodic(&mut self, mesh: &Mesh) {
        if matches!(mesh.bc.left, BoundaryKind::Periodic) {
            for j in 0..self.ny {
                let src = self.bx(0, j).to_vec();
                self.bx_mut(self.nx, j).copy_from_slice(&src);
            }
        }
        match mesh.bc.top {
            BoundaryKind::Periodic => {
                for i in 0..self.nx {
                    let src = self.by(i, 0).to_vec();
                    self.by_mut(i, self.ny).copy_from_slice(&src);
                }
            }
            BoundaryKind::ShiftedPeriodic { shift } => {
                for i in 0..self.nx {
                    let partner = i as i64 + shift;
                    if (0..self.nx as i64).contains(&partner) {
                        let src = self.by(partner as usize, 0).to_vec();
                        self.by_mut(i, self.ny).copy_from_slice(&src);
                    }
                }
            }
            _ => {}
        }
    }
}

/// Copy of a cell field surrounded by one layer of ghost cells.
#[derive(Debug, Clone)]
pub struct PaddedField {
    pub nx: usize,
    pub ny: usize,
    pub np: usize,
    data: Vec<ConsState>,
}

impl PaddedField {
    pub fn build(mesh: &Mesh, ops: &SbpOperators, field: &CellField) -> Result<Self> {
        let np = field.np;
        let n = np * np;
        let (px, py) = (field.nx + 2, field.ny + 2);
        let mut data = vec![ConsState::ZERO; px * py * n];
        for j in -1..=(field.ny as isize) {
            for i in -1..=(field.nx as isize) {
                let start = ((j + 1) as usize * px + (i + 1) as usize) * n;
                let dst = &mut data[start..start + n];
                if i >= 0 && j >= 0 && (i as usize) < field.nx && (j as usize) < field.ny {
                    dst.copy_from_slice(field.cell(i as usize, j as usize));
                } else {
                    resolve_ghost(mesh, ops, field, i as i64, j as i64, dst)?;
                }
            }
        }
        Ok(Self {
            nx: field.nx,
            ny: field.ny,
            np,
            data,
        })
    }

    /// Cell `(i, j)` with `i in -1..=nx`, `j in -1..=ny`.
    #[inline]
    pub fn cell(&self, i: isize, j: isize) -> &[ConsState] {
        let n = self.np * self.np;
        let start = ((j + 1) as usize * (self.nx + 2) + (i + 1) as usize) * n;
        &self.data[start..start + n]
    }

    #[inline]
    pub fn node(&self, i: isize, j: isize, i1: usize, j1: usize) -> &ConsState {
        &self.cell(i, j)[j1 * self.np + i1]
    }
}

fn resolve_ghost(
    mesh: &Mesh,
    ops: &SbpOperators,
    field: &CellField,
    i: i64,
    j: i64,
    out: &mut [ConsState],
) -> Result<()> {
    let (nx, ny) = (mesh.nx as i64, mesh.ny as i64);
    let np = field.np;
    if j < 0 || j >= ny {
        let kind = if j < 0 { &mesh.bc.bottom } else { &mesh.bc.top };
        match kind {
            BoundaryKind::Periodic => resolve_ghost(mesh, ops, field, i, j.rem_euclid(ny), out),
            BoundaryKind::ShiftedPeriodic { shift } => {
                if j >= ny {
                    resolve_ghost(mesh, ops, field, i + shift, j - ny, out)
                } else {
                    resolve_ghost(mesh, ops, field, i - shift, j + ny, out)
                }
            }
            BoundaryKind::Reflective => {
                let jin = if j < 0 { -1 - j } else { 2 * ny - 1 - j };
                let mut base = vec![ConsState::ZERO; np * np];
                resolve_ghost(mesh, ops, field, i, jin, &mut base)?;
                for j1 in 0..np {
                    for i1 in 0..np {
                        let mut u = base[(np - 1 - j1) * np + i1];
                        u[MY] = -u[MY];
                        u[BY] = -u[BY];
                        out[j1 * np + i1] = u;
                    }
                }
                Ok(())
            }
            BoundaryKind::Dirichlet(profile) => {
                fill_profile(mesh, ops, profile, i, j, out);
                Ok(())
            }
        }
    } else if i < 0 || i >= nx {
        let kind = if i < 0 { &mesh.bc.left } else { &mesh.bc.right };
        match kind {
            BoundaryKind::Periodic => resolve_ghost(mesh, ops, field, i.rem_euclid(nx), j, out),
            BoundaryKind::Reflective => {
                let iin = if i < 0 { -1 - i } else { 2 * nx - 1 - i };
                let mut base = vec![ConsState::ZERO; np * np];
                resolve_ghost(mesh, ops, field, iin, j, &mut base)?;
                for j1 in 0..np {
                    for i1 in 0..np {
                        let mut u = base[j1 * np + (np - 1 - i1)];
                        u[MX] = -u[MX];
                        u[BX] = -u[BX];
                        out[j1 * np + i1] = u;
                    }
                }
                Ok(())
            }
            BoundaryKind::Dirichlet(profile) => {
                fill_profile(mesh, ops, profile, i, j, out);
                Ok(())
            }
            BoundaryKind::ShiftedPeriodic { .. } => Err(Error::InvalidMesh(
                "shifted-periodic boundaries are supported only at bottom/top".into(),
            )),
        }
    } else {
        out.copy_from_slice(field.cell(i as usize, j as usize));
        Ok(())
    }
}

fn fill_profile(
    mesh: &Mesh,
    ops: &SbpOperators,
    profile: &Profile,
    i: i64,
    j: i64,
    out: &mut [ConsState],
) {
    let np = ops.np();
    for j1 in 0..np {
        for i1 in 0..np {
            let x = mesh.node_x(ops, i as isize, i1);
            let y = mesh.node_y(ops, j as isize, j1);
            out[j1 * np + i1] = profile(x, y);
        }
    }
}

/// Nodal interpolation of a pointwise initial condition.
pub fn init_cell_field(
    mesh: &Mesh,
    ops: &SbpOperators,
    gamma: f64,
    ic: &dyn Fn(f64, f64) -> ConsState,
) -> Result<CellField> {
    let np = ops.np();
    let mut field = CellField::zeros(mesh.nx, mesh.ny, np);
    for j in 0..mesh.ny {
        for i in 0..mesh.nx {
            for j1 in 0..np {
                for i1 in 0..np {
                    let x = mesh.node_x(ops, i as isize, i1);
                    let y = mesh.node_y(ops, j as isize, j1);
                    let u = ic(x, y);
                    cons_to_prim(&u, gamma).map_err(|e| {
                        e.at(Location {
                            cell: (i, j),
                            node: (i1, j1),
                        })
                    })?;
                    *field.node_mut(i, j, i1, j1) = u;
                }
            }
        }
    }
    Ok(field)
}

/// L2 projection of the normal field onto each edge.
///
/// With a vector potential `A_z` (`B = (dA/dy, -dA/dx)`), edge means are taken
/// as exact differences of `A_z`, so the cell-average constraint holds to
/// round-off regardless of quadrature error.
pub fn init_edge_field(
    mesh: &Mesh,
    ops: &SbpOperators,
    b_field: &dyn Fn(f64, f64) -> [f64; 2],
    potential: Option<&dyn Fn(f64, f64) -> f64>,
) -> Result<EdgeField> {
    let k = ops.degree;
    let nm = k + 1;
    let (gx, gw) = gauss_legendre(k + 3);
    let mut edges = EdgeField::zeros(mesh.nx, mesh.ny, nm);

    let project = |f: &dyn Fn(f64) -> f64, out: &mut [f64]| {
        for (l, o) in out.iter_mut().enumerate() {
            let s: f64 = gx
                .iter()
                .zip(&gw)
                .map(|(&s, &w)| w * f(s) * legendre_eval(l, s))
                .sum();
            *o = 0.5 * (2 * l + 1) as f64 * s;
        }
    };

    for j in 0..mesh.ny {
        let yc = mesh.y0 + (j as f64 + 0.5) * mesh.dy;
        for i in 0..=mesh.nx {
            let x = mesh.x0 + i as f64 * mesh.dx;
            let out = edges.bx_mut(i, j);
            project(&|s| b_field(x, yc + 0.5 * mesh.dy * s)[0], out);
            if let Some(a) = potential {
                out[0] = (a(x, yc + 0.5 * mesh.dy) - a(x, yc - 0.5 * mesh.dy)) / mesh.dy;
            }
        }
    }
    for j in 0..=mesh.ny {
        let y = mesh.y0 + j as f64 * mesh.dy;
        for i in 0..mesh.nx {
            let xc = mesh.x0 + (i as f64 + 0.5) * mesh.dx;
            let out = edges.by_mut(i, j);
            project(&|s| b_field(xc + 0.5 * mesh.dx * s, y)[1], out);
            if let Some(a) = potential {
                out[0] = -(a(xc + 0.5 * mesh.dx, y) - a(xc - 0.5 * mesh.dx, y)) / mesh.dx;
            }
        }
    }
    edges.sync_periodic(mesh);

    let residual = edges.max_constraint(mesh);
    if residual > 1e-10 {
        let (mut ci, mut cj, mut worst) = (0, 0, 0.0);
        for j in 0..mesh.ny {
            for i in 0..mesh.nx {
                let r = edges.cell_constraint(mesh, i, j).abs();
                if r > worst {
                    (ci, cj, worst) = (i, j, r);
                }
            }
        }
        return Err(Error::InfeasibleReconstruction {
            cell: (ci, cj),
            residual: worst,
        });
    }
    Ok(edges)
}
