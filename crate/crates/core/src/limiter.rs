//! Jump-intensity scaling limiter.
//!
//! Every cell gets a damping factor `theta = exp(-sigma dt)` from the interface
//! jumps of the solution and its derivatives. Nodal values are scaled towards
//! the cell mean, and the high-order Legendre moments of every edge are scaled
//! by the smaller factor of the two adjacent cells.

use crate::error::{Error, Result};
use crate::grid::{EdgeField, Mesh, PaddedField, Side};
use crate::operators::SbpOperators;
use crate::state::{pressure, ConsState, BX, BY, BZ, RHO};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimiterParams {
    pub enabled: bool,
    pub c0: f64,
}

impl Default for LimiterParams {
    fn default() -> Self {
        Self {
            enabled: false,
            c0: 1.0,
        }
    }
}

impl LimiterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(Error::Config(format!("limiter.c0 must be positive, got {}", self.c0)));
        }
        Ok(())
    }

    /// Whether the limiter actually runs at polynomial degree `k`.
    pub fn active(&self, k: usize) -> bool {
        self.enabled && k > 0
    }
}

/// Derivative orders `(l1, l2)` with `1 <= l1 + l2 <= k + 1` and their weights
/// `l (l + 1) dx^l1 dy^l2`.
fn derivative_terms(k: usize, dx: f64, dy: f64) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for l in 1..=k + 1 {
        for l1 in 0..=l {
            let l2 = l - l1;
            let w = (l * (l + 1)) as f64 * dx.powi(l1 as i32) * dy.powi(l2 as i32);
            out.push((l1, l2, w));
        }
    }
    out
}

fn apply_dx(ops: &SbpOperators, u: &[ConsState], scale: f64) -> Vec<ConsState> {
    let np = ops.np();
    let mut out = vec![ConsState::ZERO; np * np];
    for j1 in 0..np {
        for i1 in 0..np {
            let mut acc = ConsState::ZERO;
            for m in 0..np {
                acc += u[j1 * np + m] * ops.d(i1, m);
            }
            out[j1 * np + i1] = acc * scale;
        }
    }
    out
}

fn apply_dy(ops: &SbpOperators, u: &[ConsState], scale: f64) -> Vec<ConsState> {
    let np = ops.np();
    let mut out = vec![ConsState::ZERO; np * np];
    for j1 in 0..np {
        for i1 in 0..np {
            let mut acc = ConsState::ZERO;
            for m in 0..np {
                acc += u[m * np + i1] * ops.d(j1, m);
            }
            out[j1 * np + i1] = acc * scale;
        }
    }
    out
}

/// Physical derivatives of a cell for every term, in `derivative_terms` order.
fn cell_derivatives(
    ops: &SbpOperators,
    u: &[ConsState],
    terms: &[(usize, usize, f64)],
    dx: f64,
    dy: f64,
) -> Vec<Vec<ConsState>> {
    let kmax = ops.degree + 1;
    let (sx, sy) = (2.0 / dx, 2.0 / dy);
    // table[l1][l2]
    let mut table: Vec<Vec<Vec<ConsState>>> = Vec::with_capacity(kmax + 1);
    for l1 in 0..=kmax {
        let base = if l1 == 0 {
            u.to_vec()
        } else {
            apply_dx(ops, &table[l1 - 1][0], sx)
        };
        let mut row = vec![base];
        for l2 in 1..=kmax - l1 {
            let next = apply_dy(ops, &row[l2 - 1], sy);
            row.push(next);
        }
        table.push(row);
    }
    terms.iter().map(|&(l1, l2, _)| table[l1][l2].clone()).collect()
}

/// Boundary traces of every derivative term of one cell, laid out as
/// `[side][term][t]` with sides ordered left, right, bottom, top.
struct Traces {
    data: Vec<ConsState>,
    nterms: usize,
    np: usize,
}

impl Traces {
    fn new(ops: &SbpOperators, derivs: &[Vec<ConsState>]) -> Self {
        let np = ops.np();
        let last = np - 1;
        let nterms = derivs.len();
        let mut data = vec![ConsState::ZERO; 4 * nterms * np];
        for (q, d) in derivs.iter().enumerate() {
            for t in 0..np {
                data[q * np + t] = d[t * np];
                data[(nterms + q) * np + t] = d[t * np + last];
                data[(2 * nterms + q) * np + t] = d[t];
                data[(3 * nterms + q) * np + t] = d[last * np + t];
            }
        }
        Self { data, nterms, np }
    }

    fn get(&self, side: usize, term: usize, t: usize) -> &ConsState {
        &self.data[(side * self.nterms + term) * self.np + t]
    }
}

const LEFT: usize = 0;
const RIGHT: usize = 1;
const BOTTOM: usize = 2;
const TOP: usize = 3;

fn interface_jump(
    ops: &SbpOperators,
    terms: &[(usize, usize, f64)],
    minus: &Traces,
    minus_side: usize,
    plus: &Traces,
    plus_side: usize,
) -> [f64; 8] {
    let mut s = [0.0; 8];
    for (q, &(_, _, w)) in terms.iter().enumerate() {
        for t in 0..ops.np() {
            let a = minus.get(minus_side, q, t);
            let b = plus.get(plus_side, q, t);
            let wt = w * ops.weights[t];
            for (m, sm) in s.iter_mut().enumerate() {
                *sm += wt * (b[m] - a[m]).abs();
            }
        }
    }
    s
}

/// Jump intensity `sigma` of every interior cell, index `j * nx + i`.
pub fn jump_intensity(
    padded: &PaddedField,
    mesh: &Mesh,
    ops: &SbpOperators,
    gamma: f64,
    c0: f64,
) -> Result<Vec<f64>> {
    let k = ops.degree;
    if k == 0 {
        return Ok(vec![0.0; mesh.nx * mesh.ny]);
    }
    let (nx, ny) = (mesh.nx, mesh.ny);
    let terms = derivative_terms(k, mesh.dx, mesh.dy);
    let px = nx + 2;
    let traces: Vec<Traces> = (-1..=ny as isize)
        .flat_map(|j| (-1..=nx as isize).map(move |i| (i, j)))
        .map(|(i, j)| {
            let d = cell_derivatives(ops, padded.cell(i, j), &terms, mesh.dx, mesh.dy);
            Traces::new(ops, &d)
        })
        .collect();
    let tr = |i: isize, j: isize| &traces[(j + 1) as usize * px + (i + 1) as usize];

    let mut vert = vec![[0.0; 8]; (nx + 1) * ny];
    for j in 0..ny {
        for i in 0..=nx {
            let (ii, jj) = (i as isize, j as isize);
            vert[j * (nx + 1) + i] = interface_jump(ops, &terms, tr(ii - 1, jj), RIGHT, tr(ii, jj), LEFT);
        }
    }
    let mut horiz = vec![[0.0; 8]; nx * (ny + 1)];
    for j in 0..=ny {
        for i in 0..nx {
            let (ii, jj) = (i as isize, j as isize);
            horiz[j * nx + i] = interface_jump(ops, &terms, tr(ii, jj - 1), TOP, tr(ii, jj), BOTTOM);
        }
    }

    let scale = c0 / (4 * k * (k + 1)) as f64 * (mesh.dx * mesh.dy).sqrt();
    let mut sigma = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let mut inv_h: f64 = 0.0;
            for u in padded.cell(i as isize, j as isize) {
                let p = pressure(u, gamma);
                let b2 = u[BX] * u[BX] + u[BY] * u[BY] + u[BZ] * u[BZ];
                let h = (u.energy() + p + 0.5 * b2) / u[RHO];
                inv_h = inv_h.max(1.0 / h);
            }
            let parts = [
                &vert[j * (nx + 1) + i],
                &vert[j * (nx + 1) + i + 1],
                &horiz[j * nx + i],
                &horiz[(j + 1) * nx + i],
            ];
            let mut s: f64 = 0.0;
            for m in 0..8 {
                s = s.max(parts.iter().map(|p| p[m]).sum::<f64>());
            }
            let value = scale * inv_h * s;
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    what: "limiter jump intensity",
                    location: None,
                });
            }
            sigma.push(value);
        }
    }
    Ok(sigma)
}

/// Per-cell damping factors `exp(-sigma dt)`, index `j * nx + i`.
pub fn jump_indicator(
    padded: &PaddedField,
    mesh: &Mesh,
    ops: &SbpOperators,
    gamma: f64,
    params: &LimiterParams,
    dt: f64,
) -> Result<Vec<f64>> {
    if !params.active(ops.degree) {
        return Ok(vec![1.0; mesh.nx * mesh.ny]);
    }
    let sigma = jump_intensity(padded, mesh, ops, gamma, params.c0)?;
    Ok(sigma.into_iter().map(|s| (-s * dt).exp()).collect())
}

/// Weighted nodal mean of one cell.
pub fn cell_mean(cell: &[ConsState], weights: &[f64]) -> ConsState {
    let np = weights.len();
    let mut acc = ConsState::ZERO;
    for j1 in 0..np {
        for i1 in 0..np {
            acc += cell[j1 * np + i1] * (0.25 * weights[i1] * weights[j1]);
        }
    }
    acc
}

/// Scales the nodal deviations from the cell mean by `theta`.
pub fn scale_cell(cell: &mut [ConsState], weights: &[f64], theta: f64) {
    if theta >= 1.0 {
        return;
    }
    let mean = cell_mean(cell, weights);
    for u in cell.iter_mut() {
        *u = mean + (*u - mean) * theta;
    }
}

/// Scales all edge moments of order `l >= 1` by the smaller factor of the
/// adjacent cells.
pub fn scale_edges(edges: &mut EdgeField, theta: &[f64], mesh: &Mesh) {
    let (nx, ny) = (mesh.nx, mesh.ny);
    let th = |c: (usize, usize)| theta[c.1 * nx + c.0];
    let pair = |own: (usize, usize), side: Side| {
        let mut t = th(own);
        if let Some(n) = mesh.neighbor(own.0, own.1, side) {
            t = t.min(th(n));
        }
        t
    };
    for j in 0..ny {
        for i in 0..=nx {
            let t = if i < nx { pair((i, j), Side::Left) } else { pair((nx - 1, j), Side::Right) };
            if t < 1.0 {
                edges.bx_mut(i, j)[1..].iter_mut().for_each(|b| *b *= t);
            }
        }
    }
    for j in 0..=ny {
        for i in 0..nx {
            let t = if j < ny { pair((i, j), Side::Bottom) } else { pair((i, ny - 1), Side::Top) };
            if t < 1.0 {
                edges.by_mut(i, j)[1..].iter_mut().for_each(|b| *b *= t);
            }
        }
    }
}
