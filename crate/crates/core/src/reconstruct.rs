//! Divergence-free reconstruction of the cell-interior magnetic field.
//!
//! Inside every cell the nodal field `(B_x, B_y)` is replaced by the closest
//! field, in the quadrature-weighted norm, that has zero nodal divergence and
//! whose normal traces equal the edge polynomials. The constraint matrix is
//! rank deficient; its rows are reduced once through an SVD and the resulting
//! KKT system is inverted once per `(k, dy/dx)`.

use crate::error::{Error, Location, Result};
use crate::grid::{CellField, EdgeField, Mesh};
use crate::operators::SbpOperators;
use crate::state::{cons_to_prim, ConsState, BX, BY, ENERGY};
use nalgebra::{DMatrix, DVector};

/// Relative threshold below which singular values are treated as zero.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Edge coefficients bounding one cell.
#[derive(Debug, Clone, Copy)]
pub struct CellEdges<'a> {
    pub bx_minus: &'a [f64],
    pub bx_plus: &'a [f64],
    pub by_minus: &'a [f64],
    pub by_plus: &'a [f64],
}

impl<'a> CellEdges<'a> {
    pub fn of(edges: &'a EdgeField, i: usize, j: usize) -> Self {
        Self {
            bx_minus: edges.bx(i, j),
            bx_plus: edges.bx(i + 1, j),
            by_minus: edges.by(i, j),
            by_plus: edges.by(i, j + 1),
        }
    }

    /// `dy (bx+ - bx-) + dx (by+ - by-)` for the mean modes.
    pub fn constraint(&self, dx: f64, dy: f64) -> f64 {
        dy * (self.bx_plus[0] - self.bx_minus[0]) + dx * (self.by_plus[0] - self.by_minus[0])
    }
}

#[derive(Debug, Clone)]
pub struct ReconSystem {
    pub degree: usize,
    pub dx: f64,
    pub dy: f64,
    /// Constraint matrix: nodal divergence rows then the four trace blocks.
    pub constraint: DMatrix<f64>,
    pub rank: usize,
    /// Full-row-rank reduction `Sigma_r V_r^T`.
    pub reduced: DMatrix<f64>,
    /// Left singular vectors `U_r` mapping `b` to `b_1 = U_r^T b`.
    pub left_basis: DMatrix<f64>,
    pub kkt: DMatrix<f64>,
    pub kkt_inverse: DMatrix<f64>,
    weights2: DVector<f64>,
    projector: DMatrix<f64>,
    lift: DMatrix<f64>,
    /// `G12 U_r^T`: minimum-norm correction for a constraint residual.
    correction: DMatrix<f64>,
    vandermonde: DMatrix<f64>,
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

impl ReconSystem {
    pub fn new(ops: &SbpOperators, dx: f64, dy: f64) -> Result<Self> {
        let k = ops.degree;
        let np = ops.np();
        let nm = ops.nm();
        let n2 = np * np;
        let nd = 2 * n2;
        let nrows = n2 + 4 * np;

        let eye = DMatrix::<f64>::identity(np, np);
        let d = ops.d_matrix();
        let mut r0 = DMatrix::<f64>::zeros(1, np);
        r0[(0, np - 1)] = 1.0;
        let mut l0 = DMatrix::<f64>::zeros(1, np);
        l0[(0, 0)] = 1.0;

        // unknowns: B_x then B_y, node index i1 + np * j1
        let mut a = DMatrix::<f64>::zeros(nrows, nd);
        a.view_mut((0, 0), (n2, n2)).copy_from(&(kron(&eye, &d) * (dy / dx)));
        a.view_mut((0, n2), (n2, n2)).copy_from(&kron(&d, &eye));
        a.view_mut((n2, 0), (np, n2)).copy_from(&kron(&eye, &r0));
        a.view_mut((n2 + np, 0), (np, n2)).copy_from(&kron(&eye, &l0));
        a.view_mut((n2 + 2 * np, n2), (np, n2)).copy_from(&kron(&r0, &eye));
        a.view_mut((n2 + 3 * np, n2), (np, n2)).copy_from(&kron(&l0, &eye));

        let svd = a.clone().svd(true, true);
        let u = svd.u.ok_or_else(|| Error::SingularSystem("SVD failed to produce U".into()))?;
        let vt = svd
            .v_t
            .ok_or_else(|| Error::SingularSystem("SVD failed to produce V^T".into()))?;
        let sv = svd.singular_values;
        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&x, &y| sv[y].total_cmp(&sv[x]));
        let smax = sv[order[0]];
        let rank = order.iter().filter(|&&c| sv[c] > RANK_THRESHOLD * smax).count();
        let expected = n2 + 4 * (k + 1);
        if rank != expected {
            return Err(Error::SingularSystem(format!(
                "constraint rank {rank}, expected {expected}"
            )));
        }

        let mut reduced = DMatrix::<f64>::zeros(rank, nd);
        let mut left_basis = DMatrix::<f64>::zeros(nrows, rank);
        for (r, &c) in order.iter().take(rank).enumerate() {
            // sign convention: first significant entry of each right vector positive
            let row = vt.row(c);
            let pivot = row.iter().find(|v| v.abs() > 1e-8).copied().unwrap_or(1.0);
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            for col in 0..nd {
                reduced[(r, col)] = sign * sv[c] * row[col];
            }
            for row_i in 0..nrows {
                left_basis[(row_i, r)] = sign * u[(row_i, c)];
            }
        }

        let w = &ops.weights;
        let weights2 = DVector::from_fn(nd, |n, _| {
            let m = n % n2;
            w[m % np] * w[m / np]
        });
        let size = nd + rank;
        let mut kkt = DMatrix::<f64>::zeros(size, size);
        for n in 0..nd {
            kkt[(n, n)] = weights2[n];
        }
        kkt.view_mut((nd, 0), (rank, nd)).copy_from(&reduced);
        kkt.view_mut((0, nd), (nd, rank)).copy_from(&reduced.transpose());
        let kkt_inverse = kkt
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::SingularSystem("KKT matrix is singular".into()))?;

        let g11 = kkt_inverse.view((0, 0), (nd, nd)).into_owned();
        let g12 = kkt_inverse.view((0, nd), (nd, rank)).into_owned();
        let projector = &g11 * DMatrix::from_diagonal(&weights2);
        // only the trace rows of b are nonzero; fold in the Vandermonde
        let ut_traces = left_basis.view((n2, 0), (4 * np, rank)).transpose();
        let v = ops.vandermonde_matrix();
        let mut vblock = DMatrix::<f64>::zeros(4 * np, 4 * nm);
        for blk in 0..4 {
            vblock.view_mut((blk * np, blk * nm), (np, nm)).copy_from(&v);
        }
        let lift = &g12 * ut_traces * vblock;
        let correction = &g12 * left_basis.transpose();

        Ok(Self {
            degree: k,
            dx,
            dy,
            constraint: a,
            rank,
            reduced,
            left_basis,
            kkt,
            kkt_inverse,
            weights2,
            projector,
            lift,
            correction,
            vandermonde: v,
        })
    }

    pub fn np(&self) -> usize {
        self.degree + 2
    }

    /// Right-hand side `b` of the constraint system for given edges.
    pub fn rhs_vector(&self, ops: &SbpOperators, edges: &CellEdges) -> DVector<f64> {
        let np = self.np();
        let n2 = np * np;
        let mut b = DVector::zeros(n2 + 4 * np);
        let mut tmp = vec![0.0; np];
        for (blk, c) in [edges.bx_plus, edges.bx_minus, edges.by_plus, edges.by_minus]
            .iter()
            .enumerate()
        {
            ops.modal_to_nodal(c, &mut tmp);
            for n in 0..np {
                b[n2 + blk * np + n] = tmp[n];
            }
        }
        b
    }

    /// Reconstructed `(B_x, B_y)` nodal values, `i1` fastest.
    ///
    /// `cell` only labels errors.
    pub fn reconstruct_cell(
        &self,
        edges: &CellEdges,
        prior_bx: &[f64],
        prior_by: &[f64],
        cell: (usize, usize),
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let np = self.np();
        let n2 = np * np;
        let nm = self.degree + 1;

        let residual = edges.constraint(self.dx, self.dy);
        let scale = self.dy * (max_abs(edges.bx_plus) + max_abs(edges.bx_minus))
            + self.dx * (max_abs(edges.by_plus) + max_abs(edges.by_minus));
        if residual.abs() > 1e-10 * scale.max(self.dx.min(self.dy) * 1e-6) {
            return Err(Error::InfeasibleReconstruction { cell, residual });
        }

        let mut coeffs = Vec::with_capacity(4 * nm);
        coeffs.extend_from_slice(edges.bx_plus);
        coeffs.extend_from_slice(edges.bx_minus);
        coeffs.extend_from_slice(edges.by_plus);
        coeffs.extend_from_slice(edges.by_minus);

        let mut sol = DVector::<f64>::zeros(2 * n2);
        for r in 0..2 * n2 {
            let mut s = 0.0;
            for c in 0..n2 {
                s += self.projector[(r, c)] * prior_bx[c] + self.projector[(r, n2 + c)] * prior_by[c];
            }
            for (c, v) in coeffs.iter().enumerate() {
                s += self.lift[(r, c)] * v;
            }
            sol[r] = s;
        }
        // one step of iterative refinement on the constraint residual
        let mut target = DVector::<f64>::zeros(n2 + 4 * np);
        let mut tmp = vec![0.0; np];
        for (blk, c) in coeffs.chunks(nm).enumerate() {
            self.vandermonde_apply(c, &mut tmp);
            for n in 0..np {
                target[n2 + blk * np + n] = tmp[n];
            }
        }
        let res = target - &self.constraint * &sol;
        sol += &self.correction * res;
        Ok((sol.rows(0, n2).iter().copied().collect(), sol.rows(n2, n2).iter().copied().collect()))
    }

    fn vandermonde_apply(&self, coeffs: &[f64], out: &mut [f64]) {
        let np = self.np();
        for (n, o) in out.iter_mut().enumerate().take(np) {
            *o = (0..coeffs.len()).map(|l| self.vandermonde[(n, l)] * coeffs[l]).sum();
        }
    }

    /// Weighted inner product used by the least-squares objective.
    pub fn weighted_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(self.weights2.iter())
            .map(|((x, y), w)| w * x * y)
            .sum()
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// New total energy keeping pressure fixed when `B` changes.
#[inline]
pub fn energy_correct(u: &mut ConsState, new_b: [f64; 2]) -> f64 {
    let old = u[BX] * u[BX] + u[BY] * u[BY];
    let new = new_b[0] * new_b[0] + new_b[1] * new_b[1];
    let de = 0.5 * (new - old);
    u[BX] = new_b[0];
    u[BY] = new_b[1];
    u[ENERGY] += de;
    de
}

/// Reconstructs every cell in place and corrects the energy.
///
/// Returns the domain integral of the energy change.
pub fn reconstruct_field(
    sys: &ReconSystem,
    field: &mut CellField,
    edges: &EdgeField,
    mesh: &Mesh,
    ops: &SbpOperators,
    gamma: f64,
) -> Result<f64> {
    let np = ops.np();
    let n2 = np * np;
    let w = &ops.weights;
    let mut prior_bx = vec![0.0; n2];
    let mut prior_by = vec![0.0; n2];
    let mut total = 0.0;
    for j in 0..mesh.ny {
        for i in 0..mesh.nx {
            let cell = field.cell_mut(i, j);
            for n in 0..n2 {
                prior_bx[n] = cell[n][BX];
                prior_by[n] = cell[n][BY];
            }
            let (bx, by) = sys.reconstruct_cell(&CellEdges::of(edges, i, j), &prior_bx, &prior_by, (i, j))?;
            for n in 0..n2 {
                let de = energy_correct(&mut cell[n], [bx[n], by[n]]);
                total += w[n % np] * w[n / np] * de;
                cons_to_prim(&cell[n], gamma).map_err(|e| {
                    e.at(Location {
                        cell: (i, j),
                        node: (n % np, n / np),
                    })
                })?;
            }
        }
    }
    Ok(0.25 * mesh.dx * mesh.dy * total)
}

/// Maximum nodal divergence and maximum normal-trace mismatch against the edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivFreeReport {
    pub max_divergence: f64,
    pub max_trace_mismatch: f64,
}

pub fn check_divfree(field: &CellField, edges: &EdgeField, mesh: &Mesh, ops: &SbpOperators) -> DivFreeReport {
    let np = ops.np();
    let last = np - 1;
    let sx = 2.0 / mesh.dx;
    let sy = 2.0 / mesh.dy;
    let mut div: f64 = 0.0;
    let mut mismatch: f64 = 0.0;
    let mut nodal = vec![0.0; np];
    for j in 0..mesh.ny {
        for i in 0..mesh.nx {
            let cell = field.cell(i, j);
            for j1 in 0..np {
                for i1 in 0..np {
                    let mut d = 0.0;
                    for l in 0..np {
                        d += sx * ops.d(i1, l) * cell[j1 * np + l][BX]
                            + sy * ops.d(j1, l) * cell[l * np + i1][BY];
                    }
                    div = div.max(d.abs());
                }
            }
            ops.modal_to_nodal(edges.bx(i, j), &mut nodal);
            for j1 in 0..np {
                mismatch = mismatch.max((cell[j1 * np][BX] - nodal[j1]).abs());
            }
            ops.modal_to_nodal(edges.bx(i + 1, j), &mut nodal);
            for j1 in 0..np {
                mismatch = mismatch.max((cell[j1 * np + last][BX] - nodal[j1]).abs());
            }
            ops.modal_to_nodal(edges.by(i, j), &mut nodal);
            for i1 in 0..np {
                mismatch = mismatch.max((cell[i1][BY] - nodal[i1]).abs());
            }
            ops.modal_to_nodal(edges.by(i, j + 1), &mut nodal);
            for i1 in 0..np {
                mismatch = mismatch.max((cell[last * np + i1][BY] - nodal[i1]).abs());
            }
        }
    }
    DivFreeReport {
        max_divergence: div,
        max_trace_mismatch: mismatch,
    }
}
