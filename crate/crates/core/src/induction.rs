//! Modal DG evolution of the normal magnetic field on cell edges.
//!
//! Vertical edges carry `b_x(y)` and obey `db_x/dt = -dE_z/dy`; horizontal
//! edges carry `b_y(x)` with `db_y/dt = dE_z/dx`. Interior electric fields come
//! from the cached interface HLL fluxes at the Lobatto points, end-point values
//! from the vertex solver.

use crate::dg_core::RhsWorkspace;
use crate::grid::{EdgeField, Mesh};
use crate::operators::{legendre_with_derivative, SbpOperators};
use crate::state::{BX, BY};

/// `P_l'(X_j)` at the Lobatto nodes, row-major `np x nm`.
fn legendre_derivatives(ops: &SbpOperators) -> Vec<f64> {
    let (np, nm) = (ops.np(), ops.nm());
    let mut t = vec![0.0; np * nm];
    for j in 0..np {
        for l in 0..nm {
            t[j * nm + l] = legendre_with_derivative(l, ops.nodes[j]).1;
        }
    }
    t
}

/// Coefficient time derivatives of every edge.
pub fn edge_rhs(ws: &RhsWorkspace, mesh: &Mesh, ops: &SbpOperators) -> EdgeField {
    let (np, nm) = (ops.np(), ops.nm());
    let dphi = legendre_derivatives(ops);
    let w = &ops.weights;
    let mut out = EdgeField::zeros(mesh.nx, mesh.ny, nm);

    for j in 0..mesh.ny {
        for i in 0..=mesh.nx {
            let e_bot = ws.ez(i, j);
            let e_top = ws.ez(i, j + 1);
            let dst = out.bx_mut(i, j);
            for (l, d) in dst.iter_mut().enumerate() {
                let vol: f64 = (0..np)
                    .map(|j1| w[j1] * (-ws.fx(i, j, j1)[BY]) * dphi[j1 * nm + l])
                    .sum();
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                *d = (2 * l + 1) as f64 / mesh.dy * (vol - e_top + sign * e_bot);
            }
        }
    }
    for j in 0..=mesh.ny {
        for i in 0..mesh.nx {
            let e_left = ws.ez(i, j);
            let e_right = ws.ez(i + 1, j);
            let dst = out.by_mut(i, j);
            for (l, d) in dst.iter_mut().enumerate() {
                let vol: f64 = (0..np)
                    .map(|i1| w[i1] * ws.gy(i, j, i1)[BX] * dphi[i1 * nm + l])
                    .sum();
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                *d = (2 * l + 1) as f64 / mesh.dx * (-vol + e_right - sign * e_left);
            }
        }
    }
    out
}
