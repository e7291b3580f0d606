//! Scalar monitors: total entropy, divergence norm, conservation drifts and
//! L2 errors.

use crate::error::Result;
use crate::grid::{BoundaryKind, CellField, Mesh};
use crate::operators::SbpOperators;
use crate::state::{entropy, pressure, ConsState, BX, BY, ENERGY, MX, MY, MZ, RHO};

/// Quadrature weight of node `n` of a cell, including the Jacobian.
#[inline]
fn node_weight(ops: &SbpOperators, mesh: &Mesh, n: usize) -> f64 {
    let np = ops.np();
    0.25 * mesh.dx * mesh.dy * ops.weights[n % np] * ops.weights[n / np]
}

/// Quadrature of the entropy density over the domain.
pub fn total_entropy(field: &CellField, ops: &SbpOperators, mesh: &Mesh, gamma: f64) -> Result<f64> {
    let np = ops.np();
    let mut total = 0.0;
    for cell in field.data.chunks(np * np) {
        let mut s = 0.0;
        for (n, u) in cell.iter().enumerate() {
            s += node_weight(ops, mesh, n) * entropy(u, gamma)?;
        }
        total += s;
    }
    Ok(total)
}

/// Domain integral of every conserved component.
pub fn conserved_totals(field: &CellField, ops: &SbpOperators, mesh: &Mesh) -> [f64; 8] {
    let np = ops.np();
    let mut total = [0.0; 8];
    for cell in field.data.chunks(np * np) {
        let mut s = [0.0; 8];
        for (n, u) in cell.iter().enumerate() {
            let w = node_weight(ops, mesh, n);
            for q in 0..8 {
                s[q] += w * u[q];
            }
        }
        for q in 0..8 {
            total[q] += s[q];
        }
    }
    total
}

/// `sum_K (int_K |div B| + int_{dK} |[[B.n]]|)`.
///
/// Volume terms use the nodal derivative; jump terms use the nodal traces of
/// neighbouring cells and are counted from both sides. Physical boundaries
/// without a periodic partner contribute no jump.
pub fn divergence_norm(field: &CellField, ops: &SbpOperators, mesh: &Mesh) -> f64 {
    let np = ops.np();
    let last = np - 1;
    let w = &ops.weights;
    let (sx, sy) = (2.0 / mesh.dx, 2.0 / mesh.dy);
    let mut volume = 0.0;
    for j in 0..mesh.ny {
        for i in 0..mesh.nx {
            let cell = field.cell(i, j);
            for j1 in 0..np {
                for i1 in 0..np {
                    let mut d = 0.0;
                    for l in 0..np {
                        d += sx * ops.d(i1, l) * cell[j1 * np + l][BX] + sy * ops.d(j1, l) * cell[l * np + i1][BY];
                    }
                    volume += node_weight(ops, mesh, j1 * np + i1) * d.abs();
                }
            }
        }
    }
    let mut jumps = 0.0;
    for j in 0..mesh.ny {
        for i in 0..=mesh.nx {
            let (left, right) = if i == 0 || i == mesh.nx {
                if !matches!(mesh.bc.left, BoundaryKind::Periodic) || i == mesh.nx {
                    continue;
                }
                ((mesh.nx - 1, j), (0, j))
            } else {
                ((i - 1, j), (i, j))
            };
            let (a, b) = (field.cell(left.0, left.1), field.cell(right.0, right.1));
            for t in 0..np {
                jumps += 0.5 * mesh.dy * w[t] * (a[t * np + last][BX] - b[t * np][BX]).abs();
            }
        }
    }
    for j in 0..=mesh.ny {
        for i in 0..mesh.nx {
            let pair = if j == 0 || j == mesh.ny {
                if j == mesh.ny {
                    continue;
                }
                match mesh.bc.bottom {
                    BoundaryKind::Periodic => ((i, mesh.ny - 1), (i, 0)),
                    BoundaryKind::ShiftedPeriodic { shift } => {
                        let below = i as i64 - shift;
                        if !(0..mesh.nx as i64).contains(&below) {
                            continue;
                        }
                        ((below as usize, mesh.ny - 1), (i, 0))
                    }
                    _ => continue,
                }
            } else {
                ((i, j - 1), (i, j))
            };
            let (a, b) = (field.cell(pair.0 .0, pair.0 .1), field.cell(pair.1 .0, pair.1 .1));
            for t in 0..np {
                jumps += 0.5 * mesh.dx * w[t] * (a[last * np + t][BY] - b[t][BY]).abs();
            }
        }
    }
    volume + 2.0 * jumps
}

/// Per-component L2 error against a pointwise reference.
pub fn l2_error(
    field: &CellField,
    exact: &dyn Fn(f64, f64) -> ConsState,
    ops: &SbpOperators,
    mesh: &Mesh,
) -> [f64; 8] {
    let np = ops.np();
    let mut sq = [0.0; 8];
    for j in 0..mesh.ny {
        for i in 0..mesh.nx {
            let cell = field.cell(i, j);
            for j1 in 0..np {
                for i1 in 0..np {
                    let n = j1 * np + i1;
                    let e = exact(mesh.node_x(ops, i as isize, i1), mesh.node_y(ops, j as isize, j1));
                    let wgt = node_weight(ops, mesh, n);
                    for q in 0..8 {
                        let d = cell[n][q] - e[q];
                        sq[q] += wgt * d * d;
                    }
                }
            }
        }
    }
    sq.map(f64::sqrt)
}

/// Smallest nodal pressure.
pub fn min_pressure(field: &CellField, gamma: f64) -> f64 {
    field.data.iter().map(|u| pressure(u, gamma)).fold(f64::INFINITY, f64::min)
}

/// Relative drift `|Q - Q0| / |Q0|`, or absolute drift when `Q0` vanishes.
pub fn drift(now: f64, initial: f64) -> f64 {
    let d = (now - initial).abs();
    if initial == 0.0 {
        d
    } else {
        d / initial.abs()
    }
}

/// Vector drift in the L1 norm, absolute when the initial vector vanishes.
pub fn vector_drift(now: &[f64], initial: &[f64]) -> f64 {
    let num: f64 = now.iter().zip(initial).map(|(a, b)| (a - b).abs()).sum();
    let den: f64 = initial.iter().map(|v| v.abs()).sum();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Drifts of density, momentum, energy and magnetic field relative to a
/// baseline set of totals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationReport {
    pub rho: f64,
    pub momentum: f64,
    pub energy: f64,
    pub magnetic: f64,
}

pub fn conservation_report(now: &[f64; 8], initial: &[f64; 8]) -> ConservationReport {
    ConservationReport {
        rho: drift(now[RHO], initial[RHO]),
        momentum: vector_drift(&[now[MX], now[MY], now[MZ]], &[initial[MX], initial[MY], initial[MZ]]),
        energy: drift(now[ENERGY], initial[ENERGY]),
        magnetic: vector_drift(&now[BX..], &initial[BX..]),
    }
}

/// One line of the diagnostics time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRow {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub total_entropy: f64,
    pub div_norm: f64,
    pub drift_rho: f64,
    pub drift_mom: f64,
    pub drift_energy: f64,
    pub drift_b: f64,
    pub theta_min: f64,
    pub p_min: f64,
    pub energy_correction_cum: f64,
}

impl DiagnosticsRow {
    pub const HEADER: &'static str = "step,time,dt,total_entropy,div_norm,drift_rho,drift_mom,drift_energy,drift_B,theta_min,p_min,energy_correction_cum";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.step,
            self.time,
            self.dt,
            self.total_entropy,
            self.div_norm,
            self.drift_rho,
            self.drift_mom,
            self.drift_energy,
            self.drift_b,
            self.theta_min,
            self.p_min,
            self.energy_correction_cum
        )
    }
}

/// Collects diagnostics rows at a fixed cadence relative to the initial totals.
#[derive(Debug, Clone)]
pub struct Monitor {
    pub every: usize,
    initial: Option<[f64; 8]>,
    pub rows: Vec<DiagnosticsRow>,
}

impl Monitor {
    pub fn new(every: usize) -> Self {
        Self {
            every: every.max(1),
            initial: None,
            rows: Vec::new(),
        }
    }

    /// Whether step `step` should be recorded; the last step is always forced
    /// by the caller.
    pub fn due(&self, step: usize) -> bool {
        step.is_multiple_of(self.every)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn record(
        &mut self,
        field: &CellField,
        ops: &SbpOperators,
        mesh: &Mesh,
        gamma: f64,
        step: usize,
        time: f64,
        dt: f64,
        theta_min: f64,
        energy_correction: f64,
    ) -> Result<DiagnosticsRow> {
        let totals = conserved_totals(field, ops, mesh);
        let initial = *self.initial.get_or_insert(totals);
        let rep = conservation_report(&totals, &initial);
        let row = DiagnosticsRow {
            step,
            time,
            dt,
            total_entropy: total_entropy(field, ops, mesh, gamma)?,
            div_norm: divergence_norm(field, ops, mesh),
            drift_rho: rep.rho,
            drift_mom: rep.momentum,
            drift_energy: rep.energy,
            drift_b: rep.magnetic,
            theta_min,
            p_min: min_pressure(field, gamma),
            energy_correction_cum: energy_correction,
        };
        self.rows.push(row);
        Ok(row)
    }
}
