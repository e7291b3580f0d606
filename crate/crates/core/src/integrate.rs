//! Fully discrete stepping: forward-Euler stages (cell update, edge update,
//! limiting, reconstruction with energy correction) combined by the ten-stage
//! fourth-order SSP Runge-Kutta method.

use crate::dg_core::{compute_rhs_padded, RhsWorkspace};
use crate::error::{Error, Location, Result};
use crate::grid::{CellField, EdgeField, Mesh, PaddedField};
use crate::induction::edge_rhs;
use crate::limiter::{jump_indicator, scale_cell, scale_edges, LimiterParams};
use crate::operators::SbpOperators;
use crate::reconstruct::{reconstruct_field, ReconSystem};
use crate::state::{cons_to_prim, fast_speed};

pub const DEFAULT_CFL: f64 = 0.45;

/// States that the Runge-Kutta driver can combine linearly.
pub trait RkState: Sized {
    fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Self;
}

impl RkState for f64 {
    fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        a * x + b * y
    }
}

/// One step of the ten-stage fourth-order SSP Runge-Kutta method.
///
/// `euler(u, h)` performs a complete forward-Euler stage of size `h`.
pub fn ssprk104<S, F>(u: &S, dt: f64, mut euler: F) -> Result<S>
where
    S: RkState + Clone,
    F: FnMut(&S, f64) -> Result<S>,
{
    let h = dt / 6.0;
    let mut q1 = u.clone();
    for _ in 0..5 {
        q1 = euler(&q1, h)?;
    }
    let q2 = S::lincomb(1.0 / 25.0, u, 9.0 / 25.0, &q1);
    // 15 q2 - 5 q1 written as a convex combination of u and q1
    q1 = S::lincomb(0.6, u, 0.4, &q1);
    for _ in 0..4 {
        q1 = euler(&q1, h)?;
    }
    let last = euler(&q1, h)?;
    Ok(S::lincomb(1.0, &q2, 0.6, &last))
}

/// Cell nodal values, edge moments and the accumulated energy correction.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub field: CellField,
    pub edges: EdgeField,
    /// Domain integral of all energy corrections applied so far.
    pub energy_correction: f64,
}

impl RkState for SolverState {
    fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        Self {
            field: CellField::lincomb(a, &x.field, b, &y.field),
            edges: EdgeField::lincomb(a, &x.edges, b, &y.edges),
            energy_correction: a * x.energy_correction + b * y.energy_correction,
        }
    }
}

/// Maximum signal speeds `(alpha_x, alpha_y)` over all nodes.
pub fn max_speeds(field: &CellField, gamma: f64) -> Result<(f64, f64)> {
    let np = field.np;
    let (mut ax, mut ay): (f64, f64) = (0.0, 0.0);
    for (c, cell) in field.data.chunks(np * np).enumerate() {
        for (n, u) in cell.iter().enumerate() {
            let at = || Location {
                cell: (c % field.nx, c / field.nx),
                node: (n % np, n / np),
            };
            let w = cons_to_prim(u, gamma).map_err(|e| e.at(at()))?;
            let cx = fast_speed(&w, gamma, 0).map_err(|e| e.at(at()))?;
            let cy = fast_speed(&w, gamma, 1).map_err(|e| e.at(at()))?;
            ax = ax.max(w.u[0].abs() + cx);
            ay = ay.max(w.u[1].abs() + cy);
        }
    }
    Ok((ax, ay))
}

/// Stable time step `cfl / (alpha_x / dx + alpha_y / dy)`.
pub fn compute_dt(field: &CellField, mesh: &Mesh, gamma: f64, cfl: f64) -> Result<f64> {
    let (ax, ay) = max_speeds(field, gamma)?;
    let dt = cfl / (ax / mesh.dx + ay / mesh.dy);
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::NonFinite {
            what: "time step",
            location: None,
        });
    }
    Ok(dt)
}

/// Discretization context shared by all stages.
pub struct Solver {
    pub mesh: Mesh,
    pub ops: SbpOperators,
    pub gamma: f64,
    pub cfl: f64,
    pub limiter: LimiterParams,
    recon: ReconSystem,
    ws: RhsWorkspace,
    theta_min: f64,
}

impl Solver {
    pub fn new(mesh: Mesh, k: usize, gamma: f64, cfl: f64, limiter: LimiterParams) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(Error::Config(format!("cfl must lie in (0, 1], got {cfl}")));
        }
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(Error::Config(format!("gamma must exceed 1, got {gamma}")));
        }
        limiter.validate()?;
        let ops = SbpOperators::new(k)?;
        if limiter.enabled && k == 0 {
            log::warn!("limiter requested at k = 0 where it is undefined; running without it");
        }
        let recon = ReconSystem::new(&ops, mesh.dx, mesh.dy)?;
        let ws = RhsWorkspace::new(mesh.nx, mesh.ny, ops.np());
        Ok(Self {
            mesh,
            ops,
            gamma,
            cfl,
            limiter,
            recon,
            ws,
            theta_min: 1.0,
        })
    }

    pub fn degree(&self) -> usize {
        self.ops.degree
    }

    /// Builds a consistent initial state: the interior field is reconstructed
    /// from the edges with pressure-preserving energy correction.
    pub fn initialize(&self, mut field: CellField, edges: EdgeField) -> Result<SolverState> {
        reconstruct_field(&self.recon, &mut field, &edges, &self.mesh, &self.ops, self.gamma)?;
        Ok(SolverState {
            field,
            edges,
            energy_correction: 0.0,
        })
    }

    pub fn compute_dt(&self, field: &CellField) -> Result<f64> {
        compute_dt(field, &self.mesh, self.gamma, self.cfl)
    }

    /// Smallest limiter factor applied since the last call to `take_theta_min`.
    pub fn take_theta_min(&mut self) -> f64 {
        std::mem::replace(&mut self.theta_min, 1.0)
    }

    /// Semi-discrete right-hand sides of the cells and edges.
    pub fn rhs(&mut self, state: &SolverState) -> Result<(CellField, EdgeField)> {
        let padded = PaddedField::build(&self.mesh, &self.ops, &state.field)?;
        let rhs = compute_rhs_padded(&state.field, &padded, &self.mesh, &self.ops, self.gamma, &mut self.ws)?;
        let erhs = edge_rhs(&self.ws, &self.mesh, &self.ops);
        Ok((rhs, erhs))
    }

    /// One forward-Euler stage including limiting and reconstruction.
    pub fn euler_stage(&mut self, state: &SolverState, dt: f64) -> Result<SolverState> {
        let (rhs, erhs) = self.rhs(state)?;
        let mut field = CellField::lincomb(1.0, &state.field, dt, &rhs);
        let mut edges = EdgeField::lincomb(1.0, &state.edges, dt, &erhs);
        edges.sync_periodic(&self.mesh);

        if self.limiter.active(self.ops.degree) {
            let padded = PaddedField::build(&self.mesh, &self.ops, &field)?;
            let theta = jump_indicator(&padded, &self.mesh, &self.ops, self.gamma, &self.limiter, dt)?;
            for j in 0..self.mesh.ny {
                for i in 0..self.mesh.nx {
                    let t = theta[j * self.mesh.nx + i];
                    scale_cell(field.cell_mut(i, j), &self.ops.weights, t);
                    self.theta_min = self.theta_min.min(t);
                }
            }
            scale_edges(&mut edges, &theta, &self.mesh);
            edges.sync_periodic(&self.mesh);
        }

        let de = reconstruct_field(&self.recon, &mut field, &edges, &self.mesh, &self.ops, self.gamma)?;
        if !(field.data.iter().all(|u| u.is_finite()) && de.is_finite()) {
            return Err(Error::NonFinite {
                what: "stage state",
                location: None,
            });
        }
        Ok(SolverState {
            field,
            edges,
            energy_correction: state.energy_correction + de,
        })
    }

    /// One SSP-RK step; `observer` sees every intermediate Euler stage.
    pub fn step_observed(
        &mut self,
        state: &SolverState,
        dt: f64,
        observer: &mut dyn FnMut(&SolverState) -> Result<()>,
    ) -> Result<SolverState> {
        ssprk104(state, dt, |s, h| {
            let next = self.euler_stage(s, h)?;
            observer(&next)?;
            Ok(next)
        })
    }

    pub fn step(&mut self, state: &SolverState, dt: f64) -> Result<SolverState> {
        self.step_observed(state, dt, &mut |_| Ok(()))
    }
}

/// Per-step observer: solver, step index, time, step size and state.
pub type StepCallback<'a> = dyn FnMut(&mut Solver, usize, f64, f64, &SolverState) -> Result<()> + 'a;

/// Time-stepping loop with a per-step callback.
///
/// The callback receives the step index, time, step size and state after the
/// step; the last step is shortened to land on `t_end`. Step 0 (the initial
/// state, `dt = 0`) is always reported.
pub fn advance(
    solver: &mut Solver,
    mut state: SolverState,
    t_end: f64,
    max_steps: Option<usize>,
    on_step: &mut StepCallback,
) -> Result<SolverState> {
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Config(format!("t_end must be finite and non-negative, got {t_end}")));
    }
    on_step(solver, 0, 0.0, 0.0, &state)?;
    let mut t = 0.0;
    let mut step = 0;
    while t < t_end && max_steps.is_none_or(|m| step < m) {
        let mut dt = solver.compute_dt(&state.field).map_err(|e| e.at_step(step + 1, t))?;
        if t + dt >= t_end {
            dt = t_end - t;
        }
        state = solver.step(&state, dt).map_err(|e| e.at_step(step + 1, t))?;
        step += 1;
        t = if t + dt >= t_end { t_end } else { t + dt };
        on_step(solver, step, t, dt, &state)?;
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{init_cell_field, init_edge_field, Boundaries};
    use crate::reconstruct::check_divfree;
    use crate::state::{prim_to_cons, Primitive, BX, BY, RHO};

    const G: f64 = 5.0 / 3.0;

    #[test]
    fn static_gas_time_step() {
        // a = sqrt(gamma p / rho) = 1
        let ops = SbpOperators::new(1).unwrap();
        let mesh = Mesh::new(2, 2, [0.0, 2.0], [0.0, 2.0], Boundaries::periodic()).unwrap();
        let u = prim_to_cons(&Primitive::new(G, [0.0; 3], 1.0, [0.0; 3]), G);
        let f = init_cell_field(&mesh, &ops, G, &|_, _| u).unwrap();
        let dt = compute_dt(&f, &mesh, G, 0.45).unwrap();
        assert!((dt - 0.225).abs() < 1e-15);
        // doubling every speed halves the step
        let u2 = prim_to_cons(&Primitive::new(G, [0.0; 3], 4.0, [0.0; 3]), G);
        let f2 = init_cell_field(&mesh, &ops, G, &|_, _| u2).unwrap();
        assert!((compute_dt(&f2, &mesh, G, 0.45).unwrap() - 0.1125).abs() < 1e-15);
    }

    #[test]
    fn ssprk104_is_fourth_order() {
        // y' = y, exact exp(t)
        let err = |n: usize| {
            let dt = 1.0 / n as f64;
            let mut y = 1.0;
            for _ in 0..n {
                y = ssprk104(&y, dt, |v: &f64, h| Ok(v + h * v)).unwrap();
            }
            (y - 1f64.exp()).abs()
        };
        let (e1, e2) = (err(4), err(8));
        let order = (e1 / e2).log2();
        assert!(order > 3.8 && order < 4.3, "order {order}");
    }

    #[test]
    fn ssprk104_integrates_cubic_forcing_exactly() {
        // y' = 4 t^3 through an autonomous system (y, t)
        #[derive(Clone)]
        struct Pair(f64, f64);
        impl RkState for Pair {
            fn lincomb(a: f64, x: &Self, b: f64, y: &Self) -> Self {
                Pair(a * x.0 + b * y.0, a * x.1 + b * y.1)
            }
        }
        let out = ssprk104(&Pair(0.0, 0.0), 0.7, |p: &Pair, h| Ok(Pair(p.0 + h * 4.0 * p.1.powi(3), p.1 + h))).unwrap();
        assert!((out.1 - 0.7).abs() < 1e-15);
        assert!((out.0 - 0.7f64.powi(4)).abs() < 1e-14, "{}", out.0);
    }

    fn uniform_solver() -> (Solver, SolverState) {
        let mesh = Mesh::new(4, 3, [0.0, 1.0], [0.0, 1.0], Boundaries::periodic()).unwrap();
        let solver = Solver::new(mesh, 2, G, 0.45, LimiterParams { enabled: true, c0: 1.0 }).unwrap();
        let w = Primitive::new(1.1, [0.4, -0.2, 0.1], 0.9, [0.3, 0.6, 0.2]);
        let u = prim_to_cons(&w, G);
        let f = init_cell_field(&solver.mesh, &solver.ops, G, &|_, _| u).unwrap();
        let e = init_edge_field(&solver.mesh, &solver.ops, &|_, _| [0.3, 0.6], None).unwrap();
        let s = solver.initialize(f, e).unwrap();
        (solver, s)
    }

    #[test]
    fn constant_state_is_a_fixed_point() {
        let (mut solver, s) = uniform_solver();
        let dt = solver.compute_dt(&s.field).unwrap();
        let e = solver.euler_stage(&s, dt).unwrap();
        let n = solver.step(&s, dt).unwrap();
        for out in [&e, &n] {
            for (a, b) in out.field.data.iter().zip(&s.field.data) {
                assert!((*a - *b).max_abs() < 1e-12);
            }
            for (a, b) in out.edges.bx.iter().chain(&out.edges.by).zip(s.edges.bx.iter().chain(&s.edges.by)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn euler_stage_keeps_divergence_free_and_conserves() {
        let mesh = Mesh::new(6, 6, [0.0, 1.0], [0.0, 1.0], Boundaries::periodic()).unwrap();
        let mut solver = Solver::new(mesh, 2, G, 0.45, LimiterParams::default()).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        let a = move |x: f64, y: f64| 0.05 * (two_pi * x).sin() * (two_pi * y).cos();
        let b = move |x: f64, y: f64| {
            [
                -0.05 * two_pi * (two_pi * x).sin() * (two_pi * y).sin(),
                -0.05 * two_pi * (two_pi * x).cos() * (two_pi * y).cos(),
            ]
        };
        let ic = move |x: f64, y: f64| {
            let bb = b(x, y);
            prim_to_cons(
                &Primitive::new(
                    1.0 + 0.2 * (two_pi * x).sin(),
                    [0.5, 0.3 * (two_pi * y).cos(), 0.0],
                    1.0,
                    [0.4 + bb[0], 0.2 + bb[1], 0.1],
                ),
                G,
            )
        };
        let f = init_cell_field(&solver.mesh, &solver.ops, G, &ic).unwrap();
        let e = init_edge_field(
            &solver.mesh,
            &solver.ops,
            &|x, y| {
                let bb = b(x, y);
                [0.4 + bb[0], 0.2 + bb[1]]
            },
            Some(&|x, y| a(x, y) + 0.4 * y - 0.2 * x),
        )
        .unwrap();
        let s = solver.initialize(f, e).unwrap();
        let dt = solver.compute_dt(&s.field).unwrap();
        let n = solver.euler_stage(&s, dt).unwrap();
        let rep = check_divfree(&n.field, &n.edges, &solver.mesh, &solver.ops);
        assert!(rep.max_divergence < 1e-12 && rep.max_trace_mismatch < 1e-12, "{rep:?}");
        let totals = |f: &CellField| {
            let np = solver.ops.np();
            let w = &solver.ops.weights;
            let mut t = [0.0; 8];
            for cell in f.data.chunks(np * np) {
                for (n, u) in cell.iter().enumerate() {
                    for q in 0..8 {
                        t[q] += w[n % np] * w[n / np] * u[q];
                    }
                }
            }
            t
        };
        let (t0, t1) = (totals(&s.field), totals(&n.field));
        for q in [RHO, 1, 2, 3, BX, BY, 7] {
            assert!((t1[q] - t0[q]).abs() <= 1e-12 * t0[q].abs().max(1.0), "component {q}");
        }
    }

    #[test]
    fn advance_zero_time_reports_initial_state_only() {
        let (mut solver, s) = uniform_solver();
        let mut calls = Vec::new();
        advance(&mut solver, s, 0.0, None, &mut |_, step, t, _, _| {
            calls.push((step, t));
            Ok(())
        })
        .unwrap();
        assert_eq!(calls, vec![(0, 0.0)]);
    }

    #[test]
    fn advance_lands_on_end_time() {
        let (mut solver, s) = uniform_solver();
        let dt = solver.compute_dt(&s.field).unwrap();
        let t_end = 2.5 * dt;
        let mut times = Vec::new();
        advance(&mut solver, s, t_end, None, &mut |_, _, t, _, _| {
            times.push(t);
            Ok(())
        })
        .unwrap();
        assert_eq!(times.len(), 4);
        assert_eq!(*times.last().unwrap(), t_end);
    }

    #[test]
    fn invalid_configuration_is_rejected() {
        let mesh = Mesh::new(2, 2, [0.0, 1.0], [0.0, 1.0], Boundaries::periodic()).unwrap();
        assert!(Solver::new(mesh.clone(), 2, G, 1.5, LimiterParams::default()).is_err());
        assert!(Solver::new(mesh.clone(), 2, 1.0, 0.4, LimiterParams::default()).is_err());
        assert!(Solver::new(mesh, 2, G, 0.4, LimiterParams { enabled: true, c0: -1.0 }).is_err());
    }
}
