//! Conserved/primitive algebra, physical fluxes and the entropy pair of ideal MHD.

use crate::error::{Error, Result};
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Sub};

pub const RHO: usize = 0;
pub const MX: usize = 1;
pub const MY: usize = 2;
pub const MZ: usize = 3;
pub const ENERGY: usize = 4;
pub const BX: usize = 5;
pub const BY: usize = 6;
pub const BZ: usize = 7;

/// Density and pressure at or below this value are treated as nonpositive.
pub const ADMISSIBILITY_FLOOR: f64 = 1e-12;

/// Default ratio of specific heats.
pub const DEFAULT_GAMMA: f64 = 5.0 / 3.0;

/// Conserved variables `(rho, rho u_x, rho u_y, rho u_z, E, B_x, B_y, B_z)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConsState(pub [f64; 8]);

impl ConsState {
    pub const ZERO: ConsState = ConsState([0.0; 8]);

    pub fn rho(&self) -> f64 {
        self.0[RHO]
    }

    pub fn momentum(&self) -> [f64; 3] {
        [self.0[MX], self.0[MY], self.0[MZ]]
    }

    pub fn energy(&self) -> f64 {
        self.0[ENERGY]
    }

    pub fn b(&self) -> [f64; 3] {
        [self.0[BX], self.0[BY], self.0[BZ]]
    }

    pub fn dot(&self, other: &[f64; 8]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<usize> for ConsState {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ConsState {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for ConsState {
    type Output = ConsState;
    #[inline]
    fn add(self, rhs: ConsState) -> ConsState {
        ConsState(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for ConsState {
    type Output = ConsState;
    #[inline]
    fn sub(self, rhs: ConsState) -> ConsState {
        ConsState(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}

impl Mul<f64> for ConsState {
    type Output = ConsState;
    #[inline]
    fn mul(self, s: f64) -> ConsState {
        ConsState(self.0.map(|v| v * s))
    }
}

impl AddAssign for ConsState {
    #[inline]
    fn add_assign(&mut self, rhs: ConsState) {
        for i in 0..8 {
            self.0[i] += rhs.0[i];
        }
    }
}

/// Primitive variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub u: [f64; 3],
    pub p: f64,
    pub b: [f64; 3],
}

#[inline]
pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl Primitive {
    pub fn new(rho: f64, u: [f64; 3], p: f64, b: [f64; 3]) -> Self {
        Self { rho, u, p, b }
    }

    pub fn b2(&self) -> f64 {
        dot3(&self.b, &self.b)
    }

    pub fn u2(&self) -> f64 {
        dot3(&self.u, &self.u)
    }

    /// Total pressure `p + |B|^2 / 2`.
    pub fn p_star(&self) -> f64 {
        self.p + 0.5 * self.b2()
    }

    pub fn beta(&self) -> f64 {
        self.rho / (2.0 * self.p)
    }

    pub fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma * self.p / self.rho).sqrt()
    }

    /// `E_z = u_y B_x - u_x B_y`.
    pub fn ez(&self) -> f64 {
        self.u[1] * self.b[0] - self.u[0] * self.b[1]
    }

    pub fn to_cons(&self, gamma: f64) -> ConsState {
        prim_to_cons(self, gamma)
    }
}

pub fn prim_to_cons(w: &Primitive, gamma: f64) -> ConsState {
    let e = w.p / (gamma - 1.0) + 0.5 * w.rho * w.u2() + 0.5 * w.b2();
    ConsState([
        w.rho,
        w.rho * w.u[0],
        w.rho * w.u[1],
        w.rho * w.u[2],
        e,
        w.b[0],
        w.b[1],
        w.b[2],
    ])
}

/// Pressure of a conserved state without admissibility checks.
#[inline]
pub fn pressure(u: &ConsState, gamma: f64) -> f64 {
    let rho = u[RHO];
    let m2 = u[MX] * u[MX] + u[MY] * u[MY] + u[MZ] * u[MZ];
    let b2 = u[BX] * u[BX] + u[BY] * u[BY] + u[BZ] * u[BZ];
    (gamma - 1.0) * (u[ENERGY] - 0.5 * m2 / rho - 0.5 * b2)
}

pub fn cons_to_prim(u: &ConsState, gamma: f64) -> Result<Primitive> {
    if !u.is_finite() {
        return Err(Error::NonFinite {
            what: "conserved state",
            location: None,
        });
    }
    let rho = u[RHO];
    if rho <= ADMISSIBILITY_FLOOR {
        return Err(Error::Inadmissible {
            quantity: "density",
            value: rho,
            location: None,
        });
    }
    let p = pressure(u, gamma);
    if p <= ADMISSIBILITY_FLOOR || !p.is_finite() {
        return Err(Error::Inadmissible {
            quantity: "pressure",
            value: p,
            location: None,
        });
    }
    Ok(Primitive {
        rho,
        u: [u[MX] / rho, u[MY] / rho, u[MZ] / rho],
        p,
        b: [u[BX], u[BY], u[BZ]],
    })
}

/// Physical flux in direction `dir` (0 = x, 1 = y) from primitive variables.
pub fn flux_prim(w: &Primitive, energy: f64, dir: usize) -> ConsState {
    let un = w.u[dir];
    let bn = w.b[dir];
    let ps = w.p_star();
    let ub = dot3(&w.u, &w.b);
    let mut f = [0.0; 8];
    f[RHO] = w.rho * un;
    for c in 0..3 {
        f[MX + c] = w.rho * un * w.u[c] - bn * w.b[c];
        f[BX + c] = un * w.b[c] - w.u[c] * bn;
    }
    f[MX + dir] += ps;
    f[ENERGY] = un * (energy + ps) - bn * ub;
    f[BX + dir] = 0.0;
    ConsState(f)
}

pub fn physical_flux(u: &ConsState, gamma: f64, dir: usize) -> Result<ConsState> {
    let w = cons_to_prim(u, gamma)?;
    Ok(flux_prim(&w, u[ENERGY], dir))
}

pub fn physical_flux_x(u: &ConsState, gamma: f64) -> Result<ConsState> {
    physical_flux(u, gamma, 0)
}

pub fn physical_flux_y(u: &ConsState, gamma: f64) -> Result<ConsState> {
    physical_flux(u, gamma, 1)
}

/// Fast magnetosonic speed in direction `dir` with the relaxation factor `x`
/// applied to the magnetic terms (`x = 1` gives the usual fast speed).
pub fn fast_speed_relaxed(w: &Primitive, gamma: f64, dir: usize, x: f64) -> Result<f64> {
    let a2 = gamma * w.p / w.rho;
    let rx = w.rho * x;
    let b2 = w.b2() / rx;
    let bn2 = w.b[dir] * w.b[dir] / rx;
    let sum = a2 + b2;
    let mut disc = sum * sum - 4.0 * a2 * bn2;
    if disc < 0.0 {
        if disc < -1e-12 * sum * sum {
            return Err(Error::Inadmissible {
                quantity: "fast-speed radicand",
                value: disc,
                location: None,
            });
        }
        disc = 0.0;
    }
    let c2 = 0.5 * (sum + disc.sqrt());
    if !c2.is_finite() {
        return Err(Error::NonFinite {
            what: "fast magnetosonic speed",
            location: None,
        });
    }
    Ok(c2.sqrt())
}

pub fn fast_speed(w: &Primitive, gamma: f64, dir: usize) -> Result<f64> {
    fast_speed_relaxed(w, gamma, dir, 1.0)
}

/// Entropy pair, entropy variables and potentials at one state.
#[derive(Debug, Clone, Copy)]
pub struct EntropyQuantities {
    /// Thermodynamic entropy `ln(p rho^-gamma)`.
    pub s: f64,
    /// Mathematical entropy `-rho s / (gamma - 1)`.
    pub entropy: f64,
    pub flux_x: f64,
    pub flux_y: f64,
    pub v: [f64; 8],
    pub beta: f64,
    /// `2 beta (u . B)`.
    pub phi: f64,
    pub psi_x: f64,
    pub psi_y: f64,
}

impl EntropyQuantities {
    pub fn flux(&self, dir: usize) -> f64 {
        if dir == 0 {
            self.flux_x
        } else {
            self.flux_y
        }
    }

    pub fn psi(&self, dir: usize) -> f64 {
        if dir == 0 {
            self.psi_x
        } else {
            self.psi_y
        }
    }
}

pub fn entropy_variables(w: &Primitive, gamma: f64) -> [f64; 8] {
    let s = (w.p * w.rho.powf(-gamma)).ln();
    let beta = w.beta();
    [
        (gamma - s) / (gamma - 1.0) - beta * w.u2(),
        2.0 * beta * w.u[0],
        2.0 * beta * w.u[1],
        2.0 * beta * w.u[2],
        -2.0 * beta,
        2.0 * beta * w.b[0],
        2.0 * beta * w.b[1],
        2.0 * beta * w.b[2],
    ]
}

/// Entropy of a state (`-rho s / (gamma - 1)`).
pub fn entropy(u: &ConsState, gamma: f64) -> Result<f64> {
    let w = cons_to_prim(u, gamma)?;
    Ok(-w.rho * (w.p * w.rho.powf(-gamma)).ln() / (gamma - 1.0))
}

/// The potentials are those of the symmetrized system, whose fluxes carry the
/// extra `phi'(V) B_n` term: `psi_n = V^T F_n - q_n + phi B_n`, which reduces to
/// `rho u_n + beta u_n |B|^2`.
pub fn entropy_quantities(u: &ConsState, gamma: f64) -> Result<EntropyQuantities> {
    let w = cons_to_prim(u, gamma)?;
    let s = (w.p * w.rho.powf(-gamma)).ln();
    let beta = w.beta();
    let b2 = w.b2();
    let factor = -w.rho * s / (gamma - 1.0);
    Ok(EntropyQuantities {
        s,
        entropy: factor,
        flux_x: factor * w.u[0],
        flux_y: factor * w.u[1],
        v: entropy_variables(&w, gamma),
        beta,
        phi: 2.0 * beta * dot3(&w.u, &w.b),
        psi_x: w.rho * w.u[0] + beta * w.u[0] * b2,
        psi_y: w.rho * w.u[1] + beta * w.u[1] * b2,
    })
}

/// `phi` written in entropy variables: `-(V_u . V_B) / V_5`.
pub fn phi_of_v(v: &[f64; 8]) -> f64 {
    -(v[1] * v[5] + v[2] * v[6] + v[3] * v[7]) / v[4]
}

/// Gradient of `phi` with respect to the entropy variables: `(0, B, u . B, u)`.
pub fn phi_gradient(v: &[f64; 8]) -> [f64; 8] {
    let inv = -1.0 / v[4];
    let dot = v[1] * v[5] + v[2] * v[6] + v[3] * v[7];
    [
        0.0,
        v[5] * inv,
        v[6] * inv,
        v[7] * inv,
        dot / (v[4] * v[4]),
        v[1] * inv,
        v[2] * inv,
        v[3] * inv,
    ]
}
