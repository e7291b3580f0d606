//! Two-point numerical fluxes: the entropy-conservative flux, the HLL flux with
//! 3-wave relaxation speed estimates, and the vertex electric field solver.
//!
//! All directional routines take `dir` (0 = x, 1 = y); the y-direction flux is
//! the x-direction formula with the roles of the x and y components exchanged.

use crate::error::{Error, Result};
use crate::state::{
    cons_to_prim, dot3, fast_speed, fast_speed_relaxed, flux_prim, ConsState, Primitive, BX, ENERGY,
    MX, RHO,
};

/// Logarithmic mean of two positive numbers.
pub fn log_mean(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Inadmissible {
            quantity: "logarithmic mean argument",
            value: a.min(b),
            location: None,
        });
    }
    Ok(log_mean_unchecked(a, b))
}

#[inline]
pub(crate) fn log_mean_unchecked(a: f64, b: f64) -> f64 {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let r = (b - a) / a;
    let l = r.ln_1p();
    if l.abs() < 1e-4 {
        let xi = (a - b) / (a + b);
        let u = xi * xi;
        0.5 * (a + b) / (1.0 + u * (1.0 / 3.0 + u * (1.0 / 5.0 + u / 7.0)))
    } else {
        (b - a) / l
    }
}

/// Per-node quantities reused by every entropy-conservative flux evaluation.
#[derive(Debug, Clone, Copy)]
pub struct EcPoint {
    pub rho: f64,
    pub u: [f64; 3],
    pub b: [f64; 3],
    pub beta: f64,
    pub u2: f64,
    pub b2: f64,
}

impl EcPoint {
    pub fn from_prim(w: &Primitive) -> Self {
        Self {
            rho: w.rho,
            u: w.u,
            b: w.b,
            beta: w.beta(),
            u2: w.u2(),
            b2: w.b2(),
        }
    }

    pub fn new(u: &ConsState, gamma: f64) -> Result<Self> {
        Ok(Self::from_prim(&cons_to_prim(u, gamma)?))
    }
}

/// Entropy-conservative flux between two prepared points.
pub fn ec_flux_points(l: &EcPoint, r: &EcPoint, gamma: f64, dir: usize) -> ConsState {
    let rho_ln = log_mean_unchecked(l.rho, r.rho);
    let beta_ln = log_mean_unchecked(l.beta, r.beta);
    let rho_avg = 0.5 * (l.rho + r.rho);
    let beta_avg = 0.5 * (l.beta + r.beta);
    let u_avg: [f64; 3] = std::array::from_fn(|c| 0.5 * (l.u[c] + r.u[c]));
    let b_avg: [f64; 3] = std::array::from_fn(|c| 0.5 * (l.b[c] + r.b[c]));
    let bu_avg: [f64; 3] = std::array::from_fn(|c| 0.5 * (l.beta * l.u[c] + r.beta * r.u[c]));
    let b2_avg = 0.5 * (l.b2 + r.b2);
    let u2_avg = 0.5 * (l.u2 + r.u2);
    let bn = b_avg[dir];

    let mut f = [0.0; 8];
    f[RHO] = rho_ln * u_avg[dir];
    for c in 0..3 {
        f[MX + c] = u_avg[c] * f[RHO] - bn * b_avg[c];
        f[BX + c] = (bu_avg[dir] * b_avg[c] - bu_avg[c] * bn) / beta_avg;
    }
    f[MX + dir] += rho_avg / (2.0 * beta_avg) + 0.5 * b2_avg;
    f[BX + dir] = 0.0;
    f[ENERGY] = 0.5 * (1.0 / ((gamma - 1.0) * beta_ln) - u2_avg) * f[RHO]
        + u_avg[0] * f[MX]
        + u_avg[1] * f[MX + 1]
        + u_avg[2] * f[MX + 2]
        + b_avg[0] * f[BX]
        + b_avg[1] * f[BX + 1]
        + b_avg[2] * f[BX + 2]
        - 0.5 * u_avg[dir] * b2_avg
        + dot3(&u_avg, &b_avg) * bn;
    ConsState(f)
}

pub fn ec_flux(ul: &ConsState, ur: &ConsState, gamma: f64, dir: usize) -> Result<ConsState> {
    let l = EcPoint::new(ul, gamma)?;
    let r = EcPoint::new(ur, gamma)?;
    Ok(ec_flux_points(&l, &r, gamma, dir))
}

pub fn ec_flux_x(ul: &ConsState, ur: &ConsState, gamma: f64) -> Result<ConsState> {
    ec_flux(ul, ur, gamma, 0)
}

pub fn ec_flux_y(ul: &ConsState, ur: &ConsState, gamma: f64) -> Result<ConsState> {
    ec_flux(ul, ur, gamma, 1)
}

/// Signed left/right wave speed estimates for one interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSpeeds {
    pub sl: f64,
    pub sr: f64,
}

impl WaveSpeeds {
    /// `min(S_L, 0)`.
    pub fn left(&self) -> f64 {
        self.sl.min(0.0)
    }

    /// `max(S_R, 0)`.
    pub fn right(&self) -> f64 {
        self.sr.max(0.0)
    }
}

/// 3-wave relaxation speed estimates from primitive states.
pub fn bouchut_speeds_prim(
    wl: &Primitive,
    wr: &Primitive,
    gamma: f64,
    dir: usize,
) -> Result<WaveSpeeds> {
    let alpha = 0.5 * (gamma + 1.0);
    let cfl = fast_speed(wl, gamma, dir)?;
    let cfr = fast_speed(wr, gamma, dir)?;
    let ul = wl.u[dir];
    let ur = wr.u[dir];
    let jump = (ul - ur).max(0.0) + (wr.p - wl.p).max(0.0) / (wl.rho * cfl + wr.rho * cfr);
    let relax = |cf: f64| {
        let x_big = jump / cf;
        1.0 - x_big / (1.0 + alpha * x_big)
    };
    let c0l = fast_speed_relaxed(wl, gamma, dir, relax(cfl))?;
    let c0r = fast_speed_relaxed(wr, gamma, dir, relax(cfr))?;
    Ok(WaveSpeeds {
        sl: ul - (c0l + alpha * jump),
        sr: ur + (c0r + alpha * jump),
    })
}

pub fn bouchut_speeds(ul: &ConsState, ur: &ConsState, gamma: f64, dir: usize) -> Result<WaveSpeeds> {
    let wl = cons_to_prim(ul, gamma)?;
    let wr = cons_to_prim(ur, gamma)?;
    bouchut_speeds_prim(&wl, &wr, gamma, dir)
}

pub fn bouchut_speeds_x(ul: &ConsState, ur: &ConsState, gamma: f64) -> Result<WaveSpeeds> {
    bouchut_speeds(ul, ur, gamma, 0)
}

pub fn bouchut_speeds_y(ul: &ConsState, ur: &ConsState, gamma: f64) -> Result<WaveSpeeds> {
    bouchut_speeds(ul, ur, gamma, 1)
}

/// Full result of one HLL evaluation.
#[derive(Debug, Clone, Copy)]
pub struct HllResult {
    pub flux: ConsState,
    pub speeds: WaveSpeeds,
    /// Intermediate HLL state.
    pub star: ConsState,
}

fn nearly_equal(a: &ConsState, b: &ConsState) -> bool {
    (0..8).all(|i| (a[i] - b[i]).abs() <= 1e-12 * (1.0 + a[i].abs().max(b[i].abs())))
}

pub fn hll_full(ul: &ConsState, ur: &ConsState, gamma: f64, dir: usize) -> Result<HllResult> {
    let wl = cons_to_prim(ul, gamma)?;
    let wr = cons_to_prim(ur, gamma)?;
    let speeds = bouchut_speeds_prim(&wl, &wr, gamma, dir)?;
    let fl = flux_prim(&wl, ul[ENERGY], dir);
    let fr = flux_prim(&wr, ur[ENERGY], dir);
    let (sl, sr) = (speeds.left(), speeds.right());
    if speeds.sl >= 0.0 {
        return Ok(HllResult {
            flux: fl,
            speeds,
            star: *ul,
        });
    }
    if speeds.sr <= 0.0 {
        return Ok(HllResult {
            flux: fr,
            speeds,
            star: *ur,
        });
    }
    let ds = sr - sl;
    if ds <= 0.0 {
        if nearly_equal(ul, ur) {
            return Ok(HllResult {
                flux: fl,
                speeds,
                star: *ul,
            });
        }
        return Err(Error::DegenerateSpeeds {
            sl: speeds.sl,
            sr: speeds.sr,
        });
    }
    let inv = 1.0 / ds;
    let flux = ConsState(std::array::from_fn(|i| {
        (sr * fl[i] - sl * fr[i] + sr * sl * (ur[i] - ul[i])) * inv
    }));
    let star = ConsState(std::array::from_fn(|i| {
        (sr * ur[i] - sl * ul[i] - (fr[i] - fl[i])) * inv
    }));
    Ok(HllResult { flux, speeds, star })
}

pub fn hll_flux(ul: &ConsState, ur: &ConsState, gamma: f64, dir: usize) -> Result<ConsState> {
    Ok(hll_full(ul, ur, gamma, dir)?.flux)
}

pub fn hll_flux_x(ul: &ConsState, ur: &ConsState, gamma: f64) -> Result<ConsState> {
    hll_flux(ul, ur, gamma, 0)
}

pub fn hll_flux_y(ul: &ConsState, ur: &ConsState, gamma: f64) -> Result<ConsState> {
    hll_flux(ul, ur, gamma, 1)
}

/// Two-dimensional HLL electric field `E_z` at a vertex.
///
/// Corner states: `LD` lower-left, `LU` upper-left, `RD` lower-right,
/// `RU` upper-right. The one-sided intermediate fields `B_x^{U,*}`,
/// `B_x^{D,*}`, `B_y^{R,*}`, `B_y^{L,*}` are the HLL intermediate states of
/// the corresponding 1D pair.
pub fn vertex_ez(
    ld: &ConsState,
    lu: &ConsState,
    rd: &ConsState,
    ru: &ConsState,
    gamma: f64,
) -> Result<f64> {
    let w_ld = cons_to_prim(ld, gamma)?;
    let w_lu = cons_to_prim(lu, gamma)?;
    let w_rd = cons_to_prim(rd, gamma)?;
    let w_ru = cons_to_prim(ru, gamma)?;

    // x-direction pairs across the vertical line, y-direction pairs across the horizontal line
    let up = hll_full(lu, ru, gamma, 0)?;
    let down = hll_full(ld, rd, gamma, 0)?;
    let right = hll_full(rd, ru, gamma, 1)?;
    let left = hll_full(ld, lu, gamma, 1)?;

    let s_r = up.speeds.sr.max(down.speeds.sr).max(0.0);
    let s_l = up.speeds.sl.min(down.speeds.sl).min(0.0);
    let s_u = right.speeds.sr.max(left.speeds.sr).max(0.0);
    let s_d = right.speeds.sl.min(left.speeds.sl).min(0.0);

    let e_ld = w_ld.ez();
    let e_lu = w_lu.ez();
    let e_rd = w_rd.ez();
    let e_ru = w_ru.ez();

    let ds = (s_r - s_l) * (s_u - s_d);
    if ds == 0.0 {
        return Ok(0.25 * (e_ld + e_lu + e_rd + e_ru));
    }

    let e_star_r = right.flux[BX];
    let e_star_l = left.flux[BX];
    let e_star_u = -up.flux[BX + 1];
    let e_star_d = -down.flux[BX + 1];

    let bx_u = up.star[BX];
    let bx_d = down.star[BX];
    let by_r = right.star[BX + 1];
    let by_l = left.star[BX + 1];

    let bx_ss = (2.0 * s_r * s_u * ru[BX] - 2.0 * s_l * s_u * lu[BX] - 2.0 * s_r * s_d * rd[BX]
        + 2.0 * s_l * s_d * ld[BX]
        - s_r * (e_ru - e_rd)
        + s_l * (e_lu - e_ld)
        - (s_r - s_l) * (e_star_u - e_star_d))
        / (2.0 * ds);
    let by_ss = (2.0 * s_r * s_u * ru[BX + 1] - 2.0 * s_l * s_u * lu[BX + 1]
        - 2.0 * s_r * s_d * rd[BX + 1]
        + 2.0 * s_l * s_d * ld[BX + 1]
        + s_u * (e_ru - e_lu)
        - s_d * (e_rd - e_ld)
        + (s_u - s_d) * (e_star_r - e_star_l))
        / (2.0 * ds);

    let ez = 0.25 * (e_star_r + e_star_l + e_star_u + e_star_d)
        - 0.25 * s_u * (bx_u - bx_ss)
        - 0.25 * s_d * (bx_d - bx_ss)
        + 0.25 * s_r * (by_r - by_ss)
        + 0.25 * s_l * (by_l - by_ss);
    if !ez.is_finite() {
        return Err(Error::NonFinite {
            what: "vertex electric field",
            location: None,
        });
    }
    Ok(ez)
}
