//! Self-checks of the discrete building blocks: summation-by-parts operators,
//! entropy-conservative and entropy-stable fluxes, and the divergence-free
//! reconstruction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::flux::{ec_flux, hll_flux};
use crate::operators::SbpOperators;
use crate::reconstruct::{CellEdges, ReconSystem};
use crate::state::{entropy_quantities, physical_flux, prim_to_cons, ConsState, Primitive, BX};

const GAMMA: f64 = 5.0 / 3.0;
const PAIRS: usize = 1000;

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn random_prim(rng: &mut impl Rng) -> Primitive {
    Primitive {
        rho: rng.random_range(0.2..3.0),
        u: std::array::from_fn(|_| rng.random_range(-1.5..1.5)),
        p: rng.random_range(0.2..3.0),
        b: std::array::from_fn(|_| rng.random_range(-1.5..1.5)),
    }
}

/// `[[V]] . F - [[psi]] + [[phi]] {B_n}` and a magnitude scale for it.
fn entropy_flux_defect(ul: &ConsState, ur: &ConsState, f: &ConsState, dir: usize) -> Result<(f64, f64)> {
    let ql = entropy_quantities(ul, GAMMA)?;
    let qr = entropy_quantities(ur, GAMMA)?;
    let terms: Vec<f64> = (0..8).map(|i| (qr.v[i] - ql.v[i]) * f[i]).collect();
    let lhs: f64 = terms.iter().sum();
    let rhs = (qr.psi(dir) - ql.psi(dir)) - (qr.phi - ql.phi) * 0.5 * (ul[BX + dir] + ur[BX + dir]);
    let scale = terms
        .iter()
        .map(|t| t.abs())
        .sum::<f64>()
        .max(qr.psi(dir).abs() + ql.psi(dir).abs())
        .max(1.0);
    Ok((lhs - rhs, scale))
}

/// SBP property, zero row sums and boundary column sums for `k = 0..=4`.
pub fn check_sbp() -> Result<Check> {
    let mut worst = 0.0f64;
    for k in 0..=4 {
        let ops = SbpOperators::new(k)?;
        let (s, d) = (ops.s_matrix(), ops.d_matrix());
        worst = worst.max(ops.sbp_defect());
        for i in 0..ops.np() {
            worst = worst.max(d.row(i).sum().abs()).max(s.row(i).sum().abs());
            worst = worst.max((s.column(i).sum() - ops.tau[i]).abs());
        }
    }
    Ok(Check {
        name: "sbp",
        passed: worst <= 1e-13,
        detail: format!("k = 0..4, max defect {worst:.2e}"),
    })
}

/// Entropy-conservation identity, symmetry and consistency of the two-point flux.
pub fn check_ec_flux(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut asym, mut incons) = (0.0f64, 0usize, 0.0f64);
    for _ in 0..PAIRS {
        let ul = prim_to_cons(&random_prim(&mut rng), GAMMA);
        let ur = prim_to_cons(&random_prim(&mut rng), GAMMA);
        for dir in 0..2 {
            let f = ec_flux(&ul, &ur, GAMMA, dir)?;
            let (res, scale) = entropy_flux_defect(&ul, &ur, &f, dir)?;
            worst = worst.max(res.abs() / scale);
            if f != ec_flux(&ur, &ul, GAMMA, dir)? {
                asym += 1;
            }
            let fc = ec_flux(&ul, &ul, GAMMA, dir)?;
            let exact = physical_flux(&ul, GAMMA, dir)?;
            for c in 0..8 {
                incons = incons.max((fc[c] - exact[c]).abs() / (1.0 + exact[c].abs()));
            }
        }
    }
    Ok(Check {
        name: "ec_flux",
        passed: worst <= 1e-11 && asym == 0 && incons <= 1e-14,
        detail: format!(
            "{} pairs, max relative residual {worst:.2e}, asymmetric {asym}, consistency {incons:.1e}",
            2 * PAIRS
        ),
    })
}

/// Entropy-stability inequality of the HLL flux for states sharing the normal field.
pub fn check_es_flux(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..PAIRS {
        for dir in 0..2 {
            let wl = random_prim(&mut rng);
            let mut wr = random_prim(&mut rng);
            wr.b[dir] = wl.b[dir];
            let (ul, ur) = (prim_to_cons(&wl, GAMMA), prim_to_cons(&wr, GAMMA));
            let f = hll_flux(&ul, &ur, GAMMA, dir)?;
            worst = worst.max(entropy_flux_defect(&ul, &ur, &f, dir)?.0);
        }
    }
    Ok(Check {
        name: "es_flux",
        passed: worst <= 1e-12,
        detail: format!("{} pairs, min slack {:.2e}", 2 * PAIRS, -worst),
    })
}

/// Closed-form `k = 0` reconstruction, known `k = 1` inverse entries and system sizes.
pub fn check_reconstruction() -> Result<Check> {
    let sys0 = ReconSystem::new(&SbpOperators::new(0)?, 1.0, 1.0)?;
    let (am, ap, bm) = (0.3, -0.7, 1.1);
    let bp = bm - (ap - am);
    let e = [vec![am], vec![ap], vec![bm], vec![bp]];
    let edges = CellEdges { bx_minus: &e[0], bx_plus: &e[1], by_minus: &e[2], by_plus: &e[3] };
    let (bx, by) = sys0.reconstruct_cell(&edges, &[5.0, -2.0, 0.1, 7.0], &[1.0, 2.0, 3.0, 4.0], (0, 0))?;
    let k0_err = (0..4)
        .map(|n| (bx[n] - [am, ap, am, ap][n]).abs().max((by[n] - [bm, bm, bp, bp][n]).abs()))
        .fold(0.0, f64::max);

    let sys1 = ReconSystem::new(&SbpOperators::new(1)?, 1.0, 1.0)?;
    let g = &sys1.kkt_inverse;
    // 1-based (row, column)
    let samples = [
        ((2, 2), 9.0 / 16.0),
        ((8, 2), -9.0 / 16.0),
        ((13, 2), -9.0 / 16.0),
        ((15, 2), 9.0 / 16.0),
        ((19, 1), 446.0 / 10487.0),
        ((19, 2), -361.0 / 4426.0),
        ((19, 3), 446.0 / 10487.0),
    ];
    let k1_err = samples
        .iter()
        .map(|&((r, c), v)| ((g[(r - 1, c - 1)] - v) / v).abs())
        .fold(0.0, f64::max);
    let pattern = [2usize, 8, 13, 15];
    let sign = |i: usize| if i == 2 || i == 15 { 1.0 } else { -1.0 };
    let mut block_err = 0.0f64;
    for r in 1..=18 {
        for c in 1..=18 {
            let want = if pattern.contains(&r) && pattern.contains(&c) { sign(r) * sign(c) * 9.0 / 16.0 } else { 0.0 };
            block_err = block_err.max((g[(r - 1, c - 1)] - want).abs());
        }
    }

    let mut sizes = Vec::new();
    for k in 0..=3 {
        sizes.push(ReconSystem::new(&SbpOperators::new(k)?, 1.0, 1.0)?.kkt.nrows());
    }
    Ok(Check {
        name: "reconstruction",
        passed: k0_err <= 1e-14 && k1_err <= 1e-3 && block_err <= 1e-12 && sizes == [16, 35, 60, 91],
        detail: format!(
            "k=0 error {k0_err:.1e}, k=1 sampled relative error {k1_err:.1e}, primal block error {block_err:.1e}, system sizes {sizes:?}"
        ),
    })
}

/// All checks, with randomized ones seeded from `seed`.
pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    Ok(vec![
        check_sbp()?,
        check_ec_flux(seed)?,
        check_es_flux(seed.wrapping_add(1))?,
        check_reconstruction()?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass_for_several_seeds() {
        for seed in [0, 7, 12345] {
            for c in run_all(seed).unwrap() {
                assert!(c.passed, "{c}");
            }
        }
    }

    #[test]
    fn display_starts_with_status() {
        let c = Check { name: "x", passed: false, detail: "d".into() };
        assert_eq!(c.to_string(), "FAIL x: d");
    }
}
