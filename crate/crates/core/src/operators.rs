//! Gauss–Lobatto quadrature and the summation-by-parts operator family.
//!
//! For degree `k` the scheme uses `k + 2` Lobatto nodes on `[-1, 1]`, so nodal
//! polynomials have degree `k + 1`. Matrices are stored dense and row-major.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 6;

/// Value of the Legendre polynomial `P_l` at `x`.
pub fn legendre_eval(l: usize, x: f64) -> f64 {
    legendre_with_derivative(l, x).0
}

/// `(P_l(x), P_l'(x))` via the three-term recurrence.
pub fn legendre_with_derivative(l: usize, x: f64) -> (f64, f64) {
    if l == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    for n in 1..l {
        let nf = n as f64;
        let p_next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
        // P'_{n+1} = P'_{n-1} + (2n+1) P_n
        let dp_next = dp_prev + (2.0 * nf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

/// Gauss–Legendre rule with `n` points on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev-like initial guess, descending
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Nodes, weights and SBP matrices for one polynomial degree.
#[derive(Debug, Clone)]
pub struct SbpOperators {
    pub degree: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Lagrange differentiation matrix, `np x np` row-major.
    pub d: Vec<f64>,
    /// Stiffness matrix `M D`, row-major.
    pub s: Vec<f64>,
    /// Diagonal of the boundary matrix: `-1, 0, ..., 0, 1`.
    pub tau: Vec<f64>,
    /// Legendre Vandermonde `V[i][l] = P_l(X_i)`, `np x (k+1)` row-major.
    pub vandermonde: Vec<f64>,
}

impl SbpOperators {
    pub fn new(k: usize) -> Result<Self> {
        if k > MAX_DEGREE {
            return Err(Error::UnsupportedDegree(k));
        }
        let n = k + 1; // polynomial degree of the nodal basis
        let np = k + 2;

        let mut nodes = vec![0.0; np];
        nodes[0] = -1.0;
        nodes[np - 1] = 1.0;
        // Interior nodes are the roots of P_n'. Newton on (1 - x^2) P_n'(x)
        // through the identity x P_n - P_{n-1} = (x^2 - 1) P_n' / n.
        for (j, node) in nodes.iter_mut().enumerate().take(np - 1).skip(1) {
            let mut x = -(std::f64::consts::PI * j as f64 / n as f64).cos();
            for _ in 0..100 {
                let (p, _) = legendre_with_derivative(n, x);
                let (pm, _) = legendre_with_derivative(n - 1, x);
                let dx = (x * p - pm) / (n as f64 * p);
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            *node = x;
        }

        let pn: Vec<f64> = nodes.iter().map(|&x| legendre_eval(n, x)).collect();
        let nn = (n * (n + 1)) as f64;
        let weights: Vec<f64> = pn.iter().map(|&p| 2.0 / (nn * p * p)).collect();

        let mut d = vec![0.0; np * np];
        for i in 0..np {
            let mut row_sum = 0.0;
            for j in 0..np {
                if i != j {
                    let v = pn[i] / (pn[j] * (nodes[i] - nodes[j]));
                    d[i * np + j] = v;
                    row_sum += v;
                }
            }
            // Exact row sums keep the operator free-stream preserving.
            d[i * np + i] = -row_sum;
        }

        let mut s = vec![0.0; np * np];
        for i in 0..np {
            for j in 0..np {
                s[i * np + j] = weights[i] * d[i * np + j];
            }
        }

        let mut tau = vec![0.0; np];
        tau[0] = -1.0;
        tau[np - 1] = 1.0;

        let mut vandermonde = vec![0.0; np * (k + 1)];
        for i in 0..np {
            for l in 0..=k {
                vandermonde[i * (k + 1) + l] = legendre_eval(l, nodes[i]);
            }
        }

        Ok(Self {
            degree: k,
            nodes,
            weights,
            d,
            s,
            tau,
            vandermonde,
        })
    }

    /// Number of nodes per direction (`k + 2`).
    #[inline]
    pub fn np(&self) -> usize {
        self.degree + 2
    }

    /// Number of Legendre modes on an edge (`k + 1`).
    #[inline]
    pub fn nm(&self) -> usize {
        self.degree + 1
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.np() + j]
    }

    #[inline]
    pub fn v(&self, i: usize, l: usize) -> f64 {
        self.vandermonde[i * self.nm() + l]
    }

    /// Nodal values `V c` of an edge polynomial with Legendre coefficients `c`.
    pub fn modal_to_nodal(&self, coeffs: &[f64], out: &mut [f64]) {
        let nm = self.nm();
        for (i, o) in out.iter_mut().enumerate().take(self.np()) {
            *o = (0..nm).map(|l| self.vandermonde[i * nm + l] * coeffs[l]).sum();
        }
    }

    pub fn d_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.np(), self.np(), &self.d)
    }

    pub fn s_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.np(), self.np(), &self.s)
    }

    pub fn mass_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.weights))
    }

    pub fn boundary_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.tau))
    }

    pub fn vandermonde_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.np(), self.nm(), &self.vandermonde)
    }

    /// Largest entry of `|S + S^T - B|`.
    pub fn sbp_defect(&self) -> f64 {
        let np = self.np();
        let mut worst: f64 = 0.0;
        for i in 0..np {
            for j in 0..np {
                let b = if i == j { self.tau[i] } else { 0.0 };
                worst = worst.max((self.s[i * np + j] + self.s[j * np + i] - b).abs());
            }
        }
        worst
    }

    /// Lagrange basis values at `x` for the Lobatto nodes.
    pub fn lagrange_at(&self, x: f64) -> Vec<f64> {
        let np = self.np();
        (0..np)
            .map(|j| {
                (0..np)
                    .filter(|&m| m != j)
                    .map(|m| (x - self.nodes[m]) / (self.nodes[j] - self.nodes[m]))
                    .product()
            })
            .collect()
    }
}
