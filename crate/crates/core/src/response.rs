//! Response equations for `d theta* / dx` and `d^2 theta* / dx^2`.
//!
//! Stationarity `dE/dtheta (theta*(x), x) = 0` differentiated once gives
//! `E_tt X = -E_tx`; differentiated twice gives `E_tt X2^{(jk)} = -gamma^{(jk)}`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// Eigenvalues below this fraction of the largest magnitude count as zero.
pub const RELATIVE_CUTOFF: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverWarningKind {
    /// Some eigenvalues are numerically zero; a minimum-norm solution was used.
    Singular,
    /// The Hessian has negative eigenvalues (saddle point, not a minimum).
    Indefinite,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverWarning {
    pub kind: SolverWarningKind,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
}

/// Solution of `A X = B` for symmetric `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSolve {
    pub solution: DMatrix<f64>,
    pub condition: f64,
    pub warning: Option<SolverWarning>,
}

/// Solves `a x = b` for symmetric `a`. Uses Cholesky when `a` is safely
/// positive definite and an eigen-decomposition pseudo-inverse otherwise.
pub fn solve_symmetric(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<LinearSolve> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if b.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.nrows() });
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("response equation input".into()));
    }
    if n == 0 {
        return Ok(LinearSolve { solution: DMatrix::zeros(0, b.ncols()), condition: 1.0, warning: None });
    }
    let scale = a.amax().max(1.0);
    if (a - a.transpose()).amax() > 1e-8 * scale {
        return Err(Error::Solve(format!("Hessian is not symmetric (max asymmetry {:e})", (a - a.transpose()).amax())));
    }
    let sym = (a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym.clone());
    let lam = &eig.eigenvalues;
    let largest = lam.amax();
    let lo = lam.min();
    let hi = lam.max();
    let smallest_mag = lam.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let condition = if smallest_mag > 0.0 { largest / smallest_mag } else { f64::INFINITY };
    let cutoff = RELATIVE_CUTOFF * largest;
    if largest > 0.0 && lo >= cutoff {
        if let Some(ch) = sym.clone().cholesky() {
            return Ok(LinearSolve { solution: ch.solve(b), condition, warning: None });
        }
    }
    let kind = if lo < -cutoff && smallest_mag > cutoff { SolverWarningKind::Indefinite } else { SolverWarningKind::Singular };
    log::warn!("response Hessian is {kind:?} (eigenvalues in [{lo:e}, {hi:e}]); using pseudo-inverse");
    let inv_diag = DVector::from_iterator(n, lam.iter().map(|&l| if l.abs() > cutoff { 1.0 / l } else { 0.0 }));
    let v = &eig.eigenvectors;
    let solution = v * DMatrix::from_diagonal(&inv_diag) * v.transpose() * b;
    Ok(LinearSolve {
        solution,
        condition,
        warning: Some(SolverWarning { kind, min_eigenvalue: lo, max_eigenvalue: hi }),
    })
}

/// First-order response `X` (`N_theta x N_x`) solving `hess X = -mixed`.
pub fn solve_first(hess: &DMatrix<f64>, mixed: &DMatrix<f64>) -> Result<LinearSolve> {
    let mut s = solve_symmetric(hess, &(-mixed))?;
    s.solution.iter_mut().for_each(|v| {
        if *v == 0.0 {
            *v = 0.0;
        }
    });
    Ok(s)
}

/// Per-pair vectors indexed `[j][k]`, each of length `N_theta`.
pub type PairVectors = Vec<Vec<DVector<f64>>>;

/// `gamma_c^{(jk)} = E_{c,jk} + sum_a (E_{ca,j} X_ak + E_{ca,k} X_aj)
///                  + sum_ab E_{cab} X_aj X_bk`.
///
/// `e_tt_x[k]` is the θ-Hessian of `<dH/dx_k>`, `e_t_xx[j][k]` the θ-gradient
/// of `<d^2 H / dx_j dx_k>`.
pub fn gamma_vector(third: &Tensor3, e_tt_x: &[DMatrix<f64>], first: &DMatrix<f64>, e_t_xx: &PairVectors) -> Result<PairVectors> {
    let n = third.dim();
    let nx = first.ncols();
    if first.nrows() != n || e_tt_x.len() != nx || e_t_xx.len() != nx {
        return Err(Error::DimensionMismatch { expected: n, got: first.nrows() });
    }
    let mut out = vec![vec![DVector::zeros(n); nx]; nx];
    for j in 0..nx {
        for k in 0..nx {
            if e_t_xx[j].len() != nx || e_t_xx[j][k].len() != n || e_tt_x[j].shape() != (n, n) {
                return Err(Error::DimensionMismatch { expected: n, got: e_t_xx[j][k].len() });
            }
            let xj = first.column(j);
            let xk = first.column(k);
            let mut g = e_t_xx[j][k].clone();
            g += &e_tt_x[j] * xk + &e_tt_x[k] * xj;
            for c in 0..n {
                let mut acc = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        acc += third.get(c, a, b) * xj[a] * xk[b];
                    }
                }
                g[c] += acc;
            }
            out[j][k] = g;
        }
    }
    Ok(out)
}

/// Second-order response `X2[j][k]` solving `hess X2 = -gamma`.
pub fn solve_second(hess: &DMatrix<f64>, gamma: &PairVectors) -> Result<(PairVectors, LinearSolve)> {
    let nx = gamma.len();
    let n = hess.nrows();
    let mut rhs = DMatrix::zeros(n, nx * nx);
    for j in 0..nx {
        for k in 0..nx {
            rhs.set_column(j * nx + k, &(-&gamma[j][k]));
        }
    }
    let solve = solve_symmetric(hess, &rhs)?;
    let out = (0..nx)
        .map(|j| (0..nx).map(|k| solve.solution.column(j * nx + k).into_owned()).collect())
        .collect();
    Ok((out, solve))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResponseSolution {
    /// `d theta*_a / dx_i`, shape `N_theta x N_x`.
    pub first: DMatrix<f64>,
    /// `d^2 theta*_a / dx_j dx_k`, indexed `[j][k][a]`.
    pub second: Option<PairVectors>,
    pub hessian_condition: f64,
    pub warnings: Vec<SolverWarning>,
}
