//! x-derivatives of the optimal energy `E*(x) = E(theta*(x), x)`.
//!
//! With `F_i(theta, x) = <d_i H>` the total derivatives along `theta*(x)` are
//!
//! ```text
//! dE*/dx_i        = <d_i H>
//! d2E*/dx_i dx_j  = <d_ij H> + sum_a X_ai E_{a,j}
//! d3E*/dx_i dx_j dx_k = E_ijk + sum_a [X_ai E_{a,jk} + X_aj E_{a,ik} + X_ak E_{a,ij}]
//!     + sum_ab [X_ai X_bj E_{ab,k} + X_ai X_bk E_{ab,j} + X_aj X_bk E_{ab,i}]
//!     + sum_abc X_ai X_bj X_ck E_abc
//! ```
//!
//! where `X = d theta*/dx`, `E_{a,j} = d/dtheta_a <d_j H>` and so on. The
//! third-order form needs only first-order responses; the form with
//! `d2 theta*/dx2` is available as a consistency check.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianFamily;
use crate::response::{gamma_vector, solve_first, solve_second, PairVectors, ResponseSolution, SolverWarning};
use crate::tensor::{sorted_pairs, sorted_triples, Tensor3};
use crate::theta::{Backend, ThetaEngine};

/// Default threshold on `max |dE/dtheta|` at the supplied parameters.
pub const DEFAULT_GUARD_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GuardMode {
    #[default]
    Error,
    Warn,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssemblyConfig {
    pub guard: GuardMode,
    pub guard_tol: f64,
    /// Also evaluate the third derivative through `d2 theta*/dx2`.
    pub unsimplified_check: bool,
}

impl Default for AssemblyConfig {
    fn default() -> Self {
        AssemblyConfig { guard: GuardMode::Error, guard_tol: DEFAULT_GUARD_TOL, unsimplified_check: false }
    }
}

impl AssemblyConfig {
    pub fn warn() -> AssemblyConfig {
        AssemblyConfig { guard: GuardMode::Warn, ..AssemblyConfig::default() }
    }
}

/// θ-side quantities at a fixed parameter point, indexed by lists of
/// x-coordinates: `idx = [j, k]` refers to `d^2 H / dx_j dx_k`, `[]` to `H`.
pub trait DerivativeSource: Sync {
    fn n_params(&self) -> usize;
    fn x_dim(&self) -> usize;
    fn backend(&self) -> Backend;
    fn expectation(&self, idx: &[usize]) -> Result<f64>;
    fn theta_gradient(&self, idx: &[usize]) -> Result<DVector<f64>>;
    fn theta_hessian(&self, idx: &[usize]) -> Result<DMatrix<f64>>;
    /// Third θ-derivative of the undifferentiated energy.
    fn theta_third(&self) -> Result<Tensor3>;

    /// Gradient whose vanishing defines the optimum.
    fn stationarity_gradient(&self) -> Result<DVector<f64>> {
        self.theta_gradient(&[])
    }

    /// Circuit executions consumed so far.
    fn runs(&self) -> usize {
        0
    }
}

/// Ground-state source: `H(x)` from a family, θ-derivatives from a backend.
pub struct GroundStateSource<'a> {
    family: &'a HamiltonianFamily,
    x: Vec<f64>,
    engine: ThetaEngine,
}

impl<'a> GroundStateSource<'a> {
    pub fn new(family: &'a HamiltonianFamily, circuit: &Circuit, theta: &[f64], x: &[f64], backend: Backend) -> Result<Self> {
        if family.n_qubits() != circuit.n_qubits() {
            return Err(Error::QubitMismatch { left: circuit.n_qubits(), right: family.n_qubits() });
        }
        if x.len() != family.x_dim() {
            return Err(Error::DimensionMismatch { expected: family.x_dim(), got: x.len() });
        }
        Ok(GroundStateSource { family, x: x.to_vec(), engine: ThetaEngine::new(circuit, theta, backend)? })
    }

    pub fn engine(&self) -> &ThetaEngine {
        &self.engine
    }
}

impl DerivativeSource for GroundStateSource<'_> {
    fn n_params(&self) -> usize {
        self.engine.n_params()
    }

    fn x_dim(&self) -> usize {
        self.family.x_dim()
    }

    fn backend(&self) -> Backend {
        self.engine.backend()
    }

    fn expectation(&self, idx: &[usize]) -> Result<f64> {
        self.engine.energy(&self.family.eval_derivative(idx, &self.x)?)
    }

    fn theta_gradient(&self, idx: &[usize]) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(self.engine.gradient(&self.family.eval_derivative(idx, &self.x)?)?))
    }

    fn theta_hessian(&self, idx: &[usize]) -> Result<DMatrix<f64>> {
        self.engine.hessian(&self.family.eval_derivative(idx, &self.x)?)
    }

    fn theta_third(&self) -> Result<Tensor3> {
        self.engine.third(&self.family.eval(&self.x)?)
    }

    fn runs(&self) -> usize {
        self.engine.runs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub backend: Backend,
    pub guard: GuardMode,
    pub guard_tol: f64,
    /// `max |dE/dtheta|` at the supplied parameters.
    pub stationarity_grad_norm: f64,
    pub stationarity_violated: bool,
    pub circuit_runs: usize,
    /// Largest `|H_ij - H_ji|` before symmetrization.
    pub hessian_x_asymmetry: Option<f64>,
    pub hessian_theta_condition: Option<f64>,
    pub solver_warnings: Vec<SolverWarning>,
    /// Third derivative assembled through `d2 theta*/dx2`.
    pub third_x_unsimplified: Option<Tensor3>,
    pub third_x_path_difference: Option<f64>,
    pub version: String,
}

/// θ-side tensors and responses behind a bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaSide {
    pub hessian_theta: Vec<Vec<f64>>,
    /// `d/dtheta_a <d_i H>`, rows `a`, columns `i`.
    pub mixed_theta_x: Vec<Vec<f64>>,
    /// `d theta*_a / dx_i`, rows `a`, columns `i`.
    pub response_first: Vec<Vec<f64>>,
    /// `d2 theta*_a / dx_j dx_k` indexed `[j][k][a]`.
    pub response_second: Option<Vec<Vec<Vec<f64>>>>,
    pub third_theta: Option<Tensor3>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivativeBundle {
    pub x: Vec<f64>,
    pub order: usize,
    pub theta_star: Vec<f64>,
    pub energy: f64,
    pub grad_x: Vec<f64>,
    pub hessian_x: Option<Vec<Vec<f64>>>,
    pub third_x: Option<Tensor3>,
    pub theta: Option<ThetaSide>,
    pub provenance: Provenance,
}

impl DerivativeBundle {
    pub fn hessian_matrix(&self) -> Option<DMatrix<f64>> {
        self.hessian_x.as_ref().map(|h| from_rows(h))
    }

    pub fn response(&self) -> Option<ResponseSolution> {
        let t = self.theta.as_ref()?;
        Some(ResponseSolution {
            first: from_rows_shape(&t.response_first, t.hessian_theta.len(), self.x.len()),
            second: t.response_second.as_ref().map(|s| {
                s.iter().map(|row| row.iter().map(|v| DVector::from_vec(v.clone())).collect()).collect()
            }),
            hessian_condition: self.provenance.hessian_theta_condition.unwrap_or(f64::NAN),
            warnings: self.provenance.solver_warnings.clone(),
        })
    }
}

pub(crate) fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn from_rows(r: &[Vec<f64>]) -> DMatrix<f64> {
    let ncols = r.first().map_or(0, |v| v.len());
    from_rows_shape(r, r.len(), ncols)
}

fn from_rows_shape(r: &[Vec<f64>], nrows: usize, ncols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(nrows, ncols, |i, j| r[i][j])
}

/// Checks `max |dE/dtheta|` against the guard. Returns the norm and whether
/// the threshold was exceeded (only possible in warn mode).
pub fn stationarity_guard(source: &dyn DerivativeSource, config: &AssemblyConfig) -> Result<(f64, bool)> {
    let norm = source.stationarity_gradient()?.amax();
    if !norm.is_finite() {
        return Err(Error::NonFinite("theta gradient".into()));
    }
    if norm > config.guard_tol {
        match config.guard {
            GuardMode::Error => return Err(Error::NotStationary { grad_norm: norm, tol: config.guard_tol }),
            GuardMode::Warn => {
                log::warn!("max |dE/dtheta| = {norm:e} exceeds {:e}; derivatives assume stationarity", config.guard_tol);
                return Ok((norm, true));
            }
        }
    }
    Ok((norm, false))
}

/// Assembles derivatives up to `order` (1 to 3).
pub fn assemble(source: &dyn DerivativeSource, theta_star: &[f64], x: &[f64], order: usize, config: &AssemblyConfig) -> Result<DerivativeBundle> {
    if !(1..=3).contains(&order) {
        return Err(Error::UnsupportedOrder { order, reason: "energy derivatives are assembled for orders 1 to 3".into() });
    }
    let nx = source.x_dim();
    let n = source.n_params();
    if x.len() != nx {
        return Err(Error::DimensionMismatch { expected: nx, got: x.len() });
    }
    if theta_star.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: theta_star.len() });
    }
    let (grad_norm, violated) = stationarity_guard(source, config)?;
    let energy = source.expectation(&[])?;
    let grad_x = (0..nx).map(|i| source.expectation(&[i])).collect::<Result<Vec<_>>>()?;

    let mut provenance = Provenance {
        backend: source.backend(),
        guard: config.guard,
        guard_tol: config.guard_tol,
        stationarity_grad_norm: grad_norm,
        stationarity_violated: violated,
        circuit_runs: 0,
        hessian_x_asymmetry: None,
        hessian_theta_condition: None,
        solver_warnings: Vec::new(),
        third_x_unsimplified: None,
        third_x_path_difference: None,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let mut bundle = DerivativeBundle {
        x: x.to_vec(),
        order,
        theta_star: theta_star.to_vec(),
        energy,
        grad_x,
        hessian_x: None,
        third_x: None,
        theta: None,
        provenance: provenance.clone(),
    };
    if order == 1 {
        provenance.circuit_runs = source.runs();
        bundle.provenance = provenance;
        return Ok(bundle);
    }

    let e_tt = source.theta_hessian(&[])?;
    let mut m1 = DMatrix::zeros(n, nx);
    for i in 0..nx {
        m1.set_column(i, &source.theta_gradient(&[i])?);
    }
    let first = solve_first(&e_tt, &m1)?;
    provenance.hessian_theta_condition = Some(first.condition);
    provenance.solver_warnings.extend(first.warning.clone());
    let xr = first.solution;

    let mut e_xx = DMatrix::zeros(nx, nx);
    for (i, j) in sorted_pairs(nx) {
        let v = source.expectation(&[i, j])?;
        e_xx[(i, j)] = v;
        e_xx[(j, i)] = v;
    }
    let hess = e_xx + xr.transpose() * &m1;
    provenance.hessian_x_asymmetry = Some((&hess - hess.transpose()).amax());
    let hess = (&hess + hess.transpose()) * 0.5;
    bundle.hessian_x = Some(rows(&hess));

    let mut side = ThetaSide {
        hessian_theta: rows(&e_tt),
        mixed_theta_x: rows(&m1),
        response_first: rows(&xr),
        response_second: None,
        third_theta: None,
    };

    if order == 3 {
        let e_ttt = source.theta_third()?;
        let e_tt_x = (0..nx).map(|k| source.theta_hessian(&[k])).collect::<Result<Vec<_>>>()?;
        let mut e_t_xx: PairVectors = vec![vec![DVector::zeros(n); nx]; nx];
        for (j, k) in sorted_pairs(nx) {
            let g = source.theta_gradient(&[j, k])?;
            e_t_xx[j][k] = g.clone();
            e_t_xx[k][j] = g;
        }
        let mut e_xxx = Tensor3::zeros(nx);
        for (i, j, k) in sorted_triples(nx) {
            e_xxx.set_symmetric(i, j, k, source.expectation(&[i, j, k])?);
        }
        let third = third_simplified(&e_xxx, &e_t_xx, &e_tt_x, &e_ttt, &xr);
        if config.unsimplified_check {
            let gamma = gamma_vector(&e_ttt, &e_tt_x, &xr, &e_t_xx)?;
            let (x2, solve) = solve_second(&e_tt, &gamma)?;
            provenance.solver_warnings.extend(solve.warning);
            let alt = third_unsimplified(&e_xxx, &e_t_xx, &e_tt_x, &m1, &xr, &x2);
            provenance.third_x_path_difference = Some(alt.max_abs_diff(&third));
            provenance.third_x_unsimplified = Some(alt);
            side.response_second = Some(x2.iter().map(|r| r.iter().map(|v| v.as_slice().to_vec()).collect()).collect());
        }
        side.third_theta = Some(e_ttt);
        bundle.third_x = Some(third);
    }
    provenance.circuit_runs = source.runs();
    bundle.theta = Some(side);
    bundle.provenance = provenance;
    Ok(bundle)
}

fn third_simplified(e_xxx: &Tensor3, e_t_xx: &PairVectors, e_tt_x: &[DMatrix<f64>], e_ttt: &Tensor3, xr: &DMatrix<f64>) -> Tensor3 {
    let nx = e_xxx.dim();
    let n = xr.nrows();
    let mut out = Tensor3::zeros(nx);
    for (i, j, k) in sorted_triples(nx) {
        let (xi, xj, xk) = (xr.column(i), xr.column(j), xr.column(k));
        let mut t = e_xxx.get(i, j, k);
        t += xi.dot(&e_t_xx[j][k]) + xj.dot(&e_t_xx[i][k]) + xk.dot(&e_t_xx[i][j]);
        t += xi.dot(&(&e_tt_x[k] * xj)) + xi.dot(&(&e_tt_x[j] * xk)) + xj.dot(&(&e_tt_x[i] * xk));
        for a in 0..n {
            for b in 0..n {
                let ab = xi[a] * xj[b];
                if ab == 0.0 {
                    continue;
                }
                for c in 0..n {
                    t += ab * xk[c] * e_ttt.get(a, b, c);
                }
            }
        }
        out.set_symmetric(i, j, k, t);
    }
    out
}

fn third_unsimplified(
    e_xxx: &Tensor3,
    e_t_xx: &PairVectors,
    e_tt_x: &[DMatrix<f64>],
    m1: &DMatrix<f64>,
    xr: &DMatrix<f64>,
    x2: &PairVectors,
) -> Tensor3 {
    let nx = e_xxx.dim();
    let mut out = Tensor3::zeros(nx);
    for i in 0..nx {
        for j in 0..nx {
            for k in 0..nx {
                let (xj, xk) = (xr.column(j), xr.column(k));
                let t = e_xxx.get(i, j, k)
                    + e_t_xx[i][j].dot(&xk)
                    + e_t_xx[i][k].dot(&xj)
                    + xj.dot(&(&e_tt_x[i] * xk))
                    + m1.column(i).dot(&x2[j][k]);
                out.set(i, j, k, t);
            }
        }
    }
    out
}

/// Ground-state derivatives of `family` at `x` with the supplied optimum.
pub fn derivatives(
    family: &HamiltonianFamily,
    circuit: &Circuit,
    theta_star: &[f64],
    x: &[f64],
    order: usize,
    backend: Backend,
    config: &AssemblyConfig,
) -> Result<DerivativeBundle> {
    let source = GroundStateSource::new(family, circuit, theta_star, x, backend)?;
    assemble(&source, theta_star, x, order, config)
}

/// `dE*/dx_i = <psi(theta*)| dH/dx_i |psi(theta*)>`.
pub fn grad_x(family: &HamiltonianFamily, circuit: &Circuit, theta_star: &[f64], x: &[f64], config: &AssemblyConfig) -> Result<Vec<f64>> {
    Ok(derivatives(family, circuit, theta_star, x, 1, Backend::exact(), config)?.grad_x)
}
