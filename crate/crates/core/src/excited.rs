//! Excited states by overlap-penalized deflation and their x-derivatives.
//!
//! Level `r` minimizes `H_r = H_0 + sum_{s<r} beta_s |psi_s><psi_s|`. Because
//! `psi_r` is orthogonal to every lower level, the projector terms in
//! `<psi_r| d H_r / dx |psi_r>` vanish and the ground-state formulas applied
//! to `H_0` alone give the level-`r` derivatives. The full path keeps the
//! projector derivatives, building `d psi_s / dx` from level-`s` responses.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::assembler::{assemble, AssemblyConfig, DerivativeBundle, DerivativeSource};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianFamily;
use crate::operator::{DyadSum, Operator};
use crate::pauli::PauliSum;
use crate::response::PairVectors;
use crate::state::Statevector;
use crate::tensor::Tensor3;
use crate::theta::{Backend, ExactDerivatives};
use crate::vqe::{optimize, OptimizerConfig};

pub const ORTHOGONALITY_TOL: f64 = 1e-6;

/// Slack allowed when checking that level energies ascend.
pub const ASCENDING_TOL: f64 = 1e-8;

/// `|<a|b>|^2`.
pub fn overlap(a: &Statevector, b: &Statevector) -> Result<f64> {
    if a.n_qubits() != b.n_qubits() {
        return Err(Error::QubitMismatch { left: a.n_qubits(), right: b.n_qubits() });
    }
    Ok(a.inner(b).norm_sqr())
}

/// Three times the 1-norm of the Pauli coefficients. Twice the 1-norm bounds
/// the spectral width but can equal the gap (`H = Z`), which leaves the
/// penalized landscape flat; the extra margin keeps the bound strict.
pub fn default_beta(h: &PauliSum) -> f64 {
    3.0 * h.one_norm()
}

/// `base + sum_s beta_s |s><s|`.
#[derive(Clone, Debug)]
pub struct DeflatedOperator {
    pub base: PauliSum,
    pub projectors: Vec<(Statevector, f64)>,
}

impl Operator for DeflatedOperator {
    fn n_qubits(&self) -> usize {
        self.base.n_qubits()
    }

    fn apply(&self, v: &Statevector) -> Statevector {
        let mut out = self.base.apply(v);
        for (s, beta) in &self.projectors {
            out.add_scaled(s.inner(v) * *beta, s);
        }
        out
    }

    fn expectation(&self, v: &Statevector) -> f64 {
        Operator::expectation(&self.base, v) + self.projectors.iter().map(|(s, beta)| beta * s.inner(v).norm_sqr()).sum::<f64>()
    }
}

/// Pauli sum plus dyads.
struct Perturbed {
    base: PauliSum,
    dyads: DyadSum,
}

impl Operator for Perturbed {
    fn n_qubits(&self) -> usize {
        self.base.n_qubits()
    }

    fn apply(&self, v: &Statevector) -> Statevector {
        let mut out = self.base.apply(v);
        if !self.dyads.is_empty() {
            out.add_scaled(Complex64::new(1.0, 0.0), &self.dyads.apply(v));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Level {
    pub circuit: Circuit,
    pub theta: Vec<f64>,
    /// Penalty weight this level contributes to higher levels.
    pub beta: f64,
    /// `<psi|H_0|psi>`.
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VqdStack {
    pub family: HamiltonianFamily,
    pub x: Vec<f64>,
    pub levels: Vec<Level>,
}

impl VqdStack {
    pub fn state(&self, r: usize) -> Result<Statevector> {
        let l = self.level(r)?;
        l.circuit.prepare_state(&l.theta)
    }

    fn level(&self, r: usize) -> Result<&Level> {
        self.levels
            .get(r)
            .ok_or_else(|| Error::InvalidInput(format!("level {r} requested but the stack has {} levels", self.levels.len())))
    }

    /// `H_r` at the stack's `x`.
    pub fn deflated(&self, r: usize) -> Result<DeflatedOperator> {
        self.level(r)?;
        let projectors = (0..r).map(|s| Ok((self.state(s)?, self.levels[s].beta))).collect::<Result<Vec<_>>>()?;
        Ok(DeflatedOperator { base: self.family.eval(&self.x)?, projectors })
    }

    /// Errors on the first pair among levels `0..=r` whose overlap exceeds `tol`.
    pub fn check_orthogonality(&self, r: usize, tol: f64) -> Result<()> {
        let states = (0..=r).map(|s| self.state(s)).collect::<Result<Vec<_>>>()?;
        for a in 0..=r {
            for b in 0..a {
                let ov = overlap(&states[a], &states[b])?;
                if ov > tol {
                    return Err(Error::Orthogonality { r: a, s: b, overlap: ov, tol });
                }
            }
        }
        Ok(())
    }
}

/// Optimizes levels `0..circuits.len()` in order. `betas` defaults to
/// [`default_beta`] of `H_0(x)` for every level.
pub fn vqd_optimize(
    family: &HamiltonianFamily,
    x: &[f64],
    circuits: &[Circuit],
    theta0: &[Vec<f64>],
    betas: Option<&[f64]>,
    config: &OptimizerConfig,
) -> Result<VqdStack> {
    if theta0.len() != circuits.len() {
        return Err(Error::DimensionMismatch { expected: circuits.len(), got: theta0.len() });
    }
    if let Some(b) = betas {
        if b.len() != circuits.len() {
            return Err(Error::DimensionMismatch { expected: circuits.len(), got: b.len() });
        }
        if b.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput("penalty weights must be finite and non-negative".into()));
        }
    }
    let h0 = family.eval(x)?;
    let beta_default = default_beta(&h0);
    let mut stack = VqdStack { family: family.clone(), x: x.to_vec(), levels: Vec::new() };
    for (r, circuit) in circuits.iter().enumerate() {
        let projectors = (0..r).map(|s| Ok((stack.state(s)?, stack.levels[s].beta))).collect::<Result<Vec<_>>>()?;
        let op = DeflatedOperator { base: h0.clone(), projectors };
        let res = optimize(circuit, &theta0[r], &op, config)?;
        let psi = circuit.prepare_state(&res.theta_star)?;
        let energy = Operator::expectation(&h0, &psi);
        let beta = betas.map_or(beta_default, |b| b[r]);
        stack.levels.push(Level { circuit: circuit.clone(), theta: res.theta_star, beta, energy });
        stack.check_orthogonality(r, ORTHOGONALITY_TOL)?;
        if r > 0 {
            let prev = stack.levels[r - 1].energy;
            if energy < prev - ASCENDING_TOL {
                return Err(Error::NonAscending { level: r, energy, prev_level: r - 1, prev_energy: prev });
            }
        }
    }
    Ok(stack)
}

/// Lower level with its derivative states and responses.
struct LowerLevel {
    beta: f64,
    exact: ExactDerivatives,
    first: DMatrix<f64>,
    second: Option<PairVectors>,
}

impl LowerLevel {
    /// `d psi_s / dx_i`.
    fn d1(&self, i: usize) -> Statevector {
        let mut v = Statevector::zeros(self.exact.state().n_qubits());
        for a in 0..self.exact.n_params() {
            v.add_scaled(Complex64::new(self.first[(a, i)], 0.0), self.exact.first(a));
        }
        v
    }

    /// `d^2 psi_s / dx_i dx_j`.
    fn d2(&self, i: usize, j: usize) -> Result<Statevector> {
        let second = self
            .second
            .as_ref()
            .ok_or_else(|| Error::UnsupportedOrder { order: 2, reason: "second-order responses of lower levels were not computed".into() })?;
        let n = self.exact.n_params();
        let mut v = Statevector::zeros(self.exact.state().n_qubits());
        for a in 0..n {
            v.add_scaled(Complex64::new(second[i][j][a], 0.0), self.exact.first(a));
            for b in 0..n {
                let w = self.first[(a, i)] * self.first[(b, j)];
                if w != 0.0 {
                    v.add_scaled(Complex64::new(w, 0.0), self.exact.second(a, b));
                }
            }
        }
        Ok(v)
    }
}

/// Exact-state source for level `r`, with or without projector terms.
struct LevelSource<'a> {
    family: &'a HamiltonianFamily,
    x: &'a [f64],
    exact: ExactDerivatives,
    lower: &'a [LowerLevel],
    drop_inner_products: bool,
}

impl LevelSource<'_> {
    fn operator(&self, idx: &[usize]) -> Result<Perturbed> {
        let base = self.family.eval_derivative(idx, self.x)?;
        let mut dyads = DyadSum::new(base.n_qubits());
        if self.drop_inner_products {
            return Ok(Perturbed { base, dyads });
        }
        for l in self.lower {
            let s = l.exact.state();
            let c = Complex64::new(l.beta, 0.0);
            match *idx {
                [] => dyads.push(c, s.clone(), s.clone()),
                [i] => dyads.push_symmetric(l.beta, &l.d1(i), s),
                [i, j] => {
                    dyads.push_symmetric(l.beta, &l.d2(i, j)?, s);
                    dyads.push_symmetric(l.beta, &l.d1(i), &l.d1(j));
                }
                // The |d^3 s><s| part only contributes through <s|psi_r>,
                // which vanishes for orthogonal levels.
                [i, j, k] => {
                    dyads.push_symmetric(l.beta, &l.d2(i, j)?, &l.d1(k));
                    dyads.push_symmetric(l.beta, &l.d2(i, k)?, &l.d1(j));
                    dyads.push_symmetric(l.beta, &l.d2(j, k)?, &l.d1(i));
                }
                _ => return Err(Error::UnsupportedOrder { order: idx.len(), reason: "projector derivatives cover orders up to 3".into() }),
            }
        }
        Ok(Perturbed { base, dyads })
    }

    fn deflated(&self) -> DeflatedOperator {
        DeflatedOperator {
            base: self.family.eval(self.x).expect("x validated by the stack"),
            projectors: self.lower.iter().map(|l| (l.exact.state().clone(), l.beta)).collect(),
        }
    }
}

impl DerivativeSource for LevelSource<'_> {
    fn n_params(&self) -> usize {
        self.exact.n_params()
    }

    fn x_dim(&self) -> usize {
        self.family.x_dim()
    }

    fn backend(&self) -> Backend {
        Backend::exact()
    }

    fn expectation(&self, idx: &[usize]) -> Result<f64> {
        Ok(self.exact.energy(&self.operator(idx)?))
    }

    fn theta_gradient(&self, idx: &[usize]) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(self.exact.gradient(&self.operator(idx)?)))
    }

    fn theta_hessian(&self, idx: &[usize]) -> Result<DMatrix<f64>> {
        Ok(self.exact.hessian(&self.operator(idx)?))
    }

    fn theta_third(&self) -> Result<Tensor3> {
        Ok(self.exact.third(&self.operator(&[])?))
    }

    fn stationarity_gradient(&self) -> Result<DVector<f64>> {
        Ok(DVector::from_vec(self.exact.gradient(&self.deflated())))
    }
}

/// Order-`order` x-derivatives of level `r`.
///
/// With `drop_inner_products` every term is evaluated with `H_0` at
/// `theta_r`. Otherwise `H_r` is used throughout, including projector
/// derivatives built from lower-level responses (exact simulation only).
pub fn excited_derivatives(stack: &VqdStack, r: usize, order: usize, drop_inner_products: bool, config: &AssemblyConfig) -> Result<DerivativeBundle> {
    stack.check_orthogonality(r, ORTHOGONALITY_TOL)?;
    let lower = if drop_inner_products { Vec::new() } else { lower_levels(stack, r, order >= 2, config)? };
    let src = level_source(stack, r, &lower, drop_inner_products)?;
    assemble(&src, &stack.levels[r].theta, &stack.x, order, config)
}

/// Levels `0..r` with first (and optionally second) order responses, each
/// computed on the full deflated path of its own level.
fn lower_levels(stack: &VqdStack, r: usize, second: bool, config: &AssemblyConfig) -> Result<Vec<LowerLevel>> {
    let mut lower: Vec<LowerLevel> = Vec::new();
    for s in 0..r {
        let src = level_source(stack, s, &lower, false)?;
        let cfg = AssemblyConfig { unsimplified_check: second, ..*config };
        let bundle = assemble(&src, &stack.levels[s].theta, &stack.x, if second { 3 } else { 2 }, &cfg)?;
        let resp = bundle.response().expect("order >= 2 bundles carry responses");
        let exact = src.exact;
        lower.push(LowerLevel { beta: stack.levels[s].beta, exact, first: resp.first, second: resp.second });
    }
    Ok(lower)
}

fn level_source<'a>(stack: &'a VqdStack, r: usize, lower: &'a [LowerLevel], drop: bool) -> Result<LevelSource<'a>> {
    let l = stack.level(r)?;
    Ok(LevelSource { family: &stack.family, x: &stack.x, exact: ExactDerivatives::new(&l.circuit, &l.theta)?, lower, drop_inner_products: drop })
}

/// `sum_s beta_s 2 Re[<psi_r|d_i psi_s><psi_s|psi_r>]` for each `i`: the
/// projector contributions that orthogonality removes from `dE_r/dx_i`.
pub fn projector_terms(stack: &VqdStack, r: usize) -> Result<Vec<f64>> {
    let psi_r = stack.state(r)?;
    let mut out = vec![0.0; stack.x.len()];
    for level in lower_levels(stack, r, false, &AssemblyConfig::default())? {
        let ov = level.exact.state().inner(&psi_r);
        for (i, o) in out.iter_mut().enumerate() {
            *o += level.beta * 2.0 * (psi_r.inner(&level.d1(i)) * ov).re;
        }
    }
    Ok(out)
}
