//! Derivatives of `E(theta) = <psi(theta)|H|psi(theta)>` with respect to the
//! circuit parameters, through interchangeable backends.

mod exact;
mod measured;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Insertion, InsertionSpec};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianFamily;
use crate::pauli::{PauliString, PauliSum};
use crate::tensor::{sorted_pairs, sorted_triples, Tensor3};

pub use exact::{adjoint_gradient, ExactDerivatives};
use measured::{Measured, Scheme};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Exact,
    Ancilla,
    LowDepth,
}

impl std::str::FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<BackendKind> {
        match s {
            "exact" => Ok(BackendKind::Exact),
            "ancilla" => Ok(BackendKind::Ancilla),
            "lowdepth" => Ok(BackendKind::LowDepth),
            _ => Err(Error::InvalidInput(format!("unknown backend {s:?} (expected exact, ancilla or lowdepth)"))),
        }
    }
}

/// Backend choice. `shots` is ignored by the exact backend; circuit
/// backends without shots return exact circuit expectations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Backend {
    pub kind: BackendKind,
    pub shots: Option<u64>,
    pub seed: u64,
}

impl Backend {
    pub fn exact() -> Backend {
        Backend { kind: BackendKind::Exact, shots: None, seed: 0 }
    }

    pub fn ancilla() -> Backend {
        Backend { kind: BackendKind::Ancilla, shots: None, seed: 0 }
    }

    pub fn lowdepth() -> Backend {
        Backend { kind: BackendKind::LowDepth, shots: None, seed: 0 }
    }

    pub fn with_shots(self, shots: u64, seed: u64) -> Backend {
        Backend { shots: Some(shots), seed, ..self }
    }
}

enum Inner {
    Exact(ExactDerivatives),
    Measured(Measured),
}

/// θ-derivative evaluator bound to one circuit and parameter point.
/// Circuit-backend evaluations are cached per (configuration, Pauli string),
/// so sums that share Pauli strings reuse runs.
pub struct ThetaEngine {
    circuit: Circuit,
    theta: Vec<f64>,
    backend: Backend,
    inner: Inner,
}

impl ThetaEngine {
    pub fn new(circuit: &Circuit, theta: &[f64], backend: Backend) -> Result<ThetaEngine> {
        let inner = match backend.kind {
            BackendKind::Exact => Inner::Exact(ExactDerivatives::new(circuit, theta)?),
            BackendKind::Ancilla => Inner::Measured(Measured::new(Scheme::Ancilla, circuit, theta, backend.shots, backend.seed)?),
            BackendKind::LowDepth => Inner::Measured(Measured::new(Scheme::LowDepth, circuit, theta, backend.shots, backend.seed)?),
        };
        Ok(ThetaEngine { circuit: circuit.clone(), theta: theta.to_vec(), backend, inner })
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn n_params(&self) -> usize {
        self.theta.len()
    }

    /// Distinct circuit executions so far (zero for the exact backend).
    pub fn runs(&self) -> usize {
        match &self.inner {
            Inner::Exact(_) => 0,
            Inner::Measured(m) => m.runs(),
        }
    }

    /// Exact-state data, when this is the exact backend.
    pub fn exact(&self) -> Option<&ExactDerivatives> {
        match &self.inner {
            Inner::Exact(e) => Some(e),
            Inner::Measured(_) => None,
        }
    }

    fn check(&self, h: &PauliSum) -> Result<()> {
        if h.n_qubits() != self.circuit.n_qubits() {
            return Err(Error::QubitMismatch { left: self.circuit.n_qubits(), right: h.n_qubits() });
        }
        Ok(())
    }

    pub fn energy(&self, h: &PauliSum) -> Result<f64> {
        self.check(h)?;
        match &self.inner {
            Inner::Exact(e) => crate::state::expectation(e.state(), h),
            Inner::Measured(m) => {
                let mut acc = 0.0;
                for (c, q) in h.terms() {
                    acc += c * if q.is_identity() { 1.0 } else { m.plain(q)? };
                }
                Ok(acc)
            }
        }
    }

    /// `sum over generator terms and Pauli terms` of the order-k bracket for
    /// parameters `params`.
    fn contract(&self, m: &Measured, params: &[usize], h: &PauliSum) -> Result<f64> {
        let gens: Vec<_> = params.iter().map(|&a| (self.circuit.param_element(a), self.circuit.generator(a))).collect();
        let mut acc = 0.0;
        let mut idx = vec![0usize; params.len()];
        loop {
            let mut weight = 1.0;
            let ins: Vec<Insertion> = idx
                .iter()
                .zip(&gens)
                .map(|(&mu, (pos, g))| {
                    weight *= g[mu].g;
                    Insertion::new(*pos, mu)
                })
                .collect();
            for (c, q) in h.terms() {
                if !q.is_identity() {
                    acc += weight * c * m.bracket(&ins, q)?;
                }
            }
            // Odometer over generator-term indices.
            let mut j = 0;
            while j < idx.len() {
                idx[j] += 1;
                if idx[j] < gens[j].1.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
            if j == idx.len() {
                return Ok(acc);
            }
        }
    }

    pub fn gradient(&self, h: &PauliSum) -> Result<Vec<f64>> {
        self.check(h)?;
        match &self.inner {
            Inner::Exact(e) => Ok(e.gradient(h)),
            Inner::Measured(m) => (0..self.n_params()).into_par_iter().map(|a| self.contract(m, &[a], h)).collect(),
        }
    }

    pub fn hessian(&self, h: &PauliSum) -> Result<DMatrix<f64>> {
        self.check(h)?;
        match &self.inner {
            Inner::Exact(e) => Ok(e.hessian(h)),
            Inner::Measured(m) => {
                let n = self.n_params();
                let pairs = sorted_pairs(n);
                let vals = pairs.par_iter().map(|&(a, b)| self.contract(m, &[a, b], h)).collect::<Result<Vec<_>>>()?;
                let mut out = DMatrix::zeros(n, n);
                for ((a, b), v) in pairs.into_iter().zip(vals) {
                    out[(a, b)] = v;
                    out[(b, a)] = v;
                }
                Ok(out)
            }
        }
    }

    pub fn third(&self, h: &PauliSum) -> Result<Tensor3> {
        self.check(h)?;
        match &self.inner {
            Inner::Exact(e) => Ok(e.third(h)),
            Inner::Measured(m) => {
                let triples = sorted_triples(self.n_params());
                let vals = triples
                    .par_iter()
                    .map(|&(a, b, c)| self.contract(m, &[a, b, c], h))
                    .collect::<Result<Vec<_>>>()?;
                let entries: Vec<_> = triples.into_iter().zip(vals).collect();
                Ok(Tensor3::from_sorted_entries(self.n_params(), &entries))
            }
        }
    }
}

/// `d^2 E / d theta_a d theta_b`.
pub fn hessian_theta(circuit: &Circuit, theta: &[f64], h: &PauliSum, backend: Backend) -> Result<DMatrix<f64>> {
    ThetaEngine::new(circuit, theta, backend)?.hessian(h)
}

/// `d^3 E / d theta_a d theta_b d theta_c`.
pub fn third_theta(circuit: &Circuit, theta: &[f64], h: &PauliSum, backend: Backend) -> Result<Tensor3> {
    ThetaEngine::new(circuit, theta, backend)?.third(h)
}

/// `Re <phi_A|Q|phi_B>` from an ancilla-controlled branch circuit.
pub fn branch_pair_expectation(
    circuit: &Circuit,
    theta: &[f64],
    ins_a: &InsertionSpec,
    ins_b: &InsertionSpec,
    q: &PauliString,
) -> Result<f64> {
    Measured::new(Scheme::Ancilla, circuit, theta, None, 0)?.branch_pair(ins_a, ins_b, q)
}

/// Signed combination of the `2^k` shifted circuits for `k` = 2 or 3
/// insertions; equals the matching `2 Re[...]` derivative bracket.
pub fn lowdepth_pair(circuit: &Circuit, theta: &[f64], positions: &[Insertion], q: &PauliString) -> Result<f64> {
    if !(2..=3).contains(&positions.len()) {
        return Err(Error::InvalidInsertion(format!("expected 2 or 3 insertions, got {}", positions.len())));
    }
    Measured::new(Scheme::LowDepth, circuit, theta, None, 0)?.lowdepth_combination(positions, q)
}

/// θ-tensor of order `theta_order` (1 or 2) evaluated with `d^q H / dx^q`
/// in place of `H`; `x_idx` lists the differentiated coordinates.
pub fn mixed_theta_x(
    circuit: &Circuit,
    theta: &[f64],
    family: &HamiltonianFamily,
    x: &[f64],
    theta_order: usize,
    x_idx: &[usize],
    backend: Backend,
) -> Result<MixedTensor> {
    if !(1..=2).contains(&theta_order) || !(1..=2).contains(&x_idx.len()) || theta_order + x_idx.len() > 3 {
        return Err(Error::UnsupportedOrder {
            order: theta_order + x_idx.len(),
            reason: "mixed derivatives need theta order 1-2, x order 1-2, total at most 3".into(),
        });
    }
    let dh = family.eval_derivative(x_idx, x)?;
    let engine = ThetaEngine::new(circuit, theta, backend)?;
    Ok(match theta_order {
        1 => MixedTensor::Vector(engine.gradient(&dh)?),
        _ => MixedTensor::Matrix(engine.hessian(&dh)?),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum MixedTensor {
    Vector(Vec<f64>),
    Matrix(DMatrix<f64>),
}

#[cfg(test)]
pub(crate) use measured::exact_bracket;
