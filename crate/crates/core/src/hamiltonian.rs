//! Hamiltonian families `H(x) = sum_P h_P(x) P` with differentiable
//! coefficient functions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};

/// Slack (in grid steps) accepted at the ends of a tabulated range.
const RANGE_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientFunction {
    /// `sum_k c_k prod_i x_i^{p_{k,i}}`.
    Polynomial { monomials: Vec<(Vec<u32>, f64)> },
    /// Samples on the uniform grid `x0 + k * dx` (one-dimensional `x` only).
    Tabulated { x0: f64, dx: f64, values: Vec<f64> },
}

impl CoefficientFunction {
    pub fn constant(x_dim: usize, c: f64) -> CoefficientFunction {
        CoefficientFunction::Polynomial { monomials: vec![(vec![0; x_dim], c)] }
    }

    /// `c * x_i`.
    pub fn linear(x_dim: usize, i: usize, c: f64) -> CoefficientFunction {
        let mut powers = vec![0; x_dim];
        powers[i] = 1;
        CoefficientFunction::Polynomial { monomials: vec![(powers, c)] }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        match self {
            CoefficientFunction::Polynomial { monomials } => Ok(monomials
                .iter()
                .map(|(p, c)| c * p.iter().zip(x).map(|(&k, xi)| xi.powi(k as i32)).product::<f64>())
                .sum()),
            CoefficientFunction::Tabulated { x0, dx, values } => interpolate(*x0, *dx, values, x[0]),
        }
    }

    /// Partial derivative of multi-index `q`.
    pub fn derivative(&self, q: &[u32]) -> Result<CoefficientFunction> {
        match self {
            CoefficientFunction::Polynomial { monomials } => {
                let mut out: Vec<(Vec<u32>, f64)> = Vec::new();
                for (p, c) in monomials {
                    if p.iter().zip(q).any(|(pi, qi)| pi < qi) {
                        continue;
                    }
                    let mut coeff = *c;
                    for (&pi, &qi) in p.iter().zip(q) {
                        for k in 0..qi {
                            coeff *= (pi - k) as f64;
                        }
                    }
                    let powers: Vec<u32> = p.iter().zip(q).map(|(pi, qi)| pi - qi).collect();
                    match out.iter_mut().find(|(pp, _)| *pp == powers) {
                        Some(slot) => slot.1 += coeff,
                        None => out.push((powers, coeff)),
                    }
                }
                out.retain(|(_, c)| *c != 0.0);
                Ok(CoefficientFunction::Polynomial { monomials: out })
            }
            CoefficientFunction::Tabulated { x0, dx, values } => {
                let order = q[0];
                let (x0, values) = match order {
                    0 => (*x0, values.clone()),
                    1 => (*x0 + dx, central_first(values, *dx)),
                    2 => (*x0 + dx, central_second(values, *dx)),
                    3 => (*x0 + 2.0 * dx, central_first(&central_second(values, *dx), *dx)),
                    _ => {
                        return Err(Error::UnsupportedOrder {
                            order: order as usize,
                            reason: "tabulated coefficients support derivatives up to order 3".into(),
                        })
                    }
                };
                if values.is_empty() {
                    return Err(Error::UnsupportedOrder {
                        order: order as usize,
                        reason: "tabulated grid too short for this derivative".into(),
                    });
                }
                Ok(CoefficientFunction::Tabulated { x0, dx: *dx, values })
            }
        }
    }
}

fn central_first(v: &[f64], dx: f64) -> Vec<f64> {
    v.windows(3).map(|w| (w[2] - w[0]) / (2.0 * dx)).collect()
}

fn central_second(v: &[f64], dx: f64) -> Vec<f64> {
    v.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]) / (dx * dx)).collect()
}

/// Local Lagrange interpolation through (up to) four neighbouring samples.
fn interpolate(x0: f64, dx: f64, values: &[f64], x: f64) -> Result<f64> {
    let n = values.len();
    let hi = x0 + dx * (n - 1) as f64;
    let s = (x - x0) / dx;
    if !(s >= -RANGE_SLACK && s <= (n - 1) as f64 + RANGE_SLACK) {
        return Err(Error::OutOfRange { x, lo: x0, hi });
    }
    if n == 1 {
        return Ok(values[0]);
    }
    let s = s.clamp(0.0, (n - 1) as f64);
    let width = n.min(4);
    let cell = (s.floor() as usize).min(n - 2);
    let start = cell.saturating_sub(1).min(n - width);
    let mut acc = 0.0;
    for j in start..start + width {
        let mut l = 1.0;
        for m in start..start + width {
            if m != j {
                l *= (s - m as f64) / (j as f64 - m as f64);
            }
        }
        acc += l * values[j];
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianFamily {
    n_qubits: usize,
    x_dim: usize,
    terms: Vec<(PauliString, CoefficientFunction)>,
}

impl HamiltonianFamily {
    pub fn new(n_qubits: usize, x_dim: usize, terms: Vec<(PauliString, CoefficientFunction)>) -> Result<HamiltonianFamily> {
        if terms.is_empty() {
            return Err(Error::InvalidHamiltonian("at least one term is required".into()));
        }
        let fam = HamiltonianFamily { n_qubits, x_dim, terms };
        fam.validate()?;
        Ok(fam)
    }

    fn validate(&self) -> Result<()> {
        for (k, (p, f)) in self.terms.iter().enumerate() {
            if p.n_qubits() != self.n_qubits {
                return Err(Error::InvalidHamiltonian(format!(
                    "terms[{k}]: Pauli string {p} has length {}, expected {}",
                    p.n_qubits(),
                    self.n_qubits
                )));
            }
            match f {
                CoefficientFunction::Polynomial { monomials } => {
                    for (powers, c) in monomials {
                        if powers.len() != self.x_dim {
                            return Err(Error::InvalidHamiltonian(format!(
                                "terms[{k}]: powers vector of length {}, expected x_dim {}",
                                powers.len(),
                                self.x_dim
                            )));
                        }
                        if !c.is_finite() {
                            return Err(Error::InvalidHamiltonian(format!("terms[{k}]: non-finite coefficient")));
                        }
                    }
                }
                CoefficientFunction::Tabulated { x0, dx, values } => {
                    if self.x_dim != 1 {
                        return Err(Error::InvalidHamiltonian(format!("terms[{k}]: tabulated coefficients need x_dim 1")));
                    }
                    if !(dx.is_finite() && *dx > 0.0 && x0.is_finite()) {
                        return Err(Error::InvalidHamiltonian(format!("terms[{k}]: grid needs finite x0 and dx > 0")));
                    }
                    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                        return Err(Error::InvalidHamiltonian(format!("terms[{k}]: tabulated values must be finite and non-empty")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_dim(&self) -> usize {
        self.x_dim
    }

    pub fn terms(&self) -> &[(PauliString, CoefficientFunction)] {
        &self.terms
    }

    /// Number of Pauli terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.x_dim {
            return Err(Error::DimensionMismatch { expected: self.x_dim, got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("x".into()));
        }
        Ok(())
    }

    /// `H(x)` as a Pauli sum.
    pub fn eval(&self, x: &[f64]) -> Result<PauliSum> {
        self.check_x(x)?;
        let mut sum = PauliSum::zero(self.n_qubits);
        for (p, f) in &self.terms {
            sum.add_term(f.eval(x)?, p.clone())?;
        }
        Ok(sum)
    }

    /// Term-wise partial derivative with multi-index `q`.
    pub fn derivative(&self, q: &[u32]) -> Result<HamiltonianFamily> {
        if q.len() != self.x_dim {
            return Err(Error::DimensionMismatch { expected: self.x_dim, got: q.len() });
        }
        let order: u32 = q.iter().sum();
        if order > 3 {
            return Err(Error::UnsupportedOrder { order: order as usize, reason: "derivatives are supported up to order 3".into() });
        }
        let terms = self
            .terms
            .iter()
            .map(|(p, f)| Ok((p.clone(), f.derivative(q)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(HamiltonianFamily { n_qubits: self.n_qubits, x_dim: self.x_dim, terms })
    }

    /// `d^|q| H / dx^q` evaluated at `x`, where `idx` lists the differentiated
    /// coordinates (repeats allowed).
    pub fn eval_derivative(&self, idx: &[usize], x: &[f64]) -> Result<PauliSum> {
        let mut q = vec![0u32; self.x_dim];
        for &i in idx {
            if i >= self.x_dim {
                return Err(Error::DimensionMismatch { expected: self.x_dim, got: i + 1 });
            }
            q[i] += 1;
        }
        self.derivative(&q)?.eval(x)
    }

    pub fn from_json(text: &str) -> Result<HamiltonianFamily> {
        let file: FamilyFile = serde_json::from_str(text)?;
        let mut terms = Vec::with_capacity(file.terms.len());
        for (k, t) in file.terms.into_iter().enumerate() {
            let p: PauliString = t
                .pauli
                .parse()
                .map_err(|_| Error::Parse(format!("terms[{k}]: invalid Pauli string {:?}", t.pauli)))?;
            if p.n_qubits() != file.n_qubits {
                return Err(Error::Parse(format!(
                    "terms[{k}]: Pauli string {:?} has length {}, expected n_qubits {}",
                    t.pauli,
                    p.n_qubits(),
                    file.n_qubits
                )));
            }
            let f = match t.coeff {
                CoeffFile::Poly(monos) => CoefficientFunction::Polynomial {
                    monomials: monos.into_iter().map(|m| (m.powers, m.c)).collect(),
                },
                CoeffFile::Tab(tab) => CoefficientFunction::Tabulated { x0: tab.x0, dx: tab.dx, values: tab.values },
            };
            terms.push((p, f));
        }
        HamiltonianFamily::new(file.n_qubits, file.x_dim, terms).map_err(|e| match e {
            Error::InvalidHamiltonian(m) => Error::Parse(m),
            other => other,
        })
    }

    /// Canonical serialization; `from_json(to_json(f)) == f`.
    pub fn to_json(&self) -> String {
        let terms = self
            .terms
            .iter()
            .map(|(p, f)| TermFile {
                pauli: p.to_string(),
                coeff: match f {
                    CoefficientFunction::Polynomial { monomials } => CoeffFile::Poly(
                        monomials.iter().map(|(powers, c)| MonoFile { powers: powers.clone(), c: *c }).collect(),
                    ),
                    CoefficientFunction::Tabulated { x0, dx, values } => {
                        CoeffFile::Tab(TabFile { x0: *x0, dx: *dx, values: values.clone() })
                    }
                },
            })
            .collect();
        let file = FamilyFile { n_qubits: self.n_qubits, x_dim: self.x_dim, terms };
        let mut s = serde_json::to_string_pretty(&file).expect("serializable");
        s.push('\n');
        s
    }

    /// `H(x) = Z + x X` on one qubit.
    pub fn model() -> HamiltonianFamily {
        HamiltonianFamily::new(
            1,
            1,
            vec![
                ("Z".parse().expect("valid"), CoefficientFunction::constant(1, 1.0)),
                ("X".parse().expect("valid"), CoefficientFunction::linear(1, 0, 1.0)),
            ],
        )
        .expect("valid model")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    n_qubits: usize,
    x_dim: usize,
    terms: Vec<TermFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermFile {
    pauli: String,
    coeff: CoeffFile,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum CoeffFile {
    Poly(Vec<MonoFile>),
    Tab(TabFile),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MonoFile {
    powers: Vec<u32>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TabFile {
    x0: f64,
    dx: f64,
    values: Vec<f64>,
}
