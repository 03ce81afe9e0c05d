//! Exact-state derivative contractions.
//!
//! `|d_a psi>` is obtained by inserting `i G_a` after gate `a`; higher
//! derivative states insert one factor per listed parameter. Energy
//! derivatives then follow from
//! `E_ab = 2 Re[<d_ab|H|psi> + <d_a|H|d_b>]` and
//! `E_abc = 2 Re[<d_abc|H|psi> + <d_ab|H|d_c> + <d_ac|H|d_b> + <d_bc|H|d_a>]`.

use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::circuit::Circuit;
use crate::error::Result;
use crate::operator::Operator;
use crate::state::Statevector;
use crate::tensor::{sorted_pairs, sorted_triples, Tensor3};

pub struct ExactDerivatives {
    circuit: Circuit,
    theta: Vec<f64>,
    psi: Statevector,
    d1: Vec<Statevector>,
    d2: OnceLock<Vec<Statevector>>,
}

impl ExactDerivatives {
    pub fn new(circuit: &Circuit, theta: &[f64]) -> Result<ExactDerivatives> {
        let psi = circuit.prepare_state(theta)?;
        let d1 = (0..circuit.n_params())
            .into_par_iter()
            .map(|a| circuit.derivative_state(theta, &[a]))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExactDerivatives { circuit: circuit.clone(), theta: theta.to_vec(), psi, d1, d2: OnceLock::new() })
    }

    pub fn n_params(&self) -> usize {
        self.d1.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn state(&self) -> &Statevector {
        &self.psi
    }

    /// `|d_a psi>`.
    pub fn first(&self, a: usize) -> &Statevector {
        &self.d1[a]
    }

    // Filled outside of any parallel loop that reads it, so the nested
    // parallel build never waits on itself.
    fn seconds(&self) -> &[Statevector] {
        let n = self.n_params();
        self.d2.get_or_init(|| {
            sorted_pairs(n)
                .into_par_iter()
                .map(|(a, b)| self.circuit.derivative_state(&self.theta, &[a, b]).expect("validated parameters"))
                .collect()
        })
    }

    /// `|d_a d_b psi>`.
    pub fn second(&self, a: usize, b: usize) -> &Statevector {
        &self.seconds()[pair_offset(self.n_params(), a, b)]
    }

    /// `|d_a d_b d_c psi>`, built on demand.
    pub fn third_state(&self, a: usize, b: usize, c: usize) -> Statevector {
        self.circuit.derivative_state(&self.theta, &[a, b, c]).expect("validated parameters")
    }

    pub fn energy(&self, op: &dyn Operator) -> f64 {
        op.expectation(&self.psi)
    }

    pub fn gradient(&self, op: &dyn Operator) -> Vec<f64> {
        let hpsi = op.apply(&self.psi);
        self.d1.iter().map(|d| 2.0 * d.inner(&hpsi).re).collect()
    }

    pub fn hessian(&self, op: &dyn Operator) -> DMatrix<f64> {
        let n = self.n_params();
        self.seconds();
        let hpsi = op.apply(&self.psi);
        let hd: Vec<Statevector> = self.d1.par_iter().map(|d| op.apply(d)).collect();
        let vals: Vec<f64> = sorted_pairs(n)
            .into_par_iter()
            .map(|(a, b)| 2.0 * (self.second(a, b).inner(&hpsi) + self.d1[a].inner(&hd[b])).re)
            .collect();
        let mut m = DMatrix::zeros(n, n);
        for ((a, b), v) in sorted_pairs(n).into_iter().zip(vals) {
            m[(a, b)] = v;
            m[(b, a)] = v;
        }
        m
    }

    pub fn third(&self, op: &dyn Operator) -> Tensor3 {
        let n = self.n_params();
        self.seconds();
        let hpsi = op.apply(&self.psi);
        let hd: Vec<Statevector> = self.d1.par_iter().map(|d| op.apply(d)).collect();
        let triples = sorted_triples(n);
        let vals: Vec<f64> = triples
            .par_iter()
            .map(|&(a, b, c)| {
                let t: Complex64 = self.third_state(a, b, c).inner(&hpsi)
                    + self.second(a, b).inner(&hd[c])
                    + self.second(a, c).inner(&hd[b])
                    + self.second(b, c).inner(&hd[a]);
                2.0 * t.re
            })
            .collect();
        let entries: Vec<_> = triples.into_iter().zip(vals).collect();
        Tensor3::from_sorted_entries(n, &entries)
    }
}

/// Offset of `(min(a,b), max(a,b))` in [`sorted_pairs`] order.
fn pair_offset(n: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * n - a * a.saturating_sub(1) / 2 + (b - a)
}

/// Energy and `dE/dtheta` by one forward pass and one reverse sweep.
pub fn adjoint_gradient(circuit: &Circuit, theta: &[f64], op: &dyn Operator) -> Result<(f64, Vec<f64>)> {
    let mut phi = circuit.prepare_state(theta)?;
    let mut lambda = op.apply(&phi);
    let energy = phi.inner(&lambda).re;
    let mut grad = vec![0.0; circuit.n_params()];
    for k in (0..circuit.elements().len()).rev() {
        if let crate::circuit::GateElement::Parametric { param_index, generator } = &circuit.elements()[k] {
            let igphi = crate::circuit::apply_i_generator(&phi, generator)?;
            grad[*param_index] = 2.0 * lambda.inner(&igphi).re;
        }
        circuit.apply_element(&mut phi, k, theta, true)?;
        circuit.apply_element(&mut lambda, k, theta, true)?;
    }
    Ok((energy, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Entangler, GateElement, GeneratorTerm};
    use crate::pauli::PauliSum;

    #[test]
    fn pair_offsets_follow_sorted_order() {
        let n = 5;
        for (k, (a, b)) in sorted_pairs(n).into_iter().enumerate() {
            assert_eq!(pair_offset(n, a, b), k);
            assert_eq!(pair_offset(n, b, a), k);
        }
    }

    #[test]
    fn model_closed_forms() {
        let c = Circuit::y_rotation();
        let z = PauliSum::from_labels(&[(1.0, "Z")]).unwrap();
        let pi = std::f64::consts::PI;
        let ex = ExactDerivatives::new(&c, &[pi]).unwrap();
        assert!((ex.hessian(&z)[(0, 0)] - 1.0).abs() < 1e-14);
        let ex = ExactDerivatives::new(&c, &[pi / 2.0]).unwrap();
        assert!((ex.third(&z).get(0, 0, 0) - 1.0).abs() < 1e-14);
        let id = PauliSum::from_labels(&[(2.5, "I")]).unwrap();
        assert!(ex.hessian(&id).abs().max() < 1e-15);
        assert!(ex.third(&id).max_abs() < 1e-15);
    }

    #[test]
    fn adjoint_matches_derivative_states() {
        let mut c = Circuit::hardware_efficient(2, 2, Entangler::Cnot).unwrap();
        let mut els = c.elements().to_vec();
        els.push(GateElement::Parametric {
            param_index: c.n_params(),
            generator: vec![
                GeneratorTerm { g: 0.3, pauli: "XY".parse().unwrap() },
                GeneratorTerm { g: -0.8, pauli: "ZI".parse().unwrap() },
            ],
        });
        c = Circuit::new(2, els).unwrap();
        let theta: Vec<f64> = (0..c.n_params()).map(|k| 0.37 * k as f64 - 1.1).collect();
        let h = PauliSum::from_labels(&[(0.7, "ZZ"), (-0.3, "XI"), (0.2, "YX"), (1.0, "II")]).unwrap();
        let (e, g) = adjoint_gradient(&c, &theta, &h).unwrap();
        let ex = ExactDerivatives::new(&c, &theta).unwrap();
        assert!((e - ex.energy(&h)).abs() < 1e-13);
        for (u, v) in g.iter().zip(ex.gradient(&h)) {
            assert!((u - v).abs() < 1e-12);
        }
    }
}
