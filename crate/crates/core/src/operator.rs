//! Linear operators that act on statevectors. The exact derivative backend
//! is written against [`Operator`] so that deflated and projector-derivative
//! Hamiltonians go through the same contractions as plain Pauli sums.

use num_complex::Complex64;

use crate::pauli::PauliSum;
use crate::state::Statevector;

pub trait Operator: Sync {
    fn n_qubits(&self) -> usize;

    /// `A |v>`.
    fn apply(&self, v: &Statevector) -> Statevector;

    /// `Re <v|A|v>`.
    fn expectation(&self, v: &Statevector) -> f64 {
        v.inner(&self.apply(v)).re
    }
}

impl Operator for PauliSum {
    fn n_qubits(&self) -> usize {
        PauliSum::n_qubits(self)
    }

    fn apply(&self, v: &Statevector) -> Statevector {
        let mut out = Statevector::zeros(v.n_qubits());
        for (c, p) in self.terms() {
            let pv = v.pauli_applied(p).expect("operator and state share a register");
            out.add_scaled(Complex64::new(*c, 0.0), &pv);
        }
        out
    }

    fn expectation(&self, v: &Statevector) -> f64 {
        self.terms().iter().map(|(c, p)| c * v.pauli_inner(p).re).sum()
    }
}

/// `sum_k c_k |u_k><w_k|`. Hermitian when the caller pairs each dyad with its
/// adjoint, which is how projector derivatives are built.
#[derive(Clone, Debug)]
pub struct DyadSum {
    n_qubits: usize,
    dyads: Vec<(Complex64, Statevector, Statevector)>,
}

impl DyadSum {
    pub fn new(n_qubits: usize) -> DyadSum {
        DyadSum { n_qubits, dyads: Vec::new() }
    }

    pub fn push(&mut self, c: Complex64, u: Statevector, w: Statevector) {
        debug_assert!(u.n_qubits() == self.n_qubits && w.n_qubits() == self.n_qubits);
        self.dyads.push((c, u, w));
    }

    /// Adds `c (|u><w| + |w><u|)` for real `c`.
    pub fn push_symmetric(&mut self, c: f64, u: &Statevector, w: &Statevector) {
        self.push(Complex64::new(c, 0.0), u.clone(), w.clone());
        self.push(Complex64::new(c, 0.0), w.clone(), u.clone());
    }

    pub fn len(&self) -> usize {
        self.dyads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dyads.is_empty()
    }
}

impl Operator for DyadSum {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&self, v: &Statevector) -> Statevector {
        let mut out = Statevector::zeros(self.n_qubits);
        for (c, u, w) in &self.dyads {
            out.add_scaled(c * w.inner(v), u);
        }
        out
    }
}

/// Sum of borrowed operators.
pub struct OperatorSum<'a> {
    n_qubits: usize,
    parts: Vec<&'a dyn Operator>,
}

impl<'a> OperatorSum<'a> {
    pub fn new(n_qubits: usize, parts: Vec<&'a dyn Operator>) -> OperatorSum<'a> {
        OperatorSum { n_qubits, parts }
    }
}

impl Operator for OperatorSum<'_> {
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn apply(&self, v: &Statevector) -> Statevector {
        let mut out = Statevector::zeros(self.n_qubits);
        for p in &self.parts {
            out.add_scaled(Complex64::new(1.0, 0.0), &p.apply(v));
        }
        out
    }
}
