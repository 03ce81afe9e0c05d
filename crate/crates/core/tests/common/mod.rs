//! Shared instance generators and closed-form oracles.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqederiv::{
    Circuit, CoefficientFunction, GateElement, GeneratorTerm, HamiltonianFamily, NamedKind, Pauli, PauliString, PauliSum,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_pauli(rng: &mut ChaCha8Rng, n: usize) -> PauliString {
    loop {
        let axes: Vec<Pauli> = (0..n).map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)]).collect();
        let p = PauliString::from_axes(&axes).unwrap();
        if !p.is_identity() {
            return p;
        }
    }
}

fn signed(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let m = rng.random_range(lo..hi);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

/// Random circuit with multi-term generators, fixed rotations and
/// entangling gates.
pub fn random_circuit(rng: &mut ChaCha8Rng, n: usize, n_params: usize) -> Circuit {
    let mut elements = Vec::new();
    for a in 0..n_params {
        let terms = rng.random_range(1..=2);
        let generator = (0..terms).map(|_| GeneratorTerm { g: signed(rng, 0.2, 1.0), pauli: random_pauli(rng, n) }).collect();
        elements.push(GateElement::Parametric { param_index: a, generator });
        if n > 1 && rng.random_bool(0.5) {
            let c = rng.random_range(0..n);
            let t = (c + rng.random_range(1..n)) % n;
            let kind = if rng.random_bool(0.5) { NamedKind::Cnot } else { NamedKind::Cz };
            elements.push(GateElement::Named { kind, qubits: vec![c, t] });
        }
        if rng.random_bool(0.3) {
            elements.push(GateElement::FixedRotation { angle: rng.random_range(-1.0..1.0), pauli: random_pauli(rng, n) });
        }
    }
    Circuit::new(n, elements).unwrap()
}

pub fn random_pauli_sum(rng: &mut ChaCha8Rng, n: usize, terms: usize) -> PauliSum {
    let mut h = PauliSum::zero(n);
    for _ in 0..terms {
        h.add_term(rng.random_range(-1.0..1.0), random_pauli(rng, n)).unwrap();
    }
    h.add_term(rng.random_range(-1.0..1.0), PauliString::identity(n)).unwrap();
    h
}

/// `R_x` then `R_y` on every qubit: a product-state ansatz with one
/// parameter per Bloch-sphere coordinate, so optima are isolated.
pub fn product_ansatz(n: usize) -> Circuit {
    let mut elements = Vec::new();
    for q in 0..n {
        for (k, axis) in [Pauli::X, Pauli::Y].into_iter().enumerate() {
            elements.push(GateElement::Parametric {
                param_index: 2 * q + k,
                generator: vec![GeneratorTerm { g: -0.5, pauli: PauliString::from_sparse(n, &[(q, axis)]).unwrap() }],
            });
        }
    }
    Circuit::new(n, elements).unwrap()
}

/// Random polynomial family on `n` qubits: a dominant fixed field plus terms
/// with coefficients `c0 + c1 x_i + c2 x_i x_j + c3 x_i^3`.
pub fn random_family(rng: &mut ChaCha8Rng, n: usize, x_dim: usize, extra_terms: usize) -> HamiltonianFamily {
    let mut terms = Vec::new();
    for q in 0..n {
        let field = PauliString::from_sparse(n, &[(q, Pauli::Z)]).unwrap();
        terms.push((field, CoefficientFunction::constant(x_dim, rng.random_range(0.8..1.2))));
    }
    for _ in 0..extra_terms {
        let mut monomials = vec![(vec![0u32; x_dim], signed(rng, 0.05, 0.4))];
        for _ in 0..3 {
            let mut powers = vec![0u32; x_dim];
            let deg = rng.random_range(1..=3);
            for _ in 0..deg {
                powers[rng.random_range(0..x_dim)] += 1;
            }
            monomials.push((powers, signed(rng, 0.05, 0.5)));
        }
        terms.push((random_pauli(rng, n), CoefficientFunction::Polynomial { monomials }));
    }
    HamiltonianFamily::new(n, x_dim, terms).unwrap()
}

/// Closed forms for `H(x) = Z + x X` with an `R_y` ansatz: the optimum is
/// `theta* = pi + atan x` and `E* = -sqrt(1 + x^2)`.
pub mod model {
    pub fn theta_star(x: f64) -> f64 {
        std::f64::consts::PI + x.atan()
    }
    pub fn energy(x: f64) -> f64 {
        -(1.0 + x * x).sqrt()
    }
    pub fn grad(x: f64) -> f64 {
        -x / (1.0 + x * x).sqrt()
    }
    pub fn hess(x: f64) -> f64 {
        -(1.0 + x * x).powf(-1.5)
    }
    pub fn third(x: f64) -> f64 {
        3.0 * x * (1.0 + x * x).powf(-2.5)
    }
    pub fn dtheta(x: f64) -> f64 {
        1.0 / (1.0 + x * x)
    }
    pub fn d2theta(x: f64) -> f64 {
        -2.0 * x / (1.0 + x * x).powi(2)
    }
}

/// Dense Hermitian matrix of a Pauli sum, row-major, for eigen-solver oracles.
pub fn dense(h: &PauliSum) -> nalgebra::DMatrix<num_complex::Complex64> {
    let n = h.n_qubits();
    let dim = 1usize << n;
    let mut m = nalgebra::DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let v = vqederiv::Statevector::basis_state(n, col);
        let hv = vqederiv::Operator::apply(h, &v);
        for row in 0..dim {
            m[(row, col)] = hv.amplitudes()[row];
        }
    }
    m
}
