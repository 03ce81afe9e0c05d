//! Dense-matrix oracles for unit tests. Nothing here calls into the
//! bit-mask kernel.

use num_complex::Complex64;

use crate::pauli::{Pauli, PauliString, PauliSum};

pub type Dense = Vec<Vec<Complex64>>;

fn single(p: Pauli) -> [[Complex64; 2]; 2] {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match p {
        Pauli::I => [[l, o], [o, l]],
        Pauli::X => [[o, l], [l, o]],
        Pauli::Y => [[o, -i], [i, o]],
        Pauli::Z => [[l, o], [o, -l]],
    }
}

pub fn dense_pauli(p: &PauliString) -> Dense {
    let n = p.n_qubits();
    let dim = 1usize << n;
    let mats: Vec<_> = p.axes().into_iter().map(single).collect();
    (0..dim)
        .map(|r| {
            (0..dim)
                .map(|c| {
                    mats.iter()
                        .enumerate()
                        .map(|(q, m)| m[(r >> q) & 1][(c >> q) & 1])
                        .product()
                })
                .collect()
        })
        .collect()
}

pub fn dense_sum(h: &PauliSum) -> Dense {
    let dim = 1usize << h.n_qubits();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
    for (c, p) in h.terms() {
        let m = dense_pauli(p);
        for r in 0..dim {
            for k in 0..dim {
                out[r][k] += m[r][k] * c;
            }
        }
    }
    out
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let n = a.len();
    (0..n)
        .map(|r| (0..n).map(|c| (0..n).map(|k| a[r][k] * b[k][c]).sum()).collect())
        .collect()
}

pub fn scale(a: &Dense, s: Complex64) -> Dense {
    a.iter().map(|row| row.iter().map(|v| v * s).collect()).collect()
}

pub fn matvec(a: &Dense, v: &[Complex64]) -> Vec<Complex64> {
    a.iter().map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum()).collect()
}

/// `exp(i * angle * P)` for a Pauli `P` (uses `P^2 = I`).
pub fn dense_rotation(p: &PauliString, angle: f64) -> Dense {
    let m = dense_pauli(p);
    let dim = m.len();
    let (c, s) = (angle.cos(), angle.sin());
    (0..dim)
        .map(|r| {
            (0..dim)
                .map(|k| {
                    let id = if r == k { Complex64::new(c, 0.0) } else { Complex64::new(0.0, 0.0) };
                    id + Complex64::new(0.0, s) * m[r][k]
                })
                .collect()
        })
        .collect()
}

/// Seeded random circuit, Hamiltonian and parameter point on `n` qubits
/// with `n_params` parametric gates (one or two generator terms each).
pub fn random_instance(seed: u64, n: usize, n_params: usize) -> (crate::Circuit, PauliSum, Vec<f64>) {
    use crate::circuit::{GateElement, GeneratorTerm, NamedKind};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pauli = |rng: &mut rand_chacha::ChaCha8Rng| loop {
        let axes: Vec<Pauli> = (0..n).map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][rng.random_range(0..4)]).collect();
        let p = PauliString::from_axes(&axes).unwrap();
        if !p.is_identity() {
            return p;
        }
    };
    let mut elements = Vec::new();
    for a in 0..n_params {
        let terms = rng.random_range(1..=2);
        let generator = (0..terms)
            .map(|_| {
                let mag = rng.random_range(0.2..1.0);
                let g = if rng.random_bool(0.5) { mag } else { -mag };
                GeneratorTerm { g, pauli: pauli(&mut rng) }
            })
            .collect();
        elements.push(GateElement::Parametric { param_index: a, generator });
        if n > 1 && rng.random_bool(0.5) {
            let c = rng.random_range(0..n);
            let t = (c + rng.random_range(1..n)) % n;
            let kind = if rng.random_bool(0.5) { NamedKind::Cnot } else { NamedKind::Cz };
            elements.push(GateElement::Named { kind, qubits: vec![c, t] });
        }
        if rng.random_bool(0.3) {
            elements.push(GateElement::FixedRotation { angle: rng.random_range(-1.0..1.0), pauli: pauli(&mut rng) });
        }
    }
    let circuit = crate::Circuit::new(n, elements).unwrap();
    let n_terms = rng.random_range(3..=6);
    let mut terms = Vec::new();
    for _ in 0..n_terms {
        terms.push((rng.random_range(-1.0..1.0), pauli(&mut rng)));
    }
    let h = PauliSum::from_terms(n, terms).unwrap();
    let theta = (0..n_params).map(|_| rng.random_range(-3.0..3.0)).collect();
    (circuit, h, theta)
}
