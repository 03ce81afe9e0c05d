//! Dense statevector simulator.
//!
//! Amplitude index bit `q` is the computational-basis value of qubit `q`.
//! Pauli rotations follow the `exp(+i * angle * P)` convention; a standard
//! `R_y(t) = exp(-i t Y / 2)` is a rotation by `-t / 2` about `Y`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum, MAX_QUBITS};

/// Tolerance on `| <psi|psi> - 1 |` accepted by [`expectation`].
pub const NORM_TOLERANCE: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const IMAG: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
fn parity_sign(i: usize, z: u64) -> f64 {
    if (i as u64 & z).count_ones() & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0...0>`.
    pub fn zero_state(n_qubits: usize) -> Statevector {
        Statevector::basis_state(n_qubits, 0)
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Statevector {
        assert!(n_qubits <= MAX_QUBITS && index < 1usize << n_qubits);
        let mut amps = vec![ZERO; 1usize << n_qubits];
        amps[index] = ONE;
        Statevector { n_qubits, amps }
    }

    /// Zero vector; used as an accumulator for linear combinations.
    pub fn zeros(n_qubits: usize) -> Statevector {
        Statevector { n_qubits, amps: vec![ZERO; 1usize << n_qubits] }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Statevector> {
        if n_qubits > MAX_QUBITS || amps.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch { expected: 1usize << n_qubits.min(MAX_QUBITS), got: amps.len() });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("amplitudes".into()));
        }
        Ok(Statevector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Statevector) -> Complex64 {
        debug_assert_eq!(self.amps.len(), other.amps.len());
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn scale(&mut self, factor: Complex64) {
        for a in &mut self.amps {
            *a *= factor;
        }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: Complex64, other: &Statevector) {
        debug_assert_eq!(self.amps.len(), other.amps.len());
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += factor * b;
        }
    }

    fn check_pauli(&self, p: &PauliString) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: p.n_qubits() });
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(Error::InvalidCircuit(format!("qubit {q} out of range for {} qubits", self.n_qubits)));
        }
        Ok(())
    }

    /// In place `|psi> <- factor * P |psi>`.
    pub fn apply_pauli_scaled(&mut self, p: &PauliString, factor: Complex64) -> Result<()> {
        self.check_pauli(p)?;
        let (x, z) = (p.x_mask() as usize, p.z_mask());
        let base = p.y_phase() * factor;
        if x == 0 {
            for (i, a) in self.amps.iter_mut().enumerate() {
                *a *= base * parity_sign(i, z);
            }
            return Ok(());
        }
        for i in 0..self.amps.len() {
            let j = i ^ x;
            if i < j {
                let (ai, aj) = (self.amps[i], self.amps[j]);
                self.amps[j] = base * parity_sign(i, z) * ai;
                self.amps[i] = base * parity_sign(j, z) * aj;
            }
        }
        Ok(())
    }

    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.apply_pauli_scaled(p, ONE)
    }

    /// In place `|psi> <- exp(i * angle * P) |psi>`.
    pub fn apply_pauli_rotation(&mut self, p: &PauliString, angle: f64) -> Result<()> {
        self.check_pauli(p)?;
        if !angle.is_finite() {
            return Err(Error::NonFinite("rotation angle".into()));
        }
        let (x, z) = (p.x_mask() as usize, p.z_mask());
        let (c, s) = (angle.cos(), angle.sin());
        let is = IMAG * s * p.y_phase();
        if x == 0 {
            for (i, a) in self.amps.iter_mut().enumerate() {
                *a *= c + is * parity_sign(i, z);
            }
            return Ok(());
        }
        for i in 0..self.amps.len() {
            let j = i ^ x;
            if i < j {
                let (ai, aj) = (self.amps[i], self.amps[j]);
                self.amps[i] = c * ai + is * parity_sign(j, z) * aj;
                self.amps[j] = c * aj + is * parity_sign(i, z) * ai;
            }
        }
        Ok(())
    }

    /// Applies `factor * P` only on the branch where `control` equals
    /// `control_value`. `P` must act trivially on the control qubit.
    pub fn apply_controlled_pauli(
        &mut self,
        p: &PauliString,
        control: usize,
        control_value: bool,
        factor: Complex64,
    ) -> Result<()> {
        self.check_pauli(p)?;
        self.check_qubit(control)?;
        let cbit = 1usize << control;
        if (p.x_mask() | p.z_mask()) as usize & cbit != 0 {
            return Err(Error::InvalidInsertion(format!("controlled {p} acts on its control qubit {control}")));
        }
        let want = if control_value { cbit } else { 0 };
        let (x, z) = (p.x_mask() as usize, p.z_mask());
        let base = p.y_phase() * factor;
        for i in 0..self.amps.len() {
            if i & cbit != want {
                continue;
            }
            let j = i ^ x;
            if x == 0 {
                self.amps[i] *= base * parity_sign(i, z);
            } else if i < j {
                let (ai, aj) = (self.amps[i], self.amps[j]);
                self.amps[j] = base * parity_sign(i, z) * ai;
                self.amps[i] = base * parity_sign(j, z) * aj;
            }
        }
        Ok(())
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (a, b) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = (a + b) * r;
                self.amps[i | bit] = (a - b) * r;
            }
        }
        Ok(())
    }

    /// Phase gate `diag(1, i)`; `dagger` applies `diag(1, -i)`.
    pub fn apply_s(&mut self, q: usize, dagger: bool) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        let ph = if dagger { -IMAG } else { IMAG };
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit != 0 {
                *a *= ph;
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::InvalidCircuit("CNOT control equals target".into()));
        }
        let (cb, tb) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & cb != 0 && i & tb == 0 {
                self.amps.swap(i, i | tb);
            }
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::InvalidCircuit("CZ on a single qubit".into()));
        }
        let mask = (1usize << a) | (1usize << b);
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == mask {
                *amp = -*amp;
            }
        }
        Ok(())
    }

    /// `<psi|P|psi>` as a complex number (real for normalized input up to rounding).
    pub fn pauli_inner(&self, p: &PauliString) -> Complex64 {
        let (x, z) = (p.x_mask() as usize, p.z_mask());
        let acc: Complex64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| self.amps[i ^ x].conj() * a * parity_sign(i, z))
            .sum();
        acc * p.y_phase()
    }

    /// `P |psi>` out of place.
    pub fn pauli_applied(&self, p: &PauliString) -> Result<Statevector> {
        let mut out = self.clone();
        out.apply_pauli(p)?;
        Ok(out)
    }
}

/// `P |psi>`.
pub fn apply_pauli(state: &Statevector, p: &PauliString) -> Result<Statevector> {
    state.pauli_applied(p)
}

/// `exp(i * angle * P) |psi>`.
pub fn apply_pauli_rotation(state: &Statevector, p: &PauliString, angle: f64) -> Result<Statevector> {
    let mut out = state.clone();
    out.apply_pauli_rotation(p, angle)?;
    Ok(out)
}

fn check_normalized(state: &Statevector) -> Result<()> {
    let n = state.norm_sqr();
    if (n - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized(n));
    }
    Ok(())
}

pub fn pauli_expectation(state: &Statevector, p: &PauliString) -> Result<f64> {
    if p.n_qubits() != state.n_qubits() {
        return Err(Error::QubitMismatch { left: state.n_qubits(), right: p.n_qubits() });
    }
    check_normalized(state)?;
    let v = state.pauli_inner(p);
    debug_assert!(v.im.abs() < 1e-12, "imaginary residue {}", v.im);
    Ok(v.re)
}

/// `sum_P h_P <psi|P|psi>`.
pub fn expectation(state: &Statevector, h: &PauliSum) -> Result<f64> {
    if h.n_qubits() != state.n_qubits() {
        return Err(Error::QubitMismatch { left: state.n_qubits(), right: h.n_qubits() });
    }
    check_normalized(state)?;
    let mut total = Complex64::new(0.0, 0.0);
    for (c, p) in h.terms() {
        total += state.pauli_inner(p) * *c;
    }
    debug_assert!(total.im.abs() < 1e-12 * (1.0 + h.one_norm()), "imaginary residue {}", total.im);
    Ok(total.re)
}

/// Shot-noise estimate of `<P>` from `shots` independent +/-1 outcomes,
/// each +1 with probability `(1 + <P>) / 2`. Deterministic in `seed`.
pub fn sample_expectation(state: &Statevector, p: &PauliString, shots: u64, seed: u64) -> Result<f64> {
    let exact = pauli_expectation(state, p)?;
    sample_from_mean(exact, shots, seed)
}

/// Draws a `shots`-sample estimate of a +/-1 observable with mean `mean`.
pub fn sample_from_mean(mean: f64, shots: u64, seed: u64) -> Result<f64> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let prob = ((1.0 + mean) / 2.0).clamp(0.0, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plus = Binomial::new(shots, prob).map_err(|e| Error::InvalidInput(e.to_string()))?.sample(&mut rng);
    Ok((2.0 * plus as f64 - shots as f64) / shots as f64)
}
