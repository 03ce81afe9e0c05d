//! Pauli strings and real-weighted Pauli sums.
//!
//! Strings are stored in symplectic form: bit `q` of `x` / `z` marks an X / Z
//! factor on qubit `q`, and a Y is recorded as both bits set. Qubit 0 is the
//! least-significant bit of a statevector amplitude index. Text form lists
//! qubit 0 first, so `"XZ"` is X on qubit 0 and Z on qubit 1.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest register the bit-mask representation supports.
pub const MAX_QUBITS: usize = 63;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'I' | 'i' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Scalar phase from `{+1, +i, -1, -i}`, stored as a power of `i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_power(k: i64) -> Phase {
        Phase(k.rem_euclid(4) as u8)
    }

    /// Exponent `k` in `i^k`, in `0..4`.
    pub fn power(self) -> u8 {
        self.0
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

/// Tensor product of single-qubit Paulis on a fixed register.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

impl PauliString {
    pub fn identity(n_qubits: usize) -> PauliString {
        assert!(n_qubits <= MAX_QUBITS, "register too large");
        PauliString { n_qubits, x: 0, z: 0 }
    }

    pub fn from_axes(axes: &[Pauli]) -> Result<PauliString> {
        if axes.len() > MAX_QUBITS {
            return Err(Error::InvalidPauli(format!("{} qubits exceeds {MAX_QUBITS}", axes.len())));
        }
        let mut p = PauliString::identity(axes.len());
        for (q, &axis) in axes.iter().enumerate() {
            p.set(q, axis);
        }
        Ok(p)
    }

    /// Builds a string with `axis` on each listed qubit and identity elsewhere.
    pub fn from_sparse(n_qubits: usize, factors: &[(usize, Pauli)]) -> Result<PauliString> {
        let mut p = PauliString::identity(n_qubits);
        for &(q, axis) in factors {
            if q >= n_qubits {
                return Err(Error::InvalidPauli(format!("qubit {q} out of range for {n_qubits} qubits")));
            }
            p.set(q, axis);
        }
        Ok(p)
    }

    fn set(&mut self, q: usize, axis: Pauli) {
        let bit = 1u64 << q;
        self.x &= !bit;
        self.z &= !bit;
        match axis {
            Pauli::I => {}
            Pauli::X => self.x |= bit,
            Pauli::Z => self.z |= bit,
            Pauli::Y => {
                self.x |= bit;
                self.z |= bit;
            }
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn axis(&self, q: usize) -> Pauli {
        let bit = 1u64 << q;
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn axes(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.axis(q)).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Number of Y factors.
    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Same operator on a larger register (extra qubits carry identity).
    pub fn padded(&self, n_qubits: usize) -> PauliString {
        assert!(n_qubits >= self.n_qubits && n_qubits <= MAX_QUBITS);
        PauliString { n_qubits, ..self.clone() }
    }

    /// Returns `(phase, product)` with `self * other = phase * product`.
    pub fn mul(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: other.n_qubits });
        }
        // P = i^{y} X^x Z^z; moving Z^{z1} past X^{x2} costs (-1)^{|z1 & x2|}.
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let y_out = (x & z).count_ones() as i64;
        let swaps = (self.z & other.x).count_ones() as i64;
        let k = self.y_count() as i64 + other.y_count() as i64 - y_out + 2 * swaps;
        Ok((Phase::from_power(k), PauliString { n_qubits: self.n_qubits, x, z }))
    }

    /// `i^{#Y}`, the constant prefactor of `P = i^{#Y} X^x Z^z`.
    pub(crate) fn y_phase(&self) -> Complex64 {
        Phase::from_power(self.y_count() as i64).to_complex()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n_qubits {
            write!(f, "{}", self.axis(q).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<PauliString> {
        let axes = s
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidPauli(s.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if axes.is_empty() {
            return Err(Error::InvalidPauli(s.to_string()));
        }
        PauliString::from_axes(&axes)
    }
}

/// `p1 * p2 = phase * product`.
pub fn pauli_mul(p1: &PauliString, p2: &PauliString) -> Result<(Phase, PauliString)> {
    p1.mul(p2)
}

/// Real linear combination of Pauli strings; duplicates are merged and exact
/// zeros dropped, keeping first-occurrence order.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: Vec<(f64, PauliString)>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> PauliSum {
        PauliSum { n_qubits, terms: Vec::new() }
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<PauliSum>
    where
        I: IntoIterator<Item = (f64, PauliString)>,
    {
        let mut sum = PauliSum::zero(n_qubits);
        for (c, p) in terms {
            sum.add_term(c, p)?;
        }
        Ok(sum)
    }

    /// Parses `(coefficient, "XZ…")` pairs.
    pub fn from_labels(terms: &[(f64, &str)]) -> Result<PauliSum> {
        let first = terms.first().ok_or_else(|| Error::InvalidInput("empty Pauli sum".into()))?;
        let n = first.1.len();
        PauliSum::from_terms(
            n,
            terms.iter().map(|&(c, s)| s.parse::<PauliString>().map(|p| (c, p))).collect::<Result<Vec<_>>>()?,
        )
    }

    pub fn add_term(&mut self, coeff: f64, p: PauliString) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch { left: self.n_qubits, right: p.n_qubits() });
        }
        if !coeff.is_finite() {
            return Err(Error::NonFinite(format!("coefficient of {p}")));
        }
        if let Some(pos) = self.terms.iter().position(|(_, q)| *q == p) {
            self.terms[pos].0 += coeff;
            if self.terms[pos].0 == 0.0 {
                self.terms.remove(pos);
            }
        } else if coeff != 0.0 {
            self.terms.push((coeff, p));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, p: &PauliString) -> f64 {
        self.terms.iter().find(|(_, q)| q == p).map_or(0.0, |(c, _)| *c)
    }

    /// `sum |h_P|`, an upper bound on the spectral radius.
    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.abs()).sum()
    }

    pub fn scaled(&self, factor: f64) -> PauliSum {
        let mut out = PauliSum::zero(self.n_qubits);
        for (c, p) in &self.terms {
            out.add_term(c * factor, p.clone()).expect("same register");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{dense_pauli, matmul, scale};
    use proptest::prelude::*;

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn single_qubit_products() {
        let (ph, p) = pauli_mul(&ps("X"), &ps("Y")).unwrap();
        assert_eq!(ph, Phase::I);
        assert_eq!(p, ps("Z"));
        let (ph, p) = pauli_mul(&ps("Y"), &ps("X")).unwrap();
        assert_eq!(ph, Phase::MINUS_I);
        assert_eq!(p, ps("Z"));
        let (ph, p) = pauli_mul(&ps("Z"), &ps("Z")).unwrap();
        assert_eq!(ph, Phase::ONE);
        assert!(p.is_identity());
    }

    #[test]
    fn identity_is_neutral() {
        for s in ["XY", "ZZ", "IY", "YX"] {
            let (ph, p) = pauli_mul(&ps("II"), &ps(s)).unwrap();
            assert_eq!(ph, Phase::ONE);
            assert_eq!(p, ps(s));
        }
    }

    #[test]
    fn two_qubit_product_matches_matrices() {
        let (ph, p) = pauli_mul(&ps("XZ"), &ps("YZ")).unwrap();
        assert_eq!(ph, Phase::I);
        assert_eq!(p, ps("ZI"));
        let lhs = matmul(&dense_pauli(&ps("XZ")), &dense_pauli(&ps("YZ")));
        let rhs = scale(&dense_pauli(&ps("ZI")), ph.to_complex());
        for (a, b) in lhs.iter().flatten().zip(rhs.iter().flatten()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(matches!(pauli_mul(&ps("X"), &ps("XX")), Err(Error::QubitMismatch { .. })));
    }

    #[test]
    fn text_round_trip_and_ordering() {
        let p = ps("XIYZ");
        assert_eq!(p.axis(0), Pauli::X);
        assert_eq!(p.axis(2), Pauli::Y);
        assert_eq!(p.to_string(), "XIYZ");
        assert!("XQ".parse::<PauliString>().is_err());
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn sum_merges_and_drops_zeros() {
        let s = PauliSum::from_labels(&[(1.0, "ZI"), (0.5, "XX"), (-1.0, "ZI"), (0.0, "YY")]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.coefficient(&ps("XX")), 0.5);
        assert_eq!(s.one_norm(), 0.5);
    }

    fn arb_string(n: usize) -> impl Strategy<Value = PauliString> {
        proptest::collection::vec(0u8..4, n).prop_map(|v| {
            let axes: Vec<Pauli> = v.into_iter().map(|k| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][k as usize]).collect();
            PauliString::from_axes(&axes).unwrap()
        })
    }

    proptest! {
        #[test]
        fn product_matches_dense_oracle(a in arb_string(3), b in arb_string(3)) {
            let (ph, p) = pauli_mul(&a, &b).unwrap();
            let lhs = matmul(&dense_pauli(&a), &dense_pauli(&b));
            let rhs = scale(&dense_pauli(&p), ph.to_complex());
            for (u, v) in lhs.iter().flatten().zip(rhs.iter().flatten()) {
                prop_assert!((u - v).norm() < 1e-14);
            }
            prop_assert_eq!(a.commutes_with(&b), pauli_mul(&b, &a).unwrap().0 == ph);
        }
    }
}
