//! Dense third-order tensors with cubic shape.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(n: usize) -> Tensor3 {
        Tensor3 { n, data: vec![0.0; n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, a: usize, b: usize, c: usize) -> usize {
        (a * self.n + b) * self.n + c
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[self.idx(a, b, c)]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, v: f64) {
        let i = self.idx(a, b, c);
        self.data[i] = v;
    }

    /// Writes `v` to all six permutations of `(a, b, c)`.
    pub fn set_symmetric(&mut self, a: usize, b: usize, c: usize, v: f64) {
        for (p, q, r) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
            self.set(p, q, r, v);
        }
    }

    /// Builds a fully symmetric tensor from its `a <= b <= c` entries.
    pub fn from_sorted_entries(n: usize, entries: &[((usize, usize, usize), f64)]) -> Tensor3 {
        let mut t = Tensor3::zeros(n);
        for &((a, b, c), v) in entries {
            t.set_symmetric(a, b, c, v);
        }
        t
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest difference between an entry and any of its index permutations.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let v = self.get(a, b, c);
                    for w in [self.get(a, c, b), self.get(b, a, c), self.get(b, c, a), self.get(c, a, b), self.get(c, b, a)] {
                        worst = worst.max((v - w).abs());
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.n, other.n);
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn to_nested(&self) -> Vec<Vec<Vec<f64>>> {
        (0..self.n)
            .map(|a| (0..self.n).map(|b| (0..self.n).map(|c| self.get(a, b, c)).collect()).collect())
            .collect()
    }

    pub fn from_nested(v: &[Vec<Vec<f64>>]) -> Option<Tensor3> {
        let n = v.len();
        let mut t = Tensor3::zeros(n);
        for (a, plane) in v.iter().enumerate() {
            if plane.len() != n {
                return None;
            }
            for (b, row) in plane.iter().enumerate() {
                if row.len() != n {
                    return None;
                }
                for (c, &x) in row.iter().enumerate() {
                    t.set(a, b, c, x);
                }
            }
        }
        Some(t)
    }
}

impl Serialize for Tensor3 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_nested().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tensor3 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<Vec<Vec<f64>>>::deserialize(d)?;
        Tensor3::from_nested(&v).ok_or_else(|| serde::de::Error::custom("tensor is not cubic"))
    }
}

/// All `a <= b` pairs for `a, b < n`.
pub fn sorted_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect()
}

/// All `a <= b <= c` triples for indices below `n`.
pub fn sorted_triples(n: usize) -> Vec<(usize, usize, usize)> {
    (0..n).flat_map(|a| (a..n).flat_map(move |b| (b..n).map(move |c| (a, b, c)))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_fill_and_round_trip() {
        let t = Tensor3::from_sorted_entries(3, &[((0, 1, 2), 1.5), ((1, 1, 1), -2.0)]);
        assert_eq!(t.get(2, 0, 1), 1.5);
        assert_eq!(t.asymmetry(), 0.0);
        let json = serde_json::to_string(&t).unwrap();
        let back: Tensor3 = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert_eq!(sorted_pairs(3).len(), 6);
        assert_eq!(sorted_triples(4).len(), 20);
    }
}
