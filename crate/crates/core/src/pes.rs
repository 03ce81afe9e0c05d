//! Taylor expansions of `E*(x)` around an anchor point.

use serde::{Deserialize, Serialize};

use crate::assembler::DerivativeBundle;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorPes {
    pub x0: f64,
    pub energy: f64,
    pub gradient: f64,
    pub hessian: f64,
    pub third: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PesRow {
    pub x: f64,
    pub harmonic: f64,
    /// Absent when the bundle stops at second order.
    pub cubic: Option<f64>,
}

impl TaylorPes {
    pub fn from_bundle(bundle: &DerivativeBundle) -> Result<TaylorPes> {
        if bundle.x.len() != 1 {
            return Err(Error::InvalidInput(format!("Taylor tables need a single coordinate, got {}", bundle.x.len())));
        }
        let hessian = bundle
            .hessian_x
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("Taylor tables need second derivatives".into()))?[0][0];
        Ok(TaylorPes {
            x0: bundle.x[0],
            energy: bundle.energy,
            gradient: bundle.grad_x[0],
            hessian,
            third: bundle.third_x.as_ref().map(|t| t.get(0, 0, 0)),
        })
    }

    pub fn harmonic(&self, x: f64) -> f64 {
        let d = x - self.x0;
        self.energy + self.gradient * d + 0.5 * self.hessian * d * d
    }

    pub fn cubic(&self, x: f64) -> Option<f64> {
        let d = x - self.x0;
        self.third.map(|t| self.harmonic(x) + t * d * d * d / 6.0)
    }

    /// `samples` evenly spaced points from `from` to `to` inclusive.
    pub fn table(&self, from: f64, to: f64, samples: usize) -> Vec<PesRow> {
        (0..samples)
            .map(|k| {
                let x = if samples == 1 { from } else { from + (to - from) * k as f64 / (samples - 1) as f64 };
                PesRow { x, harmonic: self.harmonic(x), cubic: self.cubic(x) }
            })
            .collect()
    }
}

/// Harmonic and cubic expansions sampled on `[from, to]`.
pub fn taylor_pes(bundle: &DerivativeBundle, from: f64, to: f64, samples: usize) -> Result<Vec<PesRow>> {
    Ok(TaylorPes::from_bundle(bundle)?.table(from, to, samples))
}

/// CSV with columns `x,harmonic,cubic`; a missing cubic value is left empty.
pub fn pes_csv(rows: &[PesRow]) -> String {
    let mut out = String::from("x,harmonic,cubic\n");
    for r in rows {
        let cubic = r.cubic.map(|c| format!("{c:.16e}")).unwrap_or_default();
        out.push_str(&format!("{:.16e},{:.16e},{}\n", r.x, r.harmonic, cubic));
    }
    out
}
