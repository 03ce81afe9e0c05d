//! Circuit-run estimates for shot-limited derivative evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::theta::BackendKind;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    /// Circuit runs per θ-tensor entry and Pauli term.
    pub multiplicity: f64,
    /// `C N_H N_theta^d / eps^2` (`N_H / eps^2` for `d = 1`).
    pub analytical_runs: f64,
    /// `N_H N_x^d / (eps^2 h^(2d))` for central differences of energies.
    pub finite_difference_runs: f64,
}

/// Distinct circuits per entry of an order-`d` θ-tensor.
pub fn runs_per_entry(scheme: BackendKind, d: usize) -> Result<f64> {
    match (scheme, d) {
        (_, 1) => Ok(1.0),
        (BackendKind::Ancilla, 2) => Ok(2.0),
        (BackendKind::Ancilla, 3) => Ok(4.0),
        (BackendKind::LowDepth, 2) => Ok(4.0),
        (BackendKind::LowDepth, 3) => Ok(8.0),
        (BackendKind::Exact, _) => Err(Error::InvalidInput("the exact backend runs no circuits".into())),
        _ => Err(Error::UnsupportedOrder { order: d, reason: "cost estimates cover orders 1 to 3".into() }),
    }
}

/// Shot-cost estimate for order-`d` derivatives to accuracy `epsilon`.
/// `n_terms` is the number of Pauli terms `N_H`.
pub fn cost_estimate(
    scheme: BackendKind,
    n_terms: usize,
    n_params: usize,
    n_x: usize,
    d: usize,
    epsilon: f64,
    fd_step: f64,
) -> Result<CostEstimate> {
    if !(1..=3).contains(&d) {
        return Err(Error::UnsupportedOrder { order: d, reason: "cost estimates cover orders 1 to 3".into() });
    }
    if !(epsilon > 0.0) || !(fd_step > 0.0) {
        return Err(Error::InvalidInput("epsilon and the finite-difference step must be positive".into()));
    }
    let c = runs_per_entry(scheme, d)?;
    let nh = n_terms as f64;
    let eps2 = epsilon * epsilon;
    let analytical_runs = if d == 1 { nh / eps2 } else { c * nh * (n_params as f64).powi(d as i32) / eps2 };
    let finite_difference_runs = nh * (n_x as f64).powi(d as i32) / (eps2 * fd_step.powi(2 * d as i32));
    Ok(CostEstimate { multiplicity: c, analytical_runs, finite_difference_runs })
}
