//! Parameter continuation `theta*(x + dx) ~ theta*(x) + (d theta*/dx) dx`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::assembler::{stationarity_guard, AssemblyConfig, DerivativeSource, GroundStateSource};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianFamily;
use crate::response::solve_first;
use crate::theta::Backend;
use crate::vqe::{gradient_theta, optimize, OptimizerConfig};

/// One Euler update from `theta` at `x`. The guard defaults to warning:
/// continuation is expected to drift away from stationarity.
pub fn euler_step(family: &HamiltonianFamily, circuit: &Circuit, theta: &[f64], x: &[f64], dx: &[f64], guard: &AssemblyConfig) -> Result<Vec<f64>> {
    if dx.len() != family.x_dim() {
        return Err(Error::DimensionMismatch { expected: family.x_dim(), got: dx.len() });
    }
    let src = GroundStateSource::new(family, circuit, theta, x, Backend::exact())?;
    stationarity_guard(&src, guard)?;
    let n = src.n_params();
    let mut m1 = DMatrix::zeros(n, dx.len());
    for i in 0..dx.len() {
        m1.set_column(i, &src.theta_gradient(&[i])?);
    }
    let xr = solve_first(&src.theta_hessian(&[])?, &m1)?.solution;
    let step = xr * DVector::from_column_slice(dx);
    Ok(theta.iter().zip(step.iter()).map(|(t, s)| t + s).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationStep {
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
    pub energy_euler: f64,
    pub energy_reopt: Option<f64>,
    /// `max |dE/dtheta|` at `theta`.
    pub grad_norm: f64,
    pub reoptimized: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationTrajectory {
    pub dx: f64,
    pub steps: Vec<ContinuationStep>,
    /// Set when a step failed; `steps` then holds the points before it.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Replace the Euler parameters by a warm-started optimum every `k` steps.
    pub reoptimize_every: Option<usize>,
    /// Record the re-optimized energy at every point for comparison.
    pub compare: bool,
    pub optimizer: OptimizerConfig,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { reoptimize_every: None, compare: true, optimizer: OptimizerConfig::warm(1e-10) }
    }
}

/// Iterated Euler steps from `x_start` to `x_end` with spacing `dx` along
/// the straight line between them. `theta_start` should be optimal at
/// `x_start`.
pub fn continuation_scan(
    family: &HamiltonianFamily,
    circuit: &Circuit,
    theta_start: &[f64],
    x_start: &[f64],
    x_end: &[f64],
    dx: f64,
    config: &ScanConfig,
) -> Result<ContinuationTrajectory> {
    let nx = family.x_dim();
    if x_start.len() != nx || x_end.len() != nx {
        return Err(Error::DimensionMismatch { expected: nx, got: x_start.len().min(x_end.len()) });
    }
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(Error::InvalidInput(format!("step must be positive, got {dx}")));
    }
    if config.reoptimize_every == Some(0) {
        return Err(Error::InvalidInput("reoptimize_every must be at least 1".into()));
    }
    let delta: Vec<f64> = x_end.iter().zip(x_start).map(|(b, a)| b - a).collect();
    let length = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
    let n_steps = (length / dx).round();
    if (n_steps * dx - length).abs() > 1e-9 * length.max(1.0) {
        return Err(Error::InvalidInput(format!("scan length {length} is not a multiple of the step {dx}")));
    }
    let n_steps = n_steps as usize;
    let unit: Vec<f64> = if length > 0.0 { delta.iter().map(|d| d / length).collect() } else { vec![0.0; nx] };
    let dvec: Vec<f64> = unit.iter().map(|u| u * dx).collect();
    let guard = AssemblyConfig::warn();

    let mut traj = ContinuationTrajectory { dx, steps: Vec::with_capacity(n_steps + 1), error: None };
    let mut theta = theta_start.to_vec();
    let mut reopt_theta = theta_start.to_vec();
    for t in 0..=n_steps {
        let x: Vec<f64> = x_start.iter().zip(&unit).map(|(a, u)| a + u * dx * t as f64).collect();
        let result = (|| -> Result<ContinuationStep> {
            if t > 0 {
                let prev = &traj.steps[t - 1].x;
                theta = euler_step(family, circuit, &theta, prev, &dvec, &guard)?;
            }
            let h = family.eval(&x)?;
            let mut reoptimized = false;
            if let Some(k) = config.reoptimize_every {
                if t > 0 && t % k == 0 {
                    theta = optimize(circuit, &theta, &h, &config.optimizer)?.theta_star;
                    reoptimized = true;
                }
            }
            let energy_reopt = if config.compare {
                let r = optimize(circuit, &reopt_theta, &h, &config.optimizer)?;
                reopt_theta = r.theta_star;
                Some(r.energy)
            } else {
                None
            };
            let energy_euler = crate::vqe::energy(circuit, &theta, &h)?;
            let grad_norm = gradient_theta(circuit, &theta, &h)?.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            Ok(ContinuationStep { x, theta: theta.clone(), energy_euler, energy_reopt, grad_norm, reoptimized })
        })();
        match result {
            Ok(step) => traj.steps.push(step),
            Err(e) => {
                log::warn!("continuation stopped at step {t}: {e}");
                traj.error = Some(e.to_string());
                break;
            }
        }
    }
    Ok(traj)
}
