//! Finite-difference cross-check of analytical energy derivatives against
//! central differences of re-optimized energies `E*(x)`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembler::{derivatives, AssemblyConfig};
use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianFamily;
use crate::tensor::{sorted_pairs, sorted_triples};
use crate::theta::Backend;
use crate::vqe::{optimize, OptimizerConfig};

/// Largest parameter change allowed between the anchor optimum and a
/// re-optimized stencil point before it is treated as a different branch.
pub const BRANCH_JUMP_TOL: f64 = 0.5;

/// Central-difference weights for `d^c/dx^c`, as (offset, weight) pairs to be
/// divided by `h^c`.
pub fn central_stencil(count: usize) -> Result<&'static [(i32, f64)]> {
    match count {
        1 => Ok(&[(-1, -0.5), (1, 0.5)]),
        2 => Ok(&[(-1, 1.0), (0, -2.0), (1, 1.0)]),
        3 => Ok(&[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)]),
        _ => Err(Error::UnsupportedOrder { order: count, reason: "central stencils exist for orders 1 to 3".into() }),
    }
}

/// Tensor-product stencil for the mixed derivative over `idx` (repeats
/// allowed): integer offsets per coordinate and their weights.
pub fn mixed_stencil(x_dim: usize, idx: &[usize]) -> Result<Vec<(Vec<i32>, f64)>> {
    let mut counts = vec![0usize; x_dim];
    for &i in idx {
        if i >= x_dim {
            return Err(Error::DimensionMismatch { expected: x_dim, got: i + 1 });
        }
        counts[i] += 1;
    }
    let mut points = vec![(vec![0i32; x_dim], 1.0)];
    for (i, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let st = central_stencil(c)?;
        points = points
            .into_iter()
            .flat_map(|(off, w)| {
                st.iter().map(move |&(o, sw)| {
                    let mut off = off.clone();
                    off[i] = o;
                    (off, w * sw)
                })
            })
            .collect();
    }
    Ok(points)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    pub order: usize,
    pub h: f64,
    pub x: Vec<f64>,
    pub theta_star: Vec<f64>,
    /// Sorted x-index tuples, one per reported entry.
    pub indices: Vec<Vec<usize>>,
    pub analytical: Vec<f64>,
    pub numerical: Vec<f64>,
    pub abs_diff: Vec<f64>,
    pub max_abs_diff: f64,
    /// `max_abs_diff` divided by the largest analytical magnitude.
    pub relative_diff: f64,
    pub reoptimizations: usize,
}

/// Optimizes at `x` from `theta0`, then compares order-`order` analytical
/// derivatives with central differences of warm-started re-optimizations.
pub fn fd_validate(
    family: &HamiltonianFamily,
    circuit: &Circuit,
    theta0: &[f64],
    x: &[f64],
    order: usize,
    h: f64,
    optimizer: &OptimizerConfig,
) -> Result<FdReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidInput(format!("finite-difference step must be positive, got {h}")));
    }
    let nx = family.x_dim();
    if x.len() != nx {
        return Err(Error::DimensionMismatch { expected: nx, got: x.len() });
    }
    let anchor = optimize(circuit, theta0, &family.eval(x)?, optimizer)?;
    let theta_star = anchor.theta_star;
    let bundle = derivatives(family, circuit, &theta_star, x, order, Backend::exact(), &AssemblyConfig::default())?;

    let indices: Vec<Vec<usize>> = match order {
        1 => (0..nx).map(|i| vec![i]).collect(),
        2 => sorted_pairs(nx).into_iter().map(|(i, j)| vec![i, j]).collect(),
        3 => sorted_triples(nx).into_iter().map(|(i, j, k)| vec![i, j, k]).collect(),
        _ => return Err(Error::UnsupportedOrder { order, reason: "finite-difference validation covers orders 1 to 3".into() }),
    };
    let analytical: Vec<f64> = indices
        .iter()
        .map(|ix| match ix.as_slice() {
            [i] => bundle.grad_x[*i],
            [i, j] => bundle.hessian_x.as_ref().expect("order 2")[*i][*j],
            [i, j, k] => bundle.third_x.as_ref().expect("order 3").get(*i, *j, *k),
            _ => unreachable!(),
        })
        .collect();

    let stencils = indices.iter().map(|ix| mixed_stencil(nx, ix)).collect::<Result<Vec<_>>>()?;
    let mut points: BTreeMap<Vec<i32>, f64> = BTreeMap::new();
    for st in &stencils {
        for (off, _) in st {
            points.insert(off.clone(), f64::NAN);
        }
    }
    let warm = OptimizerConfig { seeds: 1, tol: 1e-12, ..optimizer.clone() };
    let keys: Vec<Vec<i32>> = points.keys().cloned().collect();
    let energies = keys
        .par_iter()
        .map(|off| {
            let xp: Vec<f64> = x.iter().zip(off).map(|(xi, &o)| xi + o as f64 * h).collect();
            let r = optimize(circuit, &theta_star, &family.eval(&xp)?, &warm)?;
            let shift = r.theta_star.iter().zip(&theta_star).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if shift > BRANCH_JUMP_TOL {
                return Err(Error::BranchJump { x: xp, shift });
            }
            Ok(r.energy)
        })
        .collect::<Result<Vec<_>>>()?;
    for (k, e) in keys.iter().zip(energies) {
        points.insert(k.clone(), e);
    }
    let scale = h.powi(order as i32);
    let numerical: Vec<f64> = stencils.iter().map(|st| st.iter().map(|(off, w)| w * points[off]).sum::<f64>() / scale).collect();
    let abs_diff: Vec<f64> = analytical.iter().zip(&numerical).map(|(a, n)| (a - n).abs()).collect();
    let max_abs_diff = abs_diff.iter().fold(0.0f64, |m, v| m.max(*v));
    let mag = analytical.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let relative_diff = if mag > 0.0 { max_abs_diff / mag } else { max_abs_diff };
    Ok(FdReport {
        order,
        h,
        x: x.to_vec(),
        theta_star,
        indices,
        analytical,
        numerical,
        abs_diff,
        max_abs_diff,
        relative_diff,
        reoptimizations: keys.len(),
    })
}
