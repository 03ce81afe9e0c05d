//! Finite-difference discrepancies shrink as `h^2` on random families, which
//! pins the remaining difference on the stencil rather than the analytics.

mod common;

use rand::Rng;
use vqederiv::{fd_validate, OptimizerConfig};

fn slope(hs: &[f64], errs: &[f64]) -> f64 {
    let n = hs.len();
    (errs[n - 1].ln() - errs[0].ln()) / (hs[n - 1].ln() - hs[0].ln())
}

#[test]
fn second_order_trend_on_random_families() {
    let circuit = common::product_ansatz(2);
    for k in 0..6u64 {
        let mut rng = common::rng(1000 + k);
        let x_dim = 1 + (k as usize % 2);
        let fam = common::random_family(&mut rng, 2, x_dim, 3);
        let x: Vec<f64> = (0..x_dim).map(|_| rng.random_range(-0.3..0.3)).collect();
        let theta0: Vec<f64> = (0..circuit.n_params()).map(|_| rng.random_range(-0.5..0.5)).collect();
        // Below these steps rounding in re-optimized energies dominates.
        for (order, hs) in [(1, [1e-1, 3e-2, 1e-2]), (2, [1e-1, 3e-2, 1e-2]), (3, [3e-2, 1e-2, 3e-3])] {
            let errs: Vec<f64> = hs
                .iter()
                .map(|&h| fd_validate(&fam, &circuit, &theta0, &x, order, h, &OptimizerConfig::default()).unwrap().max_abs_diff)
                .collect();
            let s = slope(&hs, &errs);
            assert!((s - 2.0).abs() < 0.3, "family {k} order {order}: slope {s}, errors {errs:?}");
        }
    }
}

#[test]
fn first_order_trend_down_to_small_steps() {
    let circuit = common::product_ansatz(2);
    let mut rng = common::rng(55);
    let fam = common::random_family(&mut rng, 2, 1, 3);
    let hs = [1e-2, 1e-3, 1e-4];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| fd_validate(&fam, &circuit, &[0.1, -0.2, 0.3, 0.1], &[0.1], 1, h, &OptimizerConfig::default()).unwrap().max_abs_diff)
        .collect();
    assert!((slope(&hs, &errs) - 2.0).abs() < 0.3, "{errs:?}");
}
