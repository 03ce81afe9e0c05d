mod common;

use rand::Rng;
use vqederiv::*;

fn optimum(fam: &HamiltonianFamily, c: &Circuit, x: &[f64], theta0: &[f64]) -> Vec<f64> {
    optimize(c, theta0, &fam.eval(x).unwrap(), &OptimizerConfig { tol: 1e-12, ..OptimizerConfig::default() }).unwrap().theta_star
}

#[test]
fn bundle_invariants_on_random_families() {
    let c = common::product_ansatz(2);
    for k in 0..8u64 {
        let mut rng = common::rng(500 + k);
        let fam = common::random_family(&mut rng, 2, 2, 4);
        let x = [rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3)];
        let theta = optimum(&fam, &c, &x, &[0.1, 0.2, -0.1, 0.3]);
        let b = derivatives(&fam, &c, &theta, &x, 3, Backend::exact(), &AssemblyConfig::default()).unwrap();
        assert!(b.provenance.hessian_x_asymmetry.unwrap() < 1e-8);
        assert!(b.third_x.as_ref().unwrap().asymmetry() < 1e-7);
        let h = b.hessian_matrix().unwrap();
        assert!((&h - h.transpose()).amax() == 0.0);

        // Circuit backends reproduce the exact bundle without shot noise.
        for backend in [Backend::ancilla(), Backend::lowdepth()] {
            let m = derivatives(&fam, &c, &theta, &x, 3, backend, &AssemblyConfig::default()).unwrap();
            assert!((m.hessian_matrix().unwrap() - &h).amax() < 1e-9);
            assert!(m.third_x.unwrap().max_abs_diff(b.third_x.as_ref().unwrap()) < 1e-8);
        }
    }
}

#[test]
fn identity_term_shifts_derivatives_exactly() {
    let c = common::product_ansatz(2);
    let mut rng = common::rng(77);
    let fam = common::random_family(&mut rng, 2, 1, 3);
    let x = [0.15];
    let theta = optimum(&fam, &c, &x, &[0.1, 0.2, -0.1, 0.3]);
    let coeff = CoefficientFunction::Polynomial { monomials: vec![(vec![0], 2.0), (vec![1], -0.3), (vec![2], 0.8), (vec![3], 0.5)] };
    let mut terms = fam.terms().to_vec();
    terms.push((PauliString::identity(2), coeff.clone()));
    let shifted = HamiltonianFamily::new(2, 1, terms).unwrap();
    let a = derivatives(&fam, &c, &theta, &x, 3, Backend::exact(), &AssemblyConfig::default()).unwrap();
    let b = derivatives(&shifted, &c, &theta, &x, 3, Backend::exact(), &AssemblyConfig::default()).unwrap();
    let d = |q: u32| coeff.derivative(&[q]).unwrap().eval(&x).unwrap();
    assert!((b.energy - a.energy - d(0)).abs() < 1e-12);
    assert!((b.grad_x[0] - a.grad_x[0] - d(1)).abs() < 1e-12);
    assert!((b.hessian_x.unwrap()[0][0] - a.hessian_x.unwrap()[0][0] - d(2)).abs() < 1e-12);
    assert!((b.third_x.unwrap().get(0, 0, 0) - a.third_x.unwrap().get(0, 0, 0) - d(3)).abs() < 1e-12);
}

#[test]
fn tabulated_family_matches_polynomial() {
    // x^2 tabulated on a grid reproduces the polynomial pipeline.
    let xs: Vec<f64> = (0..41).map(|k| -1.0 + 0.05 * k as f64).collect();
    let tab = CoefficientFunction::Tabulated { x0: -1.0, dx: 0.05, values: xs.iter().map(|x| 0.5 * x * x).collect() };
    let poly = CoefficientFunction::Polynomial { monomials: vec![(vec![2], 0.5)] };
    let z = || ("Z".parse::<PauliString>().unwrap(), CoefficientFunction::constant(1, 1.0));
    let ft = HamiltonianFamily::new(1, 1, vec![z(), ("X".parse().unwrap(), tab)]).unwrap();
    let fp = HamiltonianFamily::new(1, 1, vec![z(), ("X".parse().unwrap(), poly)]).unwrap();
    let c = Circuit::y_rotation();
    let x = [0.35];
    let theta = optimum(&fp, &c, &x, &[3.0]);
    let a = derivatives(&fp, &c, &theta, &x, 2, Backend::exact(), &AssemblyConfig::default()).unwrap();
    let b = derivatives(&ft, &c, &theta, &x, 2, Backend::exact(), &AssemblyConfig::default()).unwrap();
    assert!((a.grad_x[0] - b.grad_x[0]).abs() < 1e-6);
    assert!((a.hessian_x.unwrap()[0][0] - b.hessian_x.unwrap()[0][0]).abs() < 1e-4);
}

#[test]
fn excited_derivatives_match_reoptimized_levels() {
    // Z0 + 0.5 Z1 + x X0 has product eigenstates, so the product ansatz
    // represents every level exactly.
    let fam = HamiltonianFamily::new(
        2,
        1,
        vec![
            ("ZI".parse::<PauliString>().unwrap(), CoefficientFunction::constant(1, 1.0)),
            ("IZ".parse().unwrap(), CoefficientFunction::constant(1, 0.5)),
            ("XI".parse().unwrap(), CoefficientFunction::linear(1, 0, 1.0)),
        ],
    )
    .unwrap();
    let c = common::product_ansatz(2);
    let starts = vec![vec![0.1, 3.0, 0.1, 3.0], vec![0.2, 3.0, -0.1, 0.2]];
    let level_energy = |x: f64| {
        let st = vqd_optimize(&fam, &[x], &[c.clone(), c.clone()], &starts, None, &OptimizerConfig::default()).unwrap();
        st.levels[1].energy
    };
    let x = 0.4;
    let stack = vqd_optimize(&fam, &[x], &[c.clone(), c.clone()], &starts, None, &OptimizerConfig::default()).unwrap();
    let exact = -(1.0f64 + x * x).sqrt() + 0.5;
    assert!((stack.levels[1].energy - exact).abs() < 1e-9);
    let b = excited_derivatives(&stack, 1, 2, true, &AssemblyConfig::default()).unwrap();
    let h = 1e-3;
    let (ep, e0, em) = (level_energy(x + h), level_energy(x), level_energy(x - h));
    assert!((b.grad_x[0] - (ep - em) / (2.0 * h)).abs() < 1e-4);
    assert!((b.hessian_x.as_ref().unwrap()[0][0] - (ep - 2.0 * e0 + em) / (h * h)).abs() < 1e-4);
    let full = excited_derivatives(&stack, 1, 2, false, &AssemblyConfig::default()).unwrap();
    assert!((full.hessian_x.unwrap()[0][0] - b.hessian_x.unwrap()[0][0]).abs() < 1e-8);
}

#[test]
fn levels_ascend_with_default_penalty() {
    let c = Circuit::hardware_efficient(2, 2, Entangler::Cnot).unwrap();
    let mut rng = common::rng(9);
    let fam = common::random_family(&mut rng, 2, 1, 2);
    let starts: Vec<Vec<f64>> = (0..3).map(|_| (0..c.n_params()).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let st = vqd_optimize(&fam, &[0.1], &[c.clone(), c.clone(), c.clone()], &starts, None, &OptimizerConfig::default()).unwrap();
    for w in st.levels.windows(2) {
        assert!(w[1].energy >= w[0].energy - 1e-8);
    }
    // Dense diagonalization oracle for the lowest two levels.
    let h = common::dense(&fam.eval(&[0.1]).unwrap());
    let herm = nalgebra::DMatrix::from_fn(8, 8, |i, j| {
        // Real embedding [[Re, -Im], [Im, Re]] keeps eigenvalues (doubled).
        let (bi, bj) = (i / 4, j / 4);
        let v = h[(i % 4, j % 4)];
        match (bi, bj) {
            (0, 0) | (1, 1) => v.re,
            (0, 1) => -v.im,
            _ => v.im,
        }
    });
    let mut ev: Vec<f64> = herm.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert!((st.levels[0].energy - ev[0]).abs() < 1e-6, "{:?} vs {ev:?}", st.levels[0].energy);
    assert!((st.levels[1].energy - ev[2]).abs() < 1e-6, "{:?} vs {ev:?}", st.levels[1].energy);
}
