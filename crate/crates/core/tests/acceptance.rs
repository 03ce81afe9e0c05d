//! Acceptance suite: one PASS/FAIL line per criterion, then a single assert.

mod common;

use std::time::Instant;

use rand::Rng;
use vqederiv::theta::BackendKind;
use vqederiv::*;

use common::model;

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(outcomes: &[Outcome]) {
    for o in outcomes {
        println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.pass).map(|o| o.name).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

fn closed_form_oracle() -> Outcome {
    let start = Instant::now();
    let fam = HamiltonianFamily::model();
    let c = Circuit::y_rotation();
    let mut worst = 0.0f64;
    for x in [0.0, 0.3, 1.0] {
        let opt = optimize(&c, &[3.0], &fam.eval(&[x]).unwrap(), &OptimizerConfig::default()).unwrap();
        let b = derivatives(&fam, &c, &opt.theta_star, &[x], 3, Backend::exact(), &AssemblyConfig::default()).unwrap();
        worst = worst
            .max((b.grad_x[0] - model::grad(x)).abs())
            .max((b.hessian_x.as_ref().unwrap()[0][0] - model::hess(x)).abs())
            .max((b.third_x.as_ref().unwrap().get(0, 0, 0) - model::third(x)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        name: "closed-form oracle",
        pass: worst < 1e-7 && secs < 1.0,
        detail: format!("max error {worst:.2e} (tol 1e-7), runtime {secs:.3}s (limit 1s)"),
    }
}

fn backend_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let instances = 60;
    for k in 0..instances {
        let mut rng = common::rng(7000 + k);
        let n = 1 + (k as usize % 3);
        let n_params = 1 + (k as usize % 6);
        let circuit = common::random_circuit(&mut rng, n, n_params);
        let h = common::random_pauli_sum(&mut rng, n, 5);
        let theta: Vec<f64> = (0..n_params).map(|_| rng.random_range(-3.0..3.0)).collect();
        let exact = ThetaEngine::new(&circuit, &theta, Backend::exact()).unwrap();
        let eh = exact.hessian(&h).unwrap();
        let et = exact.third(&h).unwrap();
        for b in [Backend::ancilla(), Backend::lowdepth()] {
            let eng = ThetaEngine::new(&circuit, &theta, b).unwrap();
            worst = worst.max((eng.hessian(&h).unwrap() - &eh).amax()).max(eng.third(&h).unwrap().max_abs_diff(&et));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        name: "backend equivalence",
        pass: worst < 1e-10 && secs < 120.0,
        detail: format!("{instances} instances, max |circuit - exact| {worst:.2e} (tol 1e-10), runtime {secs:.1}s (limit 120s)"),
    }
}

fn fd_agreement() -> Outcome {
    let circuit = common::product_ansatz(2);
    let mut worst = [0.0f64; 3];
    let mut failures = Vec::new();
    for k in 0..20u64 {
        let mut rng = common::rng(1000 + k);
        let x_dim = 1 + (k as usize % 2);
        let fam = common::random_family(&mut rng, 2, x_dim, 3);
        let x: Vec<f64> = (0..x_dim).map(|_| rng.random_range(-0.3..0.3)).collect();
        let theta0: Vec<f64> = (0..circuit.n_params()).map(|_| rng.random_range(-0.5..0.5)).collect();
        for (order, h) in [(1, 1e-3), (2, 1e-3), (3, 3e-2)] {
            match fd_validate(&fam, &circuit, &theta0, &x, order, h, &OptimizerConfig::default()) {
                Ok(r) => {
                    let (v, tol) = if order == 3 { (r.relative_diff, 1e-3) } else { (r.max_abs_diff, 1e-5) };
                    worst[order - 1] = worst[order - 1].max(v);
                    if v >= tol {
                        failures.push(format!("family {k} order {order}: {v:.2e}"));
                    }
                }
                Err(e) => failures.push(format!("family {k} order {order}: {e}")),
            }
        }
    }
    Outcome {
        name: "finite-difference agreement",
        pass: failures.is_empty(),
        detail: format!(
            "20 families; max abs diff order 1 {:.2e}, order 2 {:.2e} (tol 1e-5, h=1e-3); max relative diff order 3 {:.2e} (tol 1e-3, h=3e-2); {} failing: [{}]",
            worst[0],
            worst[1],
            worst[2],
            failures.len(),
            failures.join("; ")
        ),
    }
}

/// Re-optimized `theta*(x)` warm-started from `theta`.
fn reoptimize(fam: &HamiltonianFamily, c: &Circuit, theta: &[f64], x: &[f64]) -> Vec<f64> {
    optimize(c, theta, &fam.eval(x).unwrap(), &OptimizerConfig::warm(1e-12)).unwrap().theta_star
}

fn response_bundle(fam: &HamiltonianFamily, c: &Circuit, theta: &[f64], x: &[f64]) -> DerivativeBundle {
    let cfg = AssemblyConfig { unsimplified_check: true, ..AssemblyConfig::default() };
    derivatives(fam, c, theta, x, 3, Backend::exact(), &cfg).unwrap()
}

fn response_equations() -> Outcome {
    let h = 1e-3;
    let mut cases: Vec<(HamiltonianFamily, Circuit, Vec<f64>, Vec<f64>)> = vec![
        (HamiltonianFamily::model(), Circuit::y_rotation(), vec![model::theta_star(0.3)], vec![0.3]),
        (HamiltonianFamily::model(), Circuit::y_rotation(), vec![model::theta_star(1.0)], vec![1.0]),
    ];
    let circuit = common::product_ansatz(2);
    for k in 0..8u64 {
        let mut rng = common::rng(3000 + k);
        let x_dim = 1 + (k as usize % 2);
        let fam = common::random_family(&mut rng, 2, x_dim, 3);
        let x: Vec<f64> = (0..x_dim).map(|_| rng.random_range(-0.3..0.3)).collect();
        let theta0: Vec<f64> = (0..circuit.n_params()).map(|_| rng.random_range(-0.5..0.5)).collect();
        let theta = optimize(&circuit, &theta0, &fam.eval(&x).unwrap(), &OptimizerConfig { tol: 1e-12, ..OptimizerConfig::default() })
            .unwrap()
            .theta_star;
        cases.push((fam, circuit.clone(), theta, x));
    }
    let (mut e1, mut e2, mut e3) = (0.0f64, 0.0f64, 0.0f64);
    for (fam, c, theta, x) in &cases {
        let b = response_bundle(fam, c, theta, x);
        let r = b.response().unwrap();
        let second = r.second.as_ref().unwrap();
        e3 = e3.max(b.provenance.third_x_path_difference.unwrap());
        for j in 0..x.len() {
            let mut xp = x.clone();
            xp[j] += h;
            let mut xm = x.clone();
            xm[j] -= h;
            let tp = reoptimize(fam, c, theta, &xp);
            let tm = reoptimize(fam, c, theta, &xm);
            let rp = response_bundle(fam, c, &tp, &xp).response().unwrap().first;
            let rm = response_bundle(fam, c, &tm, &xm).response().unwrap().first;
            for a in 0..theta.len() {
                let fd1 = (tp[a] - tm[a]) / (2.0 * h);
                e1 = e1.max((fd1 - r.first[(a, j)]).abs());
                for i in 0..x.len() {
                    let fd2 = (rp[(a, i)] - rm[(a, i)]) / (2.0 * h);
                    e2 = e2.max((fd2 - second[i][j][a]).abs());
                }
            }
        }
    }
    // Model closed forms as an extra anchor.
    let b = response_bundle(&HamiltonianFamily::model(), &Circuit::y_rotation(), &[model::theta_star(1.0)], &[1.0]);
    let r = b.response().unwrap();
    let closed = (r.first[(0, 0)] - model::dtheta(1.0)).abs().max((r.second.unwrap()[0][0][0] - model::d2theta(1.0)).abs());
    Outcome {
        name: "response equations",
        pass: e1 < 1e-5 && e2 < 1e-4 && e3 < 1e-7 && closed < 1e-10,
        detail: format!(
            "{} cases; first vs FD of theta* {e1:.2e} (tol 1e-5); second vs FD of first {e2:.2e} (tol 1e-4); simplified vs unsimplified third {e3:.2e} (tol 1e-7); model closed form {closed:.1e}",
            cases.len()
        ),
    }
}

fn excited_states() -> Outcome {
    let fam = HamiltonianFamily::model();
    let c = Circuit::y_rotation();
    let (mut e_grad, mut e_paths, mut e_proj, mut max_overlap) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for x in [0.0, 0.3, 1.0, -0.7] {
        let stack = vqd_optimize(&fam, &[x], &[c.clone(), c.clone()], &[vec![3.0], vec![0.5]], None, &OptimizerConfig::default()).unwrap();
        max_overlap = max_overlap.max(overlap(&stack.state(0).unwrap(), &stack.state(1).unwrap()).unwrap());
        let dropped = excited_derivatives(&stack, 1, 3, true, &AssemblyConfig::default()).unwrap();
        let full = excited_derivatives(&stack, 1, 3, false, &AssemblyConfig::default()).unwrap();
        e_grad = e_grad.max((dropped.grad_x[0] - x / (1.0 + x * x).sqrt()).abs());
        e_paths = e_paths
            .max((dropped.grad_x[0] - full.grad_x[0]).abs())
            .max((dropped.hessian_x.as_ref().unwrap()[0][0] - full.hessian_x.as_ref().unwrap()[0][0]).abs())
            .max(dropped.third_x.as_ref().unwrap().max_abs_diff(full.third_x.as_ref().unwrap()));
        e_proj = e_proj.max(excited::projector_terms(&stack, 1).unwrap()[0].abs());
    }
    Outcome {
        name: "excited states",
        pass: e_grad < 1e-6 && max_overlap < 1e-10 && e_paths < 1e-8 && e_proj < 1e-8,
        detail: format!(
            "level-1 dE/dx error {e_grad:.2e} (tol 1e-6); max overlap {max_overlap:.1e} (< 1e-10); drop vs full orders 1-3 {e_paths:.2e} (tol 1e-8); projector terms {e_proj:.1e}"
        ),
    }
}

fn continuation() -> Outcome {
    let fam = HamiltonianFamily::model();
    let c = Circuit::y_rotation();
    let guard = AssemblyConfig::warn();
    let x0 = 0.5;
    let steps = [0.08, 0.04, 0.02, 0.01];
    let single: Vec<f64> = steps
        .iter()
        .map(|&d| (euler_step(&fam, &c, &[model::theta_star(x0)], &[x0], &[d], &guard).unwrap()[0] - model::theta_star(x0 + d)).abs())
        .collect();
    let s1 = slope(&steps, &single);

    let steps2 = [0.04, 0.02, 0.01];
    let cfg = ScanConfig { compare: false, ..ScanConfig::default() };
    let mut traj_err = Vec::new();
    let mut monotone = true;
    let mut anchor = 0.0f64;
    for &d in &steps2 {
        let tr = continuation_scan(&fam, &c, &[model::theta_star(0.0)], &[0.0], &[0.4], d, &cfg).unwrap();
        let last = tr.steps.last().unwrap();
        traj_err.push((last.theta[0] - model::theta_star(last.x[0])).abs());
        monotone &= tr.steps.windows(2).all(|w| w[1].grad_norm >= w[0].grad_norm);
        anchor = anchor.max((tr.steps[0].energy_euler - model::energy(0.0)).abs());
    }
    let s2 = slope(&steps2, &traj_err);
    Outcome {
        name: "continuation",
        pass: (s1 - 2.0).abs() <= 0.3 && (s2 - 1.0).abs() <= 0.3 && anchor <= 1e-10 && monotone,
        detail: format!(
            "single-step slope {s1:.3} (2 +/- 0.3); trajectory slope {s2:.3} (1 +/- 0.3); anchor energy error {anchor:.1e}; grad_norm monotone: {monotone}"
        ),
    }
}

fn shot_scaling() -> Outcome {
    let mut rng = common::rng(4242);
    let circuit = common::random_circuit(&mut rng, 2, 3);
    let h = common::random_pauli_sum(&mut rng, 2, 4);
    let theta: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
    let exact = ThetaEngine::new(&circuit, &theta, Backend::exact()).unwrap().hessian(&h).unwrap()[(0, 1)];
    let shots = [1_000u64, 10_000, 100_000];
    let rms: Vec<f64> = shots
        .iter()
        .map(|&s| {
            let sq: f64 = (0..100u64)
                .map(|seed| {
                    let eng = ThetaEngine::new(&circuit, &theta, Backend::ancilla().with_shots(s, seed)).unwrap();
                    let e = eng.hessian(&h).unwrap()[(0, 1)] - exact;
                    e * e
                })
                .sum();
            (sq / 100.0).sqrt()
        })
        .collect();
    let ideal = 10f64.sqrt();
    let ratios = [rms[0] / rms[1], rms[1] / rms[2]];
    let scaling_ok = ratios.iter().all(|r| *r >= ideal / 2.0 && *r <= ideal * 2.0);
    let cost_ratios: Vec<f64> = [2, 3]
        .iter()
        .map(|&d| {
            let lo = cost_estimate(BackendKind::LowDepth, 10, 6, 1, d, 1e-3, 1e-2).unwrap().analytical_runs;
            let an = cost_estimate(BackendKind::Ancilla, 10, 6, 1, d, 1e-3, 1e-2).unwrap().analytical_runs;
            lo / an
        })
        .collect();
    let cost_ok = cost_ratios.iter().all(|r| *r == 2.0);
    Outcome {
        name: "shot scaling",
        pass: scaling_ok && cost_ok,
        detail: format!(
            "rms Hessian-entry error {:.2e}/{:.2e}/{:.2e} at 1e3/1e4/1e5 shots, ratios {:.2}, {:.2} (sqrt 10 = {ideal:.2}, within x2); cost ratio low-depth/ancilla {cost_ratios:?}",
            rms[0], rms[1], rms[2], ratios[0], ratios[1]
        ),
    }
}

#[test]
fn acceptance() {
    let outcomes = vec![
        closed_form_oracle(),
        backend_equivalence(),
        fd_agreement(),
        response_equations(),
        excited_states(),
        continuation(),
        shot_scaling(),
    ];
    report(&outcomes);
}
