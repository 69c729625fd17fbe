//! Acceptance suite. Each test prints exactly one `PASS`/`FAIL` line for its
//! criterion (plus indented detail) and fails when the criterion fails.
//!
//! Run with `cargo test -p forch-core --test acceptance -- --nocapture
//! --test-threads 1` to see the report in order.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use forch_core::analysis::{error_grad_lbeta, error_l2, observed_rate};
use forch_core::fem::P1Space;
use forch_core::forchheimer::inequalities::{
    derivative_margins, h_sandwich_margins, lipschitz_margin, monotonicity_margin,
};
use forch_core::problems::{example1, example2};
use forch_core::solver::{run_transient, BackwardEuler};
use forch_core::sparse::norm_inf;
use forch_core::{GPolynomial, Mesh, Problem, ScalarField, TimeSteppingConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn verdict(id: u32, title: &str, ok: bool, elapsed: Duration, limit: Duration, details: &[String]) {
    let in_time = elapsed <= limit;
    let pass = ok && in_time;
    println!(
        "{} criterion {id}: {title} ({:.2} s, limit {} s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    for d in details {
        println!("    {d}");
    }
    if !in_time {
        println!("    runtime limit exceeded");
    }
    assert!(pass, "criterion {id} failed");
}

fn one_plus_s() -> GPolynomial {
    GPolynomial::two_term(1.0, 1.0).unwrap()
}

fn quiet(dt: f64, t_end: f64) -> TimeSteppingConfig {
    let mut cfg = TimeSteppingConfig::new(dt, t_end).unwrap();
    cfg.store_fields = false;
    cfg
}

/// Final-time `(L2, grad L^beta)` errors for a manufactured problem.
fn final_errors(problem: &Problem, n: usize, dt: f64) -> (f64, f64) {
    let mesh = Mesh::unit_square(n).unwrap();
    let traj = run_transient(&mesh, problem, &quiet(dt, problem.t_end)).unwrap();
    let exact = problem.exact.as_ref().unwrap();
    let beta = problem.g.exponents(2).unwrap().beta;
    let u = &traj.final_field;
    (
        error_l2(&mesh, &u.values, |p, t| (exact.value)(p, t), u.time),
        error_grad_lbeta(
            &mesh,
            &u.values,
            |p, t| (exact.gradient)(p, t),
            u.time,
            beta,
        ),
    )
}

#[test]
fn criterion_1_kernel_closed_form() {
    let start = Instant::now();
    let g = one_plus_s();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = (0.0_f64, 0.0_f64);
    for k in 0..10_000 {
        let xi = match k {
            0 => 0.0,
            1 => 1e6,
            _ if k % 2 == 0 => rng.gen_range(0.0..1e6),
            _ => log_uniform(&mut rng, 1e-12, 1e6),
        };
        let err = (g.kfun(xi).unwrap() - k_closed_form(xi)).abs();
        if err > worst.0 {
            worst = (err, xi);
        }
    }
    verdict(
        1,
        "kfun matches 2/(1+sqrt(1+4xi)) to 1e-12 on 1e4 points in [0, 1e6]",
        worst.0 <= 1e-12,
        start.elapsed(),
        Duration::from_secs(1),
        &[format!(
            "max abs error {:.3e} at xi = {:.6e}",
            worst.0, worst.1
        )],
    );
}

#[test]
fn criterion_2_kernel_property_suites() {
    let start = Instant::now();
    const SAMPLES: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut fails = [0usize; 4];
    let mut worst = [0.0_f64; 4];
    let mut note = |idx: usize, rel: f64| {
        if rel < -1e-9 {
            fails[idx] += 1;
        }
        worst[idx] = worst[idx].min(rel);
    };
    for _ in 0..SAMPLES {
        let g = random_g(&mut rng);
        let (y, yp) = (random_vec2(&mut rng), random_vec2(&mut rng));
        let d = (yp[0] - y[0]).hypot(yp[1] - y[1]);
        let (fy, fyp) = (g.flux(y).unwrap(), g.flux(yp).unwrap());
        let df = (fyp[0] - fy[0]).hypot(fyp[1] - fy[1]);

        let scale = (df * d).max(f64::MIN_POSITIVE);
        note(0, monotonicity_margin(&g, y, yp).unwrap() / scale);
        note(
            1,
            lipschitz_margin(&g, y, yp).unwrap() / (g.lipschitz_constant() * d),
        );

        let xi = log_uniform(&mut rng, 1e-6, 1e6);
        let k = g.kfun(xi).unwrap();
        let (lo, hi) = derivative_margins(&g, xi).unwrap();
        note(2, lo.min(hi) / k);
        let (lo, hi) = h_sandwich_margins(&g, xi).unwrap();
        note(3, lo.min(hi) / (k * xi * xi));
    }
    let names = [
        "vector monotonicity",
        "Lipschitz (1+a)/a0",
        "derivative bound",
        "H sandwich",
    ];
    let details: Vec<String> = names
        .iter()
        .enumerate()
        .map(|(i, n)| {
            format!(
                "{n}: {SAMPLES} samples, {} violations, min relative margin {:.3e}",
                fails[i], worst[i]
            )
        })
        .collect();
    verdict(
        2,
        "kernel inequality property suites",
        fails.iter().all(|&f| f == 0),
        start.elapsed(),
        Duration::from_secs(30),
        &details,
    );
}

#[test]
fn criterion_3_patch_test() {
    let start = Instant::now();
    let gs = [
        ("1+s", one_plus_s()),
        (
            "1+s+s^2",
            GPolynomial::new(vec![0.0, 1.0, 2.0], vec![1.0, 1.0, 1.0]).unwrap(),
        ),
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (label, g) in &gs {
        for n in [2usize, 4, 8] {
            let problem = Problem::linear_patch(g.clone()).with_t_end(1.0);
            let mesh = Mesh::unit_square(n).unwrap();
            let traj = run_transient(&mesh, &problem, &quiet(0.25, 1.0)).unwrap();
            let err = mesh
                .vertices()
                .iter()
                .zip(&traj.final_field.values)
                .map(|(p, u)| (u - p[0]).abs())
                .fold(0.0, f64::max);
            ok &= err <= 1e-8;
            details.push(format!("g = {label}, N = {n}: max nodal error {err:.3e}"));
        }
    }
    verdict(
        3,
        "patch test reproduces nodal x1 to 1e-8",
        ok,
        start.elapsed(),
        Duration::from_secs(5),
        &details,
    );
}

const REF_L2: [f64; 5] = [1.668e-2, 1.049e-2, 6.004e-3, 3.272e-3, 1.723e-3];
const REF_GRAD: [f64; 5] = [7.081e-2, 4.654e-2, 2.741e-2, 1.530e-2, 8.277e-3];
const REF_L2_RATES: [f64; 4] = [0.669, 0.805, 0.876, 0.926];
const REF_GRAD_RATES: [f64; 4] = [0.605, 0.764, 0.841, 0.887];

#[test]
fn criterion_4_reference_rates_and_magnitudes() {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let problem = example1();
    let ns = [4usize, 8, 16, 32, 64];
    let errs: Vec<(f64, f64)> = pool.install(|| {
        ns.iter()
            .map(|&n| final_errors(&problem, n, 1.0 / 256.0))
            .collect()
    });
    let elapsed = start.elapsed();

    let mut ok = true;
    let mut details = vec![
        "N      err_l2   (ref)     rate (ref)      err_grad (ref)     rate (ref)  ".to_string(),
    ];
    for (i, &n) in ns.iter().enumerate() {
        let (el2, eg) = errs[i];
        let mag_ok = |ours: f64, theirs: f64| ours <= 3.0 * theirs && ours >= theirs / 3.0;
        ok &= mag_ok(el2, REF_L2[i]) && mag_ok(eg, REF_GRAD[i]);
        let mut line = format!("{n:<4} {el2:.3e} ({:.3e})", REF_L2[i]);
        if i > 0 {
            let r2 = observed_rate(errs[i - 1].0, el2);
            let rg = observed_rate(errs[i - 1].1, eg);
            ok &= (r2 - REF_L2_RATES[i - 1]).abs() <= 0.2;
            ok &= (rg - REF_GRAD_RATES[i - 1]).abs() <= 0.2;
            line += &format!(
                "  {r2:.3} ({:.3})   {eg:.3e} ({:.3e})   {rg:.3} ({:.3})",
                REF_L2_RATES[i - 1],
                REF_GRAD[i],
                REF_GRAD_RATES[i - 1]
            );
        } else {
            line += &format!("                  {eg:.3e} ({:.3e})", REF_GRAD[i]);
        }
        details.push(line);
    }
    // The exact solution at T = 1 has L2 norm e^{-2}/30 and gradient
    // magnitude at most e^{-2}/4; the zero field already beats the reference errors.
    let exact = problem.exact.as_ref().unwrap();
    let mesh = Mesh::unit_square(64).unwrap();
    let zero = vec![0.0; mesh.num_vertices()];
    details.push(format!(
        "error of the zero field at T = 1: L2 {:.3e}, grad L^1.5 {:.3e}",
        error_l2(&mesh, &zero, |p, t| (exact.value)(p, t), 1.0),
        error_grad_lbeta(&mesh, &zero, |p, t| (exact.gradient)(p, t), 1.0, 1.5)
    ));
    verdict(
        4,
        "reference rates within 0.2 and magnitudes within a factor 3",
        ok,
        elapsed,
        Duration::from_secs(300),
        &details,
    );
}

#[test]
fn criterion_5_example2_trend() {
    let start = Instant::now();
    let problem = example2();
    let ns = [4usize, 8, 16, 32, 64];
    let errs: Vec<f64> = ns
        .iter()
        .map(|&n| final_errors(&problem, n, 1.0 / 256.0).0)
        .collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let last_rate = observed_rate(errs[3], errs[4]);
    let details = ns
        .iter()
        .zip(&errs)
        .map(|(n, e)| format!("N = {n}: err_l2 {e:.4e}"))
        .chain([format!("last observed rate {last_rate:.3}")])
        .collect::<Vec<_>>();
    verdict(
        5,
        "Example 2 L2 errors strictly decrease and last rate > 0.6",
        decreasing && last_rate > 0.6,
        start.elapsed(),
        Duration::from_secs(300),
        &details,
    );
}

/// Uniform values in `[-1, 1]` at interior vertices, zero on the boundary.
fn random_interior(mesh: &Mesh, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..mesh.num_vertices())
        .map(|i| {
            let v: f64 = rng.gen_range(-1.0..=1.0);
            if mesh.is_boundary(i) {
                0.0
            } else {
                v
            }
        })
        .collect();
    ScalarField::new(values, 0.0)
}

#[test]
fn criterion_6_long_time_stability() {
    let start = Instant::now();
    let mesh = Mesh::unit_square(16).unwrap();
    let problem = Problem::homogeneous(one_plus_s(), Arc::new(|_| 0.0), 20.0);
    let be = BackwardEuler::new(&mesh, &problem, quiet(0.05, 20.0)).unwrap();
    let traj = be.run_from(random_interior(&mesh, 1)).unwrap();
    let norms = traj.l2_norms();
    let increases = norms.windows(2).filter(|w| w[1] > w[0]).count();
    let ratio = norms[norms.len() - 1] / norms[0];
    verdict(
        6,
        "homogeneous run: nonincreasing L2 norm, final < 1e-6 x initial",
        norms.len() == 401 && increases == 0 && ratio < 1e-6,
        start.elapsed(),
        Duration::from_secs(30),
        &[
            format!("{} steps, {increases} increases", norms.len() - 1),
            format!(
                "initial {:.4e}, final {:.4e}, ratio {ratio:.3e}",
                norms[0],
                norms[norms.len() - 1]
            ),
            format!(
                "max nonlinear iterations per step {}",
                traj.max_nonlinear_iterations()
            ),
        ],
    );
}

#[test]
fn criterion_7_temporal_order() {
    let start = Instant::now();
    let problem = example1();
    let dts = [0.1, 0.05, 0.025];
    let errs: Vec<f64> = dts
        .iter()
        .map(|&dt| final_errors(&problem, 64, dt).0)
        .collect();
    let (d1, d2) = (errs[0] - errs[1], errs[1] - errs[2]);
    let order = (d1 / d2).log2();
    verdict(
        7,
        "Example 1, N = 64: temporal order of error differences >= 0.8",
        order.is_finite() && order >= 0.8,
        start.elapsed(),
        Duration::from_secs(180),
        &[
            format!(
                "err_l2 at dt = 1/10, 1/20, 1/40: {:.5e}, {:.5e}, {:.5e}",
                errs[0], errs[1], errs[2]
            ),
            format!("differences {d1:.4e}, {d2:.4e}; observed order {order:.3}"),
        ],
    );
}

#[test]
fn criterion_8_oracles() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut details = Vec::new();
    let mut ok = true;
    for problem in [example1(), example2()] {
        let exact = problem.exact.clone().unwrap();
        let mut worst = 0.0_f64;
        for _ in 0..20 {
            let x = [rng.gen_range(0.02..0.98), rng.gen_range(0.02..0.98)];
            for t in [0.1, 0.5] {
                let r = pde_residual_fd(
                    &problem.g,
                    |p, s| (exact.value)(p, s),
                    |p, s| (problem.forcing)(p, s),
                    x,
                    t,
                );
                worst = worst.max(r.abs());
            }
        }
        ok &= worst <= 1e-5;
        details.push(format!(
            "{}: max |f - (rho_t - div flux)| = {worst:.3e}",
            problem.name
        ));
    }

    let mesh = Mesh::unit_square(8).unwrap();
    let space = P1Space::new(&mesh);
    for (label, g) in [
        ("1+s", one_plus_s()),
        (
            "1+2s^0.5+s^1.5",
            GPolynomial::new(vec![0.0, 0.5, 1.5], vec![1.0, 2.0, 1.0]).unwrap(),
        ),
    ] {
        let u: Vec<f64> = (0..space.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let v: Vec<f64> = (0..space.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let op = |w: &[f64]| space.stiffness(w, &g).unwrap().mul_vec(w);
        let eps = 1e-6;
        let shifted = |s: f64| {
            u.iter()
                .zip(&v)
                .map(|(a, b)| a + s * b)
                .collect::<Vec<f64>>()
        };
        let (fp, fm) = (op(&shifted(eps)), op(&shifted(-eps)));
        let fd: Vec<f64> = fp
            .iter()
            .zip(&fm)
            .map(|(a, b)| (a - b) / (2.0 * eps))
            .collect();
        let jv = space.jacobian(&u, &g).unwrap().mul_vec(&v);
        let diff: Vec<f64> = jv.iter().zip(&fd).map(|(a, b)| a - b).collect();
        let rel = norm_inf(&diff) / norm_inf(&jv);
        ok &= rel <= 1e-5;
        details.push(format!(
            "Jacobian vs directional difference, g = {label}, N = 8: relative error {rel:.3e}"
        ));
    }
    verdict(
        8,
        "forcing terms pass the PDE-residual oracle; Jacobian matches differences",
        ok,
        start.elapsed(),
        Duration::from_secs(30),
        &details,
    );
}
