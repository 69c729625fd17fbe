//! Independent oracles shared by the integration tests. Nothing here calls
//! into the library's own derivative or quadrature code paths.
#![allow(dead_code)]

use forch_core::GPolynomial;
use rand::Rng;

/// `K(xi) = 2 / (1 + sqrt(1 + 4 xi))` for `g = 1 + s`.
pub fn k_closed_form(xi: f64) -> f64 {
    2.0 / (1.0 + (1.0 + 4.0 * xi).sqrt())
}

/// Random valid Forchheimer polynomial with 2 to 4 terms.
pub fn random_g<R: Rng>(rng: &mut R) -> GPolynomial {
    let terms = rng.gen_range(2..=4);
    let mut exps = vec![0.0];
    let mut coeffs = vec![rng.gen_range(0.2..3.0)];
    for i in 1..terms {
        let prev: f64 = exps[i - 1];
        exps.push(prev + rng.gen_range(0.25..1.5));
        let c = if i == terms - 1 || rng.gen_bool(0.7) {
            rng.gen_range(0.05..3.0)
        } else {
            0.0
        };
        coeffs.push(c);
    }
    GPolynomial::new(exps, coeffs).unwrap()
}

/// Log-uniform in `[lo, hi]`.
pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

pub fn random_vec2<R: Rng>(rng: &mut R) -> [f64; 2] {
    let r = log_uniform(rng, 1e-4, 1e4);
    let th = rng.gen_range(0.0..std::f64::consts::TAU);
    [r * th.cos(), r * th.sin()]
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn composite_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels.is_multiple_of(2));
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

const FD4: [(f64, f64); 4] = [
    (-2.0, 1.0 / 12.0),
    (-1.0, -8.0 / 12.0),
    (1.0, 8.0 / 12.0),
    (2.0, -1.0 / 12.0),
];

/// Fourth-order central difference of a scalar function of one variable.
pub fn fd1<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    FD4.iter().map(|&(o, w)| w * f(x + o * h)).sum::<f64>() / h
}

/// PDE residual `f - (rho_t - div(K(|grad rho|) grad rho))` with every
/// derivative of `rho` taken by nested fourth-order finite differences of
/// its values.
pub fn pde_residual_fd<R, F>(g: &GPolynomial, rho: R, f: F, x: [f64; 2], t: f64) -> f64
where
    R: Fn([f64; 2], f64) -> f64,
    F: Fn([f64; 2], f64) -> f64,
{
    let h = 1e-3;
    let grad = |p: [f64; 2]| {
        [
            fd1(|s| rho([s, p[1]], t), p[0], h),
            fd1(|s| rho([p[0], s], t), p[1], h),
        ]
    };
    let flux = |p: [f64; 2], comp: usize| {
        let q = grad(p);
        g.kfun(q[0].hypot(q[1])).unwrap() * q[comp]
    };
    let div = fd1(|s| flux([s, x[1]], 0), x[0], h) + fd1(|s| flux([x[0], s], 1), x[1], h);
    let rho_t = fd1(|s| rho(x, s), t, h);
    f(x, t) - (rho_t - div)
}

/// Integral of `f` over a triangle, by splitting it `levels` times into
/// four congruent children and applying a 7-point degree-3 rule on each.
pub fn refined_triangle_integral<F: Fn([f64; 2]) -> f64>(
    f: &F,
    tri: [[f64; 2]; 3],
    levels: u32,
) -> f64 {
    if levels == 0 {
        let area = 0.5
            * ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1])
                - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]))
                .abs();
        let at = |l: [f64; 3]| {
            [
                l[0] * tri[0][0] + l[1] * tri[1][0] + l[2] * tri[2][0],
                l[0] * tri[0][1] + l[1] * tri[1][1] + l[2] * tri[2][1],
            ]
        };
        // centroid 27/60, edge midpoints 8/60, vertices 3/60
        let c = f(at([1.0 / 3.0; 3])) * 27.0;
        let m = (f(at([0.5, 0.5, 0.0])) + f(at([0.0, 0.5, 0.5])) + f(at([0.5, 0.0, 0.5]))) * 8.0;
        let v = (f(tri[0]) + f(tri[1]) + f(tri[2])) * 3.0;
        return area * (c + m + v) / 60.0;
    }
    let mid = |a: [f64; 2], b: [f64; 2]| [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0];
    let (m01, m12, m20) = (
        mid(tri[0], tri[1]),
        mid(tri[1], tri[2]),
        mid(tri[2], tri[0]),
    );
    [
        [tri[0], m01, m20],
        [m01, tri[1], m12],
        [m20, m12, tri[2]],
        [m01, m12, m20],
    ]
    .into_iter()
    .map(|child| refined_triangle_integral(f, child, levels - 1))
    .sum()
}

/// Value of the P1 interpolant on triangle `tri` with nodal values `u` at `p`.
pub fn p1_eval(tri: [[f64; 2]; 3], u: [f64; 3], p: [f64; 2]) -> f64 {
    let det = (tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1])
        - (tri[2][0] - tri[0][0]) * (tri[1][1] - tri[0][1]);
    let l1 = ((p[0] - tri[0][0]) * (tri[2][1] - tri[0][1])
        - (tri[2][0] - tri[0][0]) * (p[1] - tri[0][1]))
        / det;
    let l2 = ((tri[1][0] - tri[0][0]) * (p[1] - tri[0][1])
        - (p[0] - tri[0][0]) * (tri[1][1] - tri[0][1]))
        / det;
    (1.0 - l1 - l2) * u[0] + l1 * u[1] + l2 * u[2]
}

/// `|u_h - w|_{L^2}` with the refined reference integration above.
pub fn l2_error_oracle<F: Fn([f64; 2]) -> f64>(
    mesh: &forch_core::Mesh,
    u: &[f64],
    w: F,
    levels: u32,
) -> f64 {
    let mut total = 0.0;
    for tri in mesh.triangles() {
        let pts = [
            mesh.vertices()[tri[0]],
            mesh.vertices()[tri[1]],
            mesh.vertices()[tri[2]],
        ];
        let vals = [u[tri[0]], u[tri[1]], u[tri[2]]];
        let e = |p: [f64; 2]| {
            let d = p1_eval(pts, vals, p) - w(p);
            d * d
        };
        total += refined_triangle_integral(&e, pts, levels);
    }
    total.sqrt()
}
