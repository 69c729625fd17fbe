//! Problem definitions: manufactured solutions with their forcing, boundary
//! and initial data, plus problems assembled from a run configuration.

use std::f64::consts::{E, PI};
use std::fmt;
use std::sync::Arc;

use crate::config::{ProblemKind, RunConfig};
use crate::forchheimer::{norm, GPolynomial};
use crate::{Error, Point, Result};

pub type SpaceTimeFn = Arc<dyn Fn(Point, f64) -> f64 + Send + Sync>;
pub type GradientFn = Arc<dyn Fn(Point, f64) -> [f64; 2] + Send + Sync>;
pub type SpatialFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

const VALIDATION_SAMPLES: usize = 100;
const VALIDATION_TOL: f64 = 1e-12;

/// A closed-form solution with the derivatives needed to build its forcing.
pub trait Manufactured: Send + Sync {
    fn value(&self, x: Point, t: f64) -> f64;
    fn gradient(&self, x: Point, t: f64) -> [f64; 2];
    fn hessian(&self, x: Point, t: f64) -> [[f64; 2]; 2];
    fn time_derivative(&self, x: Point, t: f64) -> f64;
}

/// `f = rho_t - div(K(|grad rho|) grad rho)` from analytic derivatives:
/// `div(K(|q|) q) = K tr(H) + K'(|q|) q^T H q / |q|` with `q = grad rho`.
pub fn manufactured_forcing<M: Manufactured + ?Sized>(
    g: &GPolynomial,
    sol: &M,
    x: Point,
    t: f64,
) -> f64 {
    let q = sol.gradient(x, t);
    let hess = sol.hessian(x, t);
    let xi = norm(q);
    let (k, dk) = g
        .kfun_with_deriv(xi)
        .expect("kernel evaluation on a validated polynomial");
    let lap = hess[0][0] + hess[1][1];
    let mut div = k * lap;
    if xi > 0.0 {
        let qhq = q[0] * (hess[0][0] * q[0] + hess[0][1] * q[1])
            + q[1] * (hess[1][0] * q[0] + hess[1][1] * q[1]);
        div += dk * qhq / xi;
    }
    sol.time_derivative(x, t) - div
}

/// `rho = e^{-2t} x1 (1 - x1) x2 (1 - x2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Example1Solution;

impl Manufactured for Example1Solution {
    fn value(&self, x: Point, t: f64) -> f64 {
        (-2.0 * t).exp() * x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1])
    }

    fn gradient(&self, x: Point, t: f64) -> [f64; 2] {
        let e = (-2.0 * t).exp();
        let (p, q) = (x[0] * (1.0 - x[0]), x[1] * (1.0 - x[1]));
        [e * q * (1.0 - 2.0 * x[0]), e * p * (1.0 - 2.0 * x[1])]
    }

    fn hessian(&self, x: Point, t: f64) -> [[f64; 2]; 2] {
        let e = (-2.0 * t).exp();
        let (p, q) = (x[0] * (1.0 - x[0]), x[1] * (1.0 - x[1]));
        let off = e * (1.0 - 2.0 * x[0]) * (1.0 - 2.0 * x[1]);
        [[-2.0 * e * q, off], [off, -2.0 * e * p]]
    }

    fn time_derivative(&self, x: Point, t: f64) -> f64 {
        -2.0 * self.value(x, t)
    }
}

/// `rho = e^{1-t} (x1^2 + x2^2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Example2Solution;

impl Manufactured for Example2Solution {
    fn value(&self, x: Point, t: f64) -> f64 {
        (1.0 - t).exp() * (x[0] * x[0] + x[1] * x[1])
    }

    fn gradient(&self, x: Point, t: f64) -> [f64; 2] {
        let e = (1.0 - t).exp();
        [2.0 * e * x[0], 2.0 * e * x[1]]
    }

    fn hessian(&self, _x: Point, t: f64) -> [[f64; 2]; 2] {
        let e = (1.0 - t).exp();
        [[2.0 * e, 0.0], [0.0, 2.0 * e]]
    }

    fn time_derivative(&self, x: Point, t: f64) -> f64 {
        -self.value(x, t)
    }
}

/// Steady linear solution `rho = c0 + c1 x1 + c2 x2`.
#[derive(Debug, Clone, Copy)]
pub struct LinearSolution(pub [f64; 3]);

impl Manufactured for LinearSolution {
    fn value(&self, x: Point, _t: f64) -> f64 {
        self.0[0] + self.0[1] * x[0] + self.0[2] * x[1]
    }

    fn gradient(&self, _x: Point, _t: f64) -> [f64; 2] {
        [self.0[1], self.0[2]]
    }

    fn hessian(&self, _x: Point, _t: f64) -> [[f64; 2]; 2] {
        [[0.0; 2]; 2]
    }

    fn time_derivative(&self, _x: Point, _t: f64) -> f64 {
        0.0
    }
}

/// Forcing of Example 1 for `g(s) = 1 + s`, in the three-term closed form.
pub fn example1_forcing(x: Point, t: f64) -> f64 {
    let (x1, x2) = (x[0], x[1]);
    let p1 = x1 * (1.0 - x1);
    let p2 = x2 * (1.0 - x2);
    let (d1, d2) = (1.0 - 2.0 * x1, 1.0 - 2.0 * x2);
    let w = ((p2 * d1).powi(2) + (p1 * d2).powi(2)).sqrt();
    let e2 = (-2.0 * t).exp();
    let e4 = (-4.0 * t).exp();
    let root = (1.0 + 4.0 * e2 * w).sqrt();

    let mut f = -2.0 * e2 * p1 * p2 + 4.0 * e2 * (p2 + p1) / (1.0 + root);
    if w > 0.0 {
        let denom = w * root * (1.0 + root).powi(2);
        let b1 = 2.0 * x1 * (1.0 - x1).powi(2) * d2 * d2
            - 2.0 * x1 * x1 * (1.0 - x1) * d2 * d2
            - 4.0 * x2 * x2 * (1.0 - x2).powi(2) * d1;
        let b2 = 2.0 * x2 * (1.0 - x2).powi(2) * d1 * d1
            - 2.0 * x2 * x2 * (1.0 - x2) * d1 * d1
            - 4.0 * x1 * x1 * (1.0 - x1).powi(2) * d2;
        f += 2.0 * e4 * p2 * d1 * b1 / denom;
        f += 2.0 * e4 * p1 * d2 * b2 / denom;
    }
    f
}

/// Forcing of Example 2 for `g(s) = 1 + s`, in closed form.
pub fn example2_forcing(x: Point, t: f64) -> f64 {
    let z = x[0] * x[0] + x[1] * x[1];
    let e1 = (1.0 - t).exp();
    let e2 = (2.0 - 2.0 * t).exp();
    let rz = z.sqrt();
    let root = (1.0 + 8.0 * e1 * rz).sqrt();
    let mut f = -e1 * z - 8.0 * e1 / (1.0 + root);
    if rz > 0.0 {
        f += 16.0 * e2 * z / (rz * root * (1.0 + root).powi(2));
    }
    f
}

/// Boundary data of Example 2, edge by edge.
pub fn example2_boundary(x: Point, t: f64) -> f64 {
    const TOL: f64 = 1e-12;
    let e1 = (1.0 - t).exp();
    let (x1, x2) = (x[0], x[1]);
    if x1.abs() < TOL {
        e1 * x2 * x2
    } else if (x1 - 1.0).abs() < TOL {
        e1 * (1.0 + x2 * x2)
    } else if (x2 - 1.0).abs() < TOL {
        e1 * (1.0 + x1 * x1)
    } else if x2.abs() < TOL {
        e1 * x1 * x1
    } else {
        // off the boundary: continue by the exact solution
        e1 * (x1 * x1 + x2 * x2)
    }
}

/// Exact solution and gradient.
#[derive(Clone)]
pub struct ExactSolution {
    pub value: SpaceTimeFn,
    pub gradient: GradientFn,
}

impl ExactSolution {
    pub fn from_manufactured<M: Manufactured + Clone + 'static>(sol: M) -> Self {
        let s2 = sol.clone();
        Self {
            value: Arc::new(move |x, t| sol.value(x, t)),
            gradient: Arc::new(move |x, t| s2.gradient(x, t)),
        }
    }
}

/// The only supported domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Domain {
    #[default]
    UnitSquare,
}

/// A complete initial-boundary value problem on the unit square.
#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub g: GPolynomial,
    pub exact: Option<ExactSolution>,
    pub forcing: SpaceTimeFn,
    pub boundary: SpaceTimeFn,
    pub initial: SpatialFn,
    pub domain: Domain,
    pub t_end: f64,
    /// True when `f = 0` and `psi = 0`.
    pub homogeneous: bool,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("name", &self.name)
            .field("g", &self.g)
            .field("has_exact", &self.exact.is_some())
            .field("t_end", &self.t_end)
            .field("homogeneous", &self.homogeneous)
            .finish()
    }
}

impl Problem {
    /// Problem generated by a manufactured solution for any `g`.
    pub fn manufactured<M>(name: &str, g: GPolynomial, sol: M, t_end: f64) -> Self
    where
        M: Manufactured + Clone + 'static,
    {
        let (sf, sb, si) = (sol.clone(), sol.clone(), sol.clone());
        let gf = g.clone();
        Self {
            name: name.to_string(),
            g,
            exact: Some(ExactSolution::from_manufactured(sol)),
            forcing: Arc::new(move |x, t| manufactured_forcing(&gf, &sf, x, t)),
            boundary: Arc::new(move |x, t| sb.value(x, t)),
            initial: Arc::new(move |x| si.value(x, 0.0)),
            domain: Domain::UnitSquare,
            t_end,
            homogeneous: false,
        }
    }

    /// `f = 0`, `psi = 0` with the given initial data; no exact solution.
    pub fn homogeneous(g: GPolynomial, initial: SpatialFn, t_end: f64) -> Self {
        Self {
            name: "homogeneous".into(),
            g,
            exact: None,
            forcing: Arc::new(|_, _| 0.0),
            boundary: Arc::new(|_, _| 0.0),
            initial,
            domain: Domain::UnitSquare,
            t_end,
            homogeneous: true,
        }
    }

    /// Steady linear solution `rho = x1` with its trace as boundary data.
    pub fn linear_patch(g: GPolynomial) -> Self {
        let mut p = Self::manufactured("patch", g, LinearSolution([0.0, 1.0, 0.0]), 1.0);
        p.forcing = Arc::new(|_, _| 0.0);
        p
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    /// Checks that boundary and initial data agree with the exact solution
    /// on deterministic samples.
    pub fn validate(&self) -> Result<()> {
        let Some(exact) = &self.exact else {
            return Ok(());
        };
        for k in 0..VALIDATION_SAMPLES {
            let s = low_discrepancy(k, 0);
            let t = self.t_end * low_discrepancy(k, 1);
            let x = match k % 4 {
                0 => [0.0, s],
                1 => [1.0, s],
                2 => [s, 0.0],
                _ => [s, 1.0],
            };
            let (e, b) = ((exact.value)(x, t), (self.boundary)(x, t));
            if (e - b).abs() > VALIDATION_TOL * e.abs().max(1.0) {
                return Err(Error::Validation(format!(
                    "{}: boundary data {b} differs from exact {e} at x = ({}, {}), t = {t}",
                    self.name, x[0], x[1]
                )));
            }
            let y = [low_discrepancy(k, 2), low_discrepancy(k, 3)];
            let (e, i) = ((exact.value)(y, 0.0), (self.initial)(y));
            if (e - i).abs() > VALIDATION_TOL * e.abs().max(1.0) {
                return Err(Error::Validation(format!(
                    "{}: initial data {i} differs from exact {e} at x = ({}, {})",
                    self.name, y[0], y[1]
                )));
            }
        }
        Ok(())
    }
}

/// Additive recurrence in `[0, 1)` with irrational increments per coordinate.
fn low_discrepancy(k: usize, dim: usize) -> f64 {
    const ALPHAS: [f64; 4] = [
        0.618_033_988_749_894_9,
        0.414_213_562_373_095_1,
        0.732_050_807_568_877_2,
        0.236_067_977_499_789_7,
    ];
    ((k as f64 + 0.5) * ALPHAS[dim % 4]).fract()
}

/// Example 1: `g = 1 + s`, homogeneous Dirichlet data, closed-form forcing.
pub fn example1() -> Problem {
    let g = GPolynomial::two_term(1.0, 1.0).expect("1 + s is valid");
    let mut p = Problem::manufactured("example1", g, Example1Solution, 1.0);
    p.forcing = Arc::new(example1_forcing);
    p.boundary = Arc::new(|_, _| 0.0);
    p
}

/// Example 2: `g = 1 + s`, nonzero Dirichlet data, closed-form forcing.
pub fn example2() -> Problem {
    let g = GPolynomial::two_term(1.0, 1.0).expect("1 + s is valid");
    let mut p = Problem::manufactured("example2", g, Example2Solution, 1.0);
    p.forcing = Arc::new(example2_forcing);
    p.boundary = Arc::new(example2_boundary);
    p.initial = Arc::new(|x| E * (x[0] * x[0] + x[1] * x[1]));
    p
}

/// Smooth initial bump `sin(pi x1) sin(pi x2)` vanishing on the boundary.
pub fn bump(x: Point) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

/// Builds the problem selected by a parsed configuration.
pub fn problem_from_config(cfg: &RunConfig) -> Result<Problem> {
    let custom_g = match (&cfg.alphas, &cfg.coeffs) {
        (Some(a), Some(c)) => Some(GPolynomial::new(a.clone(), c.clone())?),
        (None, None) => None,
        _ => {
            return Err(Error::Config(
                "alphas and coeffs must be given together".into(),
            ))
        }
    };
    let default_g = || GPolynomial::two_term(1.0, 1.0).expect("1 + s is valid");
    let mut problem = match (cfg.example.unwrap_or_default(), custom_g) {
        (ProblemKind::Example1, None) => example1(),
        (ProblemKind::Example2, None) => example2(),
        (ProblemKind::Example1, Some(g)) => {
            Problem::manufactured("example1", g, Example1Solution, 1.0)
        }
        (ProblemKind::Example2, Some(g)) => {
            Problem::manufactured("example2", g, Example2Solution, 1.0)
        }
        (ProblemKind::Patch, g) => Problem::linear_patch(g.unwrap_or_else(default_g)),
        (ProblemKind::Homogeneous, g) => {
            Problem::homogeneous(g.unwrap_or_else(default_g), Arc::new(bump), 1.0)
        }
    };
    if let Some(t) = cfg.t_end {
        problem.t_end = t;
    }
    problem.validate()?;
    Ok(problem)
}

/// Parses configuration text and builds its problem.
pub fn load_problem(text: &str) -> Result<Problem> {
    problem_from_config(&RunConfig::parse(text)?)
}
