//! Linear solves and the backward Euler time loop.

use std::fmt;
use std::str::FromStr;

use crate::analysis::grad_lbeta_norm;
use crate::fem::{apply_dirichlet, P1Space, ScalarField};
use crate::mesh::Mesh;
use crate::problems::Problem;
use crate::sparse::{dot, norm2, norm_inf, SparseMatrix};
use crate::{Error, Result};

/// Result of a preconditioned CG run.
#[derive(Debug, Clone)]
pub struct CgStats {
    pub iterations: usize,
    /// Final relative residual `|b - A x| / |b|`.
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for SPD `a`, starting from
/// zero. Stops at relative residual `tol`; fails after `10 n` iterations.
pub fn cg_solve(a: &SparseMatrix, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let mut x = vec![0.0; b.len()];
    pcg(a, b, &mut x, tol)?;
    Ok(x)
}

/// Jacobi-preconditioned CG from the initial guess in `x`.
pub fn pcg(a: &SparseMatrix, b: &[f64], x: &mut [f64], tol: f64) -> Result<CgStats> {
    let n = a.dim();
    if b.len() != n || x.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: b.len().min(x.len()),
        });
    }
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats {
            iterations: 0,
            residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let ax = a.mul_vec(x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let cap = 10 * n.max(1);
    let mut rel = norm2(&r) / bnorm;
    let mut it = 0;
    while rel > tol {
        if it == cap {
            return Err(Error::LinearSolver {
                iterations: it,
                residual: rel,
            });
        }
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::LinearSolver {
                iterations: it,
                residual: rel,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
        rel = norm2(&r) / bnorm;
    }
    Ok(CgStats {
        iterations: it,
        residual: rel,
    })
}

/// Inner iteration of each implicit step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Frozen-coefficient fixed point; every iterate is an SPD solve.
    #[default]
    Picard,
    Newton,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "picard" => Ok(Self::Picard),
            "newton" => Ok(Self::Newton),
            other => Err(Error::Config(format!(
                "unknown scheme {other:?} (expected picard or newton)"
            ))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Picard => "picard",
            Self::Newton => "newton",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSteppingConfig {
    pub dt: f64,
    pub t_end: f64,
    /// Bound on the mass-norm of the last nonlinear increment.
    pub nonlinear_tol: f64,
    pub max_nonlinear_iters: usize,
    /// Relative residual tolerance of every CG solve.
    pub linear_tol: f64,
    pub scheme: Scheme,
    /// Keep the nodal field of every step in the trajectory.
    pub store_fields: bool,
}

impl TimeSteppingConfig {
    pub fn new(dt: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            dt,
            t_end,
            nonlinear_tol: 1e-10,
            max_nonlinear_iters: 50,
            linear_tol: 1e-12,
            scheme: Scheme::Picard,
            store_fields: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::Config(format!(
                "dt and T must be positive (dt = {}, T = {})",
                self.dt, self.t_end
            )));
        }
        if self.dt > self.t_end * (1.0 + 1e-12) {
            return Err(Error::Config(format!(
                "dt = {} exceeds T = {}",
                self.dt, self.t_end
            )));
        }
        if !(self.nonlinear_tol > 0.0) || !(self.linear_tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.max_nonlinear_iters == 0 {
            return Err(Error::Config("max_nonlinear_iters must be >= 1".into()));
        }
        Ok(())
    }

    /// Number of steps `T/dt`; the ratio must be an integer up to rounding.
    pub fn num_steps(&self) -> Result<usize> {
        self.validate()?;
        let ratio = self.t_end / self.dt;
        let steps = ratio.round();
        if (ratio - steps).abs() > 1e-9 * steps.max(1.0) {
            return Err(Error::Config(format!(
                "T = {} is not an integer multiple of dt = {}",
                self.t_end, self.dt
            )));
        }
        Ok(steps as usize)
    }
}

/// Diagnostics recorded at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub time: f64,
    /// `sqrt(v^T M v)` of the field with boundary values removed.
    pub l2_interior: f64,
    /// `|grad rho_h|_{L^beta}`.
    pub grad_lbeta: f64,
    pub nonlinear_iterations: usize,
    pub field: Option<ScalarField>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<StepRecord>,
    pub final_field: ScalarField,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.time).collect()
    }

    pub fn l2_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.l2_interior).collect()
    }

    pub fn max_nonlinear_iterations(&self) -> usize {
        self.records
            .iter()
            .map(|r| r.nonlinear_iterations)
            .max()
            .unwrap_or(0)
    }
}

/// Backward Euler integrator for one problem on one mesh.
///
/// Holds the mass matrix and sparsity pattern so repeated steps only
/// reassemble the nonlinear operator.
pub struct BackwardEuler<'a> {
    space: P1Space<'a>,
    mass: SparseMatrix,
    problem: &'a Problem,
    cfg: TimeSteppingConfig,
    beta: f64,
}

impl<'a> BackwardEuler<'a> {
    pub fn new(mesh: &'a Mesh, problem: &'a Problem, cfg: TimeSteppingConfig) -> Result<Self> {
        cfg.validate()?;
        let space = P1Space::new(mesh);
        let mass = space.mass();
        let beta = problem.g.exponents(2)?.beta;
        Ok(Self {
            space,
            mass,
            problem,
            cfg,
            beta,
        })
    }

    pub fn space(&self) -> &P1Space<'a> {
        &self.space
    }

    pub fn mass(&self) -> &SparseMatrix {
        &self.mass
    }

    pub fn config(&self) -> &TimeSteppingConfig {
        &self.cfg
    }

    fn mass_norm(&self, v: &[f64]) -> f64 {
        self.mass.inner(v, v).max(0.0).sqrt()
    }

    /// Advances `state` (at `t_next - dt`) to `t_next`. Returns the new
    /// field and the number of nonlinear iterations used.
    pub fn step(&self, state: &ScalarField, t_next: f64) -> Result<(ScalarField, usize)> {
        let n = self.space.dim();
        if state.values.len() != n {
            return Err(Error::SizeMismatch {
                expected: n,
                actual: state.values.len(),
            });
        }
        let dt = self.cfg.dt;
        let mesh = self.space.mesh();
        let g = &self.problem.g;
        let forcing = &self.problem.forcing;
        let bvals = self
            .space
            .boundary_values(|p, t| (self.problem.boundary)(p, t), t_next);
        let load = self.space.load(|p, t| forcing(p, t), t_next);

        let mut u = state.values.clone();
        for (&v, &val) in &bvals {
            u[v] = val;
        }
        let mut s = self.space.stiffness(&u, g)?;
        let mut increment = f64::INFINITY;

        match self.cfg.scheme {
            Scheme::Picard => {
                let ms = self.mass.mul_vec(&state.values);
                let rhs: Vec<f64> = ms.iter().zip(&load).map(|(m, b)| m / dt + b).collect();
                for k in 1..=self.cfg.max_nonlinear_iters {
                    let a = self.mass.linear_combination(1.0 / dt, &s, 1.0);
                    let sys = apply_dirichlet(&a, &rhs, mesh.boundary_mask(), &bvals)?;
                    let mut x: Vec<f64> = sys.free.iter().map(|&i| u[i]).collect();
                    pcg(&sys.matrix, &sys.rhs, &mut x, self.cfg.linear_tol)?;
                    let next = sys.expand(&x);
                    let diff: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
                    increment = self.mass_norm(&diff);
                    u = next;
                    s = self.space.stiffness(&u, g)?;
                    if increment <= self.cfg.nonlinear_tol && self.converged(&s, state, &u, &load) {
                        return Ok((ScalarField::new(u, t_next), k));
                    }
                }
            }
            Scheme::Newton => {
                let zero_bc: std::collections::BTreeMap<usize, f64> =
                    bvals.keys().map(|&v| (v, 0.0)).collect();
                for k in 1..=self.cfg.max_nonlinear_iters {
                    let r = self
                        .space
                        .residual_with(&self.mass, &s, &state.values, &u, dt, &load);
                    let jac = self.space.jacobian(&u, g)?;
                    let a = self.mass.linear_combination(1.0 / dt, &jac, 1.0);
                    let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
                    let sys = apply_dirichlet(&a, &neg_r, mesh.boundary_mask(), &zero_bc)?;
                    let x = cg_solve(&sys.matrix, &sys.rhs, self.cfg.linear_tol)?;
                    let delta = sys.expand(&x);
                    increment = self.mass_norm(&delta);
                    u.iter_mut().zip(&delta).for_each(|(ui, di)| *ui += di);
                    s = self.space.stiffness(&u, g)?;
                    if increment <= self.cfg.nonlinear_tol && self.converged(&s, state, &u, &load) {
                        return Ok((ScalarField::new(u, t_next), k));
                    }
                }
            }
        }
        Err(Error::NonlinearSolver {
            time: t_next,
            iterations: self.cfg.max_nonlinear_iters,
            increment,
        })
    }

    fn converged(&self, s: &SparseMatrix, state: &ScalarField, u: &[f64], load: &[f64]) -> bool {
        let r = self
            .space
            .residual_with(&self.mass, s, &state.values, u, self.cfg.dt, load);
        norm_inf(&r) <= 10.0 * self.cfg.nonlinear_tol
    }

    /// Diagnostics of a field at `time`.
    pub fn record(&self, step: usize, field: &ScalarField, iterations: usize) -> StepRecord {
        let mesh = self.space.mesh();
        let interior: Vec<f64> = field
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| if mesh.is_boundary(i) { 0.0 } else { v })
            .collect();
        StepRecord {
            step,
            time: field.time,
            l2_interior: self.mass_norm(&interior),
            grad_lbeta: grad_lbeta_norm(&self.space, &field.values, self.beta),
            nonlinear_iterations: iterations,
            field: self.cfg.store_fields.then(|| field.clone()),
        }
    }

    /// Runs from `initial` (at `t = 0`) to `T`.
    pub fn run_from(&self, initial: ScalarField) -> Result<Trajectory> {
        let steps = self.cfg.num_steps()?;
        let mut records = Vec::with_capacity(steps + 1);
        records.push(self.record(0, &initial, 0));
        let mut state = initial;
        for k in 1..=steps {
            // t_k = k dt, not an accumulated sum
            let t_next = k as f64 * self.cfg.dt;
            let (next, iters) = self.step(&state, t_next)?;
            records.push(self.record(k, &next, iters));
            state = next;
        }
        Ok(Trajectory {
            records,
            final_field: state,
        })
    }

    /// L2 projection of the initial data.
    pub fn initial_field(&self) -> Result<ScalarField> {
        let init = &self.problem.initial;
        self.space.l2_project(|p, _| init(p), 0.0)
    }
}

/// One backward Euler step of `problem` from `state` to `t_next`.
pub fn backward_euler_step(
    mesh: &Mesh,
    state: &ScalarField,
    t_next: f64,
    problem: &Problem,
    cfg: &TimeSteppingConfig,
) -> Result<ScalarField> {
    BackwardEuler::new(mesh, problem, cfg.clone())?
        .step(state, t_next)
        .map(|(f, _)| f)
}

/// Integrates `problem` from the L2-projected initial data to `cfg.t_end`.
pub fn run_transient(
    mesh: &Mesh,
    problem: &Problem,
    cfg: &TimeSteppingConfig,
) -> Result<Trajectory> {
    let be = BackwardEuler::new(mesh, problem, cfg.clone())?;
    let init = be.initial_field()?;
    be.run_from(init)
}
