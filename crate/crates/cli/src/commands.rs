use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use forch_core::analysis::{
    convergence_table, csv_line, error_grad_lbeta, error_l2, error_linf, format_sig6, format_table,
    write_csv, ErrorSet, CSV_HEADER,
};
use forch_core::config::{InitialKind, Mode};
use forch_core::solver::{run_transient, BackwardEuler};
use forch_core::{Mesh, Problem, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::spec::RunSpec;

/// Relative slack allowed when checking that norms do not increase.
pub const MONOTONE_RTOL: f64 = 1e-12;

pub const STABILITY_HEADER: &str = "step,time,l2_norm,grad_lbeta,omega,iterations,err_l2";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    SolverFailure,
    MonotonicityViolation,
}

impl Outcome {
    pub fn exit_code(self) -> ExitCode {
        match self {
            Self::Success => ExitCode::SUCCESS,
            Self::SolverFailure => ExitCode::from(2),
            Self::MonotonicityViolation => ExitCode::from(3),
        }
    }
}

pub fn execute(spec: &RunSpec) -> anyhow::Result<Outcome> {
    match spec.mode {
        Mode::Convergence => cmd_convergence(spec),
        Mode::Stability => cmd_stability(spec),
        Mode::Single => cmd_single(spec),
    }
}

fn open_output(spec: &RunSpec) -> anyhow::Result<Box<dyn Write>> {
    Ok(match &spec.output {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Prints a human-readable report without mixing it into CSV on stdout.
fn report(spec: &RunSpec, text: &str) {
    if spec.output.is_some() {
        print!("{text}");
    } else {
        eprint!("{text}");
    }
}

fn final_errors(mesh: &Mesh, problem: &Problem, field: &ScalarField) -> anyhow::Result<ErrorSet> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("problem has no exact solution"))?;
    let beta = problem.g.exponents(2)?.beta;
    let t = field.time;
    Ok(ErrorSet {
        l2: error_l2(mesh, &field.values, |p, t| (exact.value)(p, t), t),
        grad_lbeta: error_grad_lbeta(mesh, &field.values, |p, t| (exact.gradient)(p, t), t, beta),
        linf: error_linf(mesh, &field.values, |p, t| (exact.value)(p, t), t),
    })
}

fn solve_level(spec: &RunSpec, n: usize) -> anyhow::Result<(ErrorSet, usize)> {
    let mesh = Mesh::unit_square(n)?;
    let traj = run_transient(&mesh, &spec.problem, &spec.stepping)?;
    Ok((
        final_errors(&mesh, &spec.problem, &traj.final_field)?,
        traj.max_nonlinear_iterations(),
    ))
}

pub fn cmd_convergence(spec: &RunSpec) -> anyhow::Result<Outcome> {
    report(
        spec,
        &format!(
            "{}: T = {}, dt = {}, scheme = {}, N = {:?}\n",
            spec.problem.name,
            spec.stepping.t_end,
            spec.stepping.dt,
            spec.stepping.scheme,
            spec.n_list
        ),
    );
    let results: Vec<anyhow::Result<(ErrorSet, usize)>> = if rayon::current_num_threads() > 1 {
        spec.n_list
            .par_iter()
            .map(|&n| solve_level(spec, n))
            .collect()
    } else {
        spec.n_list.iter().map(|&n| solve_level(spec, n)).collect()
    };

    let mut levels = Vec::new();
    let mut failure = None;
    for (&n, res) in spec.n_list.iter().zip(results) {
        match res {
            Ok((errs, iters)) => {
                report(
                    spec,
                    &format!("  N = {n}: max nonlinear iterations per step {iters}\n"),
                );
                levels.push((n, errs));
            }
            Err(e) => {
                failure = Some(format!("N = {n}: {e:#}"));
                break;
            }
        }
    }
    let rows = convergence_table(&levels)?;
    let mut out = open_output(spec)?;
    write_csv(&rows, &mut out)?;
    if let Some(msg) = &failure {
        writeln!(out, "# incomplete: {msg}")?;
    }
    out.flush()?;
    report(spec, &format_table(&rows));
    Ok(match failure {
        Some(msg) => {
            eprintln!("solver failure: {msg}");
            Outcome::SolverFailure
        }
        None => Outcome::Success,
    })
}

pub fn cmd_single(spec: &RunSpec) -> anyhow::Result<Outcome> {
    let n = spec.n_list[0];
    let mesh = Mesh::unit_square(n)?;
    let traj = match run_transient(&mesh, &spec.problem, &spec.stepping) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("solver failure: {e}");
            return Ok(Outcome::SolverFailure);
        }
    };
    let mut out = open_output(spec)?;
    if spec.problem.exact.is_some() {
        let errs = final_errors(&mesh, &spec.problem, &traj.final_field)?;
        let rows = convergence_table(&[(n, errs)])?;
        writeln!(out, "{CSV_HEADER}")?;
        writeln!(out, "{}", csv_line(&rows[0]))?;
        report(spec, &format_table(&rows));
    } else {
        let last = traj.records.last().expect("at least the initial record");
        writeln!(out, "N,time,l2_norm,grad_lbeta")?;
        writeln!(
            out,
            "{n},{},{},{}",
            format_sig6(last.time),
            format_sig6(last.l2_interior),
            format_sig6(last.grad_lbeta)
        )?;
    }
    out.flush()?;
    report(
        spec,
        &format!(
            "max nonlinear iterations per step: {}\n",
            traj.max_nonlinear_iterations()
        ),
    );
    Ok(Outcome::Success)
}

fn initial_field(
    spec: &RunSpec,
    be: &BackwardEuler<'_>,
    mesh: &Mesh,
) -> anyhow::Result<ScalarField> {
    if spec.problem.exact.is_some() {
        return Ok(be.initial_field()?);
    }
    Ok(match spec.initial {
        InitialKind::Bump => be.initial_field()?,
        InitialKind::Zero => ScalarField::zeros(mesh, 0.0),
        InitialKind::Random => random_interior_field(mesh, spec.seed),
    })
}

/// Uniform values in `[-1, 1]` at interior vertices, zero on the boundary.
pub fn random_interior_field(mesh: &Mesh, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..mesh.num_vertices())
        .map(|i| {
            let v = rng.gen_range(-1.0..=1.0);
            if mesh.is_boundary(i) {
                0.0
            } else {
                v
            }
        })
        .collect();
    ScalarField::new(values, 0.0)
}

pub fn cmd_stability(spec: &RunSpec) -> anyhow::Result<Outcome> {
    let n = spec.n_list[0];
    let mesh = Mesh::unit_square(n)?;
    let be = BackwardEuler::new(&mesh, &spec.problem, spec.stepping.clone())?;
    let a = spec.problem.g.exponents(2)?.a;
    let steps = spec.stepping.num_steps()?;
    let exact = spec.problem.exact.clone();

    let mut out = open_output(spec)?;
    writeln!(out, "{STABILITY_HEADER}")?;
    let write_row = |out: &mut Box<dyn Write>,
                     field: &ScalarField,
                     k: usize,
                     iters: usize|
     -> anyhow::Result<f64> {
        let rec = be.record(k, field, iters);
        let err = exact
            .as_ref()
            .map(|e| {
                format_sig6(error_l2(
                    &mesh,
                    &field.values,
                    |p, t| (e.value)(p, t),
                    field.time,
                ))
            })
            .unwrap_or_default();
        writeln!(
            out,
            "{k},{},{},{},{},{iters},{err}",
            format_sig6(rec.time),
            format_sig6(rec.l2_interior),
            format_sig6(rec.grad_lbeta),
            format_sig6((1.0 + rec.grad_lbeta).powf(-a)),
        )?;
        Ok(rec.l2_interior)
    };

    let mut state = initial_field(spec, &be, &mesh)?;
    let mut prev_norm = write_row(&mut out, &state, 0, 0)?;
    let mut violation = None;
    let mut failure = None;
    for k in 1..=steps {
        let t_next = k as f64 * spec.stepping.dt;
        match be.step(&state, t_next) {
            Ok((next, iters)) => {
                let norm = write_row(&mut out, &next, k, iters)?;
                if spec.problem.homogeneous
                    && violation.is_none()
                    && norm > prev_norm * (1.0 + MONOTONE_RTOL)
                {
                    violation = Some((k, prev_norm, norm));
                }
                prev_norm = norm;
                state = next;
            }
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        }
    }
    if let Some(msg) = &failure {
        writeln!(out, "# incomplete: {msg}")?;
    }
    out.flush()?;
    if let Some(msg) = failure {
        eprintln!("solver failure: {msg}");
        return Ok(Outcome::SolverFailure);
    }
    if let Some((k, before, after)) = violation {
        eprintln!("norm increased at step {k}: {before:e} -> {after:e}");
        return Ok(Outcome::MonotonicityViolation);
    }
    report(
        spec,
        &format!(
            "{}: {steps} steps of dt = {} on N = {n}; final L2 norm {:e}\n",
            spec.problem.name, spec.stepping.dt, prev_norm
        ),
    );
    Ok(Outcome::Success)
}
