//! Error norms against exact solutions, convergence rates and energy
//! diagnostics.

use std::io::Write;

use crate::fem::P1Space;
use crate::forchheimer::GPolynomial;
use crate::mesh::Mesh;
use crate::quadrature::TriangleRule;
use crate::solver::Trajectory;
use crate::{Error, Point, Result};

/// CSV header of convergence tables.
pub const CSV_HEADER: &str = "N,h,err_l2,rate_l2,err_gradbeta,rate_gradbeta,err_linf";

/// Samples per element edge for the approximate sup-norm (barycentric
/// lattice `i/3, j/3` with `i + j <= 3`).
const LINF_LATTICE: usize = 3;

fn local_values(mesh: &Mesh, field: &[f64], e: usize) -> [f64; 3] {
    let t = mesh.triangles()[e];
    [field[t[0]], field[t[1]], field[t[2]]]
}

/// `|rho_h - rho(., t)|_{L2}` with the degree-4 rule.
pub fn error_l2<F>(mesh: &Mesh, field: &[f64], exact: F, t: f64) -> f64
where
    F: Fn(Point, f64) -> f64,
{
    error_l2_with_rule(mesh, field, exact, t, &TriangleRule::degree4())
}

pub fn error_l2_with_rule<F>(
    mesh: &Mesh,
    field: &[f64],
    exact: F,
    t: f64,
    rule: &TriangleRule,
) -> f64
where
    F: Fn(Point, f64) -> f64,
{
    let mut acc = 0.0;
    for (e, geo) in mesh.geometries().iter().enumerate() {
        let pts = mesh.triangle_points(e);
        let u = local_values(mesh, field, e);
        for (b, w) in rule.points.iter().zip(&rule.weights) {
            let uh = b[0] * u[0] + b[1] * u[1] + b[2] * u[2];
            let d = uh - exact(TriangleRule::map(b, &pts), t);
            acc += w * geo.area * d * d;
        }
    }
    acc.sqrt()
}

/// `|grad rho_h - grad rho(., t)|_{L^beta}` with the degree-4 rule.
pub fn error_grad_lbeta<F>(mesh: &Mesh, field: &[f64], exact_gradient: F, t: f64, beta: f64) -> f64
where
    F: Fn(Point, f64) -> [f64; 2],
{
    error_grad_lbeta_with_rule(
        mesh,
        field,
        exact_gradient,
        t,
        beta,
        &TriangleRule::degree4(),
    )
}

pub fn error_grad_lbeta_with_rule<F>(
    mesh: &Mesh,
    field: &[f64],
    exact_gradient: F,
    t: f64,
    beta: f64,
    rule: &TriangleRule,
) -> f64
where
    F: Fn(Point, f64) -> [f64; 2],
{
    let mut acc = 0.0;
    for (e, geo) in mesh.geometries().iter().enumerate() {
        let pts = mesh.triangle_points(e);
        let gh = geo.gradient(local_values(mesh, field, e));
        for (b, w) in rule.points.iter().zip(&rule.weights) {
            let ge = exact_gradient(TriangleRule::map(b, &pts), t);
            let d = (gh[0] - ge[0]).hypot(gh[1] - ge[1]);
            acc += w * geo.area * d.powf(beta);
        }
    }
    acc.powf(1.0 / beta)
}

/// Approximate `|rho_h - rho(., t)|_{L^inf}` by sampling a barycentric
/// lattice on every element.
pub fn error_linf<F>(mesh: &Mesh, field: &[f64], exact: F, t: f64) -> f64
where
    F: Fn(Point, f64) -> f64,
{
    let m = LINF_LATTICE;
    let mut samples = Vec::new();
    for i in 0..=m {
        for j in 0..=(m - i) {
            let (a, b) = (i as f64 / m as f64, j as f64 / m as f64);
            samples.push([1.0 - a - b, a, b]);
        }
    }
    let mut worst: f64 = 0.0;
    for e in 0..mesh.num_triangles() {
        let pts = mesh.triangle_points(e);
        let u = local_values(mesh, field, e);
        for b in &samples {
            let uh = b[0] * u[0] + b[1] * u[1] + b[2] * u[2];
            worst = worst.max((uh - exact(TriangleRule::map(b, &pts), t)).abs());
        }
    }
    worst
}

/// `|grad v_h|_{L^beta}`; exact since the gradient is elementwise constant.
pub fn grad_lbeta_norm(space: &P1Space<'_>, field: &[f64], beta: f64) -> f64 {
    space
        .element_gradients(field)
        .iter()
        .zip(space.geometries())
        .map(|(g, geo)| geo.area * g[0].hypot(g[1]).powf(beta))
        .sum::<f64>()
        .powf(1.0 / beta)
}

/// Errors of one refinement level at the final time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorSet {
    pub l2: f64,
    pub grad_lbeta: f64,
    pub linf: f64,
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub err_l2: f64,
    pub rate_l2: Option<f64>,
    pub err_grad_lbeta: f64,
    pub rate_grad: Option<f64>,
    pub err_linf: f64,
}

/// `log2(prev / cur)`.
pub fn observed_rate(prev: f64, cur: f64) -> f64 {
    (prev / cur).log2()
}

/// Rows with rates from successive error ratios. `N` must double.
pub fn convergence_table(levels: &[(usize, ErrorSet)]) -> Result<Vec<ConvergenceRow>> {
    let ns: Vec<usize> = levels.iter().map(|(n, _)| *n).collect();
    crate::config::check_doubling(&ns)?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(levels.len());
    for (k, &(n, err)) in levels.iter().enumerate() {
        let prev = k.checked_sub(1).map(|p| levels[p].1);
        rows.push(ConvergenceRow {
            n,
            h: 1.0 / n as f64,
            err_l2: err.l2,
            rate_l2: prev.map(|p| observed_rate(p.l2, err.l2)),
            err_grad_lbeta: err.grad_lbeta,
            rate_grad: prev.map(|p| observed_rate(p.grad_lbeta, err.grad_lbeta)),
            err_linf: err.linf,
        });
    }
    Ok(rows)
}

/// Formats with six significant digits.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-3..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{v:.decimals$}")
    } else {
        format!("{v:.5e}")
    }
}

/// Writes the CSV header and one line per row.
pub fn write_csv<W: Write>(rows: &[ConvergenceRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", csv_line(r))?;
    }
    Ok(())
}

pub fn csv_line(r: &ConvergenceRow) -> String {
    let opt = |v: Option<f64>| v.map(format_sig6).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{}",
        r.n,
        format_sig6(r.h),
        format_sig6(r.err_l2),
        opt(r.rate_l2),
        format_sig6(r.err_grad_lbeta),
        opt(r.rate_grad),
        format_sig6(r.err_linf)
    )
}

/// Human-readable table in E-notation.
pub fn format_table(rows: &[ConvergenceRow]) -> String {
    let mut s = format!(
        "{:>6}  {:>11}  {:>7}  {:>14}  {:>7}  {:>11}\n",
        "N", "L2 error", "rate", "grad L^b err", "rate", "Linf error"
    );
    for r in rows {
        let rate = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
        s.push_str(&format!(
            "{:>6}  {:>11.3E}  {:>7}  {:>14.3E}  {:>7}  {:>11.3E}\n",
            r.n,
            r.err_l2,
            rate(r.rate_l2),
            r.err_grad_lbeta,
            rate(r.rate_grad),
            r.err_linf
        ));
    }
    s
}

/// Energy diagnostics at one recorded step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub time: f64,
    pub grad_lbeta: f64,
    /// `(1 + |grad rho_h|_{L^beta})^{-a}`, in `(0, 1]`.
    pub omega: f64,
    pub l2_interior: f64,
}

pub fn energy_diagnostics(trajectory: &Trajectory, g: &GPolynomial) -> Result<Vec<EnergyRecord>> {
    if trajectory.records.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    let a = g.exponents(2)?.a;
    Ok(trajectory
        .records
        .iter()
        .map(|r| EnergyRecord {
            time: r.time,
            grad_lbeta: r.grad_lbeta,
            omega: (1.0 + r.grad_lbeta).powf(-a),
            l2_interior: r.l2_interior,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::ScalarField;
    use approx::assert_relative_eq;

    fn linear(p: Point, _t: f64) -> f64 {
        0.3 + 2.0 * p[0] - p[1]
    }

    #[test]
    fn linear_solutions_have_zero_error() {
        let mesh = Mesh::unit_square(4).unwrap();
        let f = ScalarField::interpolate(&mesh, linear, 0.0);
        assert!(error_l2(&mesh, &f.values, linear, 0.0) < 1e-14);
        assert!(error_grad_lbeta(&mesh, &f.values, |_, _| [2.0, -1.0], 0.0, 1.5) < 1e-13);
        assert!(error_linf(&mesh, &f.values, linear, 0.0) < 1e-14);
    }

    #[test]
    fn constant_offsets() {
        let mesh = Mesh::unit_square(3).unwrap();
        let c = 0.125;
        let f = ScalarField::interpolate(&mesh, |p, t| linear(p, t) + c, 0.0);
        assert_relative_eq!(error_l2(&mesh, &f.values, linear, 0.0), c, epsilon = 1e-14);
        assert_relative_eq!(
            error_linf(&mesh, &f.values, linear, 0.0),
            c,
            epsilon = 1e-14
        );
        // gradient mismatch d = (0.3, 0.4), |d| = 0.5, for any beta
        for beta in [1.2, 1.5, 2.0] {
            let e = error_grad_lbeta(&mesh, &f.values, |_, _| [2.3, -0.6], 0.0, beta);
            assert_relative_eq!(e, 0.5, epsilon = 1e-13);
        }
    }

    #[test]
    fn rates() {
        let mk = |l2| ErrorSet {
            l2,
            grad_lbeta: l2,
            linf: l2,
        };
        let rows = convergence_table(&[(4, mk(1e-2)), (8, mk(5e-3)), (16, mk(5e-3))]).unwrap();
        assert_eq!(rows[0].rate_l2, None);
        assert_relative_eq!(rows[1].rate_l2.unwrap(), 1.0, epsilon = 1e-14);
        assert_eq!(rows[2].rate_l2.unwrap(), 0.0);
        assert!(convergence_table(&[(4, mk(1.0)), (8, mk(1.0)), (12, mk(1.0))]).is_err());
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig6(0.25), "0.250000");
        assert_eq!(format_sig6(1.668e-2), "0.0166800");
        assert_eq!(format_sig6(0.668_971_23), "0.668971");
        assert_eq!(format_sig6(4.531e-4), "4.53100e-4");
        assert_eq!(format_sig6(12.0), "12.0000");
    }

    #[test]
    fn csv_layout() {
        let rows = convergence_table(&[
            (
                4,
                ErrorSet {
                    l2: 2e-2,
                    grad_lbeta: 8e-2,
                    linf: 3e-2,
                },
            ),
            (
                8,
                ErrorSet {
                    l2: 1e-2,
                    grad_lbeta: 4e-2,
                    linf: 1.5e-2,
                },
            ),
        ])
        .unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "4,0.250000,0.0200000,,0.0800000,,0.0300000");
        assert_eq!(
            lines[2],
            "8,0.125000,0.0100000,1.00000,0.0400000,1.00000,0.0150000"
        );
    }
}
