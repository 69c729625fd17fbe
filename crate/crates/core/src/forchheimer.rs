//! The scalar Forchheimer kernel.
//!
//! A generalized Forchheimer law is described by a polynomial with
//! nonnegative coefficients and real exponents
//! `g(s) = a_0 + a_1 s^{alpha_1} + ... + a_N s^{alpha_N}`.
//! The diffusivity of the reduced density equation is `K(xi) = 1/g(s(xi))`
//! where `s(xi) >= 0` is the unique root of `s g(s) = xi`.

use crate::{Error, Result};

/// Relative residual tolerance of [`GPolynomial::solve_s`].
pub const ROOT_RTOL: f64 = 1e-13;
/// Iteration cap of the safeguarded Newton root solve.
pub const ROOT_MAX_ITERS: usize = 200;
/// Relative tolerance of the adaptive quadrature behind [`GPolynomial::hfun`].
pub const H_RTOL: f64 = 1e-10;

const H_MAX_DEPTH: u32 = 48;

/// The Forchheimer polynomial `g(s) = sum a_i s^{alpha_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GPolynomial {
    exponents: Vec<f64>,
    coeffs: Vec<f64>,
    // exponent as a small integer when it is one; lets `eval` use powi
    int_exponents: Vec<Option<i32>>,
}

impl GPolynomial {
    pub fn new(exponents: Vec<f64>, coeffs: Vec<f64>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidPolynomial(msg));
        if exponents.len() != coeffs.len() {
            return bad(format!(
                "{} exponents but {} coefficients",
                exponents.len(),
                coeffs.len()
            ));
        }
        if exponents.len() < 2 {
            return bad("at least two terms are required (N >= 1)".into());
        }
        if exponents.iter().chain(&coeffs).any(|v| !v.is_finite()) {
            return bad("exponents and coefficients must be finite".into());
        }
        if exponents[0] != 0.0 {
            return bad(format!("alpha_0 must be 0, got {}", exponents[0]));
        }
        if let Some(w) = exponents.windows(2).find(|w| w[1] <= w[0]) {
            return bad(format!(
                "exponents must be strictly increasing ({} then {})",
                w[0], w[1]
            ));
        }
        if let Some(c) = coeffs.iter().find(|c| **c < 0.0) {
            return bad(format!("coefficients must be nonnegative, got {c}"));
        }
        if coeffs[0] <= 0.0 {
            return bad(format!("a_0 must be positive, got {}", coeffs[0]));
        }
        let last = *coeffs.last().unwrap();
        if last <= 0.0 {
            return bad(format!("a_N must be positive, got {last}"));
        }
        let int_exponents = exponents
            .iter()
            .map(|&e| (e.fract() == 0.0 && e.abs() <= i32::MAX as f64).then_some(e as i32))
            .collect();
        Ok(Self {
            exponents,
            coeffs,
            int_exponents,
        })
    }

    /// Two-term (Darcy-Forchheimer) law `g(s) = a_0 + a_1 s`.
    pub fn two_term(a0: f64, a1: f64) -> Result<Self> {
        Self::new(vec![0.0, 1.0], vec![a0, a1])
    }

    pub fn exponents_slice(&self) -> &[f64] {
        &self.exponents
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `a_0 = g(0)`.
    pub fn a0(&self) -> f64 {
        self.coeffs[0]
    }

    /// `deg(g) = alpha_N`.
    pub fn degree(&self) -> f64 {
        *self.exponents.last().unwrap()
    }

    #[inline]
    fn pow(&self, i: usize, s: f64) -> f64 {
        match self.int_exponents[i] {
            Some(k) => s.powi(k),
            None => s.powf(self.exponents[i]),
        }
    }

    #[inline]
    fn value(&self, s: f64) -> f64 {
        let mut acc = self.coeffs[0];
        for i in 1..self.coeffs.len() {
            acc += self.coeffs[i] * self.pow(i, s);
        }
        acc
    }

    /// `g'(s)`; only called for `s > 0`.
    #[inline]
    fn slope(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.coeffs.len() {
            let e = self.exponents[i];
            acc += self.coeffs[i] * e * self.pow(i, s) / s;
        }
        acc
    }

    /// Evaluates `g(s)` for `s >= 0`.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain(format!("g(s) requires s >= 0, got {s}")));
        }
        Ok(self.value(s))
    }

    /// Solves `s g(s) = xi` for the unique `s >= 0`.
    ///
    /// Safeguarded Newton: iterates stay inside a shrinking bracket that
    /// starts at `[0, max(1, xi/a_0)]`, falling back to bisection whenever
    /// the Newton update would leave it.
    pub fn solve_s(&self, xi: f64) -> Result<f64> {
        if !(xi >= 0.0) || xi.is_infinite() {
            return Err(Error::Domain(format!(
                "s(xi) requires finite xi >= 0, got {xi}"
            )));
        }
        if xi == 0.0 {
            return Ok(0.0);
        }
        let tol = ROOT_RTOL * xi.max(1.0);
        let mut lo = 0.0_f64;
        let mut hi = 1.0_f64.max(xi / self.a0());
        let guess = xi / self.value(xi.powf(1.0 / (self.degree() + 1.0)));
        let mut s = guess.clamp(lo, hi);
        for _ in 0..ROOT_MAX_ITERS {
            let gs = self.value(s);
            let phi = s * gs - xi;
            if phi.abs() <= tol {
                return Ok(s);
            }
            if phi > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let dphi = if s > 0.0 { gs + s * self.slope(s) } else { gs };
            let newton = s - phi / dphi;
            s = if newton.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        Err(Error::RootNotConverged {
            xi,
            iterations: ROOT_MAX_ITERS,
        })
    }

    /// `K(xi) = 1/g(s(xi))`, in `(0, 1/a_0]` and nonincreasing.
    pub fn kfun(&self, xi: f64) -> Result<f64> {
        let s = self.solve_s(xi)?;
        Ok(1.0 / self.value(s))
    }

    /// `K'(xi)` by implicit differentiation of `s g(s) = xi`.
    pub fn kfun_deriv(&self, xi: f64) -> Result<f64> {
        if !(xi > 0.0) {
            return Err(Error::Domain(format!("K'(xi) requires xi > 0, got {xi}")));
        }
        let s = self.solve_s(xi)?;
        Ok(self.kfun_deriv_at(s))
    }

    /// `K` and `K'` at the same argument, sharing one root solve.
    /// At `xi = 0` the derivative is reported as 0; callers only use it
    /// multiplied by a vanishing factor there.
    pub fn kfun_with_deriv(&self, xi: f64) -> Result<(f64, f64)> {
        let s = self.solve_s(xi)?;
        let k = 1.0 / self.value(s);
        if s == 0.0 {
            return Ok((k, 0.0));
        }
        Ok((k, self.kfun_deriv_at(s)))
    }

    fn kfun_deriv_at(&self, s: f64) -> f64 {
        let gs = self.value(s);
        let gp = self.slope(s);
        let ds = 1.0 / (gs + s * gp);
        -gp * ds / (gs * gs)
    }

    /// `H(xi) = int_0^{xi^2} K(sqrt(u)) du`.
    ///
    /// Integrated as `int_0^xi 2 v K(v) dv` (substitution `u = v^2`) with
    /// adaptive Simpson.
    pub fn hfun(&self, xi: f64) -> Result<f64> {
        if !(xi >= 0.0) || xi.is_infinite() {
            return Err(Error::Domain(format!(
                "H(xi) requires finite xi >= 0, got {xi}"
            )));
        }
        if xi == 0.0 {
            return Ok(0.0);
        }
        let f = |v: f64| -> Result<f64> { Ok(2.0 * v * self.kfun(v)?) };
        let (fa, fm, fb) = (f(0.0)?, f(0.5 * xi)?, f(xi)?);
        let whole = xi / 6.0 * (fa + 4.0 * fm + fb);
        // the integrand is positive, so the coarse estimate sets the scale
        let tol = H_RTOL * whole.abs().max(f64::MIN_POSITIVE);
        adaptive_simpson(&f, 0.0, xi, fa, fm, fb, whole, tol, H_MAX_DEPTH)
    }

    /// Derived exponents for spatial dimension `d`.
    pub fn exponents(&self, d: u32) -> Result<Exponents> {
        if d < 2 {
            return Err(Error::Domain(format!("dimension must be >= 2, got {d}")));
        }
        Ok(Exponents::from_degree(self.degree(), d))
    }

    /// `F(y) = K(|y|) y`, the nonlinear flux.
    pub fn flux(&self, y: [f64; 2]) -> Result<[f64; 2]> {
        let k = self.kfun(norm(y))?;
        Ok([k * y[0], k * y[1]])
    }

    /// Lipschitz constant `(1 + a)/a_0` of the flux map `y -> K(|y|) y`.
    pub fn lipschitz_constant(&self) -> f64 {
        let a = self.degree() / (self.degree() + 1.0);
        (1.0 + a) / self.a0()
    }
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(
        adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?,
    )
}

/// Exponents derived from `deg(g)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    /// `a = deg/(deg + 1)`, in `(0, 1)`.
    pub a: f64,
    /// `beta = 2 - a`, the Lebesgue exponent of the gradient.
    pub beta: f64,
    /// `lambda = beta/(beta - 1)`.
    pub lambda: f64,
    /// `gamma = a/beta`.
    pub gamma: f64,
    pub degree: f64,
    /// `deg(g) <= 4/(d - 2)`; always true for `d = 2`.
    pub degree_condition: bool,
}

impl Exponents {
    fn from_degree(degree: f64, d: u32) -> Self {
        let a = degree / (degree + 1.0);
        let beta = 2.0 - a;
        Self {
            a,
            beta,
            lambda: beta / (beta - 1.0),
            gamma: a / beta,
            degree,
            degree_condition: d == 2 || degree <= 4.0 / (d as f64 - 2.0),
        }
    }
}

/// Checkable forms of the structural inequalities of the kernel.
/// Each returns a margin that is nonnegative when the inequality holds.
pub mod inequalities {
    use super::{dist, norm, GPolynomial};
    use crate::Result;

    /// `(F(y') - F(y)).(y' - y) - (beta - 1) K(max(|y|,|y'|)) |y' - y|^2`.
    pub fn monotonicity_margin(g: &GPolynomial, y: [f64; 2], yp: [f64; 2]) -> Result<f64> {
        let beta = g.exponents(2)?.beta;
        let (fy, fyp) = (g.flux(y)?, g.flux(yp)?);
        let lhs = (fyp[0] - fy[0]) * (yp[0] - y[0]) + (fyp[1] - fy[1]) * (yp[1] - y[1]);
        let kmax = g.kfun(norm(y).max(norm(yp)))?;
        let d = dist(y, yp);
        Ok(lhs - (beta - 1.0) * kmax * d * d)
    }

    /// `L |y' - y| - |F(y') - F(y)|` with `L = (1 + a)/a_0`.
    pub fn lipschitz_margin(g: &GPolynomial, y: [f64; 2], yp: [f64; 2]) -> Result<f64> {
        let (fy, fyp) = (g.flux(y)?, g.flux(yp)?);
        Ok(g.lipschitz_constant() * dist(y, yp) - dist(fy, fyp))
    }

    /// Margins of `-a K(xi) <= K'(xi) xi <= 0` as `(lower, upper)`.
    pub fn derivative_margins(g: &GPolynomial, xi: f64) -> Result<(f64, f64)> {
        let a = g.exponents(2)?.a;
        let (k, dk) = (g.kfun(xi)?, g.kfun_deriv(xi)?);
        Ok((dk * xi + a * k, -dk * xi))
    }

    /// Margins of `K(xi) xi^2 <= H(xi) <= 2 K(xi) xi^2` as `(lower, upper)`.
    pub fn h_sandwich_margins(g: &GPolynomial, xi: f64) -> Result<(f64, f64)> {
        let (k, h) = (g.kfun(xi)?, g.hfun(xi)?);
        let kx2 = k * xi * xi;
        Ok((h - kx2, 2.0 * kx2 - h))
    }
}

#[inline]
pub(crate) fn norm(y: [f64; 2]) -> f64 {
    y[0].hypot(y[1])
}

#[inline]
fn dist(y: [f64; 2], yp: [f64; 2]) -> f64 {
    (yp[0] - y[0]).hypot(yp[1] - y[1])
}
