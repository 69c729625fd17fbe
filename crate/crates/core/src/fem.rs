//! P1 Lagrange discretization on a [`Mesh`].
//!
//! [`P1Space`] caches element geometry and the CSR sparsity pattern so the
//! Picard and Newton loops can reassemble the nonlinear operator without
//! rebuilding either. Element-local matrices are computed in parallel when
//! more than one rayon thread is available and are always scattered in
//! element order, so assembled values do not depend on the thread count.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::forchheimer::{norm, GPolynomial};
use crate::mesh::{ElementGeometry, Mesh};
use crate::quadrature::TriangleRule;
use crate::solver::cg_solve;
use crate::sparse::SparseMatrix;
use crate::{Error, Point, Result};

/// Below this many elements local matrices are computed serially.
const PAR_MIN_ELEMENTS: usize = 2048;

/// Relative CG tolerance of the L2 projection.
pub const PROJECTION_TOL: f64 = 1e-13;

/// Nodal coefficients of a P1 function at a time level.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub values: Vec<f64>,
    pub time: f64,
}

impl ScalarField {
    pub fn new(values: Vec<f64>, time: f64) -> Self {
        Self { values, time }
    }

    pub fn zeros(mesh: &Mesh, time: f64) -> Self {
        Self::new(vec![0.0; mesh.num_vertices()], time)
    }

    /// Nodal interpolant of `f(., time)`.
    pub fn interpolate<F>(mesh: &Mesh, f: F, time: f64) -> Self
    where
        F: Fn(Point, f64) -> f64,
    {
        Self::new(mesh.vertices().iter().map(|&p| f(p, time)).collect(), time)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_len(&self, mesh: &Mesh) -> Result<()> {
        if self.values.len() != mesh.num_vertices() {
            return Err(Error::SizeMismatch {
                expected: mesh.num_vertices(),
                actual: self.values.len(),
            });
        }
        Ok(())
    }
}

/// P1 finite element space over a mesh.
#[derive(Debug, Clone)]
pub struct P1Space<'m> {
    mesh: &'m Mesh,
    geometries: Vec<ElementGeometry>,
    pattern: SparseMatrix,
    rule: TriangleRule,
}

impl<'m> P1Space<'m> {
    pub fn new(mesh: &'m Mesh) -> Self {
        Self {
            mesh,
            geometries: mesh.geometries(),
            pattern: SparseMatrix::p1_pattern(mesh),
            rule: TriangleRule::degree4(),
        }
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.mesh
    }

    pub fn geometries(&self) -> &[ElementGeometry] {
        &self.geometries
    }

    pub fn dim(&self) -> usize {
        self.mesh.num_vertices()
    }

    /// Empty matrix with this space's sparsity pattern.
    pub fn pattern(&self) -> &SparseMatrix {
        &self.pattern
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::SizeMismatch {
                expected: self.dim(),
                actual: v.len(),
            });
        }
        Ok(())
    }

    /// Maps every element to a local 3x3 matrix and scatters the results.
    fn assemble_with<F>(&self, local: F) -> Result<SparseMatrix>
    where
        F: Fn(usize, &ElementGeometry) -> Result<[[f64; 3]; 3]> + Sync,
    {
        let ne = self.geometries.len();
        let locals: Vec<[[f64; 3]; 3]> =
            if ne >= PAR_MIN_ELEMENTS && rayon::current_num_threads() > 1 {
                self.geometries
                    .par_iter()
                    .enumerate()
                    .map(|(e, geo)| local(e, geo))
                    .collect::<Result<_>>()?
            } else {
                self.geometries
                    .iter()
                    .enumerate()
                    .map(|(e, geo)| local(e, geo))
                    .collect::<Result<_>>()?
            };
        let mut a = self.pattern.zeroed_like();
        for (t, m) in self.mesh.triangles().iter().zip(&locals) {
            a.add_element(t, m);
        }
        Ok(a)
    }

    /// Exact P1 mass matrix.
    pub fn mass(&self) -> SparseMatrix {
        self.assemble_with(|_, geo| {
            let d = geo.area / 6.0;
            let o = geo.area / 12.0;
            Ok([[d, o, o], [o, d, o], [o, o, d]])
        })
        .expect("mass assembly is infallible")
    }

    /// Plain P1 Laplacian `(grad phi_j, grad phi_i)`.
    pub fn laplacian(&self) -> SparseMatrix {
        self.assemble_with(|_, geo| Ok(weighted_laplacian(geo, 1.0)))
            .expect("Laplacian assembly is infallible")
    }

    /// Gradient of the field on each element.
    pub fn element_gradients(&self, w: &[f64]) -> Vec<[f64; 2]> {
        self.mesh
            .triangles()
            .iter()
            .zip(&self.geometries)
            .map(|(t, geo)| geo.gradient([w[t[0]], w[t[1]], w[t[2]]]))
            .collect()
    }

    /// Picard stiffness `(K(|grad w|) grad phi_j, grad phi_i)`.
    ///
    /// `grad w` is constant on each element, so the element integral is
    /// evaluated exactly with a single kernel evaluation.
    pub fn stiffness(&self, w: &[f64], g: &GPolynomial) -> Result<SparseMatrix> {
        self.check_len(w)?;
        let tris = self.mesh.triangles();
        self.assemble_with(|e, geo| {
            let t = tris[e];
            let q = geo.gradient([w[t[0]], w[t[1]], w[t[2]]]);
            Ok(weighted_laplacian(geo, g.kfun(norm(q))?))
        })
    }

    /// Jacobian of `w -> S(w) w`: element blocks use the tensor
    /// `K(|q|) I + K'(|q|) q q^T / |q|` with `q = grad w`.
    pub fn jacobian(&self, w: &[f64], g: &GPolynomial) -> Result<SparseMatrix> {
        self.check_len(w)?;
        let tris = self.mesh.triangles();
        self.assemble_with(|e, geo| {
            let t = tris[e];
            let q = geo.gradient([w[t[0]], w[t[1]], w[t[2]]]);
            let xi = norm(q);
            let (k, dk) = g.kfun_with_deriv(xi)?;
            let mut tensor = [[k, 0.0], [0.0, k]];
            if xi > 0.0 {
                let c = dk / xi;
                for (r, row) in tensor.iter_mut().enumerate() {
                    for (s, v) in row.iter_mut().enumerate() {
                        *v += c * q[r] * q[s];
                    }
                }
            }
            Ok(tensor_laplacian(geo, &tensor))
        })
    }

    /// Load vector `(f(., t), phi_i)` with the degree-4 rule.
    pub fn load<F>(&self, f: F, t: f64) -> Vec<f64>
    where
        F: Fn(Point, f64) -> f64 + Sync,
    {
        let mut b = vec![0.0; self.dim()];
        let tris = self.mesh.triangles();
        let local = |e: usize| -> [f64; 3] {
            let pts = self.mesh.triangle_points(e);
            let area = self.geometries[e].area;
            let mut out = [0.0; 3];
            for (bary, w) in self.rule.points.iter().zip(&self.rule.weights) {
                let fx = f(TriangleRule::map(bary, &pts), t) * w * area;
                for k in 0..3 {
                    out[k] += fx * bary[k];
                }
            }
            out
        };
        let locals: Vec<[f64; 3]> =
            if tris.len() >= PAR_MIN_ELEMENTS && rayon::current_num_threads() > 1 {
                (0..tris.len()).into_par_iter().map(local).collect()
            } else {
                (0..tris.len()).map(local).collect()
            };
        for (tri, l) in tris.iter().zip(&locals) {
            for k in 0..3 {
                b[tri[k]] += l[k];
            }
        }
        b
    }

    /// L2 projection: solves `M p = (w, phi_i)`.
    pub fn l2_project<F>(&self, w: F, t: f64) -> Result<ScalarField>
    where
        F: Fn(Point, f64) -> f64 + Sync,
    {
        let m = self.mass();
        let b = self.load(w, t);
        let values = cg_solve(&m, &b, PROJECTION_TOL)?;
        Ok(ScalarField::new(values, t))
    }

    /// Boundary values `psi(x_v, t)` for every boundary vertex.
    pub fn boundary_values<F>(&self, psi: F, t: f64) -> BTreeMap<usize, f64>
    where
        F: Fn(Point, f64) -> f64,
    {
        self.mesh
            .boundary_vertices()
            .map(|v| (v, psi(self.mesh.vertices()[v], t)))
            .collect()
    }

    /// Discrete residual of one backward Euler step,
    /// `M (cur - prev)/dt + S(cur) cur - b(t_n)`, with constrained (boundary)
    /// rows set to zero.
    #[allow(clippy::too_many_arguments)]
    pub fn residual<F>(
        &self,
        g: &GPolynomial,
        mass: &SparseMatrix,
        prev: &ScalarField,
        cur: &ScalarField,
        dt: f64,
        f: F,
        t_n: f64,
    ) -> Result<Vec<f64>>
    where
        F: Fn(Point, f64) -> f64 + Sync,
    {
        if !(dt > 0.0) {
            return Err(Error::Domain(format!(
                "time step must be positive, got {dt}"
            )));
        }
        prev.check_len(self.mesh)?;
        cur.check_len(self.mesh)?;
        let s = self.stiffness(&cur.values, g)?;
        let b = self.load(f, t_n);
        Ok(self.residual_with(mass, &s, &prev.values, &cur.values, dt, &b))
    }

    /// Residual with a preassembled stiffness `S(cur)` and load.
    pub(crate) fn residual_with(
        &self,
        mass: &SparseMatrix,
        stiffness: &SparseMatrix,
        prev: &[f64],
        cur: &[f64],
        dt: f64,
        load: &[f64],
    ) -> Vec<f64> {
        let diff: Vec<f64> = cur.iter().zip(prev).map(|(c, p)| (c - p) / dt).collect();
        let mut r = mass.mul_vec(&diff);
        let sc = stiffness.mul_vec(cur);
        for (i, ri) in r.iter_mut().enumerate() {
            *ri = if self.mesh.is_boundary(i) {
                0.0
            } else {
                *ri + sc[i] - load[i]
            };
        }
        r
    }
}

/// `area * c * grad phi_a . grad phi_b`
#[inline]
fn weighted_laplacian(geo: &ElementGeometry, c: f64) -> [[f64; 3]; 3] {
    let g = &geo.grad_phi;
    let mut m = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            m[a][b] = geo.area * c * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
        }
    }
    m
}

/// `area * grad phi_a^T T grad phi_b` for symmetric `T`, mirrored so the
/// result is exactly symmetric.
#[inline]
fn tensor_laplacian(geo: &ElementGeometry, t: &[[f64; 2]; 2]) -> [[f64; 3]; 3] {
    let g = &geo.grad_phi;
    let mut m = [[0.0; 3]; 3];
    for a in 0..3 {
        let tg = [
            t[0][0] * g[a][0] + t[1][0] * g[a][1],
            t[0][1] * g[a][0] + t[1][1] * g[a][1],
        ];
        for b in a..3 {
            m[a][b] = geo.area * (tg[0] * g[b][0] + tg[1] * g[b][1]);
            m[b][a] = m[a][b];
        }
    }
    m
}

/// A linear system after eliminating Dirichlet vertices.
#[derive(Debug, Clone)]
pub struct ConstrainedSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Global index of each unknown.
    pub free: Vec<usize>,
    /// Full-length vector holding the prescribed values (zero elsewhere).
    pub prescribed: Vec<f64>,
}

impl ConstrainedSystem {
    /// Full nodal vector from the reduced solution.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.free.len());
        let mut out = self.prescribed.clone();
        for (&i, &v) in self.free.iter().zip(x) {
            out[i] = v;
        }
        out
    }

    pub fn num_unknowns(&self) -> usize {
        self.free.len()
    }
}

/// Symmetric elimination of the vertices in `values`: their rows and
/// columns are removed and the known columns moved to the right-hand side.
///
/// `values` must give a value for exactly the vertices flagged in
/// `boundary_mask`.
pub fn apply_dirichlet(
    a: &SparseMatrix,
    b: &[f64],
    boundary_mask: &[bool],
    values: &BTreeMap<usize, f64>,
) -> Result<ConstrainedSystem> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    if boundary_mask.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            actual: boundary_mask.len(),
        });
    }
    let mut prescribed = vec![0.0; n];
    for (&v, &val) in values {
        if v >= n {
            return Err(Error::OutOfRange { index: v, len: n });
        }
        if !boundary_mask[v] {
            return Err(Error::NotBoundary(v));
        }
        prescribed[v] = val;
    }
    if let Some(v) = (0..n).find(|&v| boundary_mask[v] && !values.contains_key(&v)) {
        return Err(Error::Validation(format!(
            "no Dirichlet value for boundary vertex {v}"
        )));
    }

    let mut map = vec![usize::MAX; n];
    let free: Vec<usize> = (0..n).filter(|&i| !boundary_mask[i]).collect();
    for (k, &i) in free.iter().enumerate() {
        map[i] = k;
    }
    let mut offsets = Vec::with_capacity(free.len() + 1);
    let mut cols = Vec::with_capacity(a.nnz());
    let mut vals = Vec::with_capacity(a.nnz());
    let mut rhs = Vec::with_capacity(free.len());
    offsets.push(0);
    for &i in &free {
        let mut bi = b[i];
        for (j, v) in a.row(i) {
            if boundary_mask[j] {
                bi -= v * prescribed[j];
            } else {
                cols.push(map[j]);
                vals.push(v);
            }
        }
        rhs.push(bi);
        offsets.push(cols.len());
    }
    Ok(ConstrainedSystem {
        matrix: SparseMatrix::from_csr(free.len(), offsets, cols, vals),
        rhs,
        free,
        prescribed,
    })
}
