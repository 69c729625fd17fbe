//! Structured triangulations of the unit square.

use std::collections::HashMap;
use std::io::Write;

use crate::{Error, Point, Result};

const BOUNDARY_TOL: f64 = 1e-12;

/// Conforming triangulation of the unit square.
///
/// Vertices are numbered row by row (`x` fastest); triangles are listed
/// counter-clockwise.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    n: usize,
}

/// Area and constant barycentric gradients of one P1 element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub area: f64,
    pub grad_phi: [[f64; 2]; 3],
}

impl ElementGeometry {
    /// Geometry of the triangle `p0 p1 p2`. The area is signed: negative for
    /// clockwise input.
    pub fn from_points(p: &[Point; 3]) -> Self {
        let (x0, y0) = (p[0][0], p[0][1]);
        let (x1, y1) = (p[1][0], p[1][1]);
        let (x2, y2) = (p[2][0], p[2][1]);
        let det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0);
        let inv = 1.0 / det;
        let grad_phi = [
            [(y1 - y2) * inv, (x2 - x1) * inv],
            [(y2 - y0) * inv, (x0 - x2) * inv],
            [(y0 - y1) * inv, (x1 - x0) * inv],
        ];
        Self {
            area: 0.5 * det,
            grad_phi,
        }
    }

    /// Gradient of the P1 function with local nodal values `u`.
    #[inline]
    pub fn gradient(&self, u: [f64; 3]) -> [f64; 2] {
        let g = &self.grad_phi;
        [
            u[0] * g[0][0] + u[1] * g[1][0] + u[2] * g[2][0],
            u[0] * g[0][1] + u[1] * g[1][1] + u[2] * g[2][1],
        ]
    }
}

impl Mesh {
    /// `N x N` grid of squares, each split along its lower-left to
    /// upper-right diagonal.
    pub fn unit_square(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("mesh subdivision N must be >= 1".into()));
        }
        let np = n + 1;
        let mut vertices = Vec::with_capacity(np * np);
        let mut boundary = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                // i / n hits 0 and 1 exactly for every n
                let p = [i as f64 / n as f64, j as f64 / n as f64];
                let on_edge = p
                    .iter()
                    .any(|&c| c.abs() < BOUNDARY_TOL || (c - 1.0).abs() < BOUNDARY_TOL);
                vertices.push(p);
                boundary.push(on_edge);
            }
        }
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = j * np + i;
                let v10 = v00 + 1;
                let v01 = v00 + np;
                let v11 = v01 + 1;
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        Ok(Self {
            vertices,
            triangles,
            boundary,
            n,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_mask(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        self.boundary
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Subdivision count `N`.
    pub fn subdivisions(&self) -> usize {
        self.n
    }

    /// Mesh size `h = 1/N` (leg length of the right triangles).
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn triangle_points(&self, e: usize) -> [Point; 3] {
        let t = self.triangles[e];
        [
            self.vertices[t[0]],
            self.vertices[t[1]],
            self.vertices[t[2]],
        ]
    }

    pub fn element_geometry(&self, e: usize) -> Result<ElementGeometry> {
        if e >= self.triangles.len() {
            return Err(Error::OutOfRange {
                index: e,
                len: self.triangles.len(),
            });
        }
        Ok(ElementGeometry::from_points(&self.triangle_points(e)))
    }

    /// Geometry of every element, in element order.
    pub fn geometries(&self) -> Vec<ElementGeometry> {
        (0..self.triangles.len())
            .map(|e| ElementGeometry::from_points(&self.triangle_points(e)))
            .collect()
    }

    /// Number of triangles incident to each undirected edge.
    pub fn edge_incidence(&self) -> HashMap<(usize, usize), usize> {
        let mut map = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *map.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        map
    }

    /// Writes `v x y` and `t i j k` lines.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        for v in &self.vertices {
            writeln!(out, "v {} {}", v[0], v[1])?;
        }
        for t in &self.triangles {
            writeln!(out, "t {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }
}
