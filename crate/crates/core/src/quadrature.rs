//! Symmetric quadrature rules on triangles in barycentric form.

/// A quadrature rule on the reference triangle: barycentric points and
/// weights that sum to one (multiply by the element area).
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub degree: u32,
}

impl TriangleRule {
    /// One-point centroid rule, exact for degree 1.
    pub fn centroid() -> Self {
        let c = 1.0 / 3.0;
        Self {
            points: vec![[c, c, c]],
            weights: vec![1.0],
            degree: 1,
        }
    }

    /// Six-point Dunavant rule, exact for polynomials of degree <= 4.
    #[allow(clippy::excessive_precision)]
    pub fn degree4() -> Self {
        const A1: f64 = 0.445_948_490_915_964_886_318_329_253_883;
        const B1: f64 = 1.0 - 2.0 * A1;
        const W1: f64 = 0.223_381_589_678_011_465_944_827_277_2;
        const A2: f64 = 0.091_576_213_509_770_743_459_571_463_402_2;
        const B2: f64 = 1.0 - 2.0 * A2;
        const W2: f64 = 0.109_951_743_655_321_867_388_506_056_1;
        Self {
            points: vec![
                [A1, A1, B1],
                [A1, B1, A1],
                [B1, A1, A1],
                [A2, A2, B2],
                [A2, B2, A2],
                [B2, A2, A2],
            ],
            weights: vec![W1, W1, W1, W2, W2, W2],
            degree: 4,
        }
    }

    /// Seven-point rule exact for polynomials of degree <= 5.
    pub fn degree5() -> Self {
        let r15 = 15.0_f64.sqrt();
        let a1 = (6.0 - r15) / 21.0;
        let b1 = 1.0 - 2.0 * a1;
        let w1 = (155.0 - r15) / 1200.0;
        let a2 = (6.0 + r15) / 21.0;
        let b2 = 1.0 - 2.0 * a2;
        let w2 = (155.0 + r15) / 1200.0;
        let c = 1.0 / 3.0;
        Self {
            points: vec![
                [c, c, c],
                [a1, a1, b1],
                [a1, b1, a1],
                [b1, a1, a1],
                [a2, a2, b2],
                [a2, b2, a2],
                [b2, a2, a2],
            ],
            weights: vec![0.225, w1, w1, w1, w2, w2, w2],
            degree: 5,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Physical point from barycentric coordinates on a triangle.
    #[inline]
    pub fn map(bary: &[f64; 3], tri: &[[f64; 2]; 3]) -> [f64; 2] {
        [
            bary[0] * tri[0][0] + bary[1] * tri[1][0] + bary[2] * tri[2][0],
            bary[0] * tri[0][1] + bary[1] * tri[1][1] + bary[2] * tri[2][1],
        ]
    }
}
