//! Fixtures shared by the criterion benchmarks.

use forch_core::{GPolynomial, Mesh};

/// `1 + s` and a three-term law with a fractional exponent.
pub fn laws() -> Vec<(&'static str, GPolynomial)> {
    vec![
        ("1+s", GPolynomial::two_term(1.0, 1.0).expect("valid law")),
        (
            "1+2s^0.5+s^1.5",
            GPolynomial::new(vec![0.0, 0.5, 1.5], vec![1.0, 2.0, 1.0]).expect("valid law"),
        ),
    ]
}

/// Deterministic rough nodal field with gradients of order one.
pub fn rough_field(mesh: &Mesh) -> Vec<f64> {
    mesh.vertices()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            (7.0 * p[0] + 3.0 * p[1]).sin() + 0.1 * ((i * 2654435761) % 1000) as f64 / 1000.0
        })
        .collect()
}

/// Log-spaced arguments `xi` in `[1e-4, 1e4]`.
pub fn xi_grid(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| 10f64.powf(-4.0 + 8.0 * i as f64 / (len - 1) as f64))
        .collect()
}
