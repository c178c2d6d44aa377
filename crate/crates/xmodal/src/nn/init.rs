//! Weight initialization.

use crate::rng::RngStream;
use ndarray::{Array1, Array2};
use rand::Rng;

/// He-style uniform bound for layers followed by ReLU-family activations.
pub fn he_bound(fan_in: usize) -> f64 {
    (6.0 / fan_in as f64).sqrt()
}

/// Xavier uniform bound for gates and linear heads.
pub fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Fills a matrix with U(-bound, bound) draws in row-major order.
pub fn uniform_matrix(rows: usize, cols: usize, bound: f64, rng: &mut RngStream) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-bound..bound))
}

pub fn zeros_vector(len: usize) -> Array1<f64> {
    Array1::zeros(len)
}
