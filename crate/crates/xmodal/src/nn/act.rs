//! Elementwise activations and their gradients.

use ndarray::{Array, Dimension, Zip};

pub fn relu<D: Dimension>(x: &Array<f64, D>) -> Array<f64, D> {
    x.mapv(|v| v.max(0.0))
}

pub fn relu_grad_from_input<D: Dimension>(x: &Array<f64, D>, gy: &Array<f64, D>) -> Array<f64, D> {
    Zip::from(x).and(gy).map_collect(|&v, &g| if v > 0.0 { g } else { 0.0 })
}

pub fn elu<D: Dimension>(x: &Array<f64, D>) -> Array<f64, D> {
    x.mapv(|v| if v > 0.0 { v } else { v.exp_m1() })
}

/// ELU gradient expressed through the output (y = elu(x), y > 0 iff x > 0).
pub fn elu_grad_from_output<D: Dimension>(y: &Array<f64, D>, gy: &Array<f64, D>) -> Array<f64, D> {
    Zip::from(y).and(gy).map_collect(|&v, &g| if v > 0.0 { g } else { g * (v + 1.0) })
}

pub fn sigmoid<D: Dimension>(x: &Array<f64, D>) -> Array<f64, D> {
    x.mapv(sigmoid_scalar)
}

pub fn sigmoid_scalar(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

pub fn sigmoid_grad_from_output<D: Dimension>(y: &Array<f64, D>, gy: &Array<f64, D>) -> Array<f64, D> {
    Zip::from(y).and(gy).map_collect(|&v, &g| g * v * (1.0 - v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn elu_is_continuous_at_zero() {
        let x = array![-1e-12, 0.0, 1e-12];
        let y = elu(&x);
        for v in y.iter() {
            assert!(v.abs() < 1e-11);
        }
    }

    #[test]
    fn sigmoid_is_stable_for_large_inputs() {
        assert!((sigmoid_scalar(500.0) - 1.0).abs() < 1e-12);
        assert!(sigmoid_scalar(-500.0) >= 0.0);
        assert!(sigmoid_scalar(-500.0) < 1e-12);
    }
}
