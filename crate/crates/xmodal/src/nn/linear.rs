//! Dense layer, single-sample and batched.

use super::{init, Grads};
use crate::rng::RngStream;
use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD, Axis};

#[derive(Debug, Clone)]
pub struct Linear {
    /// (out_dim, in_dim)
    pub w: Array2<f64>,
    pub b: Array1<f64>,
}

impl Linear {
    pub fn new(in_dim: usize, out_dim: usize, rng: &mut RngStream) -> Self {
        Self {
            w: init::uniform_matrix(out_dim, in_dim, init::he_bound(in_dim), rng),
            b: init::zeros_vector(out_dim),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn forward(&self, x: &Array1<f64>) -> Array1<f64> {
        self.w.dot(x) + &self.b
    }

    /// Returns the input gradient; accumulates dW/db under `name`.
    pub fn backward(&self, x: &Array1<f64>, gy: &Array1<f64>, grads: &mut Grads, name: &str) -> Array1<f64> {
        let gx = self.w.t().dot(gy);
        let gy2 = gy.view().insert_axis(Axis(1));
        let x2 = x.view().insert_axis(Axis(0));
        grads.add(&format!("{name}.w"), gy2.dot(&x2));
        grads.add(&format!("{name}.b"), gy.clone());
        gx
    }

    /// Rows of `x` are samples: (n, in_dim) -> (n, out_dim).
    pub fn forward_batch(&self, x: &Array2<f64>) -> Array2<f64> {
        x.dot(&self.w.t()) + &self.b
    }

    pub fn backward_batch(&self, x: &Array2<f64>, gy: &Array2<f64>, grads: &mut Grads, name: &str) -> Array2<f64> {
        let gx = gy.dot(&self.w);
        grads.add(&format!("{name}.w"), gy.t().dot(x));
        grads.add(&format!("{name}.b"), gy.sum_axis(Axis(0)));
        gx
    }

    pub fn visit(&self, name: &str, f: &mut dyn FnMut(&str, ArrayViewD<'_, f64>)) {
        f(&format!("{name}.w"), self.w.view().into_dyn());
        f(&format!("{name}.b"), self.b.view().into_dyn());
    }

    pub fn visit_mut(&mut self, name: &str, f: &mut dyn FnMut(&str, ArrayViewMutD<'_, f64>)) {
        f(&format!("{name}.w"), self.w.view_mut().into_dyn());
        f(&format!("{name}.b"), self.b.view_mut().into_dyn());
    }
}
