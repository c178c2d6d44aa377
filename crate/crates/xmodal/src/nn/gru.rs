//! Batched GRU cell with explicit per-step caches for BPTT.

use super::{init, Grads};
use crate::rng::RngStream;
use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD, Axis, Zip};

#[derive(Debug, Clone)]
pub struct GruCell {
    // Input kernels (hid, in) and recurrent kernels (hid, hid).
    pub wz: Array2<f64>,
    pub wr: Array2<f64>,
    pub wh: Array2<f64>,
    pub uz: Array2<f64>,
    pub ur: Array2<f64>,
    pub uh: Array2<f64>,
    pub bz: Array1<f64>,
    pub br: Array1<f64>,
    pub bh: Array1<f64>,
}

/// Per-step cache; rows are batch entries.
#[derive(Debug, Clone)]
pub struct GruCache {
    pub x: Array2<f64>,
    pub h_prev: Array2<f64>,
    pub z: Array2<f64>,
    pub r: Array2<f64>,
    pub c: Array2<f64>,
}

fn sigmoid2(x: Array2<f64>) -> Array2<f64> {
    x.mapv(super::act::sigmoid_scalar)
}

impl GruCell {
    pub fn new(in_dim: usize, hidden: usize, rng: &mut RngStream) -> Self {
        let wb = init::xavier_bound(in_dim, hidden);
        let ub = init::xavier_bound(hidden, hidden);
        Self {
            wz: init::uniform_matrix(hidden, in_dim, wb, rng),
            wr: init::uniform_matrix(hidden, in_dim, wb, rng),
            wh: init::uniform_matrix(hidden, in_dim, wb, rng),
            uz: init::uniform_matrix(hidden, hidden, ub, rng),
            ur: init::uniform_matrix(hidden, hidden, ub, rng),
            uh: init::uniform_matrix(hidden, hidden, ub, rng),
            bz: init::zeros_vector(hidden),
            br: init::zeros_vector(hidden),
            bh: init::zeros_vector(hidden),
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.wz.nrows()
    }

    /// One step over a batch: x (n, in), h_prev (n, hid) -> h_next (n, hid).
    pub fn forward_batch(&self, x: &Array2<f64>, h_prev: &Array2<f64>) -> (Array2<f64>, GruCache) {
        let z = sigmoid2(x.dot(&self.wz.t()) + h_prev.dot(&self.uz.t()) + &self.bz);
        let r = sigmoid2(x.dot(&self.wr.t()) + h_prev.dot(&self.ur.t()) + &self.br);
        let rh = &r * h_prev;
        let c = (x.dot(&self.wh.t()) + rh.dot(&self.uh.t()) + &self.bh).mapv(f64::tanh);
        let h_next = (1.0 - &z) * h_prev + &z * &c;
        (
            h_next,
            GruCache {
                x: x.clone(),
                h_prev: h_prev.clone(),
                z,
                r,
                c,
            },
        )
    }

    pub fn forward_batch_nocache(&self, x: &Array2<f64>, h_prev: &Array2<f64>) -> Array2<f64> {
        let z = sigmoid2(x.dot(&self.wz.t()) + h_prev.dot(&self.uz.t()) + &self.bz);
        let r = sigmoid2(x.dot(&self.wr.t()) + h_prev.dot(&self.ur.t()) + &self.br);
        let rh = &r * h_prev;
        let c = (x.dot(&self.wh.t()) + rh.dot(&self.uh.t()) + &self.bh).mapv(f64::tanh);
        (1.0 - &z) * h_prev + &z * &c
    }

    /// Backward through one step. `gh_next` is dL/dh_next; returns
    /// (dL/dx, dL/dh_prev) and accumulates parameter gradients.
    pub fn backward_batch(&self, cache: &GruCache, gh_next: &Array2<f64>, grads: &mut Grads, name: &str) -> (Array2<f64>, Array2<f64>) {
        let GruCache { x, h_prev, z, r, c } = cache;

        let gz = gh_next * &(c - h_prev);
        let gc = gh_next * z;
        let mut gh_prev = gh_next * &(1.0 - z);

        // Through tanh candidate.
        let gc_pre = Zip::from(&gc).and(c).map_collect(|&g, &cv| g * (1.0 - cv * cv));
        let rh = r * h_prev;
        grads.add(&format!("{name}.wh"), gc_pre.t().dot(x));
        grads.add(&format!("{name}.uh"), gc_pre.t().dot(&rh));
        grads.add(&format!("{name}.bh"), gc_pre.sum_axis(Axis(0)));
        let grh = gc_pre.dot(&self.uh);
        let gr = &grh * h_prev;
        gh_prev = gh_prev + &grh * r;

        // Through the sigmoid gates.
        let gz_pre = Zip::from(&gz).and(z).map_collect(|&g, &v| g * v * (1.0 - v));
        let gr_pre = Zip::from(&gr).and(r).map_collect(|&g, &v| g * v * (1.0 - v));
        grads.add(&format!("{name}.wz"), gz_pre.t().dot(x));
        grads.add(&format!("{name}.uz"), gz_pre.t().dot(h_prev));
        grads.add(&format!("{name}.bz"), gz_pre.sum_axis(Axis(0)));
        grads.add(&format!("{name}.wr"), gr_pre.t().dot(x));
        grads.add(&format!("{name}.ur"), gr_pre.t().dot(h_prev));
        grads.add(&format!("{name}.br"), gr_pre.sum_axis(Axis(0)));

        gh_prev = gh_prev + gz_pre.dot(&self.uz) + gr_pre.dot(&self.ur);
        let gx = gc_pre.dot(&self.wh) + gz_pre.dot(&self.wz) + gr_pre.dot(&self.wr);
        (gx, gh_prev)
    }

    pub fn visit(&self, name: &str, f: &mut dyn FnMut(&str, ArrayViewD<'_, f64>)) {
        f(&format!("{name}.wz"), self.wz.view().into_dyn());
        f(&format!("{name}.wr"), self.wr.view().into_dyn());
        f(&format!("{name}.wh"), self.wh.view().into_dyn());
        f(&format!("{name}.uz"), self.uz.view().into_dyn());
        f(&format!("{name}.ur"), self.ur.view().into_dyn());
        f(&format!("{name}.uh"), self.uh.view().into_dyn());
        f(&format!("{name}.bz"), self.bz.view().into_dyn());
        f(&format!("{name}.br"), self.br.view().into_dyn());
        f(&format!("{name}.bh"), self.bh.view().into_dyn());
    }

    pub fn visit_mut(&mut self, name: &str, f: &mut dyn FnMut(&str, ArrayViewMutD<'_, f64>)) {
        f(&format!("{name}.wz"), self.wz.view_mut().into_dyn());
        f(&format!("{name}.wr"), self.wr.view_mut().into_dyn());
        f(&format!("{name}.wh"), self.wh.view_mut().into_dyn());
        f(&format!("{name}.uz"), self.uz.view_mut().into_dyn());
        f(&format!("{name}.ur"), self.ur.view_mut().into_dyn());
        f(&format!("{name}.uh"), self.uh.view_mut().into_dyn());
        f(&format!("{name}.bz"), self.bz.view_mut().into_dyn());
        f(&format!("{name}.br"), self.br.view_mut().into_dyn());
        f(&format!("{name}.bh"), self.bh.view_mut().into_dyn());
    }
}
