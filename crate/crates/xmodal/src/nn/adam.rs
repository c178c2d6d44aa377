//! Adam optimizer over named parameters.

use super::{Grads, ParamModel};
use ndarray::ArrayD;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    t: u64,
    m: BTreeMap<String, ArrayD<f64>>,
    v: BTreeMap<String, ArrayD<f64>>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: BTreeMap::new(),
            v: BTreeMap::new(),
        }
    }

    /// Applies one update. Parameters without a gradient entry are left
    /// untouched (e.g. frozen submodules).
    pub fn step(&mut self, model: &mut dyn ParamModel, grads: &Grads) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        let (beta1, beta2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        let (m_map, v_map) = (&mut self.m, &mut self.v);
        model.visit_params_mut(&mut |name, mut p| {
            let Some(g) = grads.get(name) else { return };
            debug_assert_eq!(g.shape(), p.shape(), "gradient shape for {name}");
            let m = m_map.entry(name.to_string()).or_insert_with(|| ArrayD::zeros(p.raw_dim()));
            let v = v_map.entry(name.to_string()).or_insert_with(|| ArrayD::zeros(p.raw_dim()));
            ndarray::Zip::from(&mut p).and(m).and(v).and(g).for_each(|p, m, v, &g| {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let mhat = *m / bc1;
                let vhat = *v / bc2;
                *p -= lr * mhat / (vhat.sqrt() + eps);
            });
        });
    }

    pub fn steps_taken(&self) -> u64 {
        self.t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Linear;
    use crate::rng::derive_rng_stream;
    use ndarray::{array, Array1, ArrayViewD, ArrayViewMutD};

    struct OneLayer(Linear);
    impl ParamModel for OneLayer {
        fn visit_params(&self, f: &mut dyn FnMut(&str, ArrayViewD<'_, f64>)) {
            self.0.visit("lin", f);
        }
        fn visit_params_mut(&mut self, f: &mut dyn FnMut(&str, ArrayViewMutD<'_, f64>)) {
            self.0.visit_mut("lin", f);
        }
    }

    #[test]
    fn adam_descends_a_quadratic() {
        let mut rng = derive_rng_stream(0, "adam", 0);
        let mut model = OneLayer(Linear::new(2, 1, &mut rng));
        let target: Array1<f64> = array![3.0, -2.0];
        let mut opt = Adam::new(0.05);
        for _ in 0..2000 {
            let mut grads = Grads::new();
            // d/dw of 0.5*||w - target||^2.
            let diff = &model.0.w.row(0).to_owned() - &target;
            grads.add("lin.w", diff.insert_axis(ndarray::Axis(0)));
            grads.add("lin.b", Array1::<f64>::zeros(1));
            opt.step(&mut model, &grads);
        }
        assert!((model.0.w[[0, 0]] - 3.0).abs() < 1e-3);
        assert!((model.0.w[[0, 1]] + 2.0).abs() < 1e-3);
    }
}
