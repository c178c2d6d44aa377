//! Minimal neural-network kit: dense/conv/transposed-conv/pool layers, a GRU
//! cell, activations, bilinear resizing, and Adam.
//!
//! Layers are plain structs holding `f64` ndarrays. Forward passes return
//! outputs (plus caches where backprop needs them); backward passes take the
//! upstream gradient and accumulate parameter gradients into a [`Grads`] map
//! keyed by parameter name. Nothing here is generic over batch shape — the
//! image models run per sample (parallelized over the batch by callers), the
//! policy runs batched over environments.

pub mod act;
pub mod adam;
pub mod conv;
pub mod gru;
pub mod init;
pub mod linear;
pub mod pool;
pub mod resize;

pub use act::{elu, elu_grad_from_output, relu, relu_grad_from_input, sigmoid, sigmoid_grad_from_output};
pub use adam::Adam;
pub use conv::{Conv2d, ConvT2d};
pub use gru::{GruCache, GruCell};
pub use linear::Linear;
pub use pool::{MaxPool, PoolCache};
pub use resize::Bilinear;

use ndarray::{ArrayD, ArrayViewD, ArrayViewMutD, Dimension};
use std::collections::BTreeMap;

/// Named parameter gradients, accumulated across samples and time steps.
///
/// Backed by a `BTreeMap` so iteration order is deterministic.
#[derive(Debug, Clone, Default)]
pub struct Grads {
    map: BTreeMap<String, ArrayD<f64>>,
}

impl Grads {
    pub fn new() -> Self {
        Self::default()
    }

    /// Accumulates `g` into the slot for `name` (creating it if absent).
    pub fn add<D: Dimension>(&mut self, name: &str, g: ndarray::Array<f64, D>) {
        let g = g.into_dyn();
        match self.map.get_mut(name) {
            Some(slot) => *slot += &g,
            None => {
                self.map.insert(name.to_string(), g);
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<&ArrayD<f64>> {
        self.map.get(name)
    }

    /// Accumulates every entry of `other` into `self`.
    pub fn merge(&mut self, other: Grads) {
        for (name, g) in other.map {
            match self.map.get_mut(&name) {
                Some(slot) => *slot += &g,
                None => {
                    self.map.insert(name, g);
                }
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for g in self.map.values_mut() {
            g.mapv_inplace(|v| v * s);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn all_finite(&self) -> bool {
        self.map.values().all(|g| g.iter().all(|v| v.is_finite()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ArrayD<f64>)> {
        self.map.iter()
    }
}

/// Models expose their parameters as named dynamic-dimension views, in a
/// stable order. Checkpointing, Adam, and gradient checks all go through
/// this trait.
pub trait ParamModel {
    fn visit_params(&self, f: &mut dyn FnMut(&str, ArrayViewD<'_, f64>));
    fn visit_params_mut(&mut self, f: &mut dyn FnMut(&str, ArrayViewMutD<'_, f64>));

    fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        self.visit_params(&mut |name, _| names.push(name.to_string()));
        names
    }

    fn param_count(&self) -> usize {
        let mut n = 0;
        self.visit_params(&mut |_, v| n += v.len());
        n
    }

    /// Copies all parameters into an owned name → tensor map.
    fn export_params(&self) -> BTreeMap<String, ArrayD<f64>> {
        let mut out = BTreeMap::new();
        self.visit_params(&mut |name, v| {
            out.insert(name.to_string(), v.to_owned());
        });
        out
    }

    /// Overwrites parameters from a name → tensor map, checking shapes.
    fn import_params(&mut self, src: &BTreeMap<String, ArrayD<f64>>) -> crate::Result<()> {
        let mut err = None;
        self.visit_params_mut(&mut |name, mut v| {
            if err.is_some() {
                return;
            }
            match src.get(name) {
                Some(t) if t.shape() == v.shape() => v.assign(t),
                Some(t) => {
                    err = Some(crate::Error::shape(
                        format!("parameter {name}"),
                        format!("{:?}", v.shape()),
                        format!("{:?}", t.shape()),
                    ))
                }
                None => err = Some(crate::Error::Checkpoint(format!("missing tensor {name}"))),
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}
