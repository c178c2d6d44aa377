//! Max pooling with argmax routing for the backward pass.

use ndarray::Array3;

#[derive(Debug, Clone, Copy)]
pub struct MaxPool {
    pub k: usize,
    pub stride: usize,
}

#[derive(Debug, Clone)]
pub struct PoolCache {
    /// Flat input index (iy*w + ix) of each output's maximum.
    pub argmax: Array3<u32>,
    pub in_h: usize,
    pub in_w: usize,
}

impl MaxPool {
    pub fn new(k: usize, stride: usize) -> Self {
        Self { k, stride }
    }

    pub fn out_len(&self, n: usize) -> usize {
        debug_assert!(n >= self.k);
        (n - self.k) / self.stride + 1
    }

    pub fn forward(&self, x: &Array3<f64>) -> (Array3<f64>, PoolCache) {
        let (c, h, w) = x.dim();
        let (oh, ow) = (self.out_len(h), self.out_len(w));
        let mut y = Array3::<f64>::zeros((c, oh, ow));
        let mut argmax = Array3::<u32>::zeros((c, oh, ow));
        for ci in 0..c {
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut best = f64::NEG_INFINITY;
                    let mut best_idx = 0u32;
                    for ky in 0..self.k {
                        let iy = oy * self.stride + ky;
                        for kx in 0..self.k {
                            let ix = ox * self.stride + kx;
                            let v = x[[ci, iy, ix]];
                            if v > best {
                                best = v;
                                best_idx = (iy * w + ix) as u32;
                            }
                        }
                    }
                    y[[ci, oy, ox]] = best;
                    argmax[[ci, oy, ox]] = best_idx;
                }
            }
        }
        (y, PoolCache { argmax, in_h: h, in_w: w })
    }

    pub fn backward(&self, cache: &PoolCache, gy: &Array3<f64>) -> Array3<f64> {
        let (c, oh, ow) = gy.dim();
        let mut gx = Array3::<f64>::zeros((c, cache.in_h, cache.in_w));
        for ci in 0..c {
            for oy in 0..oh {
                for ox in 0..ow {
                    let idx = cache.argmax[[ci, oy, ox]] as usize;
                    gx[[ci, idx / cache.in_w, idx % cache.in_w]] += gy[[ci, oy, ox]];
                }
            }
        }
        gx
    }
}
