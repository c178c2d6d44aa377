//! 2-D convolution and transposed convolution via im2col + GEMM.
//!
//! Inputs are single samples shaped (channels, height, width). Kernels are
//! stored as 2-D matrices so they GEMM directly against column buffers.

use super::{init, Grads};
use crate::rng::RngStream;
use ndarray::{Array1, Array2, Array3, ArrayViewD, ArrayViewMutD, Axis};

pub fn conv_out_len(n: usize, k: usize, stride: usize, pad: usize) -> usize {
    debug_assert!(n + 2 * pad >= k, "kernel larger than padded input");
    (n + 2 * pad - k) / stride + 1
}

/// Unrolls (ic, h, w) into (ic*kh*kw, oh*ow) columns.
pub fn im2col(x: &Array3<f64>, kh: usize, kw: usize, stride: usize, pad: usize) -> Array2<f64> {
    let (ic, h, w) = x.dim();
    let oh = conv_out_len(h, kh, stride, pad);
    let ow = conv_out_len(w, kw, stride, pad);
    let mut cols = Array2::<f64>::zeros((ic * kh * kw, oh * ow));
    for c in 0..ic {
        for ky in 0..kh {
            for kx in 0..kw {
                let row = (c * kh + ky) * kw + kx;
                let mut dst = cols.row_mut(row);
                for oy in 0..oh {
                    let iy = (oy * stride + ky) as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    let src = x.index_axis(Axis(0), c);
                    let src_row = src.index_axis(Axis(0), iy as usize);
                    for ox in 0..ow {
                        let ix = (ox * stride + kx) as isize - pad as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        dst[oy * ow + ox] = src_row[ix as usize];
                    }
                }
            }
        }
    }
    cols
}

/// Transpose of [`im2col`]: scatter-adds columns back onto an (ic, h, w) grid.
pub fn col2im(cols: &Array2<f64>, ic: usize, h: usize, w: usize, kh: usize, kw: usize, stride: usize, pad: usize) -> Array3<f64> {
    let oh = conv_out_len(h, kh, stride, pad);
    let ow = conv_out_len(w, kw, stride, pad);
    debug_assert_eq!(cols.dim(), (ic * kh * kw, oh * ow));
    let mut x = Array3::<f64>::zeros((ic, h, w));
    for c in 0..ic {
        for ky in 0..kh {
            for kx in 0..kw {
                let row = (c * kh + ky) * kw + kx;
                let src = cols.row(row);
                for oy in 0..oh {
                    let iy = (oy * stride + ky) as isize - pad as isize;
                    if iy < 0 || iy >= h as isize {
                        continue;
                    }
                    for ox in 0..ow {
                        let ix = (ox * stride + kx) as isize - pad as isize;
                        if ix < 0 || ix >= w as isize {
                            continue;
                        }
                        x[[c, iy as usize, ix as usize]] += src[oy * ow + ox];
                    }
                }
            }
        }
    }
    x
}

#[derive(Debug, Clone)]
pub struct Conv2d {
    /// (oc, ic*kh*kw)
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub in_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
}

impl Conv2d {
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, pad: usize, rng: &mut RngStream) -> Self {
        let fan_in = in_channels * kernel * kernel;
        Self {
            w: init::uniform_matrix(out_channels, fan_in, init::he_bound(fan_in), rng),
            b: init::zeros_vector(out_channels),
            in_channels,
            kernel,
            stride,
            pad,
        }
    }

    pub fn out_channels(&self) -> usize {
        self.w.nrows()
    }

    pub fn out_shape(&self, h: usize, w: usize) -> (usize, usize) {
        (
            conv_out_len(h, self.kernel, self.stride, self.pad),
            conv_out_len(w, self.kernel, self.stride, self.pad),
        )
    }

    pub fn forward(&self, x: &Array3<f64>) -> Array3<f64> {
        let (ic, h, w) = x.dim();
        debug_assert_eq!(ic, self.in_channels);
        let (oh, ow) = self.out_shape(h, w);
        let cols = im2col(x, self.kernel, self.kernel, self.stride, self.pad);
        let mut y2 = self.w.dot(&cols);
        for (mut row, &b) in y2.rows_mut().into_iter().zip(self.b.iter()) {
            row += b;
        }
        y2.into_shape_with_order((self.out_channels(), oh, ow)).expect("conv output reshape")
    }

    /// Returns the input gradient; accumulates dW/db under `name`.
    pub fn backward(&self, x: &Array3<f64>, gy: &Array3<f64>, grads: &mut Grads, name: &str) -> Array3<f64> {
        let (_, h, w) = x.dim();
        let (oc, oh, ow) = gy.dim();
        debug_assert_eq!(oc, self.out_channels());
        let cols = im2col(x, self.kernel, self.kernel, self.stride, self.pad);
        let gy2 = gy.view().into_shape_with_order((oc, oh * ow)).expect("grad reshape");
        grads.add(&format!("{name}.w"), gy2.dot(&cols.t()));
        grads.add(&format!("{name}.b"), gy2.sum_axis(Axis(1)));
        let gcols = self.w.t().dot(&gy2);
        col2im(&gcols, self.in_channels, h, w, self.kernel, self.kernel, self.stride, self.pad)
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

/// Transposed convolution with output size (ih-1)*stride - 2*pad + k.
#[derive(Debug, Clone)]
pub struct ConvT2d {
    /// (ic, oc*kh*kw)
    pub w: Array2<f64>,
    pub b: Array1<f64>,
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvT2d {
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, pad: usize, rng: &mut RngStream) -> Self {
        let fan_in = in_channels * kernel * kernel;
        Self {
            w: init::uniform_matrix(in_channels, out_channels * kernel * kernel, init::he_bound(fan_in), rng),
            b: init::zeros_vector(out_channels),
            in_channels,
            out_channels,
            kernel,
            stride,
            pad,
        }
    }

    pub fn out_len(&self, n: usize) -> usize {
        (n - 1) * self.stride + self.kernel - 2 * self.pad
    }

    pub fn forward(&self, x: &Array3<f64>) -> Array3<f64> {
        let (ic, ih, iw) = x.dim();
        debug_assert_eq!(ic, self.in_channels);
        let (oh, ow) = (self.out_len(ih), self.out_len(iw));
        let x2 = x.view().into_shape_with_order((ic, ih * iw)).expect("input reshape");
        // cols: (oc*kh*kw, ih*iw); scatter them onto the output grid.
        let cols = self.w.t().dot(&x2);
        let mut y = col2im(&cols, self.out_channels, oh, ow, self.kernel, self.kernel, self.stride, self.pad);
        for (mut plane, &b) in y.axis_iter_mut(Axis(0)).zip(self.b.iter()) {
            plane += b;
        }
        y
    }

    pub fn backward(&self, x: &Array3<f64>, gy: &Array3<f64>, grads: &mut Grads, name: &str) -> Array3<f64> {
        let (ic, ih, iw) = x.dim();
        let (oc, _, _) = gy.dim();
        debug_assert_eq!(oc, self.out_channels);
        let x2 = x.view().into_shape_with_order((ic, ih * iw)).expect("input reshape");
        // The backward of col2im is im2col on the upstream gradient.
        let gcols = im2col(gy, self.kernel, self.kernel, self.stride, self.pad);
        grads.add(&format!("{name}.w"), x2.dot(&gcols.t()));
        grads.add(
            &format!("{name}.b"),
            gy.view()
                .into_shape_with_order((oc, gy.len() / oc))
                .expect("grad reshape")
                .sum_axis(Axis(1)),
        );
        let gx2 = self.w.dot(&gcols);
        gx2.into_shape_with_order((ic, ih, iw)).expect("input grad reshape")
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
