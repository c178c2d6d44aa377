//! Bilinear resampling with a linear-operator backward pass.

use ndarray::Array3;

#[derive(Debug, Clone, Copy)]
struct AxisTap {
    i0: usize,
    i1: usize,
    w1: f64,
}

/// Precomputed bilinear plan from (src_h, src_w) to (dst_h, dst_w).
///
/// Uses the half-pixel-center convention; edge samples clamp.
#[derive(Debug, Clone)]
pub struct Bilinear {
    pub src_h: usize,
    pub src_w: usize,
    pub dst_h: usize,
    pub dst_w: usize,
    rows: Vec<AxisTap>,
    cols: Vec<AxisTap>,
}

fn axis_taps(src: usize, dst: usize) -> Vec<AxisTap> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|o| {
            let s = (o as f64 + 0.5) * scale - 0.5;
            if s <= 0.0 {
                AxisTap { i0: 0, i1: 0, w1: 0.0 }
            } else if s >= (src - 1) as f64 {
                AxisTap { i0: src - 1, i1: src - 1, w1: 0.0 }
            } else {
                let i0 = s.floor() as usize;
                AxisTap { i0, i1: i0 + 1, w1: s - i0 as f64 }
            }
        })
        .collect()
}

impl Bilinear {
    pub fn new(src_h: usize, src_w: usize, dst_h: usize, dst_w: usize) -> Self {
        Self {
            src_h,
            src_w,
            dst_h,
            dst_w,
            rows: axis_taps(src_h, dst_h),
            cols: axis_taps(src_w, dst_w),
        }
    }

    pub fn forward(&self, x: &Array3<f64>) -> Array3<f64> {
        let (c, h, w) = x.dim();
        debug_assert_eq!((h, w), (self.src_h, self.src_w));
        let mut y = Array3::<f64>::zeros((c, self.dst_h, self.dst_w));
        for ci in 0..c {
            for (oy, rt) in self.rows.iter().enumerate() {
                for (ox, ct) in self.cols.iter().enumerate() {
                    let a = x[[ci, rt.i0, ct.i0]];
                    let b = x[[ci, rt.i0, ct.i1]];
                    let d = x[[ci, rt.i1, ct.i0]];
                    let e = x[[ci, rt.i1, ct.i1]];
                    let top = a + (b - a) * ct.w1;
                    let bot = d + (e - d) * ct.w1;
                    y[[ci, oy, ox]] = top + (bot - top) * rt.w1;
                }
            }
        }
        y
    }

    pub fn backward(&self, gy: &Array3<f64>) -> Array3<f64> {
        let (c, _, _) = gy.dim();
        let mut gx = Array3::<f64>::zeros((c, self.src_h, self.src_w));
        for ci in 0..c {
            for (oy, rt) in self.rows.iter().enumerate() {
                for (ox, ct) in self.cols.iter().enumerate() {
                    let g = gy[[ci, oy, ox]];
                    let (ry0, ry1) = (1.0 - rt.w1, rt.w1);
                    let (cx0, cx1) = (1.0 - ct.w1, ct.w1);
                    gx[[ci, rt.i0, ct.i0]] += g * ry0 * cx0;
                    gx[[ci, rt.i0, ct.i1]] += g * ry0 * cx1;
                    gx[[ci, rt.i1, ct.i0]] += g * ry1 * cx0;
                    gx[[ci, rt.i1, ct.i1]] += g * ry1 * cx1;
                }
            }
        }
        gx
    }
}
