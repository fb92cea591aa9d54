use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::FilterLayer;
use crate::error::{Error, Result};
use crate::fields::ModeField;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Linear layer `Z_{i,n}(p) = sum_j conj(Omega_ij(p)) Y_{j, n+q}(p)`.
///
/// The output window is the input window shifted by `-q` and the rep index
/// advances from `k` to `k + q`.
pub fn apply_linear(layer: &FilterLayer, y: &ModeField) -> Result<ModeField> {
    check_linear_shape(layer.n_in(), layer.bins(), y)?;
    let mut z = linear_output(y, layer.mode(), layer.n_out())?;
    let row_len = layer.n_in() * layer.bins();
    let stride = y.window_len() * y.grid().len();
    z.data_mut()
        .par_chunks_mut(stride)
        .enumerate()
        .for_each(|(i, out)| accumulate_row(&layer.values()[i * row_len..(i + 1) * row_len], y, out));
    Ok(z)
}

pub(crate) fn check_linear_shape(n_in: usize, bins: usize, y: &ModeField) -> Result<()> {
    if y.channels() != n_in {
        return Err(Error::Shape(format!(
            "layer expects {n_in} input channels, field has {}",
            y.channels()
        )));
    }
    if y.grid().len() != bins {
        return Err(Error::Shape(format!(
            "layer has {bins} radial bins, field has {}",
            y.grid().len()
        )));
    }
    Ok(())
}

/// Zero output of a linear layer: window shifted by `-q`, rep index `k + q`.
pub(crate) fn linear_output(y: &ModeField, q: i32, n_out: usize) -> Result<ModeField> {
    ModeField::zeros(y.rep_index() + q, y.grid().clone(), n_out, y.mode_lo() - q, y.mode_hi() - q)
}

/// `out += sum_j conj(row_j) * Y_j` for one output channel. Shifting the
/// window by `-q` keeps the flat `[mode][bin]` layout, so no reindexing.
pub(crate) fn accumulate_row(row: &[Complex64], y: &ModeField, out: &mut [Complex64]) {
    let bins = y.grid().len();
    for (j, w) in row.chunks(bins).enumerate() {
        let src = y.channel(j);
        for (o_mode, s_mode) in out.chunks_mut(bins).zip(src.chunks(bins)) {
            for ((o, s), wa) in o_mode.iter_mut().zip(s_mode).zip(w) {
                *o += wa.conj() * s;
            }
        }
    }
}

/// Output window of the cubic map: `[2 lo - hi, 2 hi - lo]`.
pub fn cubic_window(lo: i32, hi: i32) -> (i32, i32) {
    (2 * lo - hi, 2 * hi - lo)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CubicMethod {
    /// Direct triple sum.
    Naive,
    /// Convolution / correlation over the mode axis via FFT.
    Fft,
    /// Naive for narrow windows (keeps exact zeros), FFT otherwise.
    #[default]
    Auto,
}

const AUTO_FFT_MIN_WINDOW: usize = 24;

/// Cubic nonlinearity `Y_m = sum_{n,k} conj(Z_k) Z_n Z_{m+k-n}`.
///
/// This is the angular-mode form of the pointwise `|Z|^2 Z`; mode support
/// triples and the rep index is unchanged.
pub fn apply_cubic(z: &ModeField, method: CubicMethod) -> Result<ModeField> {
    let (lo, hi) = cubic_window(z.mode_lo(), z.mode_hi());
    let mut y = ModeField::zeros(z.rep_index(), z.grid().clone(), z.channels(), lo, hi)?;
    let w = z.window_len();
    let bins = z.grid().len();
    let use_fft = match method {
        CubicMethod::Naive => false,
        CubicMethod::Fft => true,
        CubicMethod::Auto => w >= AUTO_FFT_MIN_WINDOW,
    };
    let engine = use_fft.then(|| FftCubic::new(w));
    let out_len = 3 * w - 2;

    y.data_mut()
        .par_chunks_mut(out_len * bins)
        .enumerate()
        .for_each(|(c, out)| {
            let src = z.channel(c);
            let mut modes = vec![ZERO; w];
            let mut res = vec![ZERO; out_len];
            let mut scratch = engine.as_ref().map(|e| e.scratch());
            for bin in 0..bins {
                for (u, m) in modes.iter_mut().enumerate() {
                    *m = src[u * bins + bin];
                }
                match (&engine, scratch.as_mut()) {
                    (Some(e), Some(s)) => e.run(&modes, &mut res, s),
                    _ => cubic_naive(&modes, &mut res),
                }
                for (t, v) in res.iter().enumerate() {
                    out[t * bins + bin] = *v;
                }
            }
        });
    Ok(y)
}

/// `out[t]` is output mode `2 lo - hi + t` for input `z[u]` = mode `lo + u`.
fn cubic_naive(z: &[Complex64], out: &mut [Complex64]) {
    let w = z.len() as isize;
    for (t, o) in out.iter_mut().enumerate() {
        let mut acc = ZERO;
        for (ku, zk) in z.iter().enumerate() {
            let zk = zk.conj();
            for (nu, zn) in z.iter().enumerate() {
                let j = t as isize + ku as isize - nu as isize - (w - 1);
                if (0..w).contains(&j) {
                    acc += zk * zn * z[j as usize];
                }
            }
        }
        *o = acc;
    }
}

struct FftCubic {
    w: usize,
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

struct FftScratch {
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    work: Vec<Complex64>,
}

impl FftCubic {
    fn new(w: usize) -> Self {
        let n = (3 * w - 2).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            w,
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    fn scratch(&self) -> FftScratch {
        let len = self.fwd.get_inplace_scratch_len().max(self.inv.get_inplace_scratch_len());
        FftScratch {
            a: vec![ZERO; self.n],
            b: vec![ZERO; self.n],
            work: vec![ZERO; len],
        }
    }

    /// `(z * z) * reverse(conj z)` as one linear convolution of length `3w - 2`.
    fn run(&self, z: &[Complex64], out: &mut [Complex64], s: &mut FftScratch) {
        let w = self.w;
        s.a.fill(ZERO);
        s.b.fill(ZERO);
        s.a[..w].copy_from_slice(z);
        for (v, zv) in s.b[..w].iter_mut().zip(z.iter().rev()) {
            *v = zv.conj();
        }
        self.fwd.process_with_scratch(&mut s.a, &mut s.work);
        self.fwd.process_with_scratch(&mut s.b, &mut s.work);
        for (x, y) in s.a.iter_mut().zip(&s.b) {
            *x = *x * *x * y;
        }
        self.inv.process_with_scratch(&mut s.a, &mut s.work);
        let scale = 1.0 / self.n as f64;
        for (o, v) in out.iter_mut().zip(&s.a) {
            *o = v * scale;
        }
    }
}
