//! Feature fields in Fourier space.
//!
//! A field `F(p, psi)` on the frequency plane is stored either as angular
//! modes, `F(p, psi) = sum_m F_m(p) exp(-i m psi)` ([`ModeField`]), or as
//! samples on a polar grid ([`PolarGridField`]). Both are dense over an
//! explicit radial grid; the radial delta of the continuum theory becomes a
//! Kronecker delta on bins.

mod group;
mod hankel;
mod polar;
mod synth;

pub use group::GroupElement;
pub use hankel::{hankel_transform_mode, HankelDirection, HankelPlan};
pub use polar::{
    angular_decompose, angular_reconstruct, min_angular_count, rotate_mode_field,
    translate_mode_field, translation_margin, Translated,
};
pub use synth::{synth_field, FieldSpec, FieldTerm, RadialProfile};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing positive radial sample points `p_1 < ... < p_P`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RadialGrid {
    values: Vec<f64>,
}

impl RadialGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Invalid("radial grid needs at least one point".into()));
        }
        if values.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(Error::Invalid("radial grid points must be finite and positive".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Invalid("radial grid must be strictly increasing".into()));
        }
        Ok(Self { values })
    }

    /// `p_a = p_max * (a + 1) / count` for `a = 0..count`.
    pub fn uniform(count: usize, p_max: f64) -> Result<Self> {
        if count == 0 || !(p_max > 0.0) {
            return Err(Error::Invalid("uniform grid needs count >= 1 and p_max > 0".into()));
        }
        Self::new((1..=count).map(|a| p_max * a as f64 / count as f64).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn p_max(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

impl TryFrom<Vec<f64>> for RadialGrid {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RadialGrid> for Vec<f64> {
    fn from(g: RadialGrid) -> Self {
        g.values
    }
}

/// Complex field in angular-mode form, `[channel][mode][radial bin]`.
///
/// Modes outside `[mode_lo, mode_hi]` are zero. `rep_index` is the index
/// `k` of the induced representation: rotating by `theta` multiplies mode
/// `n` by `exp(i (k + n) theta)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModeFieldRecord", into = "ModeFieldRecord")]
pub struct ModeField {
    rep_index: i32,
    grid: RadialGrid,
    channels: usize,
    mode_lo: i32,
    mode_hi: i32,
    data: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModeFieldRecord {
    rep_index: i32,
    grid: RadialGrid,
    channels: usize,
    mode_lo: i32,
    mode_hi: i32,
    data: Vec<[f64; 2]>,
}

impl TryFrom<ModeFieldRecord> for ModeField {
    type Error = Error;
    fn try_from(r: ModeFieldRecord) -> Result<Self> {
        let data = r.data.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        ModeField::from_data(r.rep_index, r.grid, r.channels, r.mode_lo, r.mode_hi, data)
    }
}

impl From<ModeField> for ModeFieldRecord {
    fn from(f: ModeField) -> Self {
        ModeFieldRecord {
            rep_index: f.rep_index,
            grid: f.grid,
            channels: f.channels,
            mode_lo: f.mode_lo,
            mode_hi: f.mode_hi,
            data: f.data.into_iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl ModeField {
    pub fn zeros(rep_index: i32, grid: RadialGrid, channels: usize, mode_lo: i32, mode_hi: i32) -> Result<Self> {
        if channels == 0 {
            return Err(Error::Invalid("a field needs at least one channel".into()));
        }
        if mode_lo > mode_hi {
            return Err(Error::Invalid(format!("empty mode window [{mode_lo}, {mode_hi}]")));
        }
        let len = channels * (mode_hi - mode_lo + 1) as usize * grid.len();
        Ok(Self {
            rep_index,
            grid,
            channels,
            mode_lo,
            mode_hi,
            data: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn from_data(
        rep_index: i32,
        grid: RadialGrid,
        channels: usize,
        mode_lo: i32,
        mode_hi: i32,
        data: Vec<Complex64>,
    ) -> Result<Self> {
        let mut f = Self::zeros(rep_index, grid, channels, mode_lo, mode_hi)?;
        if data.len() != f.data.len() {
            return Err(Error::Shape(format!(
                "field data has {} entries, expected {}",
                data.len(),
                f.data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("field data must be finite".into()));
        }
        f.data = data;
        Ok(f)
    }

    pub fn rep_index(&self) -> i32 {
        self.rep_index
    }

    pub fn with_rep_index(mut self, k: i32) -> Self {
        self.rep_index = k;
        self
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn mode_lo(&self) -> i32 {
        self.mode_lo
    }

    pub fn mode_hi(&self) -> i32 {
        self.mode_hi
    }

    pub fn modes(&self) -> std::ops::RangeInclusive<i32> {
        self.mode_lo..=self.mode_hi
    }

    pub fn window_len(&self) -> usize {
        (self.mode_hi - self.mode_lo + 1) as usize
    }

    /// Largest `|n|` over the window.
    pub fn mode_radius(&self) -> i32 {
        self.mode_lo.abs().max(self.mode_hi.abs())
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    #[inline]
    fn offset(&self, channel: usize, mode: i32) -> usize {
        (channel * self.window_len() + (mode - self.mode_lo) as usize) * self.grid.len()
    }

    /// Value at `(channel, mode, bin)`; zero outside the window.
    pub fn get(&self, channel: usize, mode: i32, bin: usize) -> Complex64 {
        if mode < self.mode_lo || mode > self.mode_hi {
            return Complex64::new(0.0, 0.0);
        }
        self.data[self.offset(channel, mode) + bin]
    }

    /// Radial profile of one `(channel, mode)`; empty outside the window.
    pub fn profile(&self, channel: usize, mode: i32) -> &[Complex64] {
        if mode < self.mode_lo || mode > self.mode_hi {
            return &[];
        }
        let o = self.offset(channel, mode);
        &self.data[o..o + self.grid.len()]
    }

    pub fn profile_mut(&mut self, channel: usize, mode: i32) -> Result<&mut [Complex64]> {
        if mode < self.mode_lo || mode > self.mode_hi {
            return Err(Error::OutOfWindow { mode, lo: self.mode_lo, hi: self.mode_hi });
        }
        let o = self.offset(channel, mode);
        let p = self.grid.len();
        Ok(&mut self.data[o..o + p])
    }

    /// All modes and bins of one channel, `[mode][bin]`.
    pub fn channel(&self, channel: usize) -> &[Complex64] {
        let n = self.window_len() * self.grid.len();
        &self.data[channel * n..(channel + 1) * n]
    }

    /// Copy onto a new window; entries outside the new window are dropped.
    pub fn with_window(&self, mode_lo: i32, mode_hi: i32) -> Result<Self> {
        let mut out = Self::zeros(self.rep_index, self.grid.clone(), self.channels, mode_lo, mode_hi)?;
        let lo = mode_lo.max(self.mode_lo);
        let hi = mode_hi.min(self.mode_hi);
        for c in 0..self.channels {
            for n in lo..=hi {
                out.profile_mut(c, n)?.copy_from_slice(self.profile(c, n));
            }
        }
        Ok(out)
    }

    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// `max |a - b| / max |b|` over the union of both windows.
///
/// Falls back to the absolute deviation when `b` is identically zero.
pub fn max_rel_deviation(a: &ModeField, b: &ModeField) -> f64 {
    assert_eq!(a.channels(), b.channels(), "channel count differs");
    assert_eq!(a.grid().len(), b.grid().len(), "radial grid differs");
    let lo = a.mode_lo().min(b.mode_lo());
    let hi = a.mode_hi().max(b.mode_hi());
    let mut dev: f64 = 0.0;
    for c in 0..a.channels() {
        for n in lo..=hi {
            for bin in 0..a.grid().len() {
                dev = dev.max((a.get(c, n, bin) - b.get(c, n, bin)).norm());
            }
        }
    }
    let scale = b.max_abs();
    if scale > 0.0 {
        dev / scale
    } else {
        dev
    }
}

/// Complex field sampled at `(p_a, psi_b = 2 pi b / A)`, `[channel][bin][angle]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarGridField {
    grid: RadialGrid,
    angular_count: usize,
    channels: usize,
    data: Vec<Complex64>,
}

impl PolarGridField {
    pub fn zeros(grid: RadialGrid, angular_count: usize, channels: usize) -> Result<Self> {
        if angular_count == 0 || channels == 0 {
            return Err(Error::Invalid("polar field needs angles and channels".into()));
        }
        let len = channels * grid.len() * angular_count;
        Ok(Self {
            grid,
            angular_count,
            channels,
            data: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    /// Fill by evaluating `f(channel, p, psi)` at every grid point.
    pub fn from_fn(
        grid: RadialGrid,
        angular_count: usize,
        channels: usize,
        mut f: impl FnMut(usize, f64, f64) -> Complex64,
    ) -> Result<Self> {
        let mut out = Self::zeros(grid, angular_count, channels)?;
        let ps = out.grid.values().to_vec();
        for c in 0..channels {
            for (a, &p) in ps.iter().enumerate() {
                for b in 0..angular_count {
                    let psi = out.angle(b);
                    let i = out.index(c, a, b);
                    out.data[i] = f(c, p, psi);
                }
            }
        }
        Ok(out)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn angle(&self, b: usize) -> f64 {
        2.0 * std::f64::consts::PI * b as f64 / self.angular_count as f64
    }

    #[inline]
    pub fn index(&self, channel: usize, bin: usize, angle: usize) -> usize {
        (channel * self.grid.len() + bin) * self.angular_count + angle
    }

    pub fn get(&self, channel: usize, bin: usize, angle: usize) -> Complex64 {
        self.data[self.index(channel, bin, angle)]
    }

    /// Angular samples of one `(channel, bin)` ring.
    pub fn ring(&self, channel: usize, bin: usize) -> &[Complex64] {
        let o = self.index(channel, bin, 0);
        &self.data[o..o + self.angular_count]
    }

    pub fn ring_mut(&mut self, channel: usize, bin: usize) -> &mut [Complex64] {
        let o = self.index(channel, bin, 0);
        let a = self.angular_count;
        &mut self.data[o..o + a]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Pointwise product with `g(p, psi)`, shared by all channels.
    pub fn multiply_by(&mut self, g: impl Fn(f64, f64) -> Complex64) {
        let ps = self.grid.values().to_vec();
        for c in 0..self.channels {
            for (a, &p) in ps.iter().enumerate() {
                for b in 0..self.angular_count {
                    let psi = self.angle(b);
                    let i = self.index(c, a, b);
                    self.data[i] *= g(p, psi);
                }
            }
        }
    }
}

/// Pointwise relative deviation between polar fields with equal shape.
pub fn polar_rel_deviation(a: &PolarGridField, b: &PolarGridField) -> f64 {
    assert_eq!(a.data().len(), b.data().len(), "polar field shape differs");
    let dev = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    let scale = b.max_abs();
    if scale > 0.0 {
        dev / scale
    } else {
        dev
    }
}
