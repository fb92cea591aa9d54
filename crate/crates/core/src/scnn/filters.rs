use num_complex::Complex64;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::NetworkConfig;
use crate::error::{Error, Result};
use crate::rng::{stream, tag};

/// Filter values `Omega_ij(p_a)` of one linear layer, `[out i][in j][bin a]`,
/// all at the single angular mode `mode`.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterLayer {
    mode: i32,
    n_out: usize,
    n_in: usize,
    bins: usize,
    values: Vec<Complex64>,
}

impl FilterLayer {
    pub fn from_values(mode: i32, n_out: usize, n_in: usize, bins: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != n_out * n_in * bins {
            return Err(Error::Shape(format!(
                "filter layer {n_out}x{n_in}x{bins} given {} values",
                values.len()
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("filter values must be finite".into()));
        }
        Ok(Self { mode, n_out, n_in, bins, values })
    }

    /// Same value at every entry.
    pub fn constant(mode: i32, n_out: usize, n_in: usize, bins: usize, value: Complex64) -> Self {
        Self::from_values(mode, n_out, n_in, bins, vec![value; n_out * n_in * bins]).expect("consistent shape")
    }

    pub fn mode(&self) -> i32 {
        self.mode
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    /// Radial profile of entry `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> &[Complex64] {
        let o = (i * self.n_in + j) * self.bins;
        &self.values[o..o + self.bins]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut [Complex64] {
        let o = (i * self.n_in + j) * self.bins;
        &mut self.values[o..o + self.bins]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterStack {
    pub layers: Vec<FilterLayer>,
}

/// Draw every linear layer of `config` from the prior.
pub fn sample_filters(config: &NetworkConfig, seed: u64) -> FilterStack {
    sample_filters_upto(config, seed, config.linear_layers())
}

/// Draw the first `count` linear layers.
///
/// Entries are circularly-symmetric complex Gaussians with
/// `E[conj(W) W] = sigma_w^2 / (2 n^l)` and `E[W W] = 0`, so real and
/// imaginary parts each have variance `sigma_w^2 / (4 n^l)`. Output channel
/// `i` of layer `l` reads its own stream keyed by `(seed, l, i)`, which makes
/// the stack a prefix of any deeper draw and independent of thread schedule.
pub fn sample_filters_upto(config: &NetworkConfig, seed: u64, count: usize) -> FilterStack {
    let bins = config.grid.len();
    let layers = (0..count.min(config.linear_layers()))
        .map(|l| {
            let (n_in, n_out) = (config.widths[l], config.widths[l + 1]);
            let mut values = vec![Complex64::new(0.0, 0.0); n_out * n_in * bins];
            values
                .par_chunks_mut(n_in * bins)
                .enumerate()
                .for_each(|(i, row)| fill_filter_row(config, seed, l, i, row));
            FilterLayer {
                mode: config.filter_modes[l],
                n_out,
                n_in,
                bins,
                values,
            }
        })
        .collect();
    FilterStack { layers }
}

/// Row `i` of layer `l`, `[in j][bin a]`, exactly as [`sample_filters`] draws it.
pub(crate) fn fill_filter_row(config: &NetworkConfig, seed: u64, l: usize, i: usize, row: &mut [Complex64]) {
    let sd = (config.sigma_w_sq / (4.0 * config.widths[l] as f64)).sqrt();
    let normal = Normal::new(0.0, sd).expect("positive sd");
    let mut rng = stream(seed, &[tag::FILTER, l as u64, i as u64]);
    for v in row.iter_mut() {
        let re = normal.sample(&mut rng);
        let im = normal.sample(&mut rng);
        *v = Complex64::new(re, im);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scnn::test_support::config;

    #[test]
    fn same_seed_same_stack() {
        let c = config(2, vec![1, 3, 3], vec![0, 1], 4);
        assert_eq!(sample_filters(&c, 9), sample_filters(&c, 9));
        assert_ne!(sample_filters(&c, 9), sample_filters(&c, 10));
    }

    #[test]
    fn shallow_draw_is_a_prefix() {
        let c = config(2, vec![2, 3, 3], vec![0, 1], 4);
        let full = sample_filters(&c, 4);
        let one = sample_filters_upto(&c, 4, 1);
        assert_eq!(one.layers.len(), 1);
        assert_eq!(one.layers[0], full.layers[0]);
    }

    #[test]
    fn shapes_follow_widths() {
        let c = config(2, vec![1, 5, 2], vec![3, -1], 6);
        let s = sample_filters(&c, 0);
        assert_eq!((s.layers[0].n_out(), s.layers[0].n_in(), s.layers[0].bins()), (5, 1, 6));
        assert_eq!((s.layers[1].n_out(), s.layers[1].n_in()), (2, 5));
        assert_eq!(s.layers[1].mode(), -1);
    }
}
