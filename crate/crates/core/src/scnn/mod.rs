//! Finite-multiplicity steerable CNN in angular-mode Fourier space.
//!
//! A network of depth `L` is `L` blocks of (linear layer with filter mode
//! `q_l`, cubic nonlinearity), optionally followed by one trailing linear
//! readout. Everything is pointwise in the radial frequency `p`.

mod coord;
mod filters;
mod forward;
mod layers;

pub use coord::{build_coord_filter, check_kernel_constraint, eval_coord_filter, CoordFilter, CoordTerm};
pub use filters::{sample_filters, sample_filters_upto, FilterLayer, FilterStack};
pub use forward::{forward, forward_sampled, forward_until, polar_grid_forward, polar_grid_trace, ForwardTrace, LayerRecord};
pub use layers::{apply_cubic, apply_linear, cubic_window, CubicMethod};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{synth_field, FieldSpec, ModeField, RadialGrid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Number of (linear, cubic) blocks.
    pub depth: usize,
    /// Multiplicities `n^0..n^L` (one more entry with `final_linear`).
    pub widths: Vec<usize>,
    /// Filter modes `q_0..q_{L-1}` (one more entry with `final_linear`).
    pub filter_modes: Vec<i32>,
    pub sigma_w_sq: f64,
    pub grid: RadialGrid,
    pub seed: u64,
    pub input: FieldSpec,
    /// Append a trailing linear layer after the last cubic block.
    pub final_linear: bool,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let extra = usize::from(self.final_linear);
        if self.widths.len() != self.depth + 1 + extra {
            return Err(Error::config(
                "widths",
                format!(
                    "expected {} entries (depth + 1{}), got {}",
                    self.depth + 1 + extra,
                    if self.final_linear { " + final_linear" } else { "" },
                    self.widths.len()
                ),
            ));
        }
        if self.filter_modes.len() != self.depth + extra {
            return Err(Error::config(
                "filter_modes",
                format!(
                    "expected {} entries (depth{}), got {}",
                    self.depth + extra,
                    if self.final_linear { " + final_linear" } else { "" },
                    self.filter_modes.len()
                ),
            ));
        }
        if self.widths.contains(&0) {
            return Err(Error::config("widths", "multiplicities must be positive"));
        }
        if !(self.sigma_w_sq > 0.0) || !self.sigma_w_sq.is_finite() {
            return Err(Error::config("sigma_w_sq", "must be a positive finite number"));
        }
        if self.input.channels != self.widths[0] {
            return Err(Error::config(
                "input.channels",
                format!("must equal widths[0] = {}", self.widths[0]),
            ));
        }
        if self.input.mode_lo > self.input.mode_hi {
            return Err(Error::config("input.mode_lo", "must not exceed input.mode_hi"));
        }
        Ok(())
    }

    /// Number of linear layers, including the optional readout.
    pub fn linear_layers(&self) -> usize {
        self.filter_modes.len()
    }

    /// Number of probe-able activations: `Y^0..Y^L`, plus the readout.
    pub fn probe_layers(&self) -> usize {
        self.depth + 1 + usize::from(self.final_linear)
    }

    pub fn input_field(&self) -> Result<ModeField> {
        synth_field(&self.input, &self.grid)
    }

    /// Mode window and rep index of every probe-able activation.
    pub fn layer_windows(&self) -> Vec<(i32, i32, i32)> {
        let (mut lo, mut hi, mut k) = (self.input.mode_lo, self.input.mode_hi, self.input.rep_index);
        let mut out = vec![(lo, hi, k)];
        for (l, &q) in self.filter_modes.iter().enumerate() {
            lo -= q;
            hi -= q;
            k += q;
            if l < self.depth {
                (lo, hi) = cubic_window(lo, hi);
            }
            out.push((lo, hi, k));
        }
        out
    }

    /// Largest `|mode|` reached anywhere in the network, pre-activations included.
    pub fn max_mode_radius(&self) -> i32 {
        let (mut lo, mut hi) = (self.input.mode_lo, self.input.mode_hi);
        let mut r = lo.abs().max(hi.abs());
        for (l, &q) in self.filter_modes.iter().enumerate() {
            lo -= q;
            hi -= q;
            r = r.max(lo.abs()).max(hi.abs());
            if l < self.depth {
                (lo, hi) = cubic_window(lo, hi);
                r = r.max(lo.abs()).max(hi.abs());
            }
        }
        r
    }

    /// Copy with every hidden multiplicity (`n^1` onwards) set to `width`.
    pub fn with_hidden_width(&self, width: usize) -> Self {
        let mut c = self.clone();
        for w in c.widths.iter_mut().skip(1) {
            *w = width;
        }
        c
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::fields::{FieldTerm, RadialProfile};

    pub fn config(depth: usize, widths: Vec<usize>, modes: Vec<i32>, bins: usize) -> NetworkConfig {
        NetworkConfig {
            depth,
            widths: widths.clone(),
            filter_modes: modes,
            sigma_w_sq: 2.0,
            grid: RadialGrid::uniform(bins, 2.0).unwrap(),
            seed: 1,
            input: FieldSpec {
                rep_index: 0,
                channels: widths[0],
                mode_lo: 0,
                mode_hi: 0,
                terms: vec![FieldTerm {
                    channel: 0,
                    mode: 0,
                    amplitude: [1.0, 0.0],
                    profile: RadialProfile::Constant,
                }],
            },
            final_linear: false,
        }
    }
}
