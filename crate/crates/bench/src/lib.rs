//! Shared inputs for the benchmarks.

use num_complex::Complex64;
use se2_nngp::fields::{FieldSpec, FieldTerm, RadialProfile};
use se2_nngp::{ModeField, NetworkConfig, RadialGrid};

/// Deterministic dense field on `[-half, half]` with `bins` radial bins.
pub fn dense_field(channels: usize, half: i32, bins: usize) -> ModeField {
    let grid = RadialGrid::uniform(bins, 2.0).expect("valid grid");
    let mut f = ModeField::zeros(0, grid, channels, -half, half).expect("valid window");
    for (i, v) in f.data_mut().iter_mut().enumerate() {
        let t = i as f64;
        *v = Complex64::new((0.37 * t).sin(), (0.91 * t + 0.2).cos()) / (1.0 + 0.01 * t);
    }
    f
}

/// Constant single-mode input, `depth` blocks of the given hidden width.
pub fn network(depth: usize, width: usize, bins: usize) -> NetworkConfig {
    let mut widths = vec![width; depth + 1];
    widths[0] = 1;
    NetworkConfig {
        depth,
        widths,
        filter_modes: vec![0; depth],
        sigma_w_sq: 2.0,
        grid: RadialGrid::uniform(bins, 2.0).expect("valid grid"),
        seed: 1,
        input: FieldSpec {
            rep_index: 0,
            channels: 1,
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
