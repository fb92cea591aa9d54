use num_complex::Complex64;

use rayon::prelude::*;

use super::filters::fill_filter_row;
use super::layers::{accumulate_row, check_linear_shape, linear_output};
use super::{apply_cubic, apply_linear, CubicMethod, FilterLayer, FilterStack, NetworkConfig};
use crate::error::{Error, Result};
use crate::fields::{min_angular_count, ModeField, PolarGridField};

/// Pre-activation `Z^l` and activation `Y^{l+1}` of one block.
#[derive(Clone, Debug)]
pub struct LayerRecord {
    pub pre: ModeField,
    pub post: ModeField,
}

#[derive(Clone, Debug)]
pub struct ForwardTrace {
    pub input: ModeField,
    pub blocks: Vec<LayerRecord>,
    /// Output of the trailing linear layer, when configured and reached.
    pub readout: Option<ModeField>,
}

impl ForwardTrace {
    /// `Y^0 = X`, `Y^l` for `1 <= l <= L`, and the readout at `L + 1`.
    pub fn activation(&self, layer: usize) -> Option<&ModeField> {
        match layer {
            0 => Some(&self.input),
            l if l <= self.blocks.len() => Some(&self.blocks[l - 1].post),
            l if l == self.blocks.len() + 1 => self.readout.as_ref(),
            _ => None,
        }
    }

    /// Last activation computed.
    pub fn output(&self) -> &ModeField {
        self.readout
            .as_ref()
            .or_else(|| self.blocks.last().map(|b| &b.post))
            .unwrap_or(&self.input)
    }
}

fn check_layer(l: usize, layer: &FilterLayer, config: &NetworkConfig) -> Result<()> {
    let want = (config.widths[l + 1], config.widths[l], config.grid.len(), config.filter_modes[l]);
    let got = (layer.n_out(), layer.n_in(), layer.bins(), layer.mode());
    if want != got {
        return Err(Error::Shape(format!(
            "filter layer {l} is (out, in, bins, mode) = {got:?}, config wants {want:?}"
        )));
    }
    Ok(())
}

/// Full forward pass `Z^l = linear(Y^l)`, `Y^{l+1} = cubic(Z^l)`.
pub fn forward(config: &NetworkConfig, filters: &FilterStack, x: &ModeField) -> Result<ForwardTrace> {
    forward_until(config, filters, x, config.probe_layers() - 1)
}

/// Forward pass stopped once activation `stop` is available.
pub fn forward_until(config: &NetworkConfig, filters: &FilterStack, x: &ModeField, stop: usize) -> Result<ForwardTrace> {
    check_run(config, x, stop)?;
    if filters.layers.len() < stop {
        return Err(Error::Shape(format!(
            "{} filter layers supplied, {} needed",
            filters.layers.len(),
            stop
        )));
    }
    run_blocks(config, x, stop, |l, y| {
        let layer = &filters.layers[l];
        check_layer(l, layer, config)?;
        apply_linear(layer, y)
    })
}

/// [`forward_until`] with the filters of `sample_filters(config, seed)`
/// drawn row by row as they are used, never stored. Bit-identical to the
/// materialised path.
pub fn forward_sampled(config: &NetworkConfig, seed: u64, x: &ModeField, stop: usize) -> Result<ForwardTrace> {
    check_run(config, x, stop)?;
    let bins = config.grid.len();
    run_blocks(config, x, stop, |l, y| {
        let (n_in, n_out) = (config.widths[l], config.widths[l + 1]);
        check_linear_shape(n_in, bins, y)?;
        let mut z = linear_output(y, config.filter_modes[l], n_out)?;
        let stride = y.window_len() * bins;
        z.data_mut().par_chunks_mut(stride).enumerate().for_each_init(
            || vec![Complex64::new(0.0, 0.0); n_in * bins],
            |row, (i, out)| {
                fill_filter_row(config, seed, l, i, row);
                accumulate_row(row, y, out);
            },
        );
        Ok(z)
    })
}

fn check_run(config: &NetworkConfig, x: &ModeField, stop: usize) -> Result<()> {
    config.validate()?;
    if stop >= config.probe_layers() {
        return Err(Error::LayerOutOfRange {
            layer: stop,
            available: config.probe_layers(),
        });
    }
    if x.channels() != config.widths[0] {
        return Err(Error::Shape(format!(
            "input has {} channels, widths[0] = {}",
            x.channels(),
            config.widths[0]
        )));
    }
    if x.grid() != &config.grid {
        return Err(Error::Shape("input radial grid differs from config grid".into()));
    }
    Ok(())
}

fn run_blocks(
    config: &NetworkConfig,
    x: &ModeField,
    stop: usize,
    linear: impl Fn(usize, &ModeField) -> Result<ModeField>,
) -> Result<ForwardTrace> {
    let mut trace = ForwardTrace {
        input: x.clone(),
        blocks: Vec::with_capacity(stop.min(config.depth)),
        readout: None,
    };
    for l in 0..stop {
        let z = linear(l, trace.output())?;
        if l < config.depth {
            let y = apply_cubic(&z, CubicMethod::Auto)?;
            trace.blocks.push(LayerRecord { pre: z, post: y });
        } else {
            trace.readout = Some(z);
        }
    }
    Ok(trace)
}

/// Polar-grid evaluation of the same network: every step is pointwise in
/// `(p, psi)`. The linear step multiplies by `conj(Omega(p)) exp(+i q psi)`
/// and the nonlinearity is `|Z|^2 Z`. Returns `Y^0` followed by every
/// pre-activation and activation in order.
pub fn polar_grid_trace(config: &NetworkConfig, filters: &FilterStack, x: &PolarGridField) -> Result<Vec<PolarGridField>> {
    config.validate()?;
    let need = min_angular_count(config.max_mode_radius());
    if x.angular_count() < need {
        return Err(Error::Bandlimit(format!(
            "network reaches mode {} and needs {need} angular samples, input has {}",
            config.max_mode_radius(),
            x.angular_count()
        )));
    }
    if x.channels() != config.widths[0] {
        return Err(Error::Shape(format!(
            "input has {} channels, widths[0] = {}",
            x.channels(),
            config.widths[0]
        )));
    }
    if filters.layers.len() < config.linear_layers() {
        return Err(Error::Shape("filter stack shallower than network".into()));
    }
    let a = x.angular_count();
    let bins = x.grid().len();
    let mut stages = vec![x.clone()];
    for (l, layer) in filters.layers.iter().take(config.linear_layers()).enumerate() {
        check_layer(l, layer, config)?;
        let y = stages.last().unwrap();
        let mut z = PolarGridField::zeros(x.grid().clone(), a, layer.n_out())?;
        let steer: Vec<Complex64> = (0..a)
            .map(|b| Complex64::from_polar(1.0, layer.mode() as f64 * z.angle(b)))
            .collect();
        for i in 0..layer.n_out() {
            for j in 0..layer.n_in() {
                let w = layer.entry(i, j);
                for bin in 0..bins {
                    let wc = w[bin].conj();
                    let src = y.ring(j, bin).to_vec();
                    for ((o, s), e) in z.ring_mut(i, bin).iter_mut().zip(&src).zip(&steer) {
                        *o += wc * e * s;
                    }
                }
            }
        }
        stages.push(z.clone());
        if l < config.depth {
            for v in z.data_mut() {
                *v = *v * v.norm_sqr();
            }
            stages.push(z);
        }
    }
    Ok(stages)
}

/// Final activation of [`polar_grid_trace`].
pub fn polar_grid_forward(config: &NetworkConfig, filters: &FilterStack, x: &PolarGridField) -> Result<PolarGridField> {
    Ok(polar_grid_trace(config, filters, x)?.pop().expect("trace holds the input"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{angular_decompose, angular_reconstruct, max_rel_deviation};
    use crate::scnn::sample_filters;
    use crate::scnn::test_support::config;

    #[test]
    fn depth_zero_returns_input() {
        let c = config(0, vec![1], vec![], 2);
        let x = c.input_field().unwrap();
        let t = forward(&c, &FilterStack { layers: vec![] }, &x).unwrap();
        assert!(t.blocks.is_empty());
        assert_eq!(t.output(), &x);
    }

    #[test]
    fn unit_filter_single_block() {
        let c = config(1, vec![1, 1], vec![0], 3);
        let x = c.input_field().unwrap();
        let f = FilterStack {
            layers: vec![FilterLayer::constant(0, 1, 1, 3, Complex64::new(1.0, 0.0))],
        };
        let t = forward(&c, &f, &x).unwrap();
        let y = t.activation(1).unwrap();
        assert_eq!((y.mode_lo(), y.mode_hi()), (0, 0));
        assert!(y.profile(0, 0).iter().all(|v| (*v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn polar_trace_matches_modes_at_every_stage() {
        let mut c = config(2, vec![2, 3, 2], vec![1, -1], 3);
        c.input.mode_lo = -1;
        c.input.mode_hi = 1;
        c.input.terms[0].mode = 1;
        c.input.terms.push(crate::fields::FieldTerm {
            channel: 1,
            mode: -1,
            amplitude: [0.3, -0.4],
            profile: crate::fields::RadialProfile::Gaussian { center: 1.0, width: 0.7 },
        });
        let x = c.input_field().unwrap();
        let f = sample_filters(&c, 77);
        let t = forward(&c, &f, &x).unwrap();
        let a = 2 * min_angular_count(c.max_mode_radius());
        let stages = polar_grid_trace(&c, &f, &angular_reconstruct(&x, a).unwrap()).unwrap();
        let modes = [&t.input, &t.blocks[0].pre, &t.blocks[0].post, &t.blocks[1].pre, &t.blocks[1].post];
        for (s, m) in stages.iter().zip(modes) {
            let d = angular_decompose(s, m.mode_lo(), m.mode_hi()).unwrap();
            assert!(max_rel_deviation(&d, &m.clone().with_rep_index(0)) < 1e-12);
        }
    }

    #[test]
    fn polar_forward_rejects_coarse_grid() {
        let c = config(1, vec![1, 1], vec![2], 2);
        let f = sample_filters(&c, 1);
        let x = PolarGridField::zeros(c.grid.clone(), 4, 1).unwrap();
        // mode reaches -2 after the shift
        assert!(matches!(polar_grid_forward(&c, &f, &x), Err(Error::Bandlimit(_))));
    }

    #[test]
    fn probe_past_the_end_is_an_error() {
        let c = config(1, vec![1, 2], vec![0], 2);
        let x = c.input_field().unwrap();
        let f = sample_filters(&c, 1);
        assert!(matches!(forward_until(&c, &f, &x, 2), Err(Error::LayerOutOfRange { .. })));
    }

    #[test]
    fn streamed_filters_match_materialised() {
        let mut c = config(2, vec![2, 5, 3], vec![1, -2], 3);
        c.final_linear = true;
        c.widths.push(4);
        c.filter_modes.push(1);
        let x = c.input_field().unwrap();
        let a = forward(&c, &sample_filters(&c, 17), &x).unwrap();
        let b = forward_sampled(&c, 17, &x, 3).unwrap();
        assert_eq!(a.output(), b.output());
        assert_eq!(a.blocks[1].pre, b.blocks[1].pre);
    }
}
