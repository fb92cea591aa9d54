use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::{KernelMatrix, Provenance};
use crate::error::{Error, Result};
use crate::fields::{ModeField, RadialGrid};
use crate::rng::{derive_seed, tag};
use crate::scnn::{forward_sampled, NetworkConfig};

/// Draws evaluated concurrently before being folded in draw order.
const BLOCK: usize = 16;

/// Hex SHA-256 of the config's canonical JSON.
pub fn config_digest(config: &NetworkConfig) -> String {
    let json = serde_json::to_vec(config).expect("config serialises");
    hex::encode(Sha256::digest(&json))
}

/// One draw's channel average `(1/n) sum_i Y_{i,u} conj(Y_{i,v})` over the
/// flattened `(mode, bin)` index, upper triangle only.
fn channel_average(y: &ModeField) -> Vec<Complex64> {
    let d = y.window_len() * y.grid().len();
    let mut out = vec![Complex64::new(0.0, 0.0); d * (d + 1) / 2];
    for c in 0..y.channels() {
        let v = y.channel(c);
        let mut k = 0;
        for u in 0..d {
            out[k] += Complex64::new(v[u].norm_sqr(), 0.0);
            k += 1;
            for w in v.iter().skip(u + 1) {
                out[k] += v[u] * w.conj();
                k += 1;
            }
        }
    }
    let inv = 1.0 / y.channels() as f64;
    out.iter_mut().for_each(|z| *z *= inv);
    out
}

type Shape = (RadialGrid, i32, i32);

struct Accumulator {
    count: f64,
    mean: Vec<Complex64>,
    m2: Vec<f64>,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![Complex64::new(0.0, 0.0); len],
            m2: vec![0.0; len],
        }
    }

    fn push(&mut self, x: &[Complex64]) {
        self.count += 1.0;
        for ((m, s), v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let d = v - *m;
            *m += d / self.count;
            let e = v - *m;
            *s += d.re * e.re + d.im * e.im;
        }
    }

    fn finish(self, shape: Shape) -> Result<KernelMatrix> {
        let (grid, lo, hi) = shape;
        let p = grid.len();
        let w = (hi - lo + 1) as usize;
        let d = w * p;
        let n = self.count;
        let se = |s: f64| if n > 1.0 { (s / (n - 1.0) / n).sqrt() } else { 0.0 };
        let mut entries = vec![Complex64::new(0.0, 0.0); d * d];
        let mut errs = vec![0.0; d * d];
        // flattened (mode, bin) u = ni * p + a  ->  [ni][nj][a][b]
        let at = |u: usize, v: usize| (((u / p) * w + v / p) * p + u % p) * p + v % p;
        let mut k = 0;
        for u in 0..d {
            for v in u..d {
                entries[at(u, v)] = self.mean[k];
                entries[at(v, u)] = self.mean[k].conj();
                errs[at(u, v)] = se(self.m2[k]);
                errs[at(v, u)] = se(self.m2[k]);
                k += 1;
            }
        }
        KernelMatrix::from_parts(grid, lo, hi, entries, errs)
    }
}

/// Monte Carlo kernels of several probe layers from the same draws.
///
/// Draw `d` samples its filters from `derive_seed(seed, [DRAW, d])`. Each
/// kernel is the mean over draws of the channel average; standard errors
/// come from the across-draw variance only.
pub fn empirical_kernels(
    config: &NetworkConfig,
    x: &ModeField,
    layers: &[usize],
    draws: usize,
    seed: u64,
) -> Result<Vec<KernelMatrix>> {
    config.validate()?;
    if draws == 0 {
        return Err(Error::Invalid("draws must be at least 1".into()));
    }
    let Some(&stop) = layers.iter().max() else {
        return Ok(Vec::new());
    };
    if stop >= config.probe_layers() {
        return Err(Error::LayerOutOfRange {
            layer: stop,
            available: config.probe_layers(),
        });
    }
    let one = |d: usize| -> Result<Vec<(Vec<Complex64>, Shape)>> {
        let trace = forward_sampled(config, derive_seed(seed, &[tag::DRAW, d as u64]), x, stop)?;
        Ok(layers
            .iter()
            .map(|&l| {
                let y = trace.activation(l).expect("layer within trace");
                (channel_average(y), (y.grid().clone(), y.mode_lo(), y.mode_hi()))
            })
            .collect())
    };

    let mut accs: Option<Vec<(Accumulator, Shape)>> = None;
    for start in (0..draws).step_by(BLOCK) {
        let block: Vec<_> = (start..draws.min(start + BLOCK))
            .into_par_iter()
            .map(one)
            .collect::<Result<_>>()?;
        for per_layer in block {
            let accs = accs.get_or_insert_with(|| {
                per_layer
                    .iter()
                    .map(|(k, y)| (Accumulator::new(k.len()), y.clone()))
                    .collect()
            });
            for ((acc, _), (k, _)) in accs.iter_mut().zip(&per_layer) {
                acc.push(k);
            }
        }
    }
    let provenance = Provenance {
        draws,
        seed,
        config_digest: config_digest(config),
    };
    accs.expect("at least one draw")
        .into_iter()
        .map(|(acc, shape)| Ok(acc.finish(shape)?.with_provenance(provenance.clone())))
        .collect()
}

/// Monte Carlo kernel of probe layer `layer`.
pub fn empirical_kernel(
    config: &NetworkConfig,
    x: &ModeField,
    layer: usize,
    draws: usize,
    seed: u64,
) -> Result<KernelMatrix> {
    Ok(empirical_kernels(config, x, &[layer], draws, seed)?.remove(0))
}
