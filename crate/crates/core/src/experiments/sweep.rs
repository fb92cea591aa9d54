use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{analytic_layer, diagonality_check, empirical_kernels, single_mode_check};
use crate::rng::{derive_seed, tag};
use crate::scnn::NetworkConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: NetworkConfig,
    /// Hidden multiplicities to sweep (applied to `n^1` onwards).
    pub widths: Vec<usize>,
    pub draws: usize,
    /// Replicate labels; replicate `s` draws from `derive_seed(base.seed, [TRIAL, s])`.
    pub seeds: Vec<u64>,
    /// Probe layer.
    pub layer: usize,
    /// Threshold, in standard errors, for the structural checkers.
    pub sigma_mult: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.widths.is_empty() || self.widths.contains(&0) {
            return Err(Error::config("experiment.sweep_widths", "need at least one positive width"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("experiment.seeds", "need at least one replicate seed"));
        }
        if self.draws == 0 {
            return Err(Error::config("experiment.draws", "must be at least 1"));
        }
        if self.layer >= self.base.probe_layers() {
            return Err(Error::config(
                "experiment.layer",
                format!("network has probe layers 0..={}", self.base.probe_layers() - 1),
            ));
        }
        if !(self.sigma_mult > 0.0) {
            return Err(Error::config("experiment.sigma_mult", "must be positive"));
        }
        Ok(())
    }
}

/// One CSV record; the field order is the column order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    #[serde(rename = "L")]
    pub layer: usize,
    pub width: usize,
    pub draws: usize,
    pub mode: i32,
    pub bin: usize,
    pub analytic: f64,
    pub empirical: f64,
    pub std_err: f64,
    /// `|empirical - analytic| / |analytic|`; empty when the analytic value is 0.
    pub rel_err: Option<f64>,
    pub seed: u64,
}

/// Structural checks of one probed layer in one (width, seed) cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellCheck {
    pub width: usize,
    pub seed: u64,
    pub layer: usize,
    pub diagonal: bool,
    pub max_off_ratio: f64,
    pub located_mode: Option<i32>,
    pub expected_mode: i32,
}

impl CellCheck {
    pub fn pass(&self) -> bool {
        self.diagonal && self.located_mode == Some(self.expected_mode)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WidthMedian {
    pub width: usize,
    pub median_rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub rows: Vec<ResultRow>,
    pub checks: Vec<CellCheck>,
    /// Median `rel_err` over all (seed, bin) rows of each width, in sweep order.
    pub medians: Vec<WidthMedian>,
}

impl SweepOutcome {
    pub fn structural_pass(&self) -> bool {
        self.checks.iter().all(CellCheck::pass)
    }

    pub fn medians_strictly_decreasing(&self) -> bool {
        self.medians.windows(2).all(|w| w[1].median_rel_err < w[0].median_rel_err)
    }

    pub fn median_for(&self, width: usize) -> Option<f64> {
        self.medians.iter().find(|m| m.width == width).map(|m| m.median_rel_err)
    }

    pub fn max_rel_err(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.rel_err).fold(0.0, f64::max)
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Empirical co-diagonal kernel of the probe layer for every (width, seed)
/// cell, against the analytic limit. Cells run in parallel; output is in
/// (width, seed, bin) order. Both structural checkers run on every probed
/// layer from 1 up to `spec.layer`.
pub fn converge_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let cells: Vec<(usize, u64)> = spec
        .widths
        .iter()
        .flat_map(|&w| spec.seeds.iter().map(move |&s| (w, s)))
        .collect();
    let probed: Vec<usize> = (1..=spec.layer).collect();
    let layers: Vec<usize> = if probed.is_empty() { vec![0] } else { probed.clone() };

    let results: Vec<(Vec<ResultRow>, Vec<CellCheck>)> = cells
        .par_iter()
        .map(|&(width, seed)| -> Result<_> {
            let config = spec.base.with_hidden_width(width);
            let x = config.input_field()?;
            let kernels = empirical_kernels(
                &config,
                &x,
                &layers,
                spec.draws,
                derive_seed(spec.base.seed, &[tag::TRIAL, seed]),
            )?;
            let mut checks = Vec::new();
            for (&l, k) in layers.iter().zip(&kernels) {
                if l == 0 {
                    continue;
                }
                let expected = analytic_layer(&config, l)?.mode();
                let diag = diagonality_check(k, spec.sigma_mult);
                checks.push(CellCheck {
                    width,
                    seed,
                    layer: l,
                    diagonal: diag.pass,
                    max_off_ratio: diag.max_ratio,
                    located_mode: single_mode_check(k, spec.sigma_mult).ok(),
                    expected_mode: expected,
                });
            }
            let analytic = analytic_layer(&config, spec.layer)?;
            let k = kernels.last().expect("probe layer kernel");
            let s = analytic.mode();
            let inside = k.modes().contains(&s);
            let rows = analytic
                .values()
                .iter()
                .enumerate()
                .map(|(a, &want)| {
                    let (got, se) = if inside {
                        (k.codiag(s, a), k.std_err(s, s, a, a))
                    } else {
                        (0.0, 0.0)
                    };
                    ResultRow {
                        layer: spec.layer,
                        width,
                        draws: spec.draws,
                        mode: s,
                        bin: a,
                        analytic: want,
                        empirical: got,
                        std_err: se,
                        rel_err: (want != 0.0).then(|| (got - want).abs() / want.abs()),
                        seed,
                    }
                })
                .collect();
            Ok((rows, checks))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for (r, c) in results {
        rows.extend(r);
        checks.extend(c);
    }
    let medians = spec
        .widths
        .iter()
        .map(|&width| WidthMedian {
            width,
            median_rel_err: median(rows.iter().filter(|r| r.width == width).filter_map(|r| r.rel_err).collect()),
        })
        .collect();
    Ok(SweepOutcome { rows, checks, medians })
}

/// CSV with header `L,width,draws,mode,bin,analytic,empirical,std_err,rel_err,seed`.
pub fn write_rows_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(["L", "width", "draws", "mode", "bin", "analytic", "empirical", "std_err", "rel_err", "seed"])
            .map_err(|e| Error::Serde(e.to_string()))?;
    }
    for r in rows {
        w.serialize(r).map_err(|e| Error::Serde(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::empirical_kernel;
    use crate::scnn::test_support::config;

    fn spec(base: NetworkConfig, widths: Vec<usize>, draws: usize, seeds: Vec<u64>, layer: usize) -> SweepSpec {
        SweepSpec {
            base,
            widths,
            draws,
            seeds,
            layer,
            sigma_mult: 5.0,
        }
    }

    #[test]
    fn degenerate_sweep_is_one_draw() {
        let base = config(1, vec![1, 1], vec![0], 3);
        let out = converge_sweep(&spec(base.clone(), vec![1], 1, vec![4], 1)).unwrap();
        assert_eq!(out.rows.len(), 3);
        let k = empirical_kernel(&base, &base.input_field().unwrap(), 1, 1, derive_seed(base.seed, &[tag::TRIAL, 4]))
            .unwrap();
        for r in &out.rows {
            assert_eq!(r.empirical, k.codiag(0, r.bin));
            assert_eq!(r.analytic, 6.0);
        }
    }

    #[test]
    fn csv_header_and_order() {
        let base = config(1, vec![1, 2], vec![0], 2);
        let out = converge_sweep(&spec(base, vec![2, 3], 4, vec![1, 2], 1)).unwrap();
        let mut buf = Vec::new();
        write_rows_csv(&out.rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "L,width,draws,mode,bin,analytic,empirical,std_err,rel_err,seed");
        assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);
        let order: Vec<(usize, u64, usize)> = out.rows.iter().map(|r| (r.width, r.seed, r.bin)).collect();
        let mut sorted = order.clone();
        sorted.sort();
        assert_eq!(order, sorted);
        let mut again = Vec::new();
        write_rows_csv(&converge_sweep(&spec(config(1, vec![1, 2], vec![0], 2), vec![2, 3], 4, vec![1, 2], 1)).unwrap().rows, &mut again)
            .unwrap();
        assert_eq!(text.as_bytes(), &again[..]);
    }

    #[test]
    fn bad_spec_names_key() {
        let base = config(1, vec![1, 2], vec![0], 2);
        let msg = converge_sweep(&spec(base, vec![], 1, vec![1], 1)).unwrap_err().to_string();
        assert!(msg.contains("sweep_widths"), "{msg}");
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
