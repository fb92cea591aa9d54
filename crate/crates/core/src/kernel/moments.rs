use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::rng::{stream, tag};

const CHUNK: usize = 1 << 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimate {
    pub estimate: f64,
    pub std_err: f64,
    /// `k! gamma^k`
    pub reference: f64,
}

impl MomentEstimate {
    /// `|estimate - reference| / std_err`.
    pub fn z_score(&self) -> f64 {
        let d = (self.estimate - self.reference).abs();
        if self.std_err > 0.0 {
            d / self.std_err
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Monte Carlo `E|Z|^(2k)` for a circular complex Gaussian with `E|Z|^2 = gamma`.
pub fn moment_oracle(gamma: f64, k: u32, draws: usize, seed: u64) -> MomentEstimate {
    assert!(gamma >= 0.0, "gamma must be non-negative");
    let reference = (1..=k).map(f64::from).product::<f64>() * gamma.powi(k as i32);
    if gamma == 0.0 || draws == 0 {
        return MomentEstimate {
            estimate: 0.0,
            std_err: 0.0,
            reference,
        };
    }
    let normal = Normal::new(0.0, (0.5 * gamma).sqrt()).expect("positive sd");
    let chunks = draws.div_ceil(CHUNK);
    let partial: Vec<(f64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, &[tag::MOMENT, c as u64]);
            let len = CHUNK.min(draws - c * CHUNK);
            let (mut mean, mut m2) = (0.0, 0.0);
            for i in 0..len {
                let re: f64 = normal.sample(&mut rng);
                let im: f64 = normal.sample(&mut rng);
                let x = (re * re + im * im).powi(k as i32);
                let d = x - mean;
                mean += d / (i + 1) as f64;
                m2 += d * (x - mean);
            }
            (len as f64, mean, m2)
        })
        .collect();
    let (n, mean, m2) = partial.into_iter().fold((0.0, 0.0, 0.0), |(na, ma, sa), (nb, mb, sb)| {
        let n = na + nb;
        let d = mb - ma;
        (n, ma + d * nb / n, sa + sb + d * d * na * nb / n)
    });
    let std_err = if n > 1.0 { (m2 / (n - 1.0) / n).sqrt() } else { 0.0 };
    MomentEstimate {
        estimate: mean,
        std_err,
        reference,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_moment_is_gamma() {
        let m = moment_oracle(1.7, 1, 200_000, 3);
        assert_eq!(m.reference, 1.7);
        assert!(m.z_score() < 5.0, "{m:?}");
    }

    #[test]
    fn fourth_moment_of_gamma_two() {
        let m = moment_oracle(2.0, 2, 1_000_000, 8);
        assert_eq!(m.reference, 8.0);
        assert!(m.z_score() < 5.0, "{m:?}");
    }

    #[test]
    fn deterministic() {
        assert_eq!(moment_oracle(1.0, 3, 70_000, 1), moment_oracle(1.0, 3, 70_000, 1));
    }
}
