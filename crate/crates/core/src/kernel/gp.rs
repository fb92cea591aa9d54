use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};

use super::DiagonalKernel;
use crate::error::Result;
use crate::fields::ModeField;
use crate::rng::{stream, tag};

/// Draw a field from the limiting Gaussian process: at mode `s`, every
/// `(channel, bin)` is an independent circular complex Gaussian with
/// `E|.|^2 = K_s(p)`.
pub fn gp_sample(k: &DiagonalKernel, rep_index: i32, channels: usize, seed: u64) -> Result<ModeField> {
    let s = k.mode();
    let mut out = ModeField::zeros(rep_index, k.grid().clone(), channels, s, s)?;
    for c in 0..channels {
        let mut rng = stream(seed, &[tag::GP, c as u64]);
        for (v, kp) in out.profile_mut(c, s)?.iter_mut().zip(k.values()) {
            let sd = (0.5 * kp).sqrt();
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *v = Complex64::new(sd * re, sd * im);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{rotate_mode_field, RadialGrid};

    #[test]
    fn zero_kernel_gives_zero_field() {
        let k = DiagonalKernel::constant(RadialGrid::uniform(3, 1.0).unwrap(), 1, 0.0).unwrap();
        let f = gp_sample(&k, 0, 4, 1).unwrap();
        assert_eq!(f.max_abs(), 0.0);
        assert_eq!((f.mode_lo(), f.mode_hi()), (1, 1));
    }

    /// Channel average of `|Y|^2` against `K`, with the SE taken across channels.
    fn covariance_z_scores(f: &ModeField, k: &DiagonalKernel) -> Vec<f64> {
        let n = f.channels() as f64;
        (0..k.grid().len())
            .map(|a| {
                let xs: Vec<f64> = (0..f.channels()).map(|c| f.get(c, k.mode(), a).norm_sqr()).collect();
                let mean = xs.iter().sum::<f64>() / n;
                let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
                (mean - k.values()[a]).abs() / (var / n).sqrt()
            })
            .collect()
    }

    #[test]
    fn sample_covariance_matches_kernel() {
        let g = RadialGrid::uniform(4, 1.0).unwrap();
        let k = DiagonalKernel::new(g, -2, vec![0.5, 1.0, 3.0, 6.0]).unwrap();
        let f = gp_sample(&k, 1, 100_000, 42).unwrap();
        for z in covariance_z_scores(&f, &k) {
            assert!(z < 5.0, "{z}");
        }
        let rotated = rotate_mode_field(&f, 1.234);
        for z in covariance_z_scores(&rotated, &k) {
            assert!(z < 5.0, "{z}");
        }
    }
}
