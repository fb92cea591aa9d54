//! Infinite-multiplicity kernel recursion for single-mode diagonal kernels.
//!
//! Conditioned on the previous layer, a pre-activation is a circular complex
//! Gaussian with `E|Z|^2 = gamma = (sigma_w^2 / 2) K`, and the cubic
//! activation has second moment `E|Z|^6 = 3! gamma^3`. Each block therefore
//! maps `K_s -> 6 (sigma_w^2 / 2)^3 K_s^3` and moves the mode from `s` to
//! `s - q`. After `L` blocks the prefactor exponent is `1 + 3 + ... + 3^(L-1)
//! = (3^L - 1) / 2` and the input mode is `s + q_0 + ... + q_{L-1}`.

use super::{DiagonalKernel, LayerGaussianCov};
use crate::error::{Error, Result};
use crate::fields::ModeField;
use crate::scnn::NetworkConfig;

const CUBIC_MOMENT: f64 = 6.0;

/// One (linear, cubic) block.
pub fn analytic_step(k_prev: &DiagonalKernel, sigma_w_sq: f64, q: i32) -> DiagonalKernel {
    let cov = LayerGaussianCov::from_kernel(k_prev, sigma_w_sq, q);
    let values = cov.gamma.iter().map(|g| CUBIC_MOMENT * g * g * g).collect();
    DiagonalKernel::new(cov.grid, cov.mode, values).expect("non-negative values")
}

/// Trailing linear layer without nonlinearity: `(sigma_w^2 / 2) K`, mode `s - q`.
pub fn readout_step(k: &DiagonalKernel, sigma_w_sq: f64, q: i32) -> DiagonalKernel {
    let cov = LayerGaussianCov::from_kernel(k, sigma_w_sq, q);
    DiagonalKernel::new(cov.grid, cov.mode, cov.gamma).expect("non-negative values")
}

fn check_len(depth: usize, q_list: &[i32], final_linear: bool) -> Result<()> {
    let want = depth + usize::from(final_linear);
    if q_list.len() != want {
        return Err(Error::Shape(format!(
            "{} filter modes given, depth {depth}{} needs {want}",
            q_list.len(),
            if final_linear { " with readout" } else { "" }
        )));
    }
    Ok(())
}

/// Closed form after `depth` blocks (and the readout, if requested).
pub fn analytic_closed(
    k0: &DiagonalKernel,
    depth: usize,
    q_list: &[i32],
    sigma_w_sq: f64,
    final_linear: bool,
) -> Result<DiagonalKernel> {
    check_len(depth, q_list, final_linear)?;
    let power = 3i32.pow(depth as u32);
    let prefactor = (CUBIC_MOMENT * (0.5 * sigma_w_sq).powi(3)).powi((power - 1) / 2);
    let shift: i32 = q_list[..depth].iter().sum();
    let values = k0.values().iter().map(|v| prefactor * v.powi(power)).collect();
    let k = DiagonalKernel::new(k0.grid().clone(), k0.mode() - shift, values)?;
    Ok(if final_linear {
        readout_step(&k, sigma_w_sq, q_list[depth])
    } else {
        k
    })
}

/// The same kernel by composing [`analytic_step`] `depth` times.
pub fn analytic_iterated(
    k0: &DiagonalKernel,
    depth: usize,
    q_list: &[i32],
    sigma_w_sq: f64,
    final_linear: bool,
) -> Result<DiagonalKernel> {
    check_len(depth, q_list, final_linear)?;
    let k = q_list[..depth]
        .iter()
        .fold(k0.clone(), |k, &q| analytic_step(&k, sigma_w_sq, q));
    Ok(if final_linear {
        readout_step(&k, sigma_w_sq, q_list[depth])
    } else {
        k
    })
}

/// Co-diagonal kernel `K^0_s(p) = (1/n) sum_i |X_{i,s}(p)|^2` of a
/// single-mode input.
pub fn input_kernel(x: &ModeField) -> Result<DiagonalKernel> {
    let live: Vec<i32> = x
        .modes()
        .filter(|&n| (0..x.channels()).any(|c| x.profile(c, n).iter().any(|v| v.norm_sqr() > 0.0)))
        .collect();
    let mode = match live.as_slice() {
        [] => x.mode_lo(),
        [s] => *s,
        _ => {
            return Err(Error::Invalid(format!(
                "analytic kernel needs a single-mode input, found modes {live:?}"
            )))
        }
    };
    let n = x.channels() as f64;
    let values = (0..x.grid().len())
        .map(|a| (0..x.channels()).map(|c| x.get(c, mode, a).norm_sqr()).sum::<f64>() / n)
        .collect();
    DiagonalKernel::new(x.grid().clone(), mode, values)
}

/// Analytic kernel of probe layer `layer` (`0..=L`, or `L + 1` for the readout).
pub fn analytic_layer(config: &NetworkConfig, layer: usize) -> Result<DiagonalKernel> {
    config.validate()?;
    if layer >= config.probe_layers() {
        return Err(Error::LayerOutOfRange {
            layer,
            available: config.probe_layers(),
        });
    }
    let k0 = input_kernel(&config.input_field()?)?;
    let blocks = layer.min(config.depth);
    let readout = layer > config.depth;
    analytic_iterated(
        &k0,
        blocks,
        &config.filter_modes[..blocks + usize::from(readout)],
        config.sigma_w_sq,
        readout,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::RadialGrid;

    fn k(value: f64, mode: i32) -> DiagonalKernel {
        DiagonalKernel::constant(RadialGrid::uniform(3, 1.0).unwrap(), mode, value).unwrap()
    }

    #[test]
    fn step_examples() {
        assert!(analytic_step(&k(0.0, 0), 2.0, 0).values().iter().all(|v| *v == 0.0));
        let one = analytic_step(&k(1.0, 0), 2.0, 0);
        assert_eq!(one.mode(), 0);
        assert!(one.values().iter().all(|v| *v == 6.0));
        let half = analytic_step(&k(0.5, 3), 2.0, 1);
        assert_eq!(half.mode(), 2);
        assert!(half.values().iter().all(|v| (*v - 0.75).abs() < 1e-15));
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(analytic_closed(&k(0.7, 1), 0, &[], 2.0, false).unwrap(), k(0.7, 1));
        let two = analytic_closed(&k(1.0, 0), 2, &[0, 0], 2.0, false).unwrap();
        assert!(two.values().iter().all(|v| *v == 1296.0));
        let half = analytic_closed(&k(0.5, 0), 2, &[0, 0], 2.0, false).unwrap();
        assert!(half.values().iter().all(|v| (*v - 2.53125).abs() < 1e-12));
    }

    #[test]
    fn mode_moves_by_minus_sum_of_q() {
        let out = analytic_closed(&k(1.0, 4), 3, &[1, -2, 3], 1.5, false).unwrap();
        assert_eq!(out.mode(), 2);
        let ro = analytic_closed(&k(1.0, 4), 2, &[1, -2, 5], 1.5, true).unwrap();
        assert_eq!(ro.mode(), 0);
        let it = analytic_iterated(&k(1.0, 4), 2, &[1, -2, 5], 1.5, true).unwrap();
        assert_eq!(ro, it);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(analytic_closed(&k(1.0, 0), 2, &[0], 2.0, false).is_err());
        assert!(analytic_closed(&k(1.0, 0), 1, &[0], 2.0, true).is_err());
    }

    #[test]
    fn input_kernel_rejects_two_modes() {
        let g = RadialGrid::uniform(2, 1.0).unwrap();
        let mut x = ModeField::zeros(0, g, 2, -1, 1).unwrap();
        x.profile_mut(0, 1).unwrap()[0] = num_complex::Complex64::new(2.0, 0.0);
        let kk = input_kernel(&x).unwrap();
        assert_eq!(kk.mode(), 1);
        assert_eq!(kk.values(), &[2.0, 0.0]);
        x.profile_mut(1, -1).unwrap()[1] = num_complex::Complex64::new(1.0, 0.0);
        assert!(input_kernel(&x).is_err());
    }
}
