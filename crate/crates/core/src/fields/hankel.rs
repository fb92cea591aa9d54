//! Discrete Hankel transform of integer order.
//!
//! With `j_k` the positive zeros of `J_|m|`, `N` zeros and space limit `R`,
//! the sample points are `r_k = j_k R / j_N` and `rho_l = j_l / R` for
//! `k, l = 1..N-1`. The forward matrix discretises
//! `F(rho) = int_0^inf f(r) J_m(rho r) r dr` (no `2 pi` factor, so the
//! continuous transform is its own inverse). The discrete inverse is the exact
//! matrix inverse of the forward map rather than the forward matrix reused.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::RadialGrid;
use crate::error::{Error, Result};
use crate::special::{bessel_j, bessel_j_zeros};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HankelDirection {
    Forward,
    Inverse,
}

#[derive(Clone, Debug)]
pub struct HankelPlan {
    order: i32,
    r_max: f64,
    zeros: Vec<f64>,
    forward: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl HankelPlan {
    /// Plan with `points` samples in each domain (uses `points + 1` zeros).
    pub fn new(order: i32, points: usize, r_max: f64) -> Result<Self> {
        if points == 0 || !(r_max > 0.0) {
            return Err(Error::Invalid("Hankel plan needs points >= 1 and r_max > 0".into()));
        }
        let abs_m = order.unsigned_abs();
        let zeros = bessel_j_zeros(abs_m, points + 1);
        let j_n = zeros[points];
        let band = j_n / r_max;
        let sign = if order < 0 && abs_m % 2 == 1 { -1.0 } else { 1.0 };
        let norm: Vec<f64> = zeros[..points]
            .iter()
            .map(|&z| {
                let j = bessel_j(abs_m as i32 + 1, z);
                2.0 / (band * band * j * j)
            })
            .collect();
        let forward = DMatrix::from_fn(points, points, |l, k| {
            sign * norm[k] * bessel_j(abs_m as i32, zeros[l] * zeros[k] / j_n)
        });
        let inverse = forward
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Invalid("singular Hankel matrix".into()))?;
        Ok(Self {
            order,
            r_max,
            zeros,
            forward,
            inverse,
        })
    }

    pub fn order(&self) -> i32 {
        self.order
    }

    pub fn points(&self) -> usize {
        self.zeros.len() - 1
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Frequency cut-off `j_N / R`.
    pub fn band_limit(&self) -> f64 {
        self.zeros[self.points()] / self.r_max
    }

    pub fn space_grid(&self) -> RadialGrid {
        let j_n = self.zeros[self.points()];
        RadialGrid::new(self.zeros[..self.points()].iter().map(|z| z * self.r_max / j_n).collect())
            .expect("Bessel zeros are increasing")
    }

    pub fn frequency_grid(&self) -> RadialGrid {
        RadialGrid::new(self.zeros[..self.points()].iter().map(|z| z / self.r_max).collect())
            .expect("Bessel zeros are increasing")
    }

    pub fn apply(&self, profile: &[Complex64], direction: HankelDirection) -> Result<Vec<Complex64>> {
        if profile.len() != self.points() {
            return Err(Error::Shape(format!(
                "profile has {} samples, plan has {}",
                profile.len(),
                self.points()
            )));
        }
        let mat = match direction {
            HankelDirection::Forward => &self.forward,
            HankelDirection::Inverse => &self.inverse,
        };
        Ok((0..self.points())
            .map(|row| {
                profile
                    .iter()
                    .enumerate()
                    .map(|(col, v)| v * mat[(row, col)])
                    .sum()
            })
            .collect())
    }

    /// Band-limited (Fourier-Bessel series) interpolation of a space-domain
    /// profile at arbitrary radii `0 <= r <= R`.
    pub fn interpolate(&self, profile: &[Complex64], radii: &[f64]) -> Result<Vec<Complex64>> {
        let spectrum = self.apply(profile, HankelDirection::Forward)?;
        let abs_m = self.order.unsigned_abs() as i32;
        let r2 = self.r_max * self.r_max;
        let coeffs: Vec<Complex64> = spectrum
            .iter()
            .zip(&self.zeros)
            .map(|(f, &z)| {
                let j = bessel_j(abs_m + 1, z);
                f * (2.0 / (r2 * j * j))
            })
            .collect();
        Ok(radii
            .iter()
            .map(|&r| {
                coeffs
                    .iter()
                    .zip(&self.zeros)
                    .map(|(c, &z)| c * bessel_j(self.order, z * r / self.r_max))
                    .sum()
            })
            .collect())
    }
}

/// Order-`m` transform of `profile` sampled on `grid`.
///
/// `grid` must be the space grid (forward) or frequency grid (inverse) of
/// some plan of order `m`; the plan's `R` is recovered from the first point.
pub fn hankel_transform_mode(
    profile: &[Complex64],
    m: i32,
    direction: HankelDirection,
    grid: &RadialGrid,
) -> Result<Vec<Complex64>> {
    let points = grid.len();
    if profile.len() != points {
        return Err(Error::Shape(format!(
            "profile has {} samples, grid has {points}",
            profile.len()
        )));
    }
    let zeros = bessel_j_zeros(m.unsigned_abs(), points + 1);
    let j_n = zeros[points];
    let p = grid.values();
    let (r_max, expected): (f64, Vec<f64>) = match direction {
        HankelDirection::Forward => {
            let r_max = p[0] * j_n / zeros[0];
            (r_max, zeros[..points].iter().map(|z| z * r_max / j_n).collect())
        }
        HankelDirection::Inverse => {
            let r_max = zeros[0] / p[0];
            (r_max, zeros[..points].iter().map(|z| z / r_max).collect())
        }
    };
    for (a, (&got, want)) in p.iter().zip(&expected).enumerate() {
        if (got - want).abs() > 1e-9 * want.abs() {
            return Err(Error::GridMismatch(format!(
                "point {a} is {got}, order-{m} Hankel grid expects {want}"
            )));
        }
    }
    HankelPlan::new(m, points, r_max)?.apply(profile, direction)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn zero_profile_maps_to_zero() {
        let plan = HankelPlan::new(2, 16, 5.0).unwrap();
        let out = plan.apply(&vec![c(0.0); 16], HankelDirection::Forward).unwrap();
        assert!(out.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let g = RadialGrid::uniform(8, 3.0).unwrap();
        let err = hankel_transform_mode(&vec![c(1.0); 8], 0, HankelDirection::Forward, &g);
        assert!(matches!(err, Err(Error::GridMismatch(_))));
        let plan = HankelPlan::new(1, 8, 3.0).unwrap();
        let ok = hankel_transform_mode(&vec![c(1.0); 8], 1, HankelDirection::Forward, &plan.space_grid());
        assert!(ok.is_ok());
        let wrong_order = hankel_transform_mode(&vec![c(1.0); 8], 0, HankelDirection::Forward, &plan.space_grid());
        assert!(matches!(wrong_order, Err(Error::GridMismatch(_))));
        let wrong_len = plan.apply(&[c(1.0)], HankelDirection::Forward);
        assert!(matches!(wrong_len, Err(Error::Shape(_))));
    }

    #[test]
    fn negative_order_flips_sign_for_odd_m() {
        let pos = HankelPlan::new(3, 10, 4.0).unwrap();
        let neg = HankelPlan::new(-3, 10, 4.0).unwrap();
        let f: Vec<Complex64> = (0..10).map(|i| c((i as f64 * 0.3).sin())).collect();
        let a = pos.apply(&f, HankelDirection::Forward).unwrap();
        let b = neg.apply(&f, HankelDirection::Forward).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x + y).norm() < 1e-14);
        }
    }

    #[test]
    fn gaussian_interpolates_off_grid() {
        let plan = HankelPlan::new(0, 64, 10.0).unwrap();
        let f: Vec<Complex64> = plan
            .space_grid()
            .values()
            .iter()
            .map(|r| c((-r * r / 2.0).exp()))
            .collect();
        let radii = [0.0, 0.37, 1.1, 2.5, 4.2];
        let got = plan.interpolate(&f, &radii).unwrap();
        for (r, v) in radii.iter().zip(got) {
            assert!((v.re - (-r * r / 2.0).exp()).abs() < 1e-6, "r={r}: {v}");
        }
    }
}
