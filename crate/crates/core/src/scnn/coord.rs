//! Coordinate-space steerable filters between 2D rotation irreps.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::fields::RadialProfile;
use crate::rng::{stream, tag};

pub type Mat2 = [[f64; 2]; 2];

fn rot(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    [[c, -s], [s, c]]
}

fn mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// `scale * R(r) * rotation(freq * phi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoordTerm {
    pub profile: RadialProfile,
    pub scale: f64,
    pub freq: i32,
}

/// Sum of single-frequency terms; a steerable filter has exactly one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoordFilter {
    pub terms: Vec<CoordTerm>,
}

impl CoordFilter {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    /// Angular frequency when the filter has a single one.
    pub fn freq(&self) -> Option<i32> {
        match self.terms.as_slice() {
            [t] => Some(t.freq),
            _ => None,
        }
    }

    /// Superpose another term (generally breaks steerability).
    pub fn plus(mut self, term: CoordTerm) -> Self {
        self.terms.push(term);
        self
    }
}

/// Filter between irreps of frequencies `n` (in) and `m` (out): a rotation
/// block at angle `(m - n) phi` scaled by the radial profile.
pub fn build_coord_filter(profile: RadialProfile, scale: f64, m: i32, n: i32) -> CoordFilter {
    CoordFilter {
        terms: vec![CoordTerm {
            profile,
            scale,
            freq: m - n,
        }],
    }
}

/// 2x2 real matrix at `r_vec`; the origin uses `phi = 0`.
pub fn eval_coord_filter(fl: &CoordFilter, r_vec: [f64; 2]) -> Mat2 {
    let r = r_vec[0].hypot(r_vec[1]);
    let phi = if r == 0.0 { 0.0 } else { r_vec[1].atan2(r_vec[0]) };
    let mut out = [[0.0; 2]; 2];
    for t in &fl.terms {
        let amp = t.scale * t.profile.eval(r);
        let block = rot(t.freq as f64 * phi);
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += amp * block[i][j];
            }
        }
    }
    out
}

/// Largest Frobenius deviation of `w(g r) = rho_out(g) w(r) rho_in(g^-1)`
/// over `trials` random rotations `g` and points `r` with `|r| <= 3`.
pub fn check_kernel_constraint(fl: &CoordFilter, rho_in_freq: i32, rho_out_freq: i32, trials: usize, seed: u64) -> f64 {
    let mut rng = stream(seed, &[tag::TRIAL]);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let theta = rng.random::<f64>() * TAU;
        let r = 3.0 * rng.random::<f64>();
        let phi = rng.random::<f64>() * TAU;
        let p = [r * phi.cos(), r * phi.sin()];
        let g = rot(theta);
        let gp = [g[0][0] * p[0] + g[0][1] * p[1], g[1][0] * p[0] + g[1][1] * p[1]];
        let lhs = eval_coord_filter(fl, gp);
        let rhs = mul(
            &mul(&rot(rho_out_freq as f64 * theta), &eval_coord_filter(fl, p)),
            &rot(-(rho_in_freq as f64) * theta),
        );
        let dev = (0..2)
            .flat_map(|i| (0..2).map(move |j| (i, j)))
            .map(|(i, j)| (lhs[i][j] - rhs[i][j]).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(dev);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn close(a: &Mat2, b: &Mat2, tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a[i][j] - b[i][j]).abs() <= tol))
    }

    #[test]
    fn equal_frequencies_give_scaled_identity() {
        let f = build_coord_filter(RadialProfile::Gaussian { center: 0.0, width: 1.0 }, 2.0, 3, 3);
        assert_eq!(f.freq(), Some(0));
        let v = eval_coord_filter(&f, [0.3, -1.1]);
        let r = 0.3f64.hypot(1.1);
        let amp = 2.0 * (-0.5 * r * r).exp();
        assert!(close(&v, &[[amp, 0.0], [0.0, amp]], 1e-15));
    }

    #[test]
    fn quarter_turn_block() {
        let f = build_coord_filter(RadialProfile::Constant, 1.0, 1, 0);
        let v = eval_coord_filter(&f, [0.0, 2.0]);
        assert!(close(&v, &[[0.0, -1.0], [1.0, 0.0]], 1e-15));
        let f2 = build_coord_filter(RadialProfile::Constant, 1.5, 2, 0);
        let v2 = eval_coord_filter(&f2, [1.0, 1.0]);
        assert!(close(&v2, &[[0.0, -1.5], [1.5, 0.0]], 1e-15));
    }

    #[test]
    fn positive_axis_and_determinant() {
        let prof = RadialProfile::PolyDecay { scale: 1.0, power: 2.0 };
        let f = build_coord_filter(prof, 1.0, 4, 1);
        let v = eval_coord_filter(&f, [2.0, 0.0]);
        let amp = prof.eval(2.0);
        assert!(close(&v, &[[amp, 0.0], [0.0, amp]], 1e-15));
        let w = eval_coord_filter(&f, [-0.7, 1.9]);
        let det = w[0][0] * w[1][1] - w[0][1] * w[1][0];
        let rr = prof.eval(0.7f64.hypot(1.9));
        assert!((det - rr * rr).abs() < 1e-15);
        let origin = eval_coord_filter(&f, [0.0, 0.0]);
        assert!(close(&origin, &[[1.0, 0.0], [0.0, 1.0]], 0.0));
    }

    #[test]
    fn matrix_action_equals_complex_multiplication() {
        let mut rng = stream(5, &[]);
        let f = build_coord_filter(RadialProfile::Gaussian { center: 0.5, width: 0.8 }, 1.3, 2, -1);
        for _ in 0..100 {
            let p = [rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0];
            let y = [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5];
            let w = eval_coord_filter(&f, p);
            let mv = [w[0][0] * y[0] + w[0][1] * y[1], w[1][0] * y[0] + w[1][1] * y[1]];
            let (r, phi) = (p[0].hypot(p[1]), p[1].atan2(p[0]));
            let z = 1.3 * f.terms[0].profile.eval(r) * Complex64::from_polar(1.0, 3.0 * phi) * Complex64::new(y[0], y[1]);
            assert!((mv[0] - z.re).abs() < 1e-14 && (mv[1] - z.im).abs() < 1e-14);
        }
    }

    #[test]
    fn constraint_holds_for_matching_frequencies() {
        let f = build_coord_filter(RadialProfile::Gaussian { center: 1.0, width: 0.5 }, 1.0, 3, 1);
        assert!(check_kernel_constraint(&f, 1, 3, 100, 0) < 1e-12);
        assert!(check_kernel_constraint(&f, 0, 1, 100, 0) > 1e-3);
    }

    #[test]
    fn two_frequency_filter_violates_constraint() {
        let f = build_coord_filter(RadialProfile::Constant, 1.0, 1, 0).plus(CoordTerm {
            profile: RadialProfile::Constant,
            scale: 1.0,
            freq: 2,
        });
        assert_eq!(f.freq(), None);
        let dev = check_kernel_constraint(&f, 0, 1, 100, 3);
        assert!(dev > 0.5, "{dev}");
        assert_eq!(check_kernel_constraint(&CoordFilter::zero(), 0, 1, 100, 3), 0.0);
    }
}
