use std::f64::consts::PI;

use num_complex::Complex64;

use super::{ModeField, PolarGridField};
use crate::error::{Error, Result};
use crate::special::bessel_tail_energy;

/// Smallest angular sample count that represents modes up to `|n| = radius`.
pub fn min_angular_count(radius: i32) -> usize {
    2 * radius.unsigned_abs() as usize + 2
}

/// `exp(2 pi i j / A)` for `j = 0..A`; index with `(m * b) mod A`.
fn unit_roots(a: usize) -> Vec<Complex64> {
    (0..a)
        .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / a as f64))
        .collect()
}

#[inline]
fn root_index(m: i32, b: usize, a: usize) -> usize {
    (m as i64 * b as i64).rem_euclid(a as i64) as usize
}

/// Angular analysis: `F_m(p) = (1/A) sum_b f(p, psi_b) exp(+i m psi_b)`.
///
/// The result has rep index 0; set it with [`ModeField::with_rep_index`].
pub fn angular_decompose(f: &PolarGridField, mode_lo: i32, mode_hi: i32) -> Result<ModeField> {
    if mode_lo > mode_hi {
        return Err(Error::Invalid(format!("empty mode window [{mode_lo}, {mode_hi}]")));
    }
    let a = f.angular_count();
    let width = (mode_hi - mode_lo + 1) as usize;
    if width > a {
        return Err(Error::Bandlimit(format!(
            "window [{mode_lo}, {mode_hi}] has {width} modes but only {a} angular samples"
        )));
    }
    let roots = unit_roots(a);
    let scale = 1.0 / a as f64;
    let mut out = ModeField::zeros(0, f.grid().clone(), f.channels(), mode_lo, mode_hi)?;
    for c in 0..f.channels() {
        for bin in 0..f.grid().len() {
            let ring = f.ring(c, bin);
            for m in mode_lo..=mode_hi {
                let acc: Complex64 = ring
                    .iter()
                    .enumerate()
                    .map(|(b, v)| v * roots[root_index(m, b, a)])
                    .sum();
                out.profile_mut(c, m)?[bin] = acc * scale;
            }
        }
    }
    Ok(out)
}

/// Angular synthesis: `f(p, psi_b) = sum_m F_m(p) exp(-i m psi_b)`.
pub fn angular_reconstruct(f: &ModeField, angular_count: usize) -> Result<PolarGridField> {
    let need = min_angular_count(f.mode_radius());
    if angular_count < need {
        return Err(Error::Bandlimit(format!(
            "{angular_count} angular samples cannot represent modes up to {} (need {need})",
            f.mode_radius()
        )));
    }
    let a = angular_count;
    let roots = unit_roots(a);
    let mut out = PolarGridField::zeros(f.grid().clone(), a, f.channels())?;
    for c in 0..f.channels() {
        for bin in 0..f.grid().len() {
            let ring = out.ring_mut(c, bin);
            for m in f.modes() {
                let v = f.get(c, m, bin);
                if v == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (b, slot) in ring.iter_mut().enumerate() {
                    *slot += v * roots[root_index(-m, b, a)];
                }
            }
        }
    }
    Ok(out)
}

/// Rotation by `theta`: mode `n` picks up `exp(i (k + n) theta)`.
pub fn rotate_mode_field(f: &ModeField, theta: f64) -> ModeField {
    let mut out = f.clone();
    let k = f.rep_index();
    for c in 0..f.channels() {
        for n in f.modes() {
            let phase = Complex64::from_polar(1.0, (k + n) as f64 * theta);
            for v in out.profile_mut(c, n).expect("mode in window") {
                *v *= phase;
            }
        }
    }
    out
}

/// Result of a translation together with its truncation estimate.
#[derive(Clone, Debug)]
pub struct Translated {
    pub field: ModeField,
    /// Upper bound on the L2 norm of the mode content dropped by the window.
    pub residual: f64,
}

/// Translation by `t`: multiplies the field by `exp(-i t . p)`.
///
/// A plane-wave phase spreads each mode over its neighbours with Bessel
/// weights `J_j(p |t|)`, so the output window is the input window widened
/// by `mode_margin` on each side. The product is formed on a polar grid
/// fine enough that aliasing sits far below the reported residual.
pub fn translate_mode_field(f: &ModeField, t: [f64; 2], mode_margin: usize) -> Result<Translated> {
    let margin = mode_margin as i32;
    let lo = f.mode_lo() - margin;
    let hi = f.mode_hi() + margin;
    let t_norm = t[0].hypot(t[1]);
    if t_norm == 0.0 {
        return Ok(Translated {
            field: f.with_window(lo, hi)?,
            residual: 0.0,
        });
    }
    let x_max = f.grid().p_max() * t_norm;
    let radius = lo.abs().max(hi.abs()) as usize;
    let a = 4 * (radius + x_max.ceil() as usize) + 64;

    let mut polar = angular_reconstruct(f, a)?;
    polar.multiply_by(|p, psi| {
        let phase = -p * (t[0] * psi.cos() + t[1] * psi.sin());
        Complex64::from_polar(1.0, phase)
    });
    let field = angular_decompose(&polar, lo, hi)?.with_rep_index(f.rep_index());

    let mut lost = 0.0;
    for (bin, &p) in f.grid().values().iter().enumerate() {
        let tail = bessel_tail_energy(mode_margin, p * t_norm);
        for c in 0..f.channels() {
            let l1: f64 = f.modes().map(|n| f.get(c, n, bin).norm()).sum();
            lost += l1 * l1 * tail;
        }
    }
    Ok(Translated {
        field,
        residual: lost.sqrt(),
    })
}

/// Smallest margin whose Bessel tail amplitude at `x = p_max |t|` is `<= tol`.
pub fn translation_margin(p_max: f64, t_norm: f64, tol: f64) -> usize {
    let x = p_max * t_norm;
    let mut m = 0;
    while bessel_tail_energy(m, x).sqrt() > tol {
        m += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::RadialGrid;
    use crate::special::bessel_j;

    fn grid() -> RadialGrid {
        RadialGrid::new(vec![0.5, 1.0, 2.0]).unwrap()
    }

    #[test]
    fn constant_field_is_mode_zero() {
        let c = Complex64::new(0.3, -1.2);
        let f = PolarGridField::from_fn(grid(), 12, 1, |_, _, _| c).unwrap();
        let m = angular_decompose(&f, -3, 3).unwrap();
        for n in -3..=3 {
            for bin in 0..3 {
                let want = if n == 0 { c } else { Complex64::new(0.0, 0.0) };
                assert!((m.get(0, n, bin) - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn single_harmonic_lands_on_its_mode() {
        let f = PolarGridField::from_fn(grid(), 16, 1, |_, _, psi| Complex64::from_polar(1.0, -2.0 * psi))
            .unwrap();
        let m = angular_decompose(&f, -7, 8).unwrap();
        for n in -7..=8 {
            let want = if n == 2 { 1.0 } else { 0.0 };
            assert!((m.get(0, n, 1) - want).norm() < 1e-12, "mode {n}");
        }
    }

    #[test]
    fn reconstruct_definition() {
        let mut f = ModeField::zeros(0, grid(), 1, 0, 1).unwrap();
        f.profile_mut(0, 0).unwrap().fill(Complex64::new(0.0, 0.0));
        f.profile_mut(0, 1).unwrap().fill(Complex64::new(1.0, 0.0));
        let g = angular_reconstruct(&f, 8).unwrap();
        for b in 0..8 {
            let psi = g.angle(b);
            assert!((g.get(0, 2, b) - Complex64::from_polar(1.0, -psi)).norm() < 1e-15);
        }
        let mut one = ModeField::zeros(0, grid(), 1, 0, 0).unwrap();
        one.profile_mut(0, 0).unwrap().fill(Complex64::new(1.0, 0.0));
        let g = angular_reconstruct(&one, 4).unwrap();
        assert!(g.data().iter().all(|z| *z == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn bandlimit_errors() {
        let f = PolarGridField::zeros(grid(), 4, 1).unwrap();
        assert!(matches!(angular_decompose(&f, -2, 2), Err(Error::Bandlimit(_))));
        let m = ModeField::zeros(0, grid(), 1, -3, 1).unwrap();
        assert!(matches!(angular_reconstruct(&m, 7), Err(Error::Bandlimit(_))));
        assert!(angular_reconstruct(&m, 8).is_ok());
    }

    #[test]
    fn rotation_examples() {
        let mut f = ModeField::zeros(0, grid(), 1, 1, 1).unwrap();
        f.profile_mut(0, 1).unwrap().fill(Complex64::new(1.0, 0.0));
        let r = rotate_mode_field(&f, std::f64::consts::FRAC_PI_2);
        assert!((r.get(0, 1, 0) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(rotate_mode_field(&f, 0.0), f);
    }

    #[test]
    fn translation_of_mode_zero_gives_bessel_amplitudes() {
        let g = RadialGrid::new(vec![1.5]).unwrap();
        let mut f = ModeField::zeros(0, g, 1, 0, 0).unwrap();
        f.profile_mut(0, 0).unwrap()[0] = Complex64::new(1.0, 0.0);
        let t = [0.8, -0.6];
        let out = translate_mode_field(&f, t, 20).unwrap();
        assert!(out.residual < 1e-12);
        for m in -20..=20 {
            let want = bessel_j(m, 1.5).abs();
            assert!((out.field.get(0, m, 0).norm() - want).abs() < 1e-12, "mode {m}");
        }
    }

    #[test]
    fn zero_translation_is_identity() {
        let mut f = ModeField::zeros(3, grid(), 2, -1, 1).unwrap();
        f.profile_mut(1, -1).unwrap()[2] = Complex64::new(0.5, 2.0);
        let out = translate_mode_field(&f, [0.0, 0.0], 2).unwrap();
        assert_eq!(out.residual, 0.0);
        assert_eq!(max_dev(&out.field, &f), 0.0);
    }

    fn max_dev(a: &ModeField, b: &ModeField) -> f64 {
        crate::fields::max_rel_deviation(a, b)
    }

    #[test]
    fn margin_helper_meets_tolerance() {
        let m = translation_margin(2.0, 1.5, 1e-10);
        assert!(bessel_tail_energy(m, 3.0).sqrt() <= 1e-10);
        assert!(bessel_tail_energy(m - 1, 3.0).sqrt() > 1e-10);
    }
}
