use std::fmt;

use super::KernelMatrix;

/// Relative floor below which entries count as zero when no Monte Carlo
/// error is available.
const EXACT_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalityReport {
    /// Largest `|off-diagonal| / SE` over entries with a positive SE.
    pub max_ratio: f64,
    pub max_abs_off: f64,
    /// Offending `(n, n', a, a')`, if any.
    pub worst: Option<(i32, i32, usize, usize)>,
    pub pass: bool,
}

fn floor(k: &KernelMatrix) -> f64 {
    let scale = k
        .modes()
        .flat_map(|n| (0..k.grid().len()).map(move |a| (n, a)))
        .map(|(n, a)| k.codiag(n, a).abs())
        .fold(0.0, f64::max);
    EXACT_FLOOR * scale
}

/// Every entry with `n != n'` or `p != p'` must be within `sigma_mult` SE of
/// zero (or below a `1e-12` relative floor when the SE is zero).
pub fn diagonality_check(k: &KernelMatrix, sigma_mult: f64) -> DiagonalityReport {
    let fl = floor(k);
    let p = k.grid().len();
    let mut report = DiagonalityReport {
        max_ratio: 0.0,
        max_abs_off: 0.0,
        worst: None,
        pass: true,
    };
    let mut worst_excess = 0.0;
    for n in k.modes() {
        for n2 in k.modes() {
            for a in 0..p {
                for a2 in 0..p {
                    if n == n2 && a == a2 {
                        continue;
                    }
                    let v = k.get(n, n2, a, a2).norm();
                    let se = k.std_err(n, n2, a, a2);
                    report.max_abs_off = report.max_abs_off.max(v);
                    if se > 0.0 {
                        report.max_ratio = report.max_ratio.max(v / se);
                    }
                    let limit = (sigma_mult * se).max(fl);
                    if v > limit {
                        report.pass = false;
                        if v - limit > worst_excess {
                            worst_excess = v - limit;
                            report.worst = Some((n, n2, a, a2));
                        }
                    }
                }
            }
        }
    }
    report
}

/// Zero or several modes carry statistically significant co-diagonal mass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModeAmbiguity {
    pub nonzero_modes: Vec<i32>,
}

impl fmt::Display for ModeAmbiguity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.nonzero_modes.is_empty() {
            write!(f, "no mode carries significant co-diagonal mass")
        } else {
            write!(f, "several modes carry co-diagonal mass: {:?}", self.nonzero_modes)
        }
    }
}

impl std::error::Error for ModeAmbiguity {}

/// The unique mode whose co-diagonal `K_{s,s}(p,p)` is significantly nonzero.
pub fn single_mode_check(k: &KernelMatrix, sigma_mult: f64) -> Result<i32, ModeAmbiguity> {
    let fl = floor(k);
    let nonzero_modes: Vec<i32> = k
        .modes()
        .filter(|&n| {
            (0..k.grid().len()).any(|a| {
                let v = k.codiag(n, a);
                v > (sigma_mult * k.std_err(n, n, a, a)).max(fl)
            })
        })
        .collect();
    match nonzero_modes.as_slice() {
        [s] => Ok(*s),
        _ => Err(ModeAmbiguity { nonzero_modes }),
    }
}
