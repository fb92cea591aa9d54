use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ModeField, RadialGrid};
use crate::error::{Error, Result};

/// Unit-amplitude radial shape.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialProfile {
    Constant,
    /// `exp(-(p - center)^2 / (2 width^2))`
    Gaussian { center: f64, width: f64 },
    /// `(1 + p / scale)^(-power)`
    PolyDecay { scale: f64, power: f64 },
}

impl RadialProfile {
    pub fn eval(&self, p: f64) -> f64 {
        match *self {
            RadialProfile::Constant => 1.0,
            RadialProfile::Gaussian { center, width } => {
                let d = (p - center) / width;
                (-0.5 * d * d).exp()
            }
            RadialProfile::PolyDecay { scale, power } => (1.0 + p / scale).powf(-power),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            RadialProfile::Constant => true,
            RadialProfile::Gaussian { center, width } => center.is_finite() && width > 0.0,
            RadialProfile::PolyDecay { scale, power } => scale > 0.0 && power.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Invalid(format!("bad radial profile {self:?}")))
        }
    }
}

/// One nonzero `(channel, mode)` entry: `amplitude * profile(p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldTerm {
    pub channel: usize,
    pub mode: i32,
    /// `[re, im]`
    pub amplitude: [f64; 2],
    pub profile: RadialProfile,
}

/// Layout plus nonzero terms of a synthetic field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    pub rep_index: i32,
    pub channels: usize,
    pub mode_lo: i32,
    pub mode_hi: i32,
    #[serde(default)]
    pub terms: Vec<FieldTerm>,
}

/// Deterministic test field; overlapping terms add.
pub fn synth_field(spec: &FieldSpec, grid: &RadialGrid) -> Result<ModeField> {
    let mut out = ModeField::zeros(spec.rep_index, grid.clone(), spec.channels, spec.mode_lo, spec.mode_hi)?;
    for term in &spec.terms {
        if term.channel >= spec.channels {
            return Err(Error::Invalid(format!(
                "term channel {} but field has {} channels",
                term.channel, spec.channels
            )));
        }
        term.profile.validate()?;
        let amp = Complex64::new(term.amplitude[0], term.amplitude[1]);
        let slot = out.profile_mut(term.channel, term.mode)?;
        for (v, &p) in slot.iter_mut().zip(grid.values()) {
            *v += amp * term.profile.eval(p);
        }
    }
    Ok(out)
}
