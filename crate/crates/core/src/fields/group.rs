use std::f64::consts::TAU;

use super::{rotate_mode_field, translate_mode_field, ModeField, Translated};
use crate::error::Result;

/// Element `(t, g_theta)` of SE(2) acting as `r -> g_theta r + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupElement {
    theta: f64,
    t: [f64; 2],
}

impl GroupElement {
    pub fn new(theta: f64, t: [f64; 2]) -> Self {
        Self {
            theta: theta.rem_euclid(TAU),
            t,
        }
    }

    pub fn identity() -> Self {
        Self::new(0.0, [0.0, 0.0])
    }

    pub fn rotation(theta: f64) -> Self {
        Self::new(theta, [0.0, 0.0])
    }

    pub fn translation(t: [f64; 2]) -> Self {
        Self::new(0.0, t)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn t(&self) -> [f64; 2] {
        self.t
    }

    pub fn act_point(&self, r: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.theta.sin_cos();
        [c * r[0] - s * r[1] + self.t[0], s * r[0] + c * r[1] + self.t[1]]
    }

    /// `self * other`: apply `other` first.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        let t = self.act_point(other.t);
        GroupElement::new(self.theta + other.theta, t)
    }

    pub fn inverse(&self) -> GroupElement {
        let (s, c) = self.theta.sin_cos();
        let t = [-(c * self.t[0] + s * self.t[1]), s * self.t[0] - c * self.t[1]];
        GroupElement::new(-self.theta, t)
    }

    /// Fourier-space induced action `Y(p) -> exp(i (k theta - t.p)) Y(g^-1 p)`.
    pub fn act(&self, f: &ModeField, mode_margin: usize) -> Result<Translated> {
        translate_mode_field(&rotate_mode_field(f, self.theta), self.t, mode_margin)
    }
}
