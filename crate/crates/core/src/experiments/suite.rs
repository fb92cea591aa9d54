use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{
    angular_decompose, angular_reconstruct, max_rel_deviation, FieldSpec, min_angular_count, polar_rel_deviation,
    rotate_mode_field, translate_mode_field, translation_margin, HankelDirection, HankelPlan, ModeField,
    PolarGridField, RadialProfile,
};
use crate::kernel::moment_oracle;
use crate::rng::derive_seed;
use crate::scnn::{
    apply_linear, build_coord_filter, check_kernel_constraint, forward, polar_grid_forward, polar_grid_trace,
    sample_filters, CoordFilter, CoordTerm, ForwardTrace, NetworkConfig,
};

/// A coordinate-space filter and the pair of rotation irreps it should
/// intertwine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub m: i32,
    pub n: i32,
    pub rho_in: i32,
    pub rho_out: i32,
    pub trials: usize,
    pub profile: RadialProfile,
    pub scale: f64,
    pub tolerance: f64,
    /// Additional terms summed into the filter (fault injection).
    #[serde(default)]
    pub extra_terms: Vec<CoordTerm>,
}

impl ConstraintSpec {
    pub fn filter(&self) -> CoordFilter {
        self.extra_terms
            .iter()
            .cloned()
            .fold(build_coord_filter(self.profile, self.scale, self.m, self.n), CoordFilter::plus)
    }

    pub fn run(&self, seed: u64) -> SuiteItem {
        let dev = check_kernel_constraint(&self.filter(), self.rho_in, self.rho_out, self.trials, seed);
        SuiteItem::new(
            "constraint",
            dev,
            self.tolerance,
            format!("{} trials, rho_in {}, rho_out {}", self.trials, self.rho_in, self.rho_out),
        )
    }
}

/// Parameters of every suite item; all tolerances are explicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksSpec {
    /// Overrides the hidden multiplicities of the network under test.
    #[serde(default)]
    pub hidden_width: Option<usize>,
    /// Overrides the filter modes of the network under test.
    #[serde(default)]
    pub filter_modes: Option<Vec<i32>>,
    /// Overrides the input field of the network under test.
    #[serde(default)]
    pub input: Option<FieldSpec>,
    pub thetas: Vec<f64>,
    pub rotation_tol: f64,
    /// Angle and filter mode of the single-layer rep-index probe.
    pub rep_index_theta: f64,
    pub rep_index_q: i32,
    pub rep_index_tol: f64,
    pub translations: Vec<[f64; 2]>,
    pub translation_tol: f64,
    pub translation_inverse_tol: f64,
    pub oracle_tol: f64,
    pub angular_tol: f64,
    pub hankel_max_order: i32,
    pub hankel_points: usize,
    pub hankel_tol: f64,
    pub moment_gamma: f64,
    pub moment_orders: Vec<u32>,
    pub moment_draws: usize,
    pub sigma_mult: f64,
    pub constraint: ConstraintSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub network: NetworkConfig,
    pub checks: ChecksSpec,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteItem {
    pub name: String,
    pub pass: bool,
    pub max_dev: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl SuiteItem {
    fn new(name: &str, max_dev: f64, tolerance: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            pass: max_dev <= tolerance,
            max_dev,
            tolerance,
            detail,
        }
    }

    fn failed(name: &str, tolerance: f64, err: Error) -> Self {
        Self {
            name: name.into(),
            pass: false,
            max_dev: f64::INFINITY,
            tolerance,
            detail: err.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub pass: bool,
    pub items: Vec<SuiteItem>,
}

impl SuiteReport {
    pub fn item(&self, name: &str) -> Option<&SuiteItem> {
        self.items.iter().find(|i| i.name == name)
    }

    /// Largest deviation over items measured as deviations (the moment item
    /// reports z-scores and is left out).
    pub fn max_dev(&self) -> f64 {
        self.items
            .iter()
            .filter(|i| i.name != "moment")
            .map(|i| i.max_dev)
            .fold(0.0, f64::max)
    }
}

fn activations(t: &ForwardTrace) -> Vec<&ModeField> {
    let mut out = vec![&t.input];
    for b in &t.blocks {
        out.push(&b.pre);
        out.push(&b.post);
    }
    out.extend(t.readout.as_ref());
    out
}

fn rotation_item(net: &NetworkConfig, x: &ModeField, seed: u64, spec: &ChecksSpec) -> Result<SuiteItem> {
    let filters = sample_filters(net, seed);
    let base = forward(net, &filters, x)?;
    let mut worst: f64 = 0.0;
    for &theta in &spec.thetas {
        let turned = forward(net, &filters, &rotate_mode_field(x, theta))?;
        for (a, b) in activations(&base).into_iter().zip(activations(&turned)) {
            if a.rep_index() != b.rep_index() {
                return Err(Error::Invalid("rep index bookkeeping differs between passes".into()));
            }
            worst = worst.max(max_rel_deviation(b, &rotate_mode_field(a, theta)));
        }
    }
    Ok(SuiteItem::new(
        "rotation",
        worst,
        spec.rotation_tol,
        format!("{} angles, every activation", spec.thetas.len()),
    ))
}

/// Decides the rep-index advance of a linear layer: rotating the input must
/// equal rotating the output with index `k + q`, and must not with `k - q`.
fn rep_index_item(net: &NetworkConfig, x: &ModeField, seed: u64, spec: &ChecksSpec) -> Result<SuiteItem> {
    let n0 = net.widths[0];
    let probe = NetworkConfig {
        depth: 1,
        widths: vec![n0, n0],
        filter_modes: vec![spec.rep_index_q],
        final_linear: false,
        ..net.clone()
    };
    let layer = &sample_filters(&probe, seed).layers[0];
    let theta = spec.rep_index_theta;
    let (k, q) = (x.rep_index(), spec.rep_index_q);
    let y = apply_linear(layer, x)?;
    let y_rot = apply_linear(layer, &rotate_mode_field(x, theta))?;
    let plus = max_rel_deviation(&y_rot, &rotate_mode_field(&y.clone().with_rep_index(k + q), theta));
    let minus = max_rel_deviation(&y_rot, &rotate_mode_field(&y.clone().with_rep_index(k - q), theta));
    let mut item = SuiteItem::new(
        "rep_index",
        plus,
        spec.rep_index_tol,
        format!("k + q deviation {plus:.3e}, k - q deviation {minus:.3e}, output index {}", y.rep_index()),
    );
    item.pass &= y.rep_index() == k + q && (q == 0 || minus > spec.rep_index_tol);
    Ok(item)
}

fn plane_wave(t: [f64; 2]) -> impl Fn(f64, f64) -> Complex64 {
    move |p, psi| Complex64::from_polar(1.0, -p * (t[0] * psi.cos() + t[1] * psi.sin()))
}

fn translation_item(net: &NetworkConfig, x: &ModeField, seed: u64, spec: &ChecksSpec) -> Result<SuiteItem> {
    let filters = sample_filters(net, seed);
    let xp = angular_reconstruct(x, min_angular_count(net.max_mode_radius()))?;
    let base = polar_grid_forward(net, &filters, &xp)?;
    let mut worst: f64 = 0.0;
    for &t in &spec.translations {
        let mut moved = xp.clone();
        moved.multiply_by(plane_wave(t));
        let out = polar_grid_forward(net, &filters, &moved)?;
        let mut want = base.clone();
        want.multiply_by(plane_wave(t));
        worst = worst.max(polar_rel_deviation(&out, &want));
    }
    Ok(SuiteItem::new(
        "translation",
        worst,
        spec.translation_tol,
        format!("{} translations, polar grid", spec.translations.len()),
    ))
}

fn translation_inverse_item(x: &ModeField, spec: &ChecksSpec) -> Result<SuiteItem> {
    let mut worst: f64 = 0.0;
    let mut widest = 0;
    for &t in &spec.translations {
        let norm = t[0].hypot(t[1]);
        let margin = translation_margin(x.grid().p_max(), norm, 0.01 * spec.translation_inverse_tol);
        widest = widest.max(margin);
        let there = translate_mode_field(x, t, margin)?;
        let back = translate_mode_field(&there.field, [-t[0], -t[1]], margin)?;
        worst = worst.max(max_rel_deviation(&back.field, x));
    }
    Ok(SuiteItem::new(
        "translation_inverse",
        worst,
        spec.translation_inverse_tol,
        format!("mode margin up to {widest}"),
    ))
}

fn oracle_item(net: &NetworkConfig, x: &ModeField, seed: u64, spec: &ChecksSpec) -> Result<SuiteItem> {
    let filters = sample_filters(net, seed);
    let modes = forward(net, &filters, x)?;
    let xp = angular_reconstruct(x, min_angular_count(net.max_mode_radius()))?;
    let polar = polar_grid_trace(net, &filters, &xp)?;
    let mut worst: f64 = 0.0;
    for (m, p) in activations(&modes).into_iter().zip(&polar) {
        let d = angular_decompose(p, m.mode_lo(), m.mode_hi())?;
        worst = worst.max(max_rel_deviation(&d, m));
    }
    Ok(SuiteItem::new(
        "oracle",
        worst,
        spec.oracle_tol,
        format!("{} stages, {} angles", polar.len(), xp.angular_count()),
    ))
}

fn angular_item(x: &ModeField, spec: &ChecksSpec) -> Result<SuiteItem> {
    let a = min_angular_count(x.mode_radius());
    let polar: PolarGridField = angular_reconstruct(x, a)?;
    let modes = angular_decompose(&polar, x.mode_lo(), x.mode_hi())?;
    let again = angular_reconstruct(&modes, a)?;
    let dev = max_rel_deviation(&modes.with_rep_index(x.rep_index()), x).max(polar_rel_deviation(&again, &polar));
    Ok(SuiteItem::new("angular_round_trip", dev, spec.angular_tol, format!("{a} angles")))
}

fn hankel_item(spec: &ChecksSpec) -> Result<SuiteItem> {
    let mut worst: f64 = 0.0;
    for m in -spec.hankel_max_order..=spec.hankel_max_order {
        let plan = HankelPlan::new(m, spec.hankel_points, 10.0)?;
        let profile: Vec<Complex64> = plan
            .space_grid()
            .values()
            .iter()
            .map(|r| Complex64::new((-(r - 3.0).powi(2)).exp(), 0.5 * (-r * r / 4.0).exp()))
            .collect();
        let freq = plan.apply(&profile, HankelDirection::Forward)?;
        let back = plan.apply(&freq, HankelDirection::Inverse)?;
        let scale = profile.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let dev = profile.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
        worst = worst.max(dev);
    }
    Ok(SuiteItem::new(
        "hankel_round_trip",
        worst,
        spec.hankel_tol,
        format!("orders |m| <= {}, {} points", spec.hankel_max_order, spec.hankel_points),
    ))
}

fn moment_item(seed: u64, spec: &ChecksSpec) -> SuiteItem {
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for &k in &spec.moment_orders {
        let m = moment_oracle(spec.moment_gamma, k, spec.moment_draws, derive_seed(seed, &[u64::from(k)]));
        worst = worst.max(m.z_score());
        detail.push(format!("k={k}: {:.6} vs {:.6}", m.estimate, m.reference));
    }
    SuiteItem::new("moment", worst, spec.sigma_mult, detail.join("; "))
}

/// The full battery. Each item reports its worst deviation against its
/// tolerance; an item that cannot run is reported as failed.
pub fn equivariance_suite(cfg: &SuiteConfig) -> SuiteReport {
    let spec = &cfg.checks;
    let mut net = match spec.hidden_width {
        Some(w) => cfg.network.with_hidden_width(w),
        None => cfg.network.clone(),
    };
    if let Some(q) = &spec.filter_modes {
        net.filter_modes = q.clone();
    }
    if let Some(input) = &spec.input {
        net.input = input.clone();
    }
    let seed = cfg.seed;
    let x = net.validate().and_then(|_| net.input_field());
    let with_x = |name: &str, tol: f64, f: &dyn Fn(&ModeField) -> Result<SuiteItem>| match &x {
        Ok(x) => f(x).unwrap_or_else(|e| SuiteItem::failed(name, tol, e)),
        Err(e) => SuiteItem::failed(name, tol, Error::Invalid(e.to_string())),
    };
    let items = vec![
        with_x("rotation", spec.rotation_tol, &|x| rotation_item(&net, x, seed, spec)),
        with_x("rep_index", spec.rep_index_tol, &|x| rep_index_item(&net, x, seed, spec)),
        with_x("translation", spec.translation_tol, &|x| translation_item(&net, x, seed, spec)),
        with_x("translation_inverse", spec.translation_inverse_tol, &|x| translation_inverse_item(x, spec)),
        with_x("oracle", spec.oracle_tol, &|x| oracle_item(&net, x, seed, spec)),
        with_x("angular_round_trip", spec.angular_tol, &|x| angular_item(x, spec)),
        hankel_item(spec).unwrap_or_else(|e| SuiteItem::failed("hankel_round_trip", spec.hankel_tol, e)),
        spec.constraint.run(seed),
        moment_item(seed, spec),
    ];
    SuiteReport {
        pass: items.iter().all(|i| i.pass),
        items,
    }
}
