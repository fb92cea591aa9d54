//! TOML run configuration: the network plus optional per-command sections.
//! Unknown keys are rejected everywhere.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{ChecksSpec, ConstraintSpec, SuiteConfig, SweepSpec};
use crate::fields::{FieldSpec, RadialGrid};
use crate::scnn::NetworkConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub count: usize,
    /// Uniform grid `p_a = p_max (a + 1) / count`.
    #[serde(default)]
    pub p_max: Option<f64>,
    /// Explicit strictly increasing values (length `count`).
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

impl GridSpec {
    pub fn build(&self) -> Result<RadialGrid> {
        let grid = match (self.p_max, &self.values) {
            (Some(p), None) => RadialGrid::uniform(self.count, p),
            (None, Some(v)) => {
                if v.len() != self.count {
                    return Err(Error::config(
                        "radial_grid.values",
                        format!("{} values for count = {}", v.len(), self.count),
                    ));
                }
                RadialGrid::new(v.clone())
            }
            _ => return Err(Error::config("radial_grid", "give exactly one of p_max or values")),
        };
        grid.map_err(|e| Error::config("radial_grid", e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    /// Probe layer.
    pub layer: usize,
    pub draws: usize,
    pub sigma_mult: f64,
    #[serde(default)]
    pub sweep_widths: Vec<usize>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    /// Upper bound on the median relative error at the widest sweep width.
    #[serde(default)]
    pub max_rel_err: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpSection {
    pub layer: usize,
    pub channels: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Include wall-clock time in JSON summaries (breaks byte reproducibility).
    #[serde(default)]
    pub record_runtime: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub depth: usize,
    pub widths: Vec<usize>,
    pub filter_modes: Vec<i32>,
    pub sigma_w_sq: f64,
    pub seed: u64,
    #[serde(default)]
    pub final_linear: bool,
    pub radial_grid: GridSpec,
    pub input: FieldSpec,
    #[serde(default)]
    pub experiment: Option<ExperimentSection>,
    #[serde(default)]
    pub checks: Option<ChecksSpec>,
    #[serde(default)]
    pub gp: Option<GpSection>,
    #[serde(default)]
    pub filter_check: Option<ConstraintSpec>,
    #[serde(default)]
    pub output: OutputSection,
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T> {
    s.as_ref()
        .ok_or_else(|| Error::config(name, "section is required by this command"))
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Serde(e.to_string().trim_end().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn network(&self) -> Result<NetworkConfig> {
        let config = NetworkConfig {
            depth: self.depth,
            widths: self.widths.clone(),
            filter_modes: self.filter_modes.clone(),
            sigma_w_sq: self.sigma_w_sq,
            grid: self.radial_grid.build()?,
            seed: self.seed,
            input: self.input.clone(),
            final_linear: self.final_linear,
        };
        config.validate()?;
        config.input_field()?;
        Ok(config)
    }

    pub fn experiment(&self) -> Result<&ExperimentSection> {
        section(&self.experiment, "experiment")
    }

    pub fn gp(&self) -> Result<&GpSection> {
        section(&self.gp, "gp")
    }

    pub fn filter_check(&self) -> Result<&ConstraintSpec> {
        section(&self.filter_check, "filter_check")
    }

    pub fn sweep(&self) -> Result<SweepSpec> {
        let e = self.experiment()?;
        let spec = SweepSpec {
            base: self.network()?,
            widths: e.sweep_widths.clone(),
            draws: e.draws,
            seeds: e.seeds.clone(),
            layer: e.layer,
            sigma_mult: e.sigma_mult,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn suite(&self) -> Result<SuiteConfig> {
        Ok(SuiteConfig {
            network: self.network()?,
            checks: section(&self.checks, "checks")?.clone(),
            seed: self.seed,
        })
    }
}
