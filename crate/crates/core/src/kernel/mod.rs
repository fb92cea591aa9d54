//! Covariances of network activations: the empirical (finite width, Monte
//! Carlo) estimator and the analytic infinite-multiplicity recursion.

mod analytic;
mod checks;
mod empirical;
mod gp;
mod moments;

pub use analytic::{analytic_closed, analytic_iterated, analytic_layer, analytic_step, input_kernel, readout_step};
pub use checks::{diagonality_check, single_mode_check, DiagonalityReport, ModeAmbiguity};
pub use empirical::{config_digest, empirical_kernel, empirical_kernels};
pub use gp::gp_sample;
pub use moments::{moment_oracle, MomentEstimate};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::RadialGrid;

/// Where an empirical kernel came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub draws: usize,
    pub seed: u64,
    pub config_digest: String,
}

/// Dense covariance `K_{n,n'}(p_a, p_a')`, `[n][n'][a][a']`, with per-entry
/// Monte Carlo standard errors (all zero for analytic kernels).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelRecord", into = "KernelRecord")]
pub struct KernelMatrix {
    grid: RadialGrid,
    mode_lo: i32,
    mode_hi: i32,
    entries: Vec<Complex64>,
    std_err: Vec<f64>,
    provenance: Option<Provenance>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelRecord {
    grid: RadialGrid,
    mode_lo: i32,
    mode_hi: i32,
    entries: Vec<[f64; 2]>,
    std_err: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

impl TryFrom<KernelRecord> for KernelMatrix {
    type Error = Error;
    fn try_from(r: KernelRecord) -> Result<Self> {
        let entries = r.entries.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        let mut k = KernelMatrix::from_parts(r.grid, r.mode_lo, r.mode_hi, entries, r.std_err)?;
        k.provenance = r.provenance;
        Ok(k)
    }
}

impl From<KernelMatrix> for KernelRecord {
    fn from(k: KernelMatrix) -> Self {
        KernelRecord {
            grid: k.grid,
            mode_lo: k.mode_lo,
            mode_hi: k.mode_hi,
            entries: k.entries.into_iter().map(|z| [z.re, z.im]).collect(),
            std_err: k.std_err,
            provenance: k.provenance,
        }
    }
}

impl KernelMatrix {
    pub fn from_parts(
        grid: RadialGrid,
        mode_lo: i32,
        mode_hi: i32,
        entries: Vec<Complex64>,
        std_err: Vec<f64>,
    ) -> Result<Self> {
        if mode_lo > mode_hi {
            return Err(Error::Invalid(format!("empty mode window [{mode_lo}, {mode_hi}]")));
        }
        let w = (mode_hi - mode_lo + 1) as usize;
        let len = w * w * grid.len() * grid.len();
        if entries.len() != len || std_err.len() != len {
            return Err(Error::Shape(format!(
                "kernel needs {len} entries and errors, got {} and {}",
                entries.len(),
                std_err.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite())
            || std_err.iter().any(|s| !s.is_finite() || *s < 0.0)
        {
            return Err(Error::Invalid("kernel entries must be finite, errors non-negative".into()));
        }
        Ok(Self {
            grid,
            mode_lo,
            mode_hi,
            entries,
            std_err,
            provenance: None,
        })
    }

    /// Embed a single-mode diagonal kernel.
    pub fn from_diagonal(k: &DiagonalKernel) -> Self {
        let p = k.grid.len();
        let mut entries = vec![Complex64::new(0.0, 0.0); p * p];
        for (a, v) in k.values.iter().enumerate() {
            entries[a * p + a] = Complex64::new(*v, 0.0);
        }
        Self::from_parts(k.grid.clone(), k.mode, k.mode, entries, vec![0.0; p * p]).expect("consistent shape")
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = Some(p);
        self
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn mode_lo(&self) -> i32 {
        self.mode_lo
    }

    pub fn mode_hi(&self) -> i32 {
        self.mode_hi
    }

    pub fn modes(&self) -> std::ops::RangeInclusive<i32> {
        self.mode_lo..=self.mode_hi
    }

    pub fn window_len(&self) -> usize {
        (self.mode_hi - self.mode_lo + 1) as usize
    }

    #[inline]
    pub(crate) fn index(&self, n: i32, n2: i32, a: usize, a2: usize) -> usize {
        let w = self.window_len();
        let p = self.grid.len();
        ((((n - self.mode_lo) as usize) * w + (n2 - self.mode_lo) as usize) * p + a) * p + a2
    }

    pub fn get(&self, n: i32, n2: i32, a: usize, a2: usize) -> Complex64 {
        self.entries[self.index(n, n2, a, a2)]
    }

    pub fn std_err(&self, n: i32, n2: i32, a: usize, a2: usize) -> f64 {
        self.std_err[self.index(n, n2, a, a2)]
    }

    /// Real co-diagonal value `K_{n,n}(p_a, p_a)`.
    pub fn codiag(&self, n: i32, a: usize) -> f64 {
        self.get(n, n, a, a).re
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn std_errs(&self) -> &[f64] {
        &self.std_err
    }

    /// `max |K_{n,n'}(p,p') - conj(K_{n',n}(p',p))|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let p = self.grid.len();
        let mut dev: f64 = 0.0;
        for n in self.modes() {
            for n2 in self.modes() {
                for a in 0..p {
                    for a2 in 0..p {
                        dev = dev.max((self.get(n, n2, a, a2) - self.get(n2, n, a2, a).conj()).norm());
                    }
                }
            }
        }
        dev
    }

    /// Smallest co-diagonal real part (non-negative for a valid covariance).
    pub fn min_codiag(&self) -> f64 {
        self.modes()
            .flat_map(|n| (0..self.grid.len()).map(move |a| (n, a)))
            .map(|(n, a)| self.codiag(n, a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Single-mode translation-invariant kernel `K_s(p)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DiagonalRecord", into = "DiagonalRecord")]
pub struct DiagonalKernel {
    grid: RadialGrid,
    mode: i32,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagonalRecord {
    grid: RadialGrid,
    mode: i32,
    values: Vec<f64>,
}

impl TryFrom<DiagonalRecord> for DiagonalKernel {
    type Error = Error;
    fn try_from(r: DiagonalRecord) -> Result<Self> {
        DiagonalKernel::new(r.grid, r.mode, r.values)
    }
}

impl From<DiagonalKernel> for DiagonalRecord {
    fn from(k: DiagonalKernel) -> Self {
        DiagonalRecord {
            grid: k.grid,
            mode: k.mode,
            values: k.values,
        }
    }
}

impl DiagonalKernel {
    pub fn new(grid: RadialGrid, mode: i32, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!(
                "kernel has {} values for {} radial bins",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Invalid("diagonal kernel values must be finite and non-negative".into()));
        }
        Ok(Self { grid, mode, values })
    }

    pub fn constant(grid: RadialGrid, mode: i32, value: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, mode, vec![value; n])
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn mode(&self) -> i32 {
        self.mode
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Conditional pre-activation covariance `gamma = (sigma_w^2 / 2) K`, at the
/// mode the linear layer moves the kernel to.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGaussianCov {
    pub grid: RadialGrid,
    pub mode: i32,
    pub gamma: Vec<f64>,
}

impl LayerGaussianCov {
    pub fn from_kernel(k: &DiagonalKernel, sigma_w_sq: f64, q: i32) -> Self {
        Self {
            grid: k.grid.clone(),
            mode: k.mode - q,
            gamma: k.values.iter().map(|v| 0.5 * sigma_w_sq * v).collect(),
        }
    }
}
