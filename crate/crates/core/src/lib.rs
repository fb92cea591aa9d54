//! SE(2)-equivariant steerable CNNs in angular-mode Fourier space, and the
//! Gaussian-process kernel they converge to at infinite multiplicity.
//!
//! - [`fields`]: mode / polar-grid field representations, SE(2) actions,
//!   Hankel transforms.
//! - [`scnn`]: filters, linear and cubic layers, forward passes, and the
//!   coordinate-space steerable filter.
//! - [`kernel`]: empirical and analytic kernels and their structural checks.
//! - [`experiments`]: width sweeps and the equivariance test battery.
//! - [`config`]: TOML run configuration.

pub mod config;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod kernel;
pub mod rng;
pub mod scnn;
pub mod special;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use fields::{GroupElement, ModeField, PolarGridField, RadialGrid};
pub use kernel::{DiagonalKernel, KernelMatrix};
pub use scnn::{FilterStack, NetworkConfig};
