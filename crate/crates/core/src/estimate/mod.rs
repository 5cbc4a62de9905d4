//! Residual-blur estimators.
//!
//! [`OracleEstimator`] returns the exact residual blur relating the current
//! input to the latent image (theory mode). [`MapUchEstimator`] is a practical
//! blind estimator fitting the kernel against a shock-filtered cartoon image.

mod mapuch;
mod oracle;
mod shock;

pub use mapuch::{estimate_kernel_mapuch, MapUchEstimator, MapUchParams};
pub use oracle::{oracle_estimate, OracleEstimator, OracleState};
pub use shock::shock_filter;

use crate::error::Result;
use crate::image::Image;
use crate::kernel::{check_support, BlurKernel};
use crate::spectral::Spectrum;

/// Output of one estimator call.
#[derive(Debug, Clone)]
pub struct KernelEstimate {
    pub kernel: BlurKernel,
    /// Exact residual transfer function on the engine's transform grid,
    /// when the estimator knows it (oracle only).
    pub transfer: Option<Spectrum>,
    /// Set when the input carried no usable structure and the estimator fell
    /// back to a delta kernel.
    pub degenerate: bool,
}

impl KernelEstimate {
    pub fn from_kernel(kernel: BlurKernel) -> Self {
        Self { kernel, transfer: None, degenerate: false }
    }
}

/// A residual point-spread-function estimator.
pub trait KernelEstimator {
    fn name(&self) -> &'static str;

    fn estimate(&mut self, g: &Image, support: usize) -> Result<KernelEstimate>;

    /// Called once the engine has applied the modified inverse filter with
    /// constant `c`. Stateless estimators ignore it.
    fn advance(&mut self, _c: f64) {}

    /// Current residual spectrum, for estimators that track one.
    fn residual_spectrum(&self) -> Option<&Spectrum> {
        None
    }
}

/// Sequential projection onto the kernel constraint set: clip negatives,
/// then normalize; an all-zero result becomes a delta.
pub fn project_kernel(support: usize, raw: &[f64]) -> Result<BlurKernel> {
    check_support(support)?;
    if raw.len() != support * support {
        return Err(crate::ProbeError::dims(format!("{} weights for support {support}", raw.len())));
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(crate::ProbeError::arg("kernel weights must be finite"));
    }
    let clipped: Vec<f64> = raw.iter().map(|&v| v.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= 0.0 {
        return BlurKernel::delta(support);
    }
    BlurKernel::normalized(support, clipped)
}
