//! Blind image deblurring by progressive removal of residual blur.
//!
//! The crate is organised bottom-up:
//!
//! * [`image`], [`kernel`], [`spectral`] and [`io`] hold the raster and kernel
//!   containers, FFT-based convolution, boundary handling, noise synthesis and
//!   spectral density estimation.
//! * [`filters`] implements the modified inverse filter `H* / (|H|² + C)` and a
//!   dense Tikhonov solver used to cross-check it.
//! * [`estimate`] provides residual-blur estimators: an oracle that knows the
//!   true residual spectrum, and a cartoon-image MAP estimator built on a shock
//!   filter.
//! * [`probe`] runs the feedback loop: estimate the residual blur, deblur, feed
//!   the restoration back as the next input.
//! * [`theory`] is the scalar frequency-domain model of the loop under an oracle
//!   estimator: fixed points, regimes, MSE prediction and the boost factor.
//! * [`evaluation`] has PSNR, error ratios, CDF curves and a corpus benchmark.

pub mod error;
pub mod estimate;
pub mod evaluation;
pub mod filters;
pub mod image;
pub mod io;
pub mod kernel;
pub mod probe;
pub mod spectral;
pub mod synthetic;
pub mod theory;

pub use crate::error::{ProbeError, Result};
pub use crate::filters::RegularizationConstant;
pub use crate::image::Image;
pub use crate::kernel::BlurKernel;
pub use crate::probe::{run_probe, ProbeConfig, ProbeResult, StopPolicy};
pub use crate::spectral::{BoundaryMode, Psd, Spectrum};
