use rustfft::num_complex::Complex64;

use super::{project_kernel, KernelEstimate, KernelEstimator};
use crate::error::{ProbeError, Result};
use crate::image::Image;
use crate::kernel::{check_support, BlurKernel};
use crate::spectral::{ifft2_full, kernel_spectrum, Spectrum};
use crate::theory::oracle_step;

/// Ground-truth blur spectrum and the residual spectrum it has evolved to.
///
/// The residual only changes through [`OracleState::advance`], which applies
/// `H ← |H|² / (|H|² + C)` bin by bin.
#[derive(Debug, Clone)]
pub struct OracleState {
    initial: Spectrum,
    current: Spectrum,
    c: f64,
    steps: usize,
}

impl OracleState {
    pub fn new(initial: Spectrum, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(ProbeError::arg("oracle regularization constant must be positive"));
        }
        Ok(Self { current: initial.clone(), initial, c, steps: 0 })
    }

    /// State for a known synthesis kernel on a `pad_w x pad_h` transform grid.
    pub fn from_kernel(k: &BlurKernel, pad_w: usize, pad_h: usize, c: f64) -> Result<Self> {
        Self::new(kernel_spectrum(k, pad_w, pad_h)?, c)
    }

    pub fn initial(&self) -> &Spectrum {
        &self.initial
    }

    pub fn current(&self) -> &Spectrum {
        &self.current
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn advance(&mut self) {
        let c = self.c;
        self.current = self.current.map(|h| Complex64::new(oracle_step(h.norm(), c), 0.0));
        self.steps += 1;
    }
}

/// Spatial kernel of the current residual spectrum, truncated to `support`
/// around the origin and projected onto valid kernels.
pub fn oracle_estimate(state: &OracleState, support: usize) -> Result<BlurKernel> {
    check_support(support)?;
    let spec = state.current();
    let (w, h) = (spec.width(), spec.height());
    if support > w.min(h) {
        return Err(ProbeError::arg(format!("support {support} exceeds oracle grid {w}x{h}")));
    }
    let spatial = ifft2_full(spec);
    let r = (support / 2) as isize;
    let mut raw = Vec::with_capacity(support * support);
    for dy in -r..=r {
        for dx in -r..=r {
            let x = dx.rem_euclid(w as isize) as usize;
            let y = dy.rem_euclid(h as isize) as usize;
            raw.push(spatial[y * w + x].re);
        }
    }
    project_kernel(support, &raw)
}

/// Estimator backed by an [`OracleState`]; also hands the exact residual
/// spectrum to the engine.
#[derive(Debug, Clone)]
pub struct OracleEstimator {
    state: OracleState,
}

impl OracleEstimator {
    pub fn new(state: OracleState) -> Self {
        Self { state }
    }

    pub fn state(&self) -> &OracleState {
        &self.state
    }
}

impl KernelEstimator for OracleEstimator {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn estimate(&mut self, _g: &Image, support: usize) -> Result<KernelEstimate> {
        let kernel = oracle_estimate(&self.state, support)?;
        Ok(KernelEstimate { kernel, transfer: Some(self.state.current().clone()), degenerate: false })
    }

    fn advance(&mut self, c: f64) {
        debug_assert!((c - self.state.c).abs() <= 1e-15 * c.abs().max(1.0), "C must stay constant");
        self.state.advance();
    }

    fn residual_spectrum(&self) -> Option<&Spectrum> {
        Some(self.state.current())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iteration_zero_returns_synthesis_kernel() {
        let k = BlurKernel::gaussian(1.5, 9).unwrap();
        let state = OracleState::from_kernel(&k, 32, 32, 0.01).unwrap();
        let est = oracle_estimate(&state, 9).unwrap();
        for (a, b) in k.weights().iter().zip(est.weights()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tiny_c_converges_to_delta() {
        let k = BlurKernel::gaussian(1.0, 7).unwrap();
        let mut state = OracleState::from_kernel(&k, 32, 32, 1e-8).unwrap();
        for _ in 0..40 {
            state.advance();
        }
        let est = oracle_estimate(&state, 7).unwrap();
        assert!(est.center_weight() > 0.99, "{}", est.center_weight());
    }

    #[test]
    fn support_larger_than_grid_is_error() {
        let state = OracleState::from_kernel(&BlurKernel::delta(3).unwrap(), 8, 8, 0.01).unwrap();
        assert!(oracle_estimate(&state, 9).is_err());
    }
}
