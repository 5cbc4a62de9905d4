//! The feedback loop: estimate the residual blur of the current input,
//! deblur it with the modified inverse filter, and feed the restoration back
//! as the next input.
//!
//! With `max_iters = 1` the loop is exactly sequential deblurring.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{ProbeError, Result};
use crate::estimate::{KernelEstimate, KernelEstimator, MapUchEstimator, MapUchParams, OracleEstimator, OracleState};
use crate::evaluation::psnr;
use crate::filters::{build_modified_inverse, RegularizationConstant};
use crate::image::Image;
use crate::kernel::{check_support, shrink_support, BlurKernel};
use crate::spectral::{apply_transfer, extend, fft2_in_place, kernel_spectrum, padded_dims, BoundaryMode, Psd, Spectrum};
use crate::theory;

/// Center mass at or above which an estimated kernel counts as a delta.
pub const DELTA_LIKE_THRESHOLD: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StopPolicy {
    /// Run until `max_iters`.
    Fixed,
    /// Stop once the predicted boost of the next iteration is at most `tau`.
    /// Needs a boost prediction, so it only acts in oracle mode.
    BoostThreshold { tau: f64 },
}

impl Default for StopPolicy {
    fn default() -> Self {
        StopPolicy::Fixed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EstimatorChoice {
    /// Exact residual blur derived from the known synthesis kernel.
    Oracle { true_kernel: BlurKernel },
    MapUch { params: MapUchParams },
}

impl EstimatorChoice {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatorChoice::Oracle { .. } => "oracle",
            EstimatorChoice::MapUch { .. } => "mapuch",
        }
    }
}

impl Default for EstimatorChoice {
    fn default() -> Self {
        EstimatorChoice::MapUch { params: MapUchParams::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub c: RegularizationConstant,
    pub max_iters: usize,
    pub stop_policy: StopPolicy,
    pub boundary: BoundaryMode,
    /// Kernel support at iteration 1; later iterations shrink it.
    pub initial_support: usize,
    pub estimator: EstimatorChoice,
    pub seed: u64,
    /// Clamp the fed-back image to `[0, 1]`.
    pub clamp_feedback: bool,
    /// Known noise level of the input, used only for boost prediction.
    pub noise_sigma: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            c: RegularizationConstant::default(),
            max_iters: 3,
            stop_policy: StopPolicy::Fixed,
            boundary: BoundaryMode::Reflective,
            initial_support: 15,
            estimator: EstimatorChoice::default(),
            seed: 0,
            clamp_feedback: true,
            noise_sigma: 0.0,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(ProbeError::arg("max_iters must be at least 1"));
        }
        check_support(self.initial_support)?;
        if let StopPolicy::BoostThreshold { tau } = self.stop_policy {
            if !(tau >= 0.0) || !tau.is_finite() {
                return Err(ProbeError::arg(format!("boost threshold must be nonnegative, got {tau}")));
            }
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(ProbeError::arg("noise sigma must be nonnegative"));
        }
        if let EstimatorChoice::MapUch { params } = &self.estimator {
            params.validate()?;
        }
        Ok(())
    }

    /// Support used at 1-based iteration `index`.
    pub fn support_at(&self, index: usize) -> usize {
        (1..index).fold(self.initial_support, |s, _| shrink_support(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    MaxIterations,
    DeltaKernel,
    BoostThreshold,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::MaxIterations => "max-iterations",
            StopReason::DeltaKernel => "delta-kernel",
            StopReason::BoostThreshold => "boost-threshold",
        })
    }
}

#[derive(Debug, Clone)]
pub struct IterationReport {
    /// 1-based.
    pub index: usize,
    pub support: usize,
    pub residual_kernel: BlurKernel,
    pub restored: Image,
    pub psnr_vs_truth: Option<f64>,
    /// Predicted MSE reduction from running one more iteration.
    pub predicted_boost: Option<f64>,
    /// Modified inverse spectrum applied in this iteration.
    pub filter: Spectrum,
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct ProbeResult {
    pub final_image: Image,
    pub reports: Vec<IterationReport>,
    pub stop_reason: StopReason,
}

/// Serializable digest of a run, without the images.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSummary {
    pub estimator: String,
    pub stop_reason: StopReason,
    pub iterations: Vec<IterationSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub index: usize,
    pub support: usize,
    pub center_weight: f64,
    pub psnr: Option<f64>,
    pub predicted_boost: Option<f64>,
    pub degenerate: bool,
    pub kernel: Vec<f64>,
}

impl ProbeResult {
    pub fn summary(&self, estimator: &str) -> ProbeSummary {
        ProbeSummary {
            estimator: estimator.to_string(),
            stop_reason: self.stop_reason,
            iterations: self
                .reports
                .iter()
                .map(|r| IterationSummary {
                    index: r.index,
                    support: r.support,
                    center_weight: r.residual_kernel.center_weight(),
                    psnr: r.psnr_vs_truth,
                    predicted_boost: r.predicted_boost,
                    degenerate: r.degenerate,
                    kernel: r.residual_kernel.weights().to_vec(),
                })
                .collect(),
        }
    }

    pub fn psnr_trace(&self) -> Vec<Option<f64>> {
        self.reports.iter().map(|r| r.psnr_vs_truth).collect()
    }
}

/// Result of one loop body.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub restored: Image,
    pub estimate: KernelEstimate,
    pub filter: Spectrum,
}

fn step_on_grid(
    g: &Image,
    estimator: &mut dyn KernelEstimator,
    c: RegularizationConstant,
    support: usize,
    boundary: BoundaryMode,
    pad: (usize, usize),
) -> Result<StepOutput> {
    let estimate = estimator.estimate(g, support)?;
    if estimate.degenerate {
        log::warn!("{} estimator returned a degenerate kernel", estimator.name());
    }
    let h = match &estimate.transfer {
        Some(t) => {
            t.check_dims(pad.0, pad.1)?;
            t.clone()
        }
        None => kernel_spectrum(&estimate.kernel, pad.0, pad.1)?,
    };
    let filter = build_modified_inverse(&h, c);
    let restored = apply_transfer(g, &filter, boundary)?;
    Ok(StepOutput { restored, estimate, filter })
}

/// One estimation + deblurring pass, padding with a margin of `support`.
pub fn probe_step(
    g: &Image,
    estimator: &mut dyn KernelEstimator,
    c: RegularizationConstant,
    support: usize,
    boundary: BoundaryMode,
) -> Result<StepOutput> {
    let pad = padded_dims(g.width(), g.height(), support, boundary);
    step_on_grid(g, estimator, c, support, boundary, pad)
}

/// Mean-removed periodogram of `img` extended onto the transform grid.
fn grid_psd(img: &Image, pad: (usize, usize), boundary: BoundaryMode) -> Result<Psd> {
    let mean = img.mean();
    let real = extend(&img.map(|v| v - mean), pad.0, pad.1, boundary)?;
    let mut data: Vec<_> = real.into_iter().map(|v| rustfft::num_complex::Complex64::new(v, 0.0)).collect();
    fft2_in_place(&mut data, pad.0, pad.1, false);
    let n = (pad.0 * pad.1) as f64;
    Psd::new(pad.0, pad.1, data.iter().map(|v| v.norm_sqr() / n).collect())
}

/// Signal and noise spectra for boost prediction in oracle mode.
struct BoostModel {
    s_u: Psd,
    s_n: Psd,
}

impl BoostModel {
    /// `S_u` comes from the truth when given, else from the input pushed
    /// through the first modified inverse filter.
    fn new(g: &Image, truth: Option<&Image>, h0: &Spectrum, config: &ProbeConfig, pad: (usize, usize)) -> Result<Self> {
        let s_u = match truth {
            Some(u) => grid_psd(u, pad, config.boundary)?,
            None => {
                let proxy = apply_transfer(g, &build_modified_inverse(h0, config.c), config.boundary)?;
                grid_psd(&proxy, pad, config.boundary)?
            }
        };
        let s_n = Psd::flat(pad.0, pad.1, config.noise_sigma * config.noise_sigma)?;
        Ok(Self { s_u, s_n })
    }

    fn boost_and_advance(&mut self, h: &Spectrum, c: f64) -> Result<f64> {
        let b = theory::boost(&self.s_u, &self.s_n, h, c)?;
        self.s_n = theory::evolve_noise_psd(&self.s_n, h, c)?;
        Ok(b)
    }
}

/// Runs the feedback loop on `g`. PSNR is reported when `truth` is given.
pub fn run_probe(g: &Image, config: &ProbeConfig, truth: Option<&Image>) -> Result<ProbeResult> {
    config.validate()?;
    if let Some(u) = truth {
        u.check_same_dims(g)?;
    }
    let c = config.c;
    let mut margin = config.initial_support;
    if let EstimatorChoice::Oracle { true_kernel } = &config.estimator {
        margin = margin.max(true_kernel.support());
    }
    // one transform grid for every iteration so filters compose bin by bin
    let pad = padded_dims(g.width(), g.height(), margin, config.boundary);

    let (mut estimator, mut boost_model): (Box<dyn KernelEstimator>, Option<BoostModel>) = match &config.estimator {
        EstimatorChoice::Oracle { true_kernel } => {
            let state = OracleState::from_kernel(true_kernel, pad.0, pad.1, c.value())?;
            let model = BoostModel::new(g, truth, state.initial(), config, pad)?;
            (Box::new(OracleEstimator::new(state)), Some(model))
        }
        EstimatorChoice::MapUch { params } => {
            if matches!(config.stop_policy, StopPolicy::BoostThreshold { .. }) {
                log::warn!("boost-threshold stopping needs the oracle estimator; running fixed iterations");
            }
            (Box::new(MapUchEstimator::new(params.clone())), None)
        }
    };

    let mut reports: Vec<IterationReport> = Vec::with_capacity(config.max_iters);
    let mut input = g.clone();
    let mut support = config.initial_support;
    let stop_reason = loop {
        let index = reports.len() + 1;
        let residual = estimator.residual_spectrum().cloned();
        let step = step_on_grid(&input, estimator.as_mut(), c, support, config.boundary, pad)?;
        let predicted_boost = match (&mut boost_model, &residual) {
            (Some(model), Some(h)) => Some(model.boost_and_advance(h, c.value())?),
            _ => None,
        };
        let psnr_vs_truth = truth.map(|u| psnr(u, &step.restored)).transpose()?;
        let report = IterationReport {
            index,
            support,
            residual_kernel: step.estimate.kernel,
            restored: step.restored,
            psnr_vs_truth,
            predicted_boost,
            filter: step.filter,
            degenerate: step.estimate.degenerate,
        };
        log::info!(
            "iteration {index}: support {support}, center mass {:.4}, psnr {:?}",
            report.residual_kernel.center_weight(),
            psnr_vs_truth
        );
        let delta_like = report.residual_kernel.is_delta_like(DELTA_LIKE_THRESHOLD);
        let boost_stop = match (config.stop_policy, predicted_boost) {
            (StopPolicy::BoostThreshold { tau }, Some(b)) => b <= tau,
            _ => false,
        };
        input = if config.clamp_feedback { report.restored.clamped() } else { report.restored.clone() };
        reports.push(report);
        estimator.advance(c.value());

        if index >= config.max_iters {
            break StopReason::MaxIterations;
        }
        if delta_like {
            break StopReason::DeltaKernel;
        }
        if boost_stop {
            break StopReason::BoostThreshold;
        }
        support = shrink_support(support);
    };

    let final_image = reports.last().expect("loop runs at least once").restored.clone();
    Ok(ProbeResult { final_image, reports, stop_reason })
}

/// Pointwise product of every applied modified inverse filter.
pub fn effective_filter(reports: &[IterationReport]) -> Result<Spectrum> {
    let (first, rest) = reports.split_first().ok_or_else(|| ProbeError::arg("no iteration reports"))?;
    rest.iter().try_fold(first.filter.clone(), |acc, r| acc.mul(&r.filter))
}
