//! Frequency-domain model of the feedback loop under an oracle estimator.
//!
//! With the modified inverse filter and an estimator that returns the exact
//! residual blur, each frequency evolves independently by
//! `H ← H² / (H² + C)`. Everything here follows from that scalar map:
//! fixed points and regimes, convergence maps, residual MSE prediction and
//! the boost factor `B^l = MSE^l − MSE^{l+1}`.
//!
//! Spectral integrals are discretized as the mean over FFT bins, which makes
//! predicted MSE directly comparable to pixel-domain MSE.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{ProbeError, Result};
use crate::spectral::{Psd, Spectrum};

/// One oracle iteration at a single frequency: `h² / (h² + C)`.
#[inline]
pub fn oracle_step(h: f64, c: f64) -> f64 {
    let h2 = h * h;
    h2 / (h2 + c)
}

/// Nonzero roots of `x² − x + C = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoints {
    pub c: f64,
    /// `(1 − √(1−4C)) / 2`, about `C`; present only for `C < 1/4`.
    pub unstable: Option<f64>,
    /// `(1 + √(1−4C)) / 2`, about `1 − C`; present only for `C < 1/4`.
    pub stable: Option<f64>,
    /// The double root `1/2` at exactly `C = 1/4`.
    pub tangent: Option<f64>,
}

impl FixedPoints {
    /// Zero is a fixed point for every `C`.
    pub const ZERO: f64 = 0.0;

    pub fn all(&self) -> Vec<f64> {
        let mut v = vec![Self::ZERO];
        v.extend(self.unstable);
        v.extend(self.tangent);
        v.extend(self.stable);
        v
    }
}

pub fn fixed_points(c: f64) -> Result<FixedPoints> {
    check_c(c)?;
    let disc = 1.0 - 4.0 * c;
    if disc > 0.0 {
        let s = disc.sqrt();
        // stable form of the small root avoids cancellation for tiny C
        let stable = 0.5 * (1.0 + s);
        let unstable = c / stable;
        Ok(FixedPoints { c, unstable: Some(unstable), stable: Some(stable), tangent: None })
    } else if disc == 0.0 {
        Ok(FixedPoints { c, unstable: None, stable: None, tangent: Some(0.5) })
    } else {
        Ok(FixedPoints { c, unstable: None, stable: None, tangent: None })
    }
}

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(ProbeError::arg(format!("C must be positive, got {c}")));
    }
    Ok(())
}

/// Monotonicity regime of the scalar recursion from a starting coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    DecreasingToZero,
    IncreasingToStable,
    DecreasingToStable,
    Fixed,
}

/// Classifies `h0` against the exact roots. For `C ≥ 1/4` every positive
/// start collapses toward zero.
pub fn classify_regime(h0: f64, c: f64) -> Result<Regime> {
    check_c(c)?;
    if !(h0 >= 0.0) {
        return Err(ProbeError::arg(format!("h0 must be nonnegative, got {h0}")));
    }
    if h0 == 0.0 {
        return Ok(Regime::Fixed);
    }
    let fp = fixed_points(c)?;
    match (fp.unstable, fp.stable) {
        (Some(lo), Some(hi)) => Ok(if h0 < lo {
            Regime::DecreasingToZero
        } else if h0 == lo || h0 == hi {
            Regime::Fixed
        } else if h0 < hi {
            Regime::IncreasingToStable
        } else {
            Regime::DecreasingToStable
        }),
        _ => Ok(Regime::DecreasingToZero),
    }
}

/// Scalar trajectory `H_o^0 … H_o^L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecursionTrace {
    pub c: f64,
    pub h0: f64,
    pub values: Vec<f64>,
}

impl RecursionTrace {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("trace holds h0")
    }

    /// CSV rows `C,h0,l,value`.
    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "C,h0,l,value")?;
        for (l, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{},{},{}", self.c, self.h0, l, v)?;
        }
        Ok(())
    }
}

pub fn trace(h0: f64, c: f64, iterations: usize) -> Result<RecursionTrace> {
    check_c(c)?;
    if !(h0 >= 0.0) {
        return Err(ProbeError::arg(format!("h0 must be nonnegative, got {h0}")));
    }
    let mut values = Vec::with_capacity(iterations + 1);
    let mut h = h0;
    values.push(h);
    for _ in 0..iterations {
        h = oracle_step(h, c);
        values.push(h);
    }
    Ok(RecursionTrace { c, h0, values })
}

/// `l`-fold iterate over a grid: rows follow `h0_grid`, columns `c_grid`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceMap {
    pub iteration: usize,
    pub c_grid: Vec<f64>,
    pub h0_grid: Vec<f64>,
    /// Row-major, `h0_grid.len()` rows by `c_grid.len()` columns.
    pub values: Vec<f64>,
}

impl ConvergenceMap {
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.c_grid.len() + col]
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "C,h0,l,value")?;
        for (i, h0) in self.h0_grid.iter().enumerate() {
            for (j, c) in self.c_grid.iter().enumerate() {
                writeln!(out, "{},{},{},{}", c, h0, self.iteration, self.at(i, j))?;
            }
        }
        Ok(())
    }
}

pub fn convergence_map(c_grid: &[f64], h0_grid: &[f64], iteration: usize) -> Result<ConvergenceMap> {
    if c_grid.is_empty() || h0_grid.is_empty() {
        return Err(ProbeError::arg("convergence map grids must be nonempty"));
    }
    for &c in c_grid {
        check_c(c)?;
    }
    if h0_grid.iter().any(|h| !(*h >= 0.0)) {
        return Err(ProbeError::arg("h0 grid values must be nonnegative"));
    }
    let mut values = Vec::with_capacity(c_grid.len() * h0_grid.len());
    for &h0 in h0_grid {
        for &c in c_grid {
            let mut h = h0;
            for _ in 0..iteration {
                h = oracle_step(h, c);
            }
            values.push(h);
        }
    }
    Ok(ConvergenceMap { iteration, c_grid: c_grid.to_vec(), h0_grid: h0_grid.to_vec(), values })
}

/// `α = (h_l² + C)² / (h_{l+1}² + C)²`.
#[inline]
pub fn alpha(h_l: f64, h_next: f64, c: f64) -> f64 {
    ((h_l * h_l + c) / (h_next * h_next + c)).powi(2)
}

/// `β = h² / (h² + C)²`, the noise gain `|H_RI|²` of one filter pass.
#[inline]
pub fn beta(h: f64, c: f64) -> f64 {
    let h2 = h * h;
    h2 / ((h2 + c) * (h2 + c))
}

/// `S_n^{l+1} = S_n^l · |H_RI^l|²`.
pub fn evolve_noise_psd(s_n: &Psd, h: &Spectrum, c: f64) -> Result<Psd> {
    check_c(c)?;
    h.check_dims(s_n.width(), s_n.height())?;
    let values = s_n
        .values()
        .iter()
        .zip(h.data())
        .map(|(s, hv)| s * beta(hv.norm(), c))
        .collect();
    Psd::new(s_n.width(), s_n.height(), values)
}

fn mean(v: impl Iterator<Item = f64>, n: usize) -> f64 {
    v.sum::<f64>() / n as f64
}

/// Predicted residual MSE of the restoration produced from `H_o^l`:
/// `mean[ S_u·C²/(|H|²+C)² + β·S_n ]`.
pub fn mse_term(s_u: &Psd, s_n: &Psd, h: &[f64], c: f64) -> f64 {
    let n = h.len();
    mean(
        s_u.values().iter().zip(s_n.values()).zip(h).map(|((su, sn), &hv)| {
            let d = hv * hv + c;
            su * c * c / (d * d) + beta(hv, c) * sn
        }),
        n,
    )
}

/// `B = mean[S_u(1−α)C²/(|H^l|²+C)²] − mean[S_n^l(β^{l+1}−1)β^l]`.
pub fn boost(s_u: &Psd, s_n: &Psd, h: &Spectrum, c: f64) -> Result<f64> {
    check_c(c)?;
    let (w, hh) = (s_u.width(), s_u.height());
    s_n.check_dims(w, hh)?;
    h.check_dims(w, hh)?;
    let n = w * hh;
    let mut signal = 0.0;
    let mut noise = 0.0;
    for ((su, sn), hv) in s_u.values().iter().zip(s_n.values()).zip(h.data()) {
        let hl = hv.norm();
        let hn = oracle_step(hl, c);
        let d = hl * hl + c;
        signal += su * (1.0 - alpha(hl, hn, c)) * c * c / (d * d);
        noise += sn * (beta(hn, c) - 1.0) * beta(hl, c);
    }
    Ok((signal - noise) / n as f64)
}

/// Per-iteration prediction of the loop's residual error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsePrediction {
    pub c: f64,
    pub mse: Vec<f64>,
    pub psnr: Vec<f64>,
    /// `boost[l] = MSE^l − MSE^{l+1}`.
    pub boost: Vec<f64>,
    /// Mean noise PSD level entering each iteration.
    pub noise_level: Vec<f64>,
    #[serde(skip)]
    pub noise_psd: Vec<Psd>,
}

/// `−10·log10(MSE)` with gray levels in `[0, 1]`.
pub fn mse_to_psnr(mse: f64) -> f64 {
    -10.0 * mse.log10()
}

/// Predicts MSE/PSNR for `iterations` loop passes (`l = 0 … L−1`).
pub fn predict_mse(s_u: &Psd, s_n0: &Psd, h0: &Spectrum, c: f64, iterations: usize) -> Result<MsePrediction> {
    check_c(c)?;
    let (w, hh) = (s_u.width(), s_u.height());
    s_n0.check_dims(w, hh)?;
    h0.check_dims(w, hh)?;
    let mut h: Vec<f64> = h0.magnitudes();
    let mut s_n = s_n0.clone();
    let mut out = MsePrediction {
        c,
        mse: Vec::with_capacity(iterations),
        psnr: Vec::with_capacity(iterations),
        boost: Vec::with_capacity(iterations),
        noise_level: Vec::with_capacity(iterations),
        noise_psd: Vec::with_capacity(iterations),
    };
    for _ in 0..iterations {
        let mse = mse_term(s_u, &s_n, &h, c);
        let spec = Spectrum::from_real(w, hh, &h)?;
        out.boost.push(boost(s_u, &s_n, &spec, c)?);
        out.mse.push(mse);
        out.psnr.push(mse_to_psnr(mse));
        out.noise_level.push(s_n.mean());
        out.noise_psd.push(s_n.clone());
        s_n = evolve_noise_psd(&s_n, &spec, c)?;
        h.iter_mut().for_each(|v| *v = oracle_step(*v, c));
    }
    Ok(out)
}

/// Which of the two sufficient boosting conditions holds for `h0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionFlags {
    /// `h0 ∈ (0, C) ∪ (1−C, 1)`: the noise term reduces the error.
    pub beta_condition: bool,
    /// `h0 ∈ (C, 1−C)`: the signal term reduces the error.
    pub alpha_condition: bool,
}

pub fn check_conditions(h0: f64, c: f64) -> Result<ConditionFlags> {
    check_c(c)?;
    if !(h0 >= 0.0) {
        return Err(ProbeError::arg(format!("h0 must be nonnegative, got {h0}")));
    }
    let beta_condition = (h0 > 0.0 && h0 < c) || (h0 > 1.0 - c && h0 < 1.0);
    let alpha_condition = h0 > c && h0 < 1.0 - c;
    Ok(ConditionFlags { beta_condition, alpha_condition })
}

/// Effective noise with an imperfect estimator: `S_ñ = S_u·S_err + S_n`.
pub fn effective_noise_model(s_n: &Psd, s_u: &Psd, kernel_error: &Psd) -> Result<Psd> {
    let (w, h) = (s_n.width(), s_n.height());
    s_u.check_dims(w, h)?;
    kernel_error.check_dims(w, h)?;
    let values = s_n
        .values()
        .iter()
        .zip(s_u.values())
        .zip(kernel_error.values())
        .map(|((n, u), e)| u * e + n)
        .collect();
    Psd::new(w, h, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_examples() {
        assert!((oracle_step(0.5, 0.01) - 0.25 / 0.26).abs() < 1e-15);
        assert_eq!(oracle_step(0.0, 0.01), 0.0);
    }

    #[test]
    fn roots_for_small_c() {
        let fp = fixed_points(0.01).unwrap();
        let (lo, hi) = (fp.unstable.unwrap(), fp.stable.unwrap());
        assert!((lo - 0.010102).abs() < 1e-6);
        assert!((hi - 0.989898).abs() < 1e-6);
        for r in [lo, hi] {
            assert!((oracle_step(r, 0.01) - r).abs() < 1e-15);
        }
    }

    #[test]
    fn roots_at_and_above_quarter() {
        let fp = fixed_points(0.25).unwrap();
        assert_eq!(fp.tangent, Some(0.5));
        assert!(fp.stable.is_none() && fp.unstable.is_none());
        let fp = fixed_points(0.3).unwrap();
        assert_eq!(fp.all(), vec![0.0]);
        assert!(fixed_points(0.0).is_err());
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(0.005, 0.01).unwrap(), Regime::DecreasingToZero);
        assert_eq!(classify_regime(0.5, 0.01).unwrap(), Regime::IncreasingToStable);
        assert_eq!(classify_regime(1.2, 0.01).unwrap(), Regime::DecreasingToStable);
        assert_eq!(classify_regime(0.9, 0.3).unwrap(), Regime::DecreasingToZero);
        assert_eq!(classify_regime(0.0, 0.01).unwrap(), Regime::Fixed);
        let hi = fixed_points(0.01).unwrap().stable.unwrap();
        assert_eq!(classify_regime(hi, 0.01).unwrap(), Regime::Fixed);
    }

    #[test]
    fn alpha_beta_examples() {
        assert_eq!(alpha(0.3, 0.3, 0.01), 1.0);
        let hi = fixed_points(0.01).unwrap().stable.unwrap();
        assert!((beta(hi, 0.01) - 1.0).abs() < 1e-12);
        assert_eq!(beta(0.0, 0.01), 0.0);
    }

    #[test]
    fn conditions_examples() {
        let f = check_conditions(0.5, 0.01).unwrap();
        assert!(f.alpha_condition && !f.beta_condition);
        let f = check_conditions(0.995, 0.01).unwrap();
        assert!(f.beta_condition && !f.alpha_condition);
    }

    #[test]
    fn psnr_arithmetic() {
        assert!((mse_to_psnr(0.001) - 30.0).abs() < 1e-12);
    }

    #[test]
    fn flat_prediction_first_mse() {
        let s_u = Psd::flat(4, 4, 1.0).unwrap();
        let s_n = Psd::flat(4, 4, 0.0).unwrap();
        let h = Spectrum::from_real(4, 4, &[1.0; 16]).unwrap();
        let p = predict_mse(&s_u, &s_n, &h, 0.01, 2).unwrap();
        let expected = 0.01f64.powi(2) / 1.01f64.powi(2);
        assert!((p.mse[0] - expected).abs() < 1e-18);
        assert!((p.mse[0] - 9.803e-5).abs() < 1e-8);
    }

    #[test]
    fn noise_evolution_examples() {
        let s = Psd::flat(3, 3, 0.04).unwrap();
        let one = Spectrum::from_real(3, 3, &[1.0; 9]).unwrap();
        let out = evolve_noise_psd(&s, &one, 0.01).unwrap();
        assert!(out.values().iter().all(|v| (v - 0.04 / 1.01f64.powi(2)).abs() < 1e-15));
        let zero = Spectrum::from_real(3, 3, &[0.0; 9]).unwrap();
        assert!(evolve_noise_psd(&s, &zero, 0.01).unwrap().values().iter().all(|&v| v == 0.0));
        let mismatched = Spectrum::from_real(1, 1, &[1.0]).unwrap();
        assert!(evolve_noise_psd(&s, &mismatched, 0.01).is_err());
    }

    #[test]
    fn effective_noise_examples() {
        let s_n = Psd::flat(2, 2, 1e-4).unwrap();
        let s_u = Psd::flat(2, 2, 0.5).unwrap();
        let zero = Psd::flat(2, 2, 0.0).unwrap();
        assert_eq!(effective_noise_model(&s_n, &s_u, &zero).unwrap(), s_n);
        let err = Psd::flat(2, 2, 1e-3).unwrap();
        let floor = effective_noise_model(&zero, &s_u, &err).unwrap();
        assert!(floor.values().iter().all(|&v| v > 0.0));
        let doubled = effective_noise_model(&zero, &Psd::flat(2, 2, 1.0).unwrap(), &err).unwrap();
        assert!((doubled.values()[0] - 2.0 * floor.values()[0]).abs() < 1e-18);
    }
}
