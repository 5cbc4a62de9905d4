//! Normalized, odd-support blur kernels and their text format.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{ProbeError, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// Square point spread function with odd support and its origin at the center.
///
/// Weights are nonnegative and sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlurKernel {
    support: usize,
    weights: Vec<f64>,
}

impl BlurKernel {
    /// Wraps already-normalized weights, validating every invariant.
    pub fn new(support: usize, weights: Vec<f64>) -> Result<Self> {
        check_support(support)?;
        if weights.len() != support * support {
            return Err(ProbeError::dims(format!(
                "{} weights for support {support}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(ProbeError::arg("kernel weights must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(ProbeError::arg(format!("kernel weights sum to {sum}, expected 1")));
        }
        Ok(Self { support, weights })
    }

    /// Normalizes nonnegative weights to unit sum.
    pub fn normalized(support: usize, mut weights: Vec<f64>) -> Result<Self> {
        check_support(support)?;
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(ProbeError::arg("kernel weights must be finite and nonnegative"));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(ProbeError::arg("kernel weights sum to zero"));
        }
        weights.iter_mut().for_each(|w| *w /= sum);
        Self::new(support, weights)
    }

    pub fn delta(support: usize) -> Result<Self> {
        check_support(support)?;
        let mut weights = vec![0.0; support * support];
        weights[(support / 2) * support + support / 2] = 1.0;
        Ok(Self { support, weights })
    }

    /// Sampled isotropic Gaussian, truncated to `support` and renormalized.
    pub fn gaussian(sigma: f64, support: usize) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(ProbeError::arg(format!("gaussian sigma must be positive, got {sigma}")));
        }
        check_support(support)?;
        let r = (support / 2) as isize;
        let inv = 1.0 / (2.0 * sigma * sigma);
        let mut weights = Vec::with_capacity(support * support);
        for dy in -r..=r {
            for dx in -r..=r {
                weights.push((-((dx * dx + dy * dy) as f64) * inv).exp());
            }
        }
        Self::normalized(support, weights)
    }

    /// Uniform disk (defocus) kernel over pixel centers within `radius`.
    pub fn disk(radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(ProbeError::arg(format!("disk radius must be positive, got {radius}")));
        }
        let r = radius.floor() as isize;
        let support = (2 * r + 1) as usize;
        let mut weights = Vec::with_capacity(support * support);
        for dy in -r..=r {
            for dx in -r..=r {
                let inside = ((dx * dx + dy * dy) as f64) <= radius * radius;
                weights.push(if inside { 1.0 } else { 0.0 });
            }
        }
        Self::normalized(support, weights)
    }

    #[inline]
    pub fn support(&self) -> usize {
        self.support
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.support / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at offset `(dx, dy)` from the center.
    pub fn at(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius() as isize;
        if dx.abs() > r || dy.abs() > r {
            return 0.0;
        }
        self.weights[((dy + r) as usize) * self.support + (dx + r) as usize]
    }

    pub fn center_weight(&self) -> f64 {
        self.at(0, 0)
    }

    /// Total weight within a centered `(2·radius+1)²` window.
    pub fn mass_within(&self, radius: usize) -> f64 {
        let r = radius.min(self.radius()) as isize;
        let mut total = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                total += self.at(dx, dy);
            }
        }
        total
    }

    pub fn is_delta_like(&self, threshold: f64) -> bool {
        self.center_weight() >= threshold
    }

    /// Centered crop or zero-extension to a new odd support, renormalized.
    ///
    /// Falls back to a delta when cropping removes all mass.
    pub fn resized(&self, support: usize) -> Result<Self> {
        check_support(support)?;
        let r = (support / 2) as isize;
        let mut weights = Vec::with_capacity(support * support);
        for dy in -r..=r {
            for dx in -r..=r {
                weights.push(self.at(dx, dy));
            }
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Self::delta(support);
        }
        Self::normalized(support, weights)
    }

    /// Pearson correlation of the two kernels on their common (larger) support.
    pub fn correlation(&self, other: &BlurKernel) -> f64 {
        let r = self.radius().max(other.radius()) as isize;
        let n = ((2 * r + 1) * (2 * r + 1)) as f64;
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for dy in -r..=r {
            for dx in -r..=r {
                a.push(self.at(dx, dy));
                b.push(other.at(dx, dy));
            }
        }
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let mut num = 0.0;
        let mut va = 0.0;
        let mut vb = 0.0;
        for (x, y) in a.iter().zip(&b) {
            num += (x - ma) * (y - mb);
            va += (x - ma) * (x - ma);
            vb += (y - mb) * (y - mb);
        }
        if va == 0.0 || vb == 0.0 {
            return if va == vb { 1.0 } else { 0.0 };
        }
        num / (va * vb).sqrt()
    }

    /// Plain-text form: `support N` followed by N rows of N weights.
    pub fn to_text(&self) -> String {
        let mut out = format!("support {}\n", self.support);
        for row in self.weights.chunks(self.support) {
            let line: Vec<String> = row.iter().map(|w| format!("{w:.17e}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Parses the text form; weights are normalized on load.
    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |detail: String| ProbeError::Parse { what: "kernel file", detail };
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| bad("empty input".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("support") {
            return Err(bad(format!("expected `support N` header, got `{header}`")));
        }
        let support: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(format!("bad support in `{header}`")))?;
        check_support(support)?;
        let mut weights = Vec::with_capacity(support * support);
        for row in 0..support {
            let line = lines.next().ok_or_else(|| bad(format!("missing row {row}")))?;
            let values: Vec<f64> = line
                .split_whitespace()
                .map(|tok| tok.parse::<f64>().map_err(|e| bad(format!("row {row}: {e}"))))
                .collect::<Result<_>>()?;
            if values.len() != support {
                return Err(bad(format!("row {row} has {} values, expected {support}", values.len())));
            }
            weights.extend(values);
        }
        if lines.next().is_some() {
            return Err(bad("trailing data after kernel rows".into()));
        }
        Self::normalized(support, weights)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

pub(crate) fn check_support(support: usize) -> Result<()> {
    if support == 0 || support % 2 == 0 {
        return Err(ProbeError::arg(format!("kernel support must be odd and positive, got {support}")));
    }
    Ok(())
}

/// Next support in the shrinking schedule: `max(3, round(0.6·s))`, forced odd.
pub fn shrink_support(support: usize) -> usize {
    let next = ((support as f64) * 0.6).round() as usize;
    let next = if next % 2 == 0 { next + 1 } else { next };
    next.max(3)
}
