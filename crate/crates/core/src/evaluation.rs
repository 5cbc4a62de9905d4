//! Restoration quality metrics and a corpus benchmark.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ProbeError, Result};
use crate::filters::{deblur_with_margin, RegularizationConstant};
use crate::image::Image;
use crate::io::read_gray;
use crate::kernel::BlurKernel;
use crate::probe::{run_probe, EstimatorChoice, ProbeConfig};
use crate::spectral::{add_gaussian_noise, convolve};

/// Returned by [`psnr`] for identical images.
pub const PSNR_CAP: f64 = 99.0;

/// `−10·log10(MSE)` for gray levels in `[0, 1]`, capped at [`PSNR_CAP`].
pub fn psnr(u: &Image, u_hat: &Image) -> Result<f64> {
    u.check_same_dims(u_hat)?;
    let mse = u.data().iter().zip(u_hat.data()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / u.len() as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((-10.0 * mse.log10()).min(PSNR_CAP))
}

/// Sum of squared differences over the region `border` pixels in from
/// every edge.
pub fn ssd(u: &Image, u_hat: &Image, border: usize) -> Result<f64> {
    u.check_same_dims(u_hat)?;
    let (w, h) = (u.width(), u.height());
    if 2 * border >= w || 2 * border >= h {
        return Err(ProbeError::arg(format!("border {border} leaves no interior in a {w}x{h} image")));
    }
    let mut s = 0.0;
    for y in border..h - border {
        for x in border..w - border {
            let d = u.get(x, y) - u_hat.get(x, y);
            s += d * d;
        }
    }
    Ok(s)
}

/// `SSD(u, blind) / SSD(u, reference)` over the whole image.
pub fn error_ratio(u: &Image, blind: &Image, reference: &Image) -> Result<f64> {
    ErrorRatioRecord::new("", u, blind, reference, 0).map(|r| r.ratio)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorRatioRecord {
    pub id: String,
    pub ssd_blind: f64,
    pub ssd_reference: f64,
    pub ratio: f64,
}

impl ErrorRatioRecord {
    pub fn new(id: &str, u: &Image, blind: &Image, reference: &Image, border: usize) -> Result<Self> {
        let ssd_blind = ssd(u, blind, border)?;
        let ssd_reference = ssd(u, reference, border)?;
        if ssd_reference == 0.0 {
            return Err(ProbeError::arg("reference restoration equals the truth; error ratio undefined"));
        }
        Ok(Self { id: id.to_string(), ssd_blind, ssd_reference, ratio: ssd_blind / ssd_reference })
    }
}

/// `1.0, 1.1, …, 5.0`.
pub fn default_ratio_grid() -> Vec<f64> {
    (10..=50).map(|i| i as f64 / 10.0).collect()
}

/// Empirical CDF of `ratios` sampled at each grid point: the fraction of
/// ratios `≤ x`.
pub fn cumulative_curve(ratios: &[f64], grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if ratios.is_empty() {
        return Err(ProbeError::arg("cumulative curve of no ratios"));
    }
    let mut sorted = ratios.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    Ok(grid
        .iter()
        .map(|&x| (x, sorted.partition_point(|&r| r <= x) as f64 / n))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOptions {
    pub sigma_n: f64,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
    /// Regularization of the fixed non-blind reference for absolute ratios.
    pub c_ref: f64,
    pub ratio_grid: Vec<f64>,
}

impl Default for BenchmarkOptions {
    fn default() -> Self {
        Self { sigma_n: 0.0, threads: None, c_ref: 1e-3, ratio_grid: default_ratio_grid() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    /// `<image stem>/<kernel stem>`.
    pub id: String,
    pub psnr_blurred: Option<f64>,
    pub psnr_iterations: Vec<f64>,
    pub psnr_final: Option<f64>,
    pub relative: Option<ErrorRatioRecord>,
    pub absolute: Option<ErrorRatioRecord>,
    pub stop_reason: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub estimator: String,
    pub items: usize,
    pub failures: usize,
    pub mean_psnr_blurred: f64,
    pub mean_psnr_first: f64,
    pub mean_psnr_final: f64,
    pub relative_curve: Vec<(f64, f64)>,
    pub absolute_curve: Vec<(f64, f64)>,
    pub records: Vec<BenchmarkRecord>,
    /// Wall-clock per item; kept out of the main report so it stays
    /// reproducible.
    #[serde(skip)]
    pub timings_ms: BTreeMap<String, f64>,
}

impl BenchmarkReport {
    /// CSV with columns `ratio,relative_cdf,absolute_cdf`.
    pub fn curves_csv(&self) -> String {
        let mut s = String::from("ratio,relative_cdf,absolute_cdf\n");
        for (i, (x, r)) in self.relative_curve.iter().enumerate() {
            let a = self.absolute_curve.get(i).map(|p| p.1).unwrap_or(f64::NAN);
            s.push_str(&format!("{x},{r},{a}\n"));
        }
        s
    }

    pub fn timings_json(&self) -> String {
        serde_json::to_string_pretty(&self.timings_ms).expect("string map serializes")
    }
}

fn is_image(p: &Path) -> bool {
    matches!(
        p.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("png" | "pgm" | "pnm")
    )
}

fn sorted_files(dir: &Path, keep: impl Fn(&Path) -> bool) -> Result<Vec<PathBuf>> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && keep(p))
        .collect();
    v.sort();
    Ok(v)
}

fn stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

fn run_item(
    image: &Result<Image, String>,
    kernel: &Result<BlurKernel, String>,
    config: &ProbeConfig,
    options: &BenchmarkOptions,
    seed: u64,
    record: &mut BenchmarkRecord,
) -> Result<()> {
    let u = image.as_ref().map_err(|e| ProbeError::arg(e.clone()))?;
    let k = kernel.as_ref().map_err(|e| ProbeError::arg(e.clone()))?;
    let blurred = convolve(u, k, config.boundary);
    let g = add_gaussian_noise(&blurred, options.sigma_n, seed)?;
    let mut cfg = config.clone();
    cfg.seed = seed;
    cfg.noise_sigma = options.sigma_n;
    if let EstimatorChoice::Oracle { true_kernel } = &mut cfg.estimator {
        *true_kernel = k.clone();
    }
    let result = run_probe(&g, &cfg, Some(u))?;

    let margin = cfg.initial_support.max(k.support());
    let relative_ref = deblur_with_margin(&g, k, cfg.c, cfg.boundary, margin);
    let absolute_ref = deblur_with_margin(&g, k, RegularizationConstant::new(options.c_ref)?, cfg.boundary, margin);
    let border = k.support();
    record.psnr_blurred = Some(psnr(u, &g)?);
    record.psnr_iterations = result.reports.iter().filter_map(|r| r.psnr_vs_truth).collect();
    record.psnr_final = Some(psnr(u, &result.final_image)?);
    record.relative = Some(ErrorRatioRecord::new(&record.id, u, &result.final_image, &relative_ref, border)?);
    record.absolute = Some(ErrorRatioRecord::new(&record.id, u, &result.final_image, &absolute_ref, border)?);
    record.stop_reason = Some(result.stop_reason.to_string());
    Ok(())
}

/// Blurs every corpus image with every corpus kernel, adds noise, runs the
/// loop and scores it against two non-blind references: relative (true
/// kernel, the config's `C`) and absolute (true kernel, `c_ref`).
///
/// Layout: sharp images (`.png`, `.pgm`) directly in `corpus_dir`, kernels
/// as text files in `corpus_dir/kernels/`. With the oracle estimator the
/// kernel inside `config` is replaced by each item's synthesis kernel.
/// Unreadable files fail their items only.
pub fn run_benchmark(corpus_dir: &Path, config: &ProbeConfig, options: &BenchmarkOptions) -> Result<BenchmarkReport> {
    config.validate()?;
    if !(options.sigma_n >= 0.0) {
        return Err(ProbeError::arg("sigma_n must be nonnegative"));
    }
    RegularizationConstant::new(options.c_ref)?;
    let image_paths = sorted_files(corpus_dir, is_image)?;
    let kernel_paths = sorted_files(&corpus_dir.join("kernels"), |p| p.extension().is_some_and(|e| e == "txt"))?;
    if image_paths.is_empty() || kernel_paths.is_empty() {
        return Err(ProbeError::arg(format!(
            "corpus {} needs at least one image and one kernels/*.txt file",
            corpus_dir.display()
        )));
    }
    let images: Vec<(String, Result<Image, String>)> =
        image_paths.iter().map(|p| (stem(p), read_gray(p).map_err(|e| format!("{}: {e}", p.display())))).collect();
    let kernels: Vec<(String, Result<BlurKernel, String>)> =
        kernel_paths.iter().map(|p| (stem(p), BlurKernel::load(p).map_err(|e| format!("{}: {e}", p.display())))).collect();

    let jobs: Vec<(usize, usize)> = (0..images.len()).flat_map(|i| (0..kernels.len()).map(move |j| (i, j))).collect();
    let work = || {
        jobs.par_iter()
            .enumerate()
            .map(|(n, &(i, j))| {
                let id = format!("{}/{}", images[i].0, kernels[j].0);
                let mut record = BenchmarkRecord {
                    id: id.clone(),
                    psnr_blurred: None,
                    psnr_iterations: Vec::new(),
                    psnr_final: None,
                    relative: None,
                    absolute: None,
                    stop_reason: None,
                    error: None,
                };
                let start = Instant::now();
                let seed = config.seed.wrapping_add(n as u64);
                if let Err(e) = run_item(&images[i].1, &kernels[j].1, config, options, seed, &mut record) {
                    log::warn!("benchmark item {id} failed: {e}");
                    record.error = Some(e.to_string());
                }
                (record, start.elapsed().as_secs_f64() * 1e3)
            })
            .collect::<Vec<_>>()
    };
    let mut results = match options.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| ProbeError::arg(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    results.sort_by(|a, b| a.0.id.cmp(&b.0.id));

    let timings_ms = results.iter().map(|(r, t)| (r.id.clone(), *t)).collect();
    let records: Vec<BenchmarkRecord> = results.into_iter().map(|(r, _)| r).collect();
    let ok: Vec<&BenchmarkRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let curve = |f: fn(&BenchmarkRecord) -> Option<f64>| -> Vec<(f64, f64)> {
        let ratios: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
        cumulative_curve(&ratios, &options.ratio_grid).unwrap_or_default()
    };
    Ok(BenchmarkReport {
        estimator: config.estimator.name().to_string(),
        items: records.len(),
        failures: records.len() - ok.len(),
        mean_psnr_blurred: mean(ok.iter().filter_map(|r| r.psnr_blurred)),
        mean_psnr_first: mean(ok.iter().filter_map(|r| r.psnr_iterations.first().copied())),
        mean_psnr_final: mean(ok.iter().filter_map(|r| r.psnr_final)),
        relative_curve: curve(|r| r.relative.as_ref().map(|x| x.ratio)),
        absolute_curve: curve(|r| r.absolute.as_ref().map(|x| x.ratio)),
        records,
        timings_ms,
    })
}
