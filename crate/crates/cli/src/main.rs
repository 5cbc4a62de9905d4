//! `probe`: recursive blind deblurring from the command line.
//!
//! Exit codes: 0 on success, 1 on internal failure, 2 on usage or input
//! errors. Every file a command writes gets a `<file>.manifest.json` (or a
//! `manifest.json` in its output directory) recording arguments, resolved
//! configuration and seed.

mod error;
mod manifest;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use probe_core::estimate::MapUchParams;
use probe_core::evaluation::{run_benchmark, BenchmarkOptions};
use probe_core::image::Image;
use probe_core::io::{read_gray, read_raster, write_planes, BitDepth};
use probe_core::probe::{EstimatorChoice, IterationReport};
use probe_core::spectral::{add_gaussian_noise, apply_transfer, convolve, kernel_spectrum, periodogram};
use probe_core::synthetic::{natural_scene, test_card};
use probe_core::theory::{self, check_conditions, fixed_points, predict_mse};
use probe_core::{run_probe, BlurKernel, BoundaryMode, ProbeConfig, Psd, RegularizationConstant, StopPolicy};

use crate::error::{reading, writing, CliError};
use crate::manifest::Manifest;

#[derive(Parser)]
#[command(name = "probe", version, about = "Recursive blind deblurring and its oracle convergence analysis")]
struct Cli {
    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Deblur an image by iterated residual-blur estimation.
    Deblur(DeblurArgs),
    /// Scalar oracle recursion: a single trace or convergence maps (CSV).
    Simulate(SimulateArgs),
    /// Predicted MSE, PSNR and boost per iteration for a sharp image and kernel (JSON).
    Predict(PredictArgs),
    /// Blur (and optionally add noise to) a sharp image.
    Synth(SynthArgs),
    /// Write a synthetic sharp test image.
    Generate(GenerateArgs),
    /// Benchmark over a corpus of sharp images and kernels.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Mapuch,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Reflective,
    Periodic,
}

impl From<BoundaryArg> for BoundaryMode {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Reflective => BoundaryMode::Reflective,
            BoundaryArg::Periodic => BoundaryMode::Periodic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StopArg {
    /// Always run `--iters` iterations (early exit on a delta kernel).
    Fixed,
    /// Stop once the predicted boost drops to `--tau` (oracle mode only).
    Boost,
}

#[derive(Args)]
struct LoopArgs {
    #[arg(long, value_enum, default_value = "mapuch")]
    estimator: EstimatorArg,
    /// Regularization constant C of the modified inverse filter.
    #[arg(long = "c-reg", default_value_t = RegularizationConstant::DEFAULT)]
    c_reg: f64,
    #[arg(long, default_value_t = 3)]
    iters: usize,
    /// Kernel support (odd) at the first iteration.
    #[arg(long, default_value_t = 15)]
    support: usize,
    #[arg(long, value_enum, default_value = "reflective")]
    boundary: BoundaryArg,
    #[arg(long, value_enum, default_value = "fixed")]
    stop: StopArg,
    /// Boost threshold for `--stop boost`.
    #[arg(long, default_value_t = 0.0)]
    tau: f64,
    /// Feed back unclamped restorations.
    #[arg(long)]
    no_clamp: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl LoopArgs {
    fn config(&self, estimator: EstimatorChoice) -> Result<ProbeConfig, CliError> {
        let config = ProbeConfig {
            c: RegularizationConstant::new(self.c_reg)?,
            max_iters: self.iters,
            stop_policy: match self.stop {
                StopArg::Fixed => StopPolicy::Fixed,
                StopArg::Boost => StopPolicy::BoostThreshold { tau: self.tau },
            },
            boundary: self.boundary.into(),
            initial_support: self.support,
            estimator,
            seed: self.seed,
            clamp_feedback: !self.no_clamp,
            noise_sigma: 0.0,
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct DeblurArgs {
    input: PathBuf,
    output: PathBuf,
    #[command(flatten)]
    run: LoopArgs,
    /// Kernel text file used by the oracle estimator.
    #[arg(long, required_if_eq("estimator", "oracle"))]
    true_kernel: Option<PathBuf>,
    /// Sharp image; enables per-iteration PSNR in the report.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Noise level of the input, used for boost prediction in oracle mode.
    #[arg(long, default_value_t = 0.0)]
    noise_sigma: f64,
    /// Deblur each RGB channel with the kernels estimated on luminance.
    #[arg(long)]
    per_channel: bool,
    /// Directory for per-iteration images, kernels and `report.json`.
    #[arg(long)]
    dump_iters: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, required_unless_present = "map")]
    c: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    h0: f64,
    #[arg(long, default_value_t = 30)]
    iters: usize,
    /// Print the fixed points of `--c` as JSON instead of a trace.
    #[arg(long, conflicts_with = "map")]
    fixed_points: bool,
    /// Trace CSV path; stdout when absent.
    #[arg(long, conflicts_with = "map")]
    out: Option<PathBuf>,
    /// Write one convergence map per iteration `0..=max-iteration`.
    #[arg(long)]
    map: bool,
    /// C grid as `start:stop:count`.
    #[arg(long, default_value = "0.0025:0.25:100")]
    c_grid: String,
    /// h0 grid as `start:stop:count`.
    #[arg(long, default_value = "0:1.5:151")]
    h0_grid: String,
    #[arg(long, default_value_t = 5)]
    max_iteration: usize,
    #[arg(long, default_value = "convergence_maps")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Sharp image providing the signal spectrum.
    image: PathBuf,
    #[arg(long)]
    kernel: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    sigma_n: f64,
    #[arg(long, default_value_t = RegularizationConstant::DEFAULT)]
    c: f64,
    #[arg(long, default_value_t = 3)]
    iters: usize,
    /// JSON path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum KernelType {
    Gaussian,
    Disk,
    Delta,
    File,
}

#[derive(Args)]
struct SynthArgs {
    input: PathBuf,
    output: PathBuf,
    #[arg(long, value_enum, default_value = "gaussian")]
    kernel_type: KernelType,
    /// Gaussian standard deviation or disk radius.
    #[arg(long, default_value_t = 2.0)]
    sigma: f64,
    /// Gaussian support; defaults to `2·ceil(3σ)+1`.
    #[arg(long)]
    support: Option<usize>,
    /// Kernel text file for `--kernel-type file`.
    #[arg(long, required_if_eq("kernel_type", "file"))]
    kernel: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    sigma_n: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "reflective")]
    boundary: BoundaryArg,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum SceneKind {
    Card,
    Scene,
}

#[derive(Args)]
struct GenerateArgs {
    output: PathBuf,
    #[arg(long, value_enum, default_value = "card")]
    kind: SceneKind,
    #[arg(long, default_value_t = 255)]
    width: usize,
    /// Defaults to the width.
    #[arg(long)]
    height: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of sharp images with kernel files under `kernels/`.
    corpus: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    run: LoopArgs,
    #[arg(long, default_value_t = 0.0)]
    sigma_n: f64,
    /// C of the fixed non-blind reference behind absolute error ratios.
    #[arg(long, default_value_t = 1e-3)]
    c_ref: f64,
    /// Also write wall-clock times per item (not reproducible).
    #[arg(long)]
    timings: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PROBE_LOG", level)).init();

    let outcome = std::panic::catch_unwind(|| match &cli.command {
        Command::Deblur(a) => deblur(a),
        Command::Simulate(a) => simulate(a),
        Command::Predict(a) => predict(a),
        Command::Synth(a) => synth(a),
        Command::Generate(a) => generate(a),
        Command::Bench(a) => bench(a),
    });
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(1),
    }
}

fn write_image(path: &Path, planes: &[Image], depth: BitDepth) -> Result<(), CliError> {
    let refs: Vec<&Image> = planes.iter().collect();
    write_planes(path, &refs, depth).map_err(writing(path))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(writing(path))
}

fn to_json(value: &impl Serialize) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map(|s| s + "\n").map_err(|e| CliError::Internal(e.to_string()))
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(writing(dir))
}

/// Replays the luminance filters on each color plane.
fn replay_planes(planes: &[Image], reports: &[IterationReport], config: &ProbeConfig) -> Result<Vec<Vec<Image>>, CliError> {
    let mut current = planes.to_vec();
    let mut out = Vec::with_capacity(reports.len());
    for r in reports {
        let restored = current
            .iter()
            .map(|p| apply_transfer(p, &r.filter, config.boundary))
            .collect::<Result<Vec<_>, _>>()?;
        current = restored.iter().map(|p| if config.clamp_feedback { p.clamped() } else { p.clone() }).collect();
        out.push(restored);
    }
    Ok(out)
}

fn deblur(a: &DeblurArgs) -> Result<(), CliError> {
    let raster = read_raster(&a.input).map_err(reading(&a.input))?;
    let truth = a.truth.as_deref().map(|p| read_gray(p).map_err(reading(p))).transpose()?;
    let estimator = match a.run.estimator {
        EstimatorArg::Mapuch => EstimatorChoice::MapUch { params: MapUchParams::default() },
        EstimatorArg::Oracle => {
            let path = a.true_kernel.as_deref().ok_or_else(|| CliError::usage("oracle estimator needs --true-kernel"))?;
            EstimatorChoice::Oracle { true_kernel: BlurKernel::load(path).map_err(reading(path))? }
        }
    };
    let mut config = a.run.config(estimator)?;
    config.noise_sigma = a.noise_sigma;
    config.validate()?;

    let gray = raster.luminance();
    let result = run_probe(&gray, &config, truth.as_ref())?;
    let per_iteration: Vec<Vec<Image>> = if a.per_channel && raster.is_color() {
        replay_planes(&raster.planes, &result.reports, &config)?
    } else {
        if a.per_channel {
            log::warn!("--per-channel ignored for a grayscale input");
        }
        result.reports.iter().map(|r| vec![r.restored.clone()]).collect()
    };
    let last = per_iteration.last().expect("at least one iteration");
    write_image(&a.output, last, raster.depth)?;

    let mut manifest = Manifest::new("deblur", Some(config.seed), &config)?;
    manifest.output(&a.output);
    if let Some(dir) = &a.dump_iters {
        create_dir(dir)?;
        for (report, planes) in result.reports.iter().zip(&per_iteration) {
            let img = dir.join(format!("iter_{:02}.png", report.index));
            write_image(&img, planes, raster.depth)?;
            let kernel = dir.join(format!("kernel_{:02}.txt", report.index));
            report.residual_kernel.save(&kernel).map_err(writing(&kernel))?;
            manifest.output(&img);
            manifest.output(&kernel);
        }
        let report = dir.join("report.json");
        write_text(&report, &to_json(&result.summary(config.estimator.name()))?)?;
        manifest.output(&report);
    }
    log::info!("stopped: {}", result.stop_reason);
    manifest.write_beside(&a.output)?;
    Ok(())
}

/// Parses `start:stop:count` into `count` evenly spaced values.
fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::usage(format!("grid `{spec}` is not start:stop:count"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(bad());
    };
    let start: f64 = start.trim().parse().map_err(|_| bad())?;
    let stop: f64 = stop.trim().parse().map_err(|_| bad())?;
    let count: usize = count.trim().parse().map_err(|_| bad())?;
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| if i == count - 1 { stop } else { start + step * i as f64 }).collect())
}

#[derive(Serialize)]
struct MapConfig<'a> {
    c_grid: &'a [f64],
    h0_grid: &'a [f64],
    max_iteration: usize,
}

#[derive(Serialize)]
struct TraceConfig {
    c: f64,
    h0: f64,
    iters: usize,
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    if a.map {
        let c_grid = parse_grid(&a.c_grid)?;
        let h0_grid = parse_grid(&a.h0_grid)?;
        create_dir(&a.out_dir)?;
        let config = MapConfig { c_grid: &c_grid, h0_grid: &h0_grid, max_iteration: a.max_iteration };
        let mut manifest = Manifest::new("simulate", None, &config)?;
        for l in 0..=a.max_iteration {
            let map = theory::convergence_map(&c_grid, &h0_grid, l)?;
            let path = a.out_dir.join(format!("map_l{l}.csv"));
            let mut buf = Vec::new();
            map.write_csv(&mut buf).map_err(writing(&path))?;
            fs::write(&path, buf).map_err(writing(&path))?;
            manifest.output(&path);
        }
        return manifest.write_to(&a.out_dir.join("manifest.json"));
    }

    let c = a.c.expect("clap requires --c without --map");
    if a.fixed_points {
        let fp = fixed_points(c)?;
        print!("{}", to_json(&fp)?);
        return Ok(());
    }
    let trace = theory::trace(a.h0, c, a.iters)?;
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).map_err(|e| CliError::Internal(e.to_string()))?;
    match &a.out {
        Some(path) => {
            fs::write(path, &buf).map_err(writing(path))?;
            let mut manifest = Manifest::new("simulate", None, TraceConfig { c, h0: a.h0, iters: a.iters })?;
            manifest.output(path);
            manifest.write_beside(path)?;
        }
        None => std::io::stdout().write_all(&buf).map_err(|e| CliError::Internal(e.to_string()))?,
    }
    Ok(())
}

#[derive(Serialize)]
struct PredictedIteration {
    l: usize,
    mse: f64,
    psnr: f64,
    boost: f64,
    noise_level: f64,
}

/// How many transfer bins satisfy each sufficient boosting condition.
#[derive(Serialize)]
struct ConditionSummary {
    bins: usize,
    beta_condition: usize,
    alpha_condition: usize,
    neither: usize,
}

#[derive(Serialize)]
struct PredictReport {
    c: f64,
    sigma_n: f64,
    kernel_support: usize,
    iterations: Vec<PredictedIteration>,
    conditions: ConditionSummary,
}

fn predict(a: &PredictArgs) -> Result<(), CliError> {
    let u = read_gray(&a.image).map_err(reading(&a.image))?;
    let kernel = BlurKernel::load(&a.kernel).map_err(reading(&a.kernel))?;
    if !(a.sigma_n >= 0.0) || !a.sigma_n.is_finite() {
        return Err(CliError::usage("--sigma-n must be nonnegative"));
    }
    RegularizationConstant::new(a.c)?;
    let (w, h) = (u.width(), u.height());
    let h0 = kernel_spectrum(&kernel, w, h)?;
    let s_u = periodogram(&u);
    let s_n = Psd::flat(w, h, a.sigma_n * a.sigma_n)?;
    let pred = predict_mse(&s_u, &s_n, &h0, a.c, a.iters)?;

    let mut conditions = ConditionSummary { bins: 0, beta_condition: 0, alpha_condition: 0, neither: 0 };
    for m in h0.magnitudes() {
        let flags = check_conditions(m, a.c)?;
        conditions.bins += 1;
        match (flags.beta_condition, flags.alpha_condition) {
            (true, _) => conditions.beta_condition += 1,
            (_, true) => conditions.alpha_condition += 1,
            _ => conditions.neither += 1,
        }
    }
    let report = PredictReport {
        c: a.c,
        sigma_n: a.sigma_n,
        kernel_support: kernel.support(),
        iterations: (0..pred.mse.len())
            .map(|l| PredictedIteration {
                l,
                mse: pred.mse[l],
                psnr: pred.psnr[l],
                boost: pred.boost[l],
                noise_level: pred.noise_level[l],
            })
            .collect(),
        conditions,
    };
    let text = to_json(&report)?;
    match &a.out {
        Some(path) => {
            write_text(path, &text)?;
            #[derive(Serialize)]
            struct Config<'a> {
                kernel: &'a Path,
                sigma_n: f64,
                c: f64,
                iters: usize,
            }
            let config = Config { kernel: &a.kernel, sigma_n: a.sigma_n, c: a.c, iters: a.iters };
            let mut manifest = Manifest::new("predict", None, config)?;
            manifest.output(path);
            manifest.write_beside(path)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn synth_kernel(a: &SynthArgs) -> Result<BlurKernel, CliError> {
    Ok(match a.kernel_type {
        KernelType::Gaussian => {
            let support = a.support.unwrap_or(2 * (3.0 * a.sigma).ceil() as usize + 1);
            BlurKernel::gaussian(a.sigma, support)?
        }
        KernelType::Disk => BlurKernel::disk(a.sigma)?,
        KernelType::Delta => BlurKernel::delta(1)?,
        KernelType::File => {
            let path = a.kernel.as_deref().ok_or_else(|| CliError::usage("--kernel-type file needs --kernel"))?;
            BlurKernel::load(path).map_err(reading(path))?
        }
    })
}

fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let raster = read_raster(&a.input).map_err(reading(&a.input))?;
    let kernel = synth_kernel(a)?;
    let boundary: BoundaryMode = a.boundary.into();
    let planes = raster
        .planes
        .iter()
        .enumerate()
        .map(|(i, p)| add_gaussian_noise(&convolve(p, &kernel, boundary), a.sigma_n, a.seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    write_image(&a.output, &planes, raster.depth)?;
    let kernel_path = a.output.with_extension("kernel.txt");
    kernel.save(&kernel_path).map_err(writing(&kernel_path))?;

    #[derive(Serialize)]
    struct Config {
        kernel_type: KernelType,
        kernel_support: usize,
        sigma: f64,
        sigma_n: f64,
        boundary: BoundaryMode,
    }
    let config = Config {
        kernel_type: a.kernel_type,
        kernel_support: kernel.support(),
        sigma: a.sigma,
        sigma_n: a.sigma_n,
        boundary,
    };
    let mut manifest = Manifest::new("synth", Some(a.seed), config)?;
    manifest.output(&a.output);
    manifest.output(&kernel_path);
    manifest.write_beside(&a.output)?;
    Ok(())
}

fn generate(a: &GenerateArgs) -> Result<(), CliError> {
    let (w, h) = (a.width, a.height.unwrap_or(a.width));
    if w < 8 || h < 8 {
        return Err(CliError::usage("images must be at least 8x8"));
    }
    let img = match a.kind {
        SceneKind::Card => test_card(w, h),
        SceneKind::Scene => natural_scene(w, h, a.seed),
    };
    write_image(&a.output, &[img], BitDepth::Eight)?;
    #[derive(Serialize)]
    struct Config {
        kind: SceneKind,
        width: usize,
        height: usize,
    }
    let mut manifest = Manifest::new("generate", Some(a.seed), Config { kind: a.kind, width: w, height: h })?;
    manifest.output(&a.output);
    manifest.write_beside(&a.output)?;
    Ok(())
}

fn bench_threads() -> Result<Option<usize>, CliError> {
    match std::env::var("PROBE_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| CliError::usage(format!("PROBE_THREADS must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn bench(a: &BenchArgs) -> Result<(), CliError> {
    if !a.corpus.is_dir() {
        return Err(CliError::usage(format!("corpus directory {} not found", a.corpus.display())));
    }
    let estimator = match a.run.estimator {
        EstimatorArg::Mapuch => EstimatorChoice::MapUch { params: MapUchParams::default() },
        // replaced by each item's own kernel
        EstimatorArg::Oracle => EstimatorChoice::Oracle { true_kernel: BlurKernel::delta(1)? },
    };
    let config = a.run.config(estimator)?;
    let options = BenchmarkOptions { sigma_n: a.sigma_n, threads: bench_threads()?, c_ref: a.c_ref, ..Default::default() };
    let report = run_benchmark(&a.corpus, &config, &options)?;

    create_dir(&a.out_dir)?;
    #[derive(Serialize)]
    struct Config<'a> {
        probe: &'a ProbeConfig,
        sigma_n: f64,
        c_ref: f64,
        ratio_grid: &'a [f64],
    }
    let mut manifest = Manifest::new(
        "bench",
        Some(config.seed),
        Config { probe: &config, sigma_n: options.sigma_n, c_ref: options.c_ref, ratio_grid: &options.ratio_grid },
    )?;
    let report_path = a.out_dir.join("report.json");
    write_text(&report_path, &to_json(&report)?)?;
    manifest.output(&report_path);
    let curves = a.out_dir.join("curves.csv");
    write_text(&curves, &report.curves_csv())?;
    manifest.output(&curves);
    if a.timings {
        let path = a.out_dir.join("timings.json");
        write_text(&path, &(report.timings_json() + "\n"))?;
        manifest.output(&path);
    }
    manifest.write_to(&a.out_dir.join("manifest.json"))?;
    if report.failures > 0 {
        log::warn!("{} of {} benchmark items failed", report.failures, report.items);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid("0.25:9:1").unwrap(), vec![0.25]);
        let g = parse_grid("0.0025:0.25:100").unwrap();
        assert_eq!(g.len(), 100);
        assert_eq!(*g.last().unwrap(), 0.25);
        for bad in ["", "1:2", "a:1:2", "0:1:0", "0:1:2:3"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
