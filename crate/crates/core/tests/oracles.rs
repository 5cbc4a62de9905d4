//! Library results checked against independent reference computations.

use std::f64::consts::PI;

use probe_core::estimate::{oracle_estimate, OracleState};
use probe_core::evaluation::{error_ratio, psnr, run_benchmark, BenchmarkOptions};
use probe_core::filters::{build_modified_inverse, deblur, tikhonov_direct};
use probe_core::io::{read_gray, write_gray, BitDepth};
use probe_core::probe::{run_probe, EstimatorChoice, ProbeConfig};
use probe_core::spectral::{convolve, kernel_spectrum, periodogram, BoundaryMode, Psd, Spectrum};
use probe_core::synthetic::{natural_scene, test_card};
use probe_core::theory::{effective_noise_model, evolve_noise_psd, fixed_points, predict_mse};
use probe_core::{BlurKernel, Image, RegularizationConstant};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_image(r: &mut ChaCha8Rng, w: usize, h: usize) -> Image {
    Image::from_fn(w, h, |_, _| r.random_range(0.0..1.0))
}

fn random_kernel(r: &mut ChaCha8Rng, support: usize) -> BlurKernel {
    BlurKernel::normalized(support, (0..support * support).map(|_| r.random_range(0.0..1.0)).collect()).unwrap()
}

fn c(v: f64) -> RegularizationConstant {
    RegularizationConstant::new(v).unwrap()
}

fn max_abs_diff(a: &Image, b: &Image) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Spatial-domain periodic convolution, straight from the definition.
fn brute_force_periodic(u: &Image, k: &BlurKernel) -> Image {
    let (w, h) = (u.width() as isize, u.height() as isize);
    let r = k.radius() as isize;
    Image::from_fn(u.width(), u.height(), |x, y| {
        let mut s = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                let sx = (x as isize - dx).rem_euclid(w) as usize;
                let sy = (y as isize - dy).rem_euclid(h) as usize;
                s += k.at(dx, dy) * u.get(sx, sy);
            }
        }
        s
    })
}

/// O(N²) DFT of a kernel embedded with its center at the origin.
fn naive_kernel_dft(k: &BlurKernel, w: usize, h: usize) -> Vec<Complex64> {
    let r = k.radius() as isize;
    let mut out = Vec::with_capacity(w * h);
    for ky in 0..h {
        for kx in 0..w {
            let mut s = Complex64::new(0.0, 0.0);
            for dy in -r..=r {
                for dx in -r..=r {
                    let phase = -2.0 * PI * (kx as f64 * dx as f64 / w as f64 + ky as f64 * dy as f64 / h as f64);
                    s += k.at(dx, dy) * Complex64::from_polar(1.0, phase);
                }
            }
            out.push(s);
        }
    }
    out
}

#[test]
fn periodic_convolution_matches_spatial_sum() {
    let mut r = rng(1);
    for (w, h, support) in [(13, 11, 5), (8, 8, 3), (16, 9, 7), (6, 10, 1)] {
        let u = random_image(&mut r, w, h);
        let k = random_kernel(&mut r, support);
        let fast = convolve(&u, &k, BoundaryMode::Periodic);
        assert!(max_abs_diff(&fast, &brute_force_periodic(&u, &k)) < 1e-12, "{w}x{h} support {support}");
    }
}

#[test]
fn reflective_convolution_matches_interior() {
    let mut r = rng(2);
    let u = random_image(&mut r, 30, 24);
    let k = random_kernel(&mut r, 5);
    let fast = convolve(&u, &k, BoundaryMode::Reflective);
    let reference = brute_force_periodic(&u, &k);
    // away from the border neither extension is ever read
    for y in 2..22 {
        for x in 2..28 {
            assert!((fast.get(x, y) - reference.get(x, y)).abs() < 1e-12);
        }
    }
}

#[test]
fn kernel_spectrum_matches_naive_dft() {
    let mut r = rng(3);
    let k = random_kernel(&mut r, 5);
    let spec = kernel_spectrum(&k, 12, 10).unwrap();
    for (a, b) in spec.data().iter().zip(naive_kernel_dft(&k, 12, 10)) {
        assert!((a - b).norm() < 1e-12);
    }
}

#[test]
fn modified_inverse_per_bin() {
    let mut r = rng(4);
    let k = random_kernel(&mut r, 3);
    let dft = naive_kernel_dft(&k, 8, 8);
    let filter = build_modified_inverse(&kernel_spectrum(&k, 8, 8).unwrap(), c(0.03));
    for (f, hv) in filter.data().iter().zip(&dft) {
        let expected = hv.conj() / (hv.norm_sqr() + 0.03);
        assert!((f - expected).norm() < 1e-12);
    }
}

#[test]
fn deblur_equals_dense_normal_equations() {
    let mut r = rng(5);
    for (w, h, support) in [(9, 7, 3), (8, 8, 5), (12, 5, 3), (16, 16, 7)] {
        let g = random_image(&mut r, w, h);
        let k = random_kernel(&mut r, support);
        for cv in [1e-4, 1e-2, 0.2] {
            let fast = deblur(&g, &k, c(cv), BoundaryMode::Periodic);
            let dense = tikhonov_direct(&g, &k, c(cv)).unwrap();
            assert!(max_abs_diff(&fast, &dense) < 1e-8, "{w}x{h} support {support} C {cv}");
        }
    }
}

#[test]
fn deblur_inverts_convolution_as_c_vanishes() {
    let u = test_card(32, 32);
    let k = BlurKernel::gaussian(0.8, 5).unwrap();
    let g = convolve(&u, &k, BoundaryMode::Periodic);
    let restored = deblur(&g, &k, c(1e-9), BoundaryMode::Periodic);
    assert!(psnr(&u, &restored).unwrap() > 60.0);
}

#[test]
fn roots_match_quadratic_formula() {
    for cv in [1e-8, 1e-4, 1e-2, 0.1, 0.2, 0.2499] {
        let fp = fixed_points(cv).unwrap();
        let disc = (1.0 - 4.0 * cv).sqrt();
        let (lo, hi) = ((1.0 - disc) / 2.0, (1.0 + disc) / 2.0);
        assert!((fp.stable.unwrap() - hi).abs() < 1e-14);
        // the textbook small root loses digits to cancellation; compare relatively
        assert!((fp.unstable.unwrap() - lo).abs() <= 1e-7 * lo.max(1e-300));
        for x in [fp.unstable.unwrap(), fp.stable.unwrap()] {
            assert!((x - x * x / (x * x + cv)).abs() <= 1e-12 * x.max(1e-12));
        }
    }
    let tiny = fixed_points(1e-12).unwrap().unstable.unwrap();
    assert!((tiny - 1e-12).abs() < 1e-22);
    assert_eq!(fixed_points(0.25).unwrap().tangent, Some(0.5));
    assert!(fixed_points(0.3).unwrap().stable.is_none());
}

#[test]
fn periodogram_obeys_parseval() {
    let mut r = rng(6);
    let u = random_image(&mut r, 20, 14);
    let power = u.data().iter().map(|v| v * v).sum::<f64>() / u.len() as f64;
    assert!((periodogram(&u).mean() - power).abs() < 1e-12);
}

#[test]
fn prediction_closed_forms() {
    let (w, h) = (6, 4);
    let ones = Spectrum::filled(w, h, Complex64::new(1.0, 0.0));
    let s_u = Psd::new(w, h, (0..w * h).map(|i| 0.5 + i as f64).collect()).unwrap();
    let pred = predict_mse(&s_u, &Psd::flat(w, h, 0.0).unwrap(), &ones, 0.01, 1).unwrap();
    let expected = s_u.mean() * 0.01 * 0.01 / (1.01 * 1.01);
    assert!((pred.mse[0] - expected).abs() < 1e-18);
    let flat = Psd::flat(w, h, 1.0).unwrap();
    let pred = predict_mse(&flat, &Psd::flat(w, h, 0.0).unwrap(), &ones, 0.01, 1).unwrap();
    assert!((pred.mse[0] - 9.80296049406921e-5).abs() < 1e-18);
    assert_eq!(probe_core::theory::mse_to_psnr(0.001), 30.0);

    let sigma2 = 4e-4;
    let evolved = evolve_noise_psd(&Psd::flat(w, h, sigma2).unwrap(), &ones, 0.01).unwrap();
    assert!(evolved.values().iter().all(|v| (v - sigma2 / (1.01 * 1.01)).abs() < 1e-18));
    let zeros = Spectrum::filled(w, h, Complex64::new(0.0, 0.0));
    assert!(evolve_noise_psd(&flat, &zeros, 0.01).unwrap().values().iter().all(|v| *v == 0.0));
}

#[test]
fn effective_noise_examples() {
    let (w, h) = (3, 3);
    let s_n = Psd::flat(w, h, 0.01).unwrap();
    let s_u = Psd::new(w, h, (1..=9).map(f64::from).collect()).unwrap();
    let none = Psd::flat(w, h, 0.0).unwrap();
    assert_eq!(effective_noise_model(&s_n, &s_u, &none).unwrap(), s_n);
    let err = Psd::flat(w, h, 0.1).unwrap();
    let floor = effective_noise_model(&none, &s_u, &err).unwrap();
    assert!(floor.values().iter().all(|v| *v > 0.0));
    let doubled = Psd::new(w, h, s_u.values().iter().map(|v| 2.0 * v).collect()).unwrap();
    let twice = effective_noise_model(&none, &doubled, &err).unwrap();
    for (a, b) in twice.values().iter().zip(floor.values()) {
        assert!((a - 2.0 * b).abs() < 1e-15);
    }
}

#[test]
fn oracle_kernel_is_next_residual_blur() {
    // after one step the residual transfer is |H|²/(|H|²+C): real and even, so
    // its truncated kernel is symmetric
    let k = BlurKernel::gaussian(1.5, 9).unwrap();
    let mut state = OracleState::from_kernel(&k, 64, 64, 0.01).unwrap();
    let first = oracle_estimate(&state, 9).unwrap();
    assert!(first.correlation(&k) > 0.999);
    state.advance();
    let second = oracle_estimate(&state, 9).unwrap();
    for dy in -4..=4isize {
        for dx in -4..=4isize {
            assert!((second.at(dx, dy) - second.at(-dx, -dy)).abs() < 1e-12);
        }
    }
    assert!(second.center_weight() > first.center_weight());
}

#[test]
fn blurred_input_loses_to_nonblind_reference() {
    let u = natural_scene(64, 64, 3);
    let k = BlurKernel::gaussian(1.5, 9).unwrap();
    let g = convolve(&u, &k, BoundaryMode::Periodic);
    let reference = deblur(&g, &k, c(1e-3), BoundaryMode::Periodic);
    assert!(error_ratio(&u, &g, &reference).unwrap() > 1.0);
    assert_eq!(error_ratio(&u, &u, &reference).unwrap(), 0.0);
    assert!(error_ratio(&u, &g, &u).is_err());
}

#[test]
fn pgm_and_png_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let u = natural_scene(23, 17, 8);
    for (name, depth, tol) in [
        ("a.png", BitDepth::Eight, 0.5 / 255.0),
        ("b.png", BitDepth::Sixteen, 0.5 / 65535.0),
        ("c.pgm", BitDepth::Eight, 0.5 / 255.0),
        ("d.pgm", BitDepth::Sixteen, 0.5 / 65535.0),
    ] {
        let path = dir.path().join(name);
        write_gray(&path, &u, depth).unwrap();
        let back = read_gray(&path).unwrap();
        assert_eq!((back.width(), back.height()), (23, 17));
        assert!(max_abs_diff(&u, &back) <= tol + 1e-12, "{name}");
    }
}

fn write_corpus(dir: &std::path::Path) {
    std::fs::create_dir_all(dir.join("kernels")).unwrap();
    write_gray(dir.join("card.png"), &test_card(64, 64), BitDepth::Sixteen).unwrap();
    write_gray(dir.join("scene.png"), &natural_scene(64, 64, 1), BitDepth::Sixteen).unwrap();
    BlurKernel::gaussian(1.5, 9).unwrap().save(dir.join("kernels/g15.txt")).unwrap();
    BlurKernel::gaussian(1.0, 7).unwrap().save(dir.join("kernels/g10.txt")).unwrap();
}

fn oracle_config(iters: usize) -> ProbeConfig {
    ProbeConfig {
        max_iters: iters,
        initial_support: 9,
        estimator: EstimatorChoice::Oracle { true_kernel: BlurKernel::delta(1).unwrap() },
        ..Default::default()
    }
}

#[test]
fn benchmark_relative_ratio_is_one_with_true_kernel() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path());
    let report = run_benchmark(dir.path(), &oracle_config(1), &BenchmarkOptions::default()).unwrap();
    assert_eq!(report.items, 4);
    for r in &report.records {
        assert_eq!(r.relative.as_ref().unwrap().ratio, 1.0, "{}", r.id);
    }
}

#[test]
fn benchmark_oracle_gains_over_iterations_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    write_corpus(dir.path());
    std::fs::write(dir.path().join("broken.png"), b"not an image").unwrap();
    let options = BenchmarkOptions { sigma_n: 0.001, ..Default::default() };
    let report = run_benchmark(dir.path(), &oracle_config(3), &options).unwrap();
    assert_eq!(report.items, 6);
    assert_eq!(report.failures, 2);
    assert!(report.records.iter().filter(|r| r.id.starts_with("broken/")).all(|r| r.error.is_some()));
    assert!(report.mean_psnr_final > report.mean_psnr_first);
    let single = run_benchmark(dir.path(), &oracle_config(3), &BenchmarkOptions { threads: Some(1), ..options.clone() }).unwrap();
    let many = run_benchmark(dir.path(), &oracle_config(3), &BenchmarkOptions { threads: Some(4), ..options }).unwrap();
    // wall-clock timings are the only field allowed to differ
    let json = |r: &probe_core::evaluation::BenchmarkReport| serde_json::to_string(r).unwrap();
    assert_eq!(json(&single), json(&many));
    assert_eq!(json(&single), json(&report));
}

#[test]
fn run_probe_is_deterministic() {
    let u = test_card(96, 96);
    let g = convolve(&u, &BlurKernel::gaussian(1.5, 9).unwrap(), BoundaryMode::Reflective);
    let config = ProbeConfig { initial_support: 9, ..Default::default() };
    let a = run_probe(&g, &config, Some(&u)).unwrap();
    let b = run_probe(&g, &config, Some(&u)).unwrap();
    assert_eq!(a.final_image, b.final_image);
    assert_eq!(a.summary("mapuch"), b.summary("mapuch"));
}
