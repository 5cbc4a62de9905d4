//! Deterministic synthetic images for tests, demos and the mini corpus.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex64;

use crate::image::Image;
use crate::spectral::fft2_in_place;

/// Piecewise-constant card: disks, rotated bars, a checker patch and blocks
/// on a two-level background. Values lie in `[0.1, 0.9]`.
pub fn test_card(width: usize, height: usize) -> Image {
    let (w, h) = (width as f64, height as f64);
    let s = w.min(h);
    Image::from_fn(width, height, |x, y| {
        let (xf, yf) = (x as f64 + 0.5, y as f64 + 0.5);
        let mut v = if xf < 0.5 * w { 0.25 } else { 0.4 };

        // checker patch, upper left
        let (cx0, cy0, cs) = (0.08 * w, 0.08 * h, 0.3 * s);
        if xf >= cx0 && xf < cx0 + cs && yf >= cy0 && yf < cy0 + cs {
            let cell = (0.06 * s).max(2.0);
            let parity = (((xf - cx0) / cell) as usize + ((yf - cy0) / cell) as usize) % 2;
            v = if parity == 0 { 0.85 } else { 0.15 };
        }

        // two disks, upper right
        let d1 = ((xf - 0.72 * w).powi(2) + (yf - 0.25 * h).powi(2)).sqrt();
        if d1 < 0.16 * s {
            v = 0.8;
        }
        if d1 < 0.07 * s {
            v = 0.3;
        }

        // rotated bars, lower left
        let (bx, by) = (xf - 0.27 * w, yf - 0.72 * h);
        if bx.abs() < 0.2 * s && by.abs() < 0.2 * s {
            let theta = PI / 7.0;
            let u = bx * theta.cos() + by * theta.sin();
            if ((u / (0.05 * s)).floor() as i64).rem_euclid(2) == 0 {
                v = 0.7;
            } else {
                v = 0.2;
            }
        }

        // blocks, lower right
        for (i, level) in [0.9, 0.6, 0.1].iter().enumerate() {
            let x0 = 0.58 * w + i as f64 * 0.12 * w;
            let y0 = 0.58 * h + i as f64 * 0.08 * h;
            if xf >= x0 && xf < x0 + 0.1 * w && yf >= y0 && yf < y0 + 0.25 * h {
                v = *level;
            }
        }
        v
    })
}

/// Random field with a `1/f^slope` amplitude spectrum, rescaled to `[lo, hi]`.
pub fn fractal_field(width: usize, height: usize, slope: f64, lo: f64, hi: f64, seed: u64) -> Image {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut data: Vec<Complex64> = (0..width * height)
        .map(|_| Complex64::new(normal.sample(&mut rng), 0.0))
        .collect();
    fft2_in_place(&mut data, width, height, false);
    for ky in 0..height {
        let fy = if ky <= height / 2 { ky as f64 } else { ky as f64 - height as f64 } / height as f64;
        for kx in 0..width {
            let fx = if kx <= width / 2 { kx as f64 } else { kx as f64 - width as f64 } / width as f64;
            let f = (fx * fx + fy * fy).sqrt();
            let gain = if f == 0.0 { 0.0 } else { f.powf(-slope) };
            data[ky * width + kx] *= gain;
        }
    }
    fft2_in_place(&mut data, width, height, true);
    let vals: Vec<f64> = data.iter().map(|c| c.re).collect();
    let (mn, mx) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = if mx > mn { mx - mn } else { 1.0 };
    Image::new(width, height, vals.iter().map(|v| lo + (hi - lo) * (v - mn) / span).collect())
        .expect("finite field")
}

/// Natural-looking scene: shaded occluding shapes over a `1/f` texture.
pub fn natural_scene(width: usize, height: usize, seed: u64) -> Image {
    let texture = fractal_field(width, height, 1.0, 0.0, 1.0, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let s = width.min(height) as f64;
    let mut img = texture.map(|t| 0.3 + 0.35 * t);
    let shapes = 6 + (seed % 4) as usize;
    for _ in 0..shapes {
        let cx = rng.random_range(0.0..width as f64);
        let cy = rng.random_range(0.0..height as f64);
        let r = rng.random_range(0.08 * s..0.25 * s);
        let base = rng.random_range(0.1..0.9);
        let tilt = rng.random_range(-0.4..0.4);
        let square = rng.random_bool(0.4);
        for y in 0..height {
            for x in 0..width {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                let inside = if square { dx.abs().max(dy.abs()) < 0.8 * r } else { dx * dx + dy * dy < r * r };
                if inside {
                    let shade = base + tilt * dx / r * 0.3 + 0.15 * (texture.get(x, y) - 0.5);
                    img.set(x, y, shade.clamp(0.02, 0.98));
                }
            }
        }
    }
    img
}
