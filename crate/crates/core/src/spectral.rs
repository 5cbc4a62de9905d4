//! Frequency-domain machinery: 2-D FFT with boundary handling, kernel
//! spectra, convolution, noise synthesis and periodogram PSD estimates.
//!
//! Forward transforms are unnormalized; inverse transforms scale by `1/N`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{ProbeError, Result};
use crate::image::Image;
use crate::kernel::BlurKernel;

/// How an image is extended beyond its support before transforming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryMode {
    /// Circular extension; any extra padding is zero-filled.
    Periodic,
    /// Symmetric reflection with a raised-cosine taper to the image mean.
    #[default]
    Reflective,
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryMode::Periodic => "periodic",
            BoundaryMode::Reflective => "reflective",
        })
    }
}

impl FromStr for BoundaryMode {
    type Err = ProbeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(BoundaryMode::Periodic),
            "reflective" | "symmetric" => Ok(BoundaryMode::Reflective),
            other => Err(ProbeError::arg(format!("unknown boundary mode `{other}`"))),
        }
    }
}

/// Complex 2-D spectrum laid out row-major with DC at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    width: usize,
    height: usize,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(width: usize, height: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != width * height || width == 0 || height == 0 {
            return Err(ProbeError::dims(format!(
                "{} bins for a {width}x{height} spectrum",
                data.len()
            )));
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for ky in 0..height {
            for kx in 0..width {
                data.push(f(kx, ky));
            }
        }
        Self { width, height, data }
    }

    /// Real-valued spectrum from magnitudes.
    pub fn from_real(width: usize, height: usize, values: &[f64]) -> Result<Self> {
        Self::new(width, height, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn filled(width: usize, height: usize, value: Complex64) -> Self {
        Self { width, height, data: vec![value; width * height] }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, kx: usize, ky: usize) -> Complex64 {
        self.data[ky * self.width + kx]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn dc(&self) -> Complex64 {
        self.data[0]
    }

    pub fn same_dims(&self, other: &Spectrum) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_dims(&self, width: usize, height: usize) -> Result<()> {
        if self.width == width && self.height == height {
            Ok(())
        } else {
            Err(ProbeError::dims(format!(
                "spectrum is {}x{}, expected {width}x{height}",
                self.width, self.height
            )))
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Spectrum {
        Spectrum {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Spectrum) -> Result<Spectrum> {
        other.check_dims(self.width, self.height)?;
        Ok(Spectrum {
            width: self.width,
            height: self.height,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.data.iter().map(|v| v.norm()).collect()
    }

    pub fn max_abs_diff(&self, other: &Spectrum) -> Result<f64> {
        other.check_dims(self.width, self.height)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// Nonnegative power spectral density on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Psd {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl Psd {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height || width == 0 || height == 0 {
            return Err(ProbeError::dims(format!("{} values for a {width}x{height} PSD", values.len())));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ProbeError::arg("PSD values must be finite and nonnegative"));
        }
        Ok(Self { width, height, values })
    }

    /// White spectrum at `level` (e.g. `σ²` for white Gaussian noise).
    pub fn flat(width: usize, height: usize, level: f64) -> Result<Self> {
        Self::new(width, height, vec![level; width * height])
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub(crate) fn check_dims(&self, width: usize, height: usize) -> Result<()> {
        if self.width == width && self.height == height {
            Ok(())
        } else {
            Err(ProbeError::dims(format!(
                "PSD is {}x{}, expected {width}x{height}",
                self.width, self.height
            )))
        }
    }
}

/// Smallest `n' >= n` whose only prime factors are 2, 3 and 5.
pub fn next_fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Transform size used for an image under a boundary mode with a taper
/// margin (normally the kernel support).
pub fn padded_dims(width: usize, height: usize, margin: usize, boundary: BoundaryMode) -> (usize, usize) {
    match boundary {
        BoundaryMode::Periodic => (width, height),
        BoundaryMode::Reflective => (
            next_fast_len(width + 2 * margin),
            next_fast_len(height + 2 * margin),
        ),
    }
}

fn offset(size: usize, pad: usize, boundary: BoundaryMode) -> usize {
    match boundary {
        BoundaryMode::Periodic => 0,
        BoundaryMode::Reflective => (pad - size) / 2,
    }
}

/// In-place 2-D transform of a row-major `width x height` buffer.
pub(crate) fn fft2_in_place(data: &mut [Complex64], width: usize, height: usize, inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let row_fft = if inverse { planner.plan_fft_inverse(width) } else { planner.plan_fft_forward(width) };
    let col_fft = if inverse { planner.plan_fft_inverse(height) } else { planner.plan_fft_forward(height) };

    row_fft.process(data);

    let mut transposed = vec![Complex64::new(0.0, 0.0); width * height];
    for y in 0..height {
        for x in 0..width {
            transposed[x * height + y] = data[y * width + x];
        }
    }
    col_fft.process(&mut transposed);
    for x in 0..width {
        for y in 0..height {
            data[y * width + x] = transposed[x * height + y];
        }
    }

    if inverse {
        let scale = 1.0 / (width * height) as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }
}

#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let r = i.rem_euclid(period);
    if r < n as isize {
        r as usize
    } else {
        (period - 1 - r) as usize
    }
}

#[inline]
fn taper(distance: usize, margin: usize) -> f64 {
    if distance == 0 {
        1.0
    } else if distance >= margin {
        0.0
    } else {
        0.5 * (1.0 + (PI * distance as f64 / margin as f64).cos())
    }
}

/// Real padded buffer for `img` on a `pad_w x pad_h` grid.
pub(crate) fn extend(img: &Image, pad_w: usize, pad_h: usize, boundary: BoundaryMode) -> Result<Vec<f64>> {
    let (w, h) = (img.width(), img.height());
    if pad_w < w || pad_h < h {
        return Err(ProbeError::arg(format!("pad {pad_w}x{pad_h} smaller than image {w}x{h}")));
    }
    let mut out = vec![0.0; pad_w * pad_h];
    match boundary {
        BoundaryMode::Periodic => {
            for y in 0..h {
                out[y * pad_w..y * pad_w + w].copy_from_slice(&img.data()[y * w..(y + 1) * w]);
            }
        }
        BoundaryMode::Reflective => {
            let (ox, oy) = (offset(w, pad_w, boundary), offset(h, pad_h, boundary));
            let (mx, my) = (ox.min(pad_w - w - ox), oy.min(pad_h - h - oy));
            let mean = img.mean();
            let dist = |i: isize, n: usize| -> usize {
                if i < 0 {
                    (-i) as usize
                } else if i >= n as isize {
                    (i - n as isize + 1) as usize
                } else {
                    0
                }
            };
            for py in 0..pad_h {
                let iy = py as isize - oy as isize;
                let wy = if my == 0 { 1.0 } else { taper(dist(iy, h), my) };
                let sy = reflect(iy, h);
                for px in 0..pad_w {
                    let ix = px as isize - ox as isize;
                    let wx = if mx == 0 { 1.0 } else { taper(dist(ix, w), mx) };
                    let v = img.get(reflect(ix, w), sy);
                    out[py * pad_w + px] = mean + wx * wy * (v - mean);
                }
            }
        }
    }
    Ok(out)
}

/// Forward transform of `img` extended to `pad_w x pad_h`.
pub fn fft2(img: &Image, pad_w: usize, pad_h: usize, boundary: BoundaryMode) -> Result<Spectrum> {
    let real = extend(img, pad_w, pad_h, boundary)?;
    let mut data: Vec<Complex64> = real.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    fft2_in_place(&mut data, pad_w, pad_h, false);
    Ok(Spectrum { width: pad_w, height: pad_h, data })
}

/// Complex inverse transform over the full spectrum grid (no cropping).
pub fn ifft2_full(spec: &Spectrum) -> Vec<Complex64> {
    let mut data = spec.data.clone();
    fft2_in_place(&mut data, spec.width, spec.height, true);
    data
}

/// Inverse transform cropped back to a `width x height` image placed as
/// [`fft2`] placed it. Imaginary residue is discarded.
pub fn ifft2(spec: &Spectrum, width: usize, height: usize, boundary: BoundaryMode) -> Result<Image> {
    if spec.width < width || spec.height < height {
        return Err(ProbeError::arg("spectrum smaller than requested image"));
    }
    let full = ifft2_full(spec);
    let (ox, oy) = (offset(width, spec.width, boundary), offset(height, spec.height, boundary));
    Ok(Image::from_fn(width, height, |x, y| full[(y + oy) * spec.width + x + ox].re))
}

/// Kernel embedded with its center at index (0, 0), wrapping modulo the grid.
pub(crate) fn embed_kernel(k: &BlurKernel, pad_w: usize, pad_h: usize) -> Vec<Complex64> {
    let mut data = vec![Complex64::new(0.0, 0.0); pad_w * pad_h];
    let r = k.radius() as isize;
    for dy in -r..=r {
        for dx in -r..=r {
            let x = dx.rem_euclid(pad_w as isize) as usize;
            let y = dy.rem_euclid(pad_h as isize) as usize;
            data[y * pad_w + x] += Complex64::new(k.at(dx, dy), 0.0);
        }
    }
    data
}

/// Transfer function `H` of a kernel on a `pad_w x pad_h` grid.
pub fn kernel_spectrum(k: &BlurKernel, pad_w: usize, pad_h: usize) -> Result<Spectrum> {
    if k.support() > pad_w.min(pad_h) {
        return Err(ProbeError::arg(format!(
            "kernel support {} exceeds transform size {pad_w}x{pad_h}",
            k.support()
        )));
    }
    Ok(wrapped_kernel_spectrum(k, pad_w, pad_h))
}

pub(crate) fn wrapped_kernel_spectrum(k: &BlurKernel, pad_w: usize, pad_h: usize) -> Spectrum {
    let mut data = embed_kernel(k, pad_w, pad_h);
    fft2_in_place(&mut data, pad_w, pad_h, false);
    Spectrum { width: pad_w, height: pad_h, data }
}

/// Applies a transfer function to an image: `ifft(fft(img) · transfer)`.
pub fn apply_transfer(img: &Image, transfer: &Spectrum, boundary: BoundaryMode) -> Result<Image> {
    let spec = fft2(img, transfer.width, transfer.height, boundary)?;
    ifft2(&spec.mul(transfer)?, img.width(), img.height(), boundary)
}

/// `img ∗ k`, same size as the input.
///
/// Under periodic boundaries this is exact circular convolution (kernels
/// wider than the image wrap around).
pub fn convolve(img: &Image, k: &BlurKernel, boundary: BoundaryMode) -> Image {
    let (pw, ph) = padded_dims(img.width(), img.height(), k.support(), boundary);
    let h = wrapped_kernel_spectrum(k, pw, ph);
    apply_transfer(img, &h, boundary).expect("padded dims always fit the image")
}

/// Adds i.i.d. zero-mean Gaussian noise with standard deviation `sigma`.
pub fn add_gaussian_noise(img: &Image, sigma: f64, seed: u64) -> Result<Image> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(ProbeError::arg(format!("noise sigma must be nonnegative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).map_err(|e| ProbeError::arg(e.to_string()))?;
    let mut out = img.clone();
    out.data_mut().iter_mut().for_each(|v| *v += normal.sample(&mut rng));
    Ok(out)
}

/// Periodogram `|FFT(u − mean)|² / N` of the whole image.
pub fn estimate_psd(img: &Image) -> Psd {
    let mean = img.mean();
    periodogram(&img.map(|v| v - mean))
}

/// Periodogram `|FFT(u)|² / N` without mean removal.
pub fn periodogram(img: &Image) -> Psd {
    let (w, h) = (img.width(), img.height());
    let spec = fft2(img, w, h, BoundaryMode::Periodic).expect("unpadded transform");
    let n = (w * h) as f64;
    Psd { width: w, height: h, values: spec.data.iter().map(|v| v.norm_sqr() / n).collect() }
}
