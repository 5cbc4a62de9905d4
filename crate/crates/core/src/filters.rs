//! Modified inverse filter and a dense Tikhonov reference solver.
//!
//! The modified inverse filter `H_RI = H* / (|H|² + C)` is the closed-form
//! minimizer of `‖u ∗ h − g‖² + C‖u‖²` under periodic boundaries.
//! [`tikhonov_direct`] solves the same problem through the normal equations
//! with an explicit circulant matrix and is only meant for small images.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{ProbeError, Result};
use crate::image::Image;
use crate::kernel::BlurKernel;
use crate::spectral::{apply_transfer, padded_dims, wrapped_kernel_spectrum, BoundaryMode, Spectrum};

/// Constant Tikhonov weight `C > 0`, shared by every frequency bin and
/// every iteration.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RegularizationConstant(f64);

impl RegularizationConstant {
    pub const DEFAULT: f64 = 1e-2;

    pub fn new(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(ProbeError::arg(format!("regularization constant must be positive, got {c}")));
        }
        if c >= 0.25 {
            log::warn!("C = {c} >= 1/4: residual blur estimates collapse to zero under the oracle model");
        }
        Ok(Self(c))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl Default for RegularizationConstant {
    fn default() -> Self {
        Self(Self::DEFAULT)
    }
}

impl TryFrom<f64> for RegularizationConstant {
    type Error = ProbeError;

    fn try_from(c: f64) -> Result<Self> {
        Self::new(c)
    }
}

impl From<RegularizationConstant> for f64 {
    fn from(c: RegularizationConstant) -> f64 {
        c.0
    }
}

/// Per-bin `conj(H) / (|H|² + C)`.
pub fn build_modified_inverse(h: &Spectrum, c: RegularizationConstant) -> Spectrum {
    let c = c.value();
    h.map(|v| v.conj() / (v.norm_sqr() + c))
}

/// Non-blind restoration of `g` blurred by `h`, with the taper margin set
/// to the kernel support.
pub fn deblur(g: &Image, h: &BlurKernel, c: RegularizationConstant, boundary: BoundaryMode) -> Image {
    deblur_with_margin(g, h, c, boundary, h.support())
}

/// As [`deblur`] with an explicit reflective-padding margin.
pub fn deblur_with_margin(
    g: &Image,
    h: &BlurKernel,
    c: RegularizationConstant,
    boundary: BoundaryMode,
    margin: usize,
) -> Image {
    let (pw, ph) = padded_dims(g.width(), g.height(), margin.max(h.support()), boundary);
    let transfer = build_modified_inverse(&wrapped_kernel_spectrum(h, pw, ph), c);
    apply_transfer(g, &transfer, boundary).expect("transfer built on the padded grid")
}

/// Applies the modified inverse of a given blur spectrum `H`.
pub fn deblur_spectrum(g: &Image, h: &Spectrum, c: RegularizationConstant, boundary: BoundaryMode) -> Result<Image> {
    apply_transfer(g, &build_modified_inverse(h, c), boundary)
}

/// Largest image (in pixels) accepted by [`tikhonov_direct`].
pub const TIKHONOV_DIRECT_MAX_PIXELS: usize = 32 * 32;

/// Solves `(AᵀA + C·I) u = Aᵀ g` with `A` the periodic convolution matrix of `h`.
pub fn tikhonov_direct(g: &Image, h: &BlurKernel, c: RegularizationConstant) -> Result<Image> {
    let (w, hgt) = (g.width(), g.height());
    let n = w * hgt;
    if w > 32 || hgt > 32 || n > TIKHONOV_DIRECT_MAX_PIXELS {
        return Err(ProbeError::arg(format!(
            "dense Tikhonov solve refused for a {w}x{hgt} image (limit 32x32)"
        )));
    }
    let a = convolution_matrix(h, w, hgt);
    let mut normal = a.transpose() * &a;
    for i in 0..n {
        normal[(i, i)] += c.value();
    }
    let rhs = a.transpose() * DVector::from_column_slice(g.data());
    let u = normal
        .cholesky()
        .ok_or_else(|| ProbeError::arg("normal equations not positive definite"))?
        .solve(&rhs);
    Image::new(w, hgt, u.iter().copied().collect())
}

/// Dense circulant matrix with `(A u)(p) = Σ_q h(q) u(p − q)` modulo the grid.
pub fn convolution_matrix(h: &BlurKernel, width: usize, height: usize) -> DMatrix<f64> {
    let n = width * height;
    let r = h.radius() as isize;
    let mut a = DMatrix::<f64>::zeros(n, n);
    for py in 0..height as isize {
        for px in 0..width as isize {
            let row = (py as usize) * width + px as usize;
            for dy in -r..=r {
                for dx in -r..=r {
                    let sx = (px - dx).rem_euclid(width as isize) as usize;
                    let sy = (py - dy).rem_euclid(height as isize) as usize;
                    a[(row, sy * width + sx)] += h.at(dx, dy);
                }
            }
        }
    }
    a
}

/// Largest possible magnitude of the modified inverse, `1 / (2√C)`.
pub fn modified_inverse_bound(c: RegularizationConstant) -> f64 {
    0.5 / c.value().sqrt()
}
