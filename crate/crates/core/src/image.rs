//! Real-valued grayscale rasters.

use serde::{Deserialize, Serialize};

use crate::error::{ProbeError, Result};

/// Row-major grayscale raster with nominal range `[0, 1]`.
///
/// Values outside the nominal range are allowed; only file output and the
/// feedback point of the deblurring loop clamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Image {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(ProbeError::arg("image dimensions must be nonzero"));
        }
        if data.len() != width * height {
            return Err(ProbeError::dims(format!(
                "{} samples for a {}x{} image",
                data.len(),
                width,
                height
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(ProbeError::arg(format!("non-finite sample at index {i}")));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be nonzero");
        Self { width, height, data: vec![value; width * height] }
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    /// Builds an image by evaluating `f(x, y)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be nonzero");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
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
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: f64) {
        self.data[y * self.width + x] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn same_dims(&self, other: &Image) -> bool {
        self.width == other.width && self.height == other.height
    }

    pub(crate) fn check_same_dims(&self, other: &Image) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(ProbeError::dims(format!(
                "{}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn clamped(&self) -> Image {
        self.map(|v| v.clamp(0.0, 1.0))
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Forward differences `(dx, dy)` at `(x, y)`; zero on the last column/row.
    #[inline]
    pub fn forward_gradient(&self, x: usize, y: usize) -> (f64, f64) {
        let v = self.get(x, y);
        let dx = if x + 1 < self.width { self.get(x + 1, y) - v } else { 0.0 };
        let dy = if y + 1 < self.height { self.get(x, y + 1) - v } else { 0.0 };
        (dx, dy)
    }
}

/// Sparse gradient-prior energy `Σ |∇u|^p` with forward differences.
pub fn prior_energy(img: &Image, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(ProbeError::arg(format!("prior exponent must lie in (0, 2], got {p}")));
    }
    let mut total = 0.0;
    for y in 0..img.height() {
        for x in 0..img.width() {
            let (dx, dy) = img.forward_gradient(x, y);
            let mag = (dx * dx + dy * dy).sqrt();
            if mag > 0.0 {
                total += mag.powf(p);
            }
        }
    }
    Ok(total)
}
