//! PNG / binary PGM reading and writing.
//!
//! Samples map linearly between integer codes and `[0, 1]`. Color inputs keep
//! their RGB planes so callers can choose luminance or per-channel handling.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::codecs::png::PngEncoder;
use image::{DynamicImage, ExtendedColorType, ImageEncoder};

use crate::error::{ProbeError, Result};
use crate::image::Image;

/// Bit depth of encoded samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    fn max_code(self) -> f64 {
        match self {
            BitDepth::Eight => 255.0,
            BitDepth::Sixteen => 65535.0,
        }
    }
}

/// A decoded raster: one plane for grayscale, three for color.
#[derive(Debug, Clone)]
pub struct Raster {
    pub planes: Vec<Image>,
    pub depth: BitDepth,
}

impl Raster {
    pub fn is_color(&self) -> bool {
        self.planes.len() == 3
    }

    /// Rec. 601 luma for color rasters, the plane itself for grayscale.
    pub fn luminance(&self) -> Image {
        match self.planes.as_slice() {
            [gray] => gray.clone(),
            [r, g, b] => {
                let data = r
                    .data()
                    .iter()
                    .zip(g.data())
                    .zip(b.data())
                    .map(|((r, g), b)| 0.299 * r + 0.587 * g + 0.114 * b)
                    .collect();
                Image::new(r.width(), r.height(), data).expect("planes share dimensions")
            }
            _ => unreachable!("rasters have one or three planes"),
        }
    }
}

pub fn read_raster(path: impl AsRef<Path>) -> Result<Raster> {
    let img = image::open(path.as_ref())?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let sixteen = matches!(
        img,
        DynamicImage::ImageLuma16(_) | DynamicImage::ImageLumaA16(_) | DynamicImage::ImageRgb16(_) | DynamicImage::ImageRgba16(_)
    );
    let depth = if sixteen { BitDepth::Sixteen } else { BitDepth::Eight };
    let color = img.color().has_color();
    let planes = if color {
        let rgb = img.to_rgb16();
        (0..3)
            .map(|c| {
                let data = rgb.pixels().map(|p| p.0[c] as f64 / 65535.0).collect();
                Image::new(w, h, data)
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        let gray = img.to_luma16();
        vec![Image::new(w, h, gray.pixels().map(|p| p.0[0] as f64 / 65535.0).collect())?]
    };
    Ok(Raster { planes, depth })
}

/// Reads any supported file as a single luminance plane.
pub fn read_gray(path: impl AsRef<Path>) -> Result<Image> {
    Ok(read_raster(path)?.luminance())
}

fn quantize(v: f64, depth: BitDepth) -> u16 {
    (v.clamp(0.0, 1.0) * depth.max_code()).round() as u16
}

enum Format {
    Png,
    Pgm,
}

fn format_for(path: &Path) -> Result<Format> {
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("png") => Ok(Format::Png),
        Some("pgm") | Some("pnm") => Ok(Format::Pgm),
        _ => Err(ProbeError::arg(format!("unsupported output extension: {}", path.display()))),
    }
}

/// Writes one (gray) or three (RGB) planes, clamping to `[0, 1]`.
pub fn write_planes(path: impl AsRef<Path>, planes: &[&Image], depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    let first = planes.first().ok_or_else(|| ProbeError::arg("no planes to write"))?;
    for p in planes {
        first.check_same_dims(p)?;
    }
    let (w, h) = (first.width() as u32, first.height() as u32);
    let n = first.len();
    let color = match planes.len() {
        1 => false,
        3 => true,
        k => return Err(ProbeError::arg(format!("cannot encode {k} planes"))),
    };
    let format = format_for(path)?;
    if color && matches!(format, Format::Pgm) {
        return Err(ProbeError::arg("PGM output is grayscale only"));
    }
    let mut out = BufWriter::new(File::create(path)?);
    if let Format::Pgm = format {
        // binary PGM: 16-bit samples are big-endian by definition
        write!(out, "P5\n{w} {h}\n{}\n", depth.max_code())?;
        for &v in first.data() {
            let q = quantize(v, depth);
            match depth {
                BitDepth::Eight => out.write_all(&[q as u8])?,
                BitDepth::Sixteen => out.write_all(&q.to_be_bytes())?,
            }
        }
        out.flush()?;
        return Ok(());
    }
    let mut bytes = Vec::with_capacity(n * planes.len() * 2);
    for i in 0..n {
        for p in planes {
            let q = quantize(p.data()[i], depth);
            match depth {
                BitDepth::Eight => bytes.push(q as u8),
                // the PNG encoder takes 16-bit samples in native byte order
                BitDepth::Sixteen => bytes.extend_from_slice(&q.to_ne_bytes()),
            }
        }
    }
    let ty = match (color, depth) {
        (false, BitDepth::Eight) => ExtendedColorType::L8,
        (false, BitDepth::Sixteen) => ExtendedColorType::L16,
        (true, BitDepth::Eight) => ExtendedColorType::Rgb8,
        (true, BitDepth::Sixteen) => ExtendedColorType::Rgb16,
    };
    PngEncoder::new(out).write_image(&bytes, w, h, ty)?;
    Ok(())
}

pub fn write_gray(path: impl AsRef<Path>, img: &Image, depth: BitDepth) -> Result<()> {
    write_planes(path, &[img], depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp() -> Image {
        Image::from_fn(17, 9, |x, y| ((x + 3 * y) % 17) as f64 / 16.0)
    }

    #[test]
    fn eight_bit_png_and_pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = ramp();
        for name in ["a.png", "a.pgm"] {
            let p = dir.path().join(name);
            write_gray(&p, &img, BitDepth::Eight).unwrap();
            let back = read_raster(&p).unwrap();
            assert_eq!(back.depth, BitDepth::Eight);
            assert!(!back.is_color());
            let err = img.data().iter().zip(back.planes[0].data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 0.5 / 255.0 + 1e-12, "{name}: {err}");
        }
    }

    #[test]
    fn sixteen_bit_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = ramp().map(|v| v * 0.77);
        for name in ["b.png", "b.pgm"] {
            let p = dir.path().join(name);
            write_gray(&p, &img, BitDepth::Sixteen).unwrap();
            let back = read_raster(&p).unwrap();
            assert_eq!(back.depth, BitDepth::Sixteen, "{name}");
            let err = img.data().iter().zip(back.planes[0].data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err <= 0.5 / 65535.0 + 1e-12, "{name}: {err}");
        }
    }

    #[test]
    fn color_luminance_uses_rec601() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.png");
        let r = Image::filled(4, 4, 1.0);
        let z = Image::filled(4, 4, 0.0);
        write_planes(&p, &[&r, &z, &z], BitDepth::Eight).unwrap();
        let back = read_raster(&p).unwrap();
        assert!(back.is_color());
        assert!((back.luminance().get(1, 1) - 0.299).abs() < 1e-12);
    }

    #[test]
    fn unsupported_extension() {
        let dir = tempfile::tempdir().unwrap();
        assert!(write_gray(dir.path().join("x.bmp"), &ramp(), BitDepth::Eight).is_err());
        assert!(read_raster(dir.path().join("missing.png")).is_err());
    }
}
