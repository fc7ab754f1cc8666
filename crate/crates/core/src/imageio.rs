//! 8-bit RGB image files (PNG, binary PPM) to and from [`ImageTensor`].
//!
//! Bytes map to intensities as `b / 255`. On save, intensities are clamped
//! to `[0, 1]` and quantised with round-half-up, `floor(v * 255 + 0.5)`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use image::codecs::png::PngEncoder;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};

use crate::error::{Error, Result};
use crate::tensor::{ImageTensor, CHANNELS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FileFormat {
    Png,
    Ppm,
}

impl FileFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("png") => Ok(Self::Png),
            Some("ppm") | Some("pnm") => Ok(Self::Ppm),
            _ => Err(Error::UnsupportedFormat(path.to_path_buf())),
        }
    }

    fn codec(self) -> image::ImageFormat {
        match self {
            Self::Png => image::ImageFormat::Png,
            Self::Ppm => image::ImageFormat::Pnm,
        }
    }
}

/// A path together with the format implied by its extension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageFileRef {
    pub path: PathBuf,
    pub format: FileFormat,
}

impl ImageFileRef {
    pub fn new(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let format = FileFormat::from_path(&path)?;
        Ok(Self { path, format })
    }
}

#[inline]
pub fn quantize(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0 + 0.5).floor() as u8
}

/// Interleaved RGB bytes of `t`.
pub fn to_rgb8(t: &ImageTensor) -> Vec<u8> {
    t.as_slice().iter().map(|&v| quantize(v)).collect()
}

pub fn from_rgb8(height: usize, width: usize, bytes: &[u8]) -> Result<ImageTensor> {
    ImageTensor::from_vec(
        height,
        width,
        bytes.iter().map(|&b| b as f64 / 255.0).collect(),
    )
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageTensor> {
    let file = ImageFileRef::new(path)?;
    let path = &file.path;
    if !path.exists() {
        return Err(Error::NotFound(path.clone()));
    }
    let mut reader = ImageReader::open(path)?;
    reader.set_format(file.format.codec());
    let decoded = reader
        .decode()
        .map_err(|source| Error::Decode {
            path: path.clone(),
            source,
        })?;
    let rgb = match decoded {
        DynamicImage::ImageRgb8(img) => img,
        DynamicImage::ImageLuma8(_) => decoded.to_rgb8(),
        DynamicImage::ImageRgba8(_) | DynamicImage::ImageLumaA8(_) => {
            log::warn!("{}: dropping alpha channel", path.display());
            decoded.to_rgb8()
        }
        other => {
            return Err(Error::UnsupportedBitDepth {
                path: path.clone(),
                kind: format!("{:?}", other.color()),
            })
        }
    };
    let (w, h) = rgb.dimensions();
    from_rgb8(h as usize, w as usize, rgb.as_raw())
}

pub fn save_image(t: &ImageTensor, path: impl AsRef<Path>) -> Result<()> {
    let file = ImageFileRef::new(path)?;
    let (h, w) = t.shape();
    let bytes = to_rgb8(t);
    debug_assert_eq!(bytes.len(), h * w * CHANNELS);
    let mut out = BufWriter::new(File::create(&file.path)?);
    let wrap = |source| Error::Write {
        path: file.path.clone(),
        source,
    };
    match file.format {
        FileFormat::Png => PngEncoder::new(&mut out)
            .write_image(&bytes, w as u32, h as u32, ExtendedColorType::Rgb8)
            .map_err(wrap)?,
        FileFormat::Ppm => PnmEncoder::new(&mut out)
            .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
            .write_image(&bytes, w as u32, h as u32, ExtendedColorType::Rgb8)
            .map_err(wrap)?,
    }
    out.flush()?;
    Ok(())
}
