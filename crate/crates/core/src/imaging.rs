//! Pixel containers and lossless 8-bit image I/O.
//!
//! Coordinates are `(x, y)` = `(column, row)` with the origin at the top-left
//! corner; all buffers are row-major.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::{DynamicImage, ImageError, ImageFormat, ImageReader};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// 8-bit image with one (gray) or three (RGB) interleaved channels.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Image {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl std::fmt::Debug for Image {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Image")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("channels", &self.channels)
            .finish_non_exhaustive()
    }
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Format(format!(
                "unsupported channel count {channels}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::Invalid("image must not be empty".into()));
        }
        if data.len() != width * height * channels {
            return Err(Error::ShapeMismatch(format!(
                "{}x{}x{} image needs {} samples, got {}",
                width,
                height,
                channels,
                width * height * channels,
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Image with every sample set to `value`.
    pub fn filled(width: usize, height: usize, channels: usize, value: u8) -> Self {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
        .expect("valid filled image")
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::new(width, height, channels, data).expect("valid generated image")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [u8] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: u8) {
        self.data[(y * self.width + x) * self.channels + c] = v;
    }

    /// All channel samples of pixel `(x, y)`.
    #[inline]
    pub fn pixel(&self, x: usize, y: usize) -> &[u8] {
        let start = (y * self.width + x) * self.channels;
        &self.data[start..start + self.channels]
    }

    /// Mean over channels of pixel `(x, y)`.
    #[inline]
    pub fn gray(&self, x: usize, y: usize) -> f64 {
        let px = self.pixel(x, y);
        px.iter().map(|&v| v as f64).sum::<f64>() / px.len() as f64
    }

    pub(crate) fn to_dynamic(&self) -> DynamicImage {
        let (w, h) = (self.width as u32, self.height as u32);
        match self.channels {
            1 => DynamicImage::ImageLuma8(
                image::GrayImage::from_raw(w, h, self.data.clone()).expect("buffer size"),
            ),
            _ => DynamicImage::ImageRgb8(
                image::RgbImage::from_raw(w, h, self.data.clone()).expect("buffer size"),
            ),
        }
    }

    pub(crate) fn from_dynamic(img: DynamicImage) -> Result<Self> {
        let (w, h) = (img.width() as usize, img.height() as usize);
        match img {
            DynamicImage::ImageLuma8(buf) => Self::new(w, h, 1, buf.into_raw()),
            DynamicImage::ImageRgb8(buf) => Self::new(w, h, 3, buf.into_raw()),
            DynamicImage::ImageLumaA8(_) | DynamicImage::ImageRgba8(_) => {
                Err(Error::Format("alpha channels are not supported".into()))
            }
            other => Err(Error::Format(format!(
                "unsupported pixel type {:?}; only 8-bit gray or RGB is accepted",
                other.color()
            ))),
        }
    }
}

/// Row-major boolean mask.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{width}x{height} mask needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let bits = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn count_set(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Grayscale rendering: set bits are 255, the rest 0.
    pub fn to_image(&self) -> Image {
        let data = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        Image::new(self.width, self.height, 1, data).expect("mask dims")
    }
}

/// Row-major real-valued field with values in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FloatMask<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
}

impl<T: Real> FloatMask<T> {
    pub fn new(width: usize, height: usize, values: Vec<T>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{width}x{height} mask needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        if let Some(v) = values
            .iter()
            .find(|v| !(**v >= T::zero() && **v <= T::one()))
        {
            return Err(Error::Invalid(format!("mask value {v} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![T::zero(); width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.values[y * self.width + x]
    }

    /// Grayscale rendering with 1.0 mapped to 255.
    pub fn to_image(&self) -> Image {
        let scale = T::of(255.0);
        let data = self
            .values
            .iter()
            .map(|&v| (v * scale).round().to_u8().unwrap_or(255))
            .collect();
        Image::new(self.width, self.height, 1, data).expect("mask dims")
    }
}

/// Per-pixel foreground labels of one frame.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GroundTruth {
    width: usize,
    height: usize,
    labels: Vec<bool>,
}

impl GroundTruth {
    pub fn new(width: usize, height: usize, labels: Vec<bool>) -> Result<Self> {
        if labels.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{width}x{height} ground truth needs {} labels, got {}",
                width * height,
                labels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let labels = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self {
            width,
            height,
            labels,
        }
    }

    /// Binarizes a grayscale image: samples `>= 128` are foreground.
    pub fn from_gray(img: &Image) -> Result<Self> {
        if img.channels() != 1 {
            return Err(Error::Format(format!(
                "ground truth must be grayscale, got {} channels",
                img.channels()
            )));
        }
        let labels = img.data().iter().map(|&v| v >= 128).collect();
        Self::new(img.width(), img.height(), labels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.labels[y * self.width + x]
    }

    pub fn foreground_count(&self) -> usize {
        self.labels.iter().filter(|&&b| b).count()
    }

    /// Foreground as 255, background as 0.
    pub fn to_image(&self) -> Image {
        let data = self
            .labels
            .iter()
            .map(|&b| if b { 255 } else { 0 })
            .collect();
        Image::new(self.width, self.height, 1, data).expect("gt dims")
    }
}

fn map_image_error(path: &Path, err: ImageError) -> Error {
    match err {
        ImageError::IoError(e) => Error::io(path, e),
        other => Error::Format(format!("{}: {other}", path.display())),
    }
}

/// Decodes an 8-bit PNG or binary PGM/PPM file.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        Some(other) => {
            return Err(Error::Format(format!(
                "{}: unsupported format {other:?}",
                path.display()
            )))
        }
        None => {
            return Err(Error::Format(format!(
                "{}: unrecognized image format",
                path.display()
            )))
        }
    }
    let decoded = reader.decode().map_err(|e| map_image_error(path, e))?;
    Image::from_dynamic(decoded).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Writes `img` as a lossless PNG. Output bytes depend only on the samples.
pub fn write_image(img: &Image, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    img.to_dynamic()
        .write_to(&mut out, ImageFormat::Png)
        .map_err(|e| map_image_error(path, e))?;
    use std::io::Write;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    let img = read_image(path)?;
    GroundTruth::from_gray(&img).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_ground_truth(gt: &GroundTruth, path: impl AsRef<Path>) -> Result<()> {
    write_image(&gt.to_image(), path)
}
