//! Color image segmentation by clustering RGB pixels.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageEncoder, ImageFormat, RgbImage};
use ndarray::Array2;

use crate::clustering::{ClusterResult, Dataset};
use crate::error::{Error, Result};
use crate::evaluation::EngineParams;

/// Side length images are reduced to before clustering.
pub const STANDARD_SIZE: usize = 48;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    /// Row-major.
    pixels: Vec<[u8; 3]>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!("image must be at least 1x1, got {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::Shape(format!(
                "{} pixels for a {width}x{height} image",
                pixels.len()
            )));
        }
        Ok(ImageBuffer { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, color: [u8; 3]) -> Result<Self> {
        ImageBuffer::new(width, height, vec![color; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, color: [u8; 3]) {
        self.pixels[y * self.width + x] = color;
    }

    /// Distinct colors, sorted.
    pub fn palette(&self) -> Vec<[u8; 3]> {
        let mut colors = self.pixels.clone();
        colors.sort_unstable();
        colors.dedup();
        colors
    }

    /// Per-channel mean over all pixels.
    pub fn mean_color(&self) -> [f64; 3] {
        let mut sum = [0.0; 3];
        for p in &self.pixels {
            for ch in 0..3 {
                sum[ch] += p[ch] as f64;
            }
        }
        sum.map(|s| s / self.pixels.len() as f64)
    }

    fn to_rgb_image(&self) -> RgbImage {
        let raw: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        RgbImage::from_raw(self.width as u32, self.height as u32, raw)
            .expect("buffer length matches dimensions")
    }
}

/// Reads a PNG or binary PPM; alpha is discarded.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let decoded = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::Decode {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let rgb = decoded.to_rgb8();
    let (w, h) = rgb.dimensions();
    let pixels = rgb.pixels().map(|p| p.0).collect();
    ImageBuffer::new(w as usize, h as usize, pixels)
}

/// Writes PNG for `.png` paths and binary PPM (P6) for `.ppm`/`.pnm`.
pub fn save_image(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let format = match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase) {
        Some(ext) if ext == "png" => ImageFormat::Png,
        Some(ext) if ext == "ppm" || ext == "pnm" => ImageFormat::Pnm,
        other => {
            return Err(Error::Config(format!(
                "unsupported output extension {other:?}; use .png or .ppm"
            )))
        }
    };
    let rgb = img.to_rgb_image();
    let result = match format {
        ImageFormat::Pnm => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut writer = BufWriter::new(file);
            PnmEncoder::new(&mut writer)
                .with_subtype(PnmSubtype::Pixmap(SampleEncoding::Binary))
                .write_image(rgb.as_raw(), rgb.width(), rgb.height(), ExtendedColorType::Rgb8)
                .and_then(|_| writer.flush().map_err(image::ImageError::IoError))
        }
        _ => rgb.save_with_format(path, format),
    };
    result.map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format(other.to_string()),
    })
}

/// Overlap of source cell `s` with target cell `t` along one axis, in
/// source-pixel units, when `src` cells are mapped onto `dst` cells.
fn axis_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|t| {
            let lo = t as f64 * scale;
            let hi = (t + 1) as f64 * scale;
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(src);
            (first..last)
                .filter_map(|s| {
                    let overlap = (hi.min((s + 1) as f64) - lo.max(s as f64)).max(0.0);
                    (overlap > 0.0).then_some((s, overlap / scale))
                })
                .collect()
        })
        .collect()
}

/// Area-weighted box resampling to `width x height`.
pub fn resize_box(img: &ImageBuffer, width: usize, height: usize) -> Result<ImageBuffer> {
    if width == 0 || height == 0 {
        return Err(Error::Shape("target size must be positive".into()));
    }
    if (width, height) == (img.width, img.height) {
        return Ok(img.clone());
    }
    let wx = axis_weights(img.width, width);
    let wy = axis_weights(img.height, height);
    let mut pixels = Vec::with_capacity(width * height);
    for row in &wy {
        for col in &wx {
            let mut acc = [0.0; 3];
            for &(sy, fy) in row {
                for &(sx, fx) in col {
                    let p = img.get(sx, sy);
                    for ch in 0..3 {
                        acc[ch] += fy * fx * p[ch] as f64;
                    }
                }
            }
            pixels.push(acc.map(|v| v.round().clamp(0.0, 255.0) as u8));
        }
    }
    ImageBuffer::new(width, height, pixels)
}

/// Box-filter reduction to the standard 48x48 working size.
pub fn downscale(img: &ImageBuffer) -> ImageBuffer {
    resize_box(img, STANDARD_SIZE, STANDARD_SIZE).expect("target size is positive")
}

/// Nearest-neighbour enlargement, used to bring a segmentation back to the
/// source resolution for display.
pub fn upscale_nearest(img: &ImageBuffer, width: usize, height: usize) -> Result<ImageBuffer> {
    if width == 0 || height == 0 {
        return Err(Error::Shape("target size must be positive".into()));
    }
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        let sy = y * img.height / height;
        for x in 0..width {
            pixels.push(img.get(x * img.width / width, sy));
        }
    }
    ImageBuffer::new(width, height, pixels)
}

pub fn pixel_dataset(img: &ImageBuffer) -> Dataset {
    let flat: Vec<f64> = img.pixels.iter().flatten().map(|&v| v as f64).collect();
    let values = Array2::from_shape_vec((img.pixels.len(), 3), flat).expect("3 channels per pixel");
    Dataset::new(values).expect("pixel values are finite")
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub image: ImageBuffer,
    /// Cluster colors rounded to 8 bits, indexed by cluster.
    pub palette: Vec<[u8; 3]>,
    pub result: ClusterResult,
}

/// Downscales, clusters raw RGB values and repaints every pixel with its
/// cluster's centroid color.
pub fn segment(img: &ImageBuffer, params: &EngineParams, seed: u64) -> Result<Segmentation> {
    let small = downscale(img);
    let data = pixel_dataset(&small);
    let result = params.run(&data, seed)?;
    let palette: Vec<[u8; 3]> = result
        .centroids
        .outer_iter()
        .map(|c| [0, 1, 2].map(|ch| c[ch].round().clamp(0.0, 255.0) as u8))
        .collect();
    let pixels = result.labels.iter().map(|&k| palette[k]).collect();
    Ok(Segmentation {
        image: ImageBuffer::new(small.width, small.height, pixels)?,
        palette,
        result,
    })
}
