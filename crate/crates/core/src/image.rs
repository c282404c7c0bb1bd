//! Normalized raster images and the pixel-level primitives built on them.
//!
//! An [`ImageBuf`] stores values in `[0, 1]`, row-major and channel
//! interleaved. Every constructor enforces that range, so downstream code can
//! quantize with `round(v * 255)` without further checks.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuf {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImageBuf {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidImage(format!(
                "channels must be 1 or 3, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::InvalidImage(format!(
                "expected {} values, got {}",
                width * height * channels,
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidImage(format!("value {v} outside [0, 1]")));
        }
        Ok(ImageBuf {
            width,
            height,
            channels,
            data,
        })
    }

    /// Builds an image from values that are clamped into `[0, 1]`.
    /// Non-finite inputs are rejected.
    pub fn from_clamped(
        width: usize,
        height: usize,
        channels: usize,
        mut data: Vec<f64>,
    ) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidImage("non-finite value".into()));
        }
        data.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0));
        Self::new(width, height, channels, data)
    }

    pub fn filled(width: usize, height: usize, channels: usize, value: f64) -> Result<Self> {
        Self::new(width, height, channels, vec![value; width * height * channels])
    }

    pub fn zeros(width: usize, height: usize, channels: usize) -> Result<Self> {
        Self::filled(width, height, channels, 0.0)
    }

    /// Builds an image by evaluating `f(x, y, channel)`; results are clamped.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::from_clamped(width, height, channels, data)
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, c: usize) -> usize {
        (y * self.width + x) * self.channels + c
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[self.index(x, y, c)]
    }

    /// Sets one value, clamping it into `[0, 1]`.
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, v: f64) {
        let i = self.index(x, y, c);
        self.data[i] = v.clamp(0.0, 1.0);
    }

    pub fn same_shape(&self, other: &ImageBuf) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub(crate) fn check_same_shape(&self, other: &ImageBuf, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what}: {}x{}x{} vs {}x{}x{}",
                self.width,
                self.height,
                self.channels,
                other.width,
                other.height,
                other.channels
            )))
        }
    }

    /// Channel-mean grayscale plane, row-major.
    pub fn gray_plane(&self) -> Vec<f64> {
        self.data
            .chunks_exact(self.channels)
            .map(|px| px.iter().sum::<f64>() / self.channels as f64)
            .collect()
    }

    /// One channel as a row-major plane.
    pub fn channel_plane(&self, c: usize) -> Vec<f64> {
        self.data
            .iter()
            .skip(c)
            .step_by(self.channels)
            .copied()
            .collect()
    }

    /// 8-bit quantized values, `round(v * 255)`.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().map(|&v| to_byte(v)).collect()
    }

    pub fn from_bytes(width: usize, height: usize, channels: usize, bytes: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            bytes.iter().map(|&b| from_byte(b)).collect(),
        )
    }
}

#[inline]
pub fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

#[inline]
pub fn from_byte(b: u8) -> f64 {
    b as f64 / 255.0
}

/// Bookkeeping for right/bottom zero padding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PadInfo {
    pub original_width: usize,
    pub original_height: usize,
    pub pad_right: usize,
    pub pad_bottom: usize,
}

impl PadInfo {
    pub fn padded_width(&self) -> usize {
        self.original_width + self.pad_right
    }

    pub fn padded_height(&self) -> usize {
        self.original_height + self.pad_bottom
    }

    /// Padding needed to round `width`x`height` up to multiples of `k`.
    pub fn for_cell(width: usize, height: usize, k: usize) -> Self {
        let k = k.max(1);
        PadInfo {
            original_width: width,
            original_height: height,
            pad_right: width.div_ceil(k) * k - width,
            pad_bottom: height.div_ceil(k) * k - height,
        }
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuf> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut decoder = png::Decoder::new(BufReader::new(file));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(|source| Error::Decode {
        path: path.into(),
        source,
    })?;
    let (color, depth) = reader.output_color_type();
    if depth != png::BitDepth::Eight {
        return Err(Error::UnsupportedFormat {
            path: path.into(),
            reason: format!("bit depth {depth:?}, expected 8"),
        });
    }
    let channels = match color {
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgb => 3,
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.into(),
                reason: format!("color type {other:?}, expected grayscale or RGB"),
            })
        }
    };
    let size = reader.output_buffer_size().ok_or_else(|| Error::UnsupportedFormat {
        path: path.into(),
        reason: "image too large".into(),
    })?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(|source| Error::Decode {
        path: path.into(),
        source,
    })?;
    let (w, h) = (info.width as usize, info.height as usize);
    let line = info.line_size;
    let mut bytes = Vec::with_capacity(w * h * channels);
    for row in buf.chunks(line).take(h) {
        bytes.extend_from_slice(&row[..w * channels]);
    }
    ImageBuf::from_bytes(w, h, channels, &bytes)
}

pub fn save_image(img: &ImageBuf, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(
        BufWriter::new(file),
        img.width() as u32,
        img.height() as u32,
    );
    encoder.set_color(if img.channels() == 1 {
        png::ColorType::Grayscale
    } else {
        png::ColorType::Rgb
    });
    encoder.set_depth(png::BitDepth::Eight);
    let encode_err = |source| Error::Encode {
        path: path.into(),
        source,
    };
    let mut writer = encoder.write_header().map_err(encode_err)?;
    writer
        .write_image_data(&img.to_bytes())
        .map_err(encode_err)?;
    writer.finish().map_err(encode_err)?;
    Ok(())
}

/// Writes a binary raster as an 8-bit grayscale PNG (`false` = 0, `true` = 255).
pub fn save_binary(width: usize, height: usize, bits: &[bool], path: impl AsRef<Path>) -> Result<()> {
    let img = ImageBuf::new(
        width,
        height,
        1,
        bits.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
    )?;
    save_image(&img, path)
}

/// Zero-pads on the right and bottom up to the next multiples of `k`.
pub fn pad_zero(img: &ImageBuf, k: usize) -> (ImageBuf, PadInfo) {
    let pad = PadInfo::for_cell(img.width(), img.height(), k);
    if pad.pad_right == 0 && pad.pad_bottom == 0 {
        return (img.clone(), pad);
    }
    let (pw, ph, ch) = (pad.padded_width(), pad.padded_height(), img.channels());
    let mut data = vec![0.0; pw * ph * ch];
    let row = img.width() * ch;
    for y in 0..img.height() {
        let src = y * row;
        let dst = y * pw * ch;
        data[dst..dst + row].copy_from_slice(&img.data()[src..src + row]);
    }
    (
        ImageBuf {
            width: pw,
            height: ph,
            channels: ch,
            data,
        },
        pad,
    )
}

pub fn crop(img: &ImageBuf, pad: &PadInfo) -> Result<ImageBuf> {
    if pad.padded_width() != img.width() || pad.padded_height() != img.height() {
        return Err(Error::InconsistentPadding(format!(
            "padding describes {}x{}, image is {}x{}",
            pad.padded_width(),
            pad.padded_height(),
            img.width(),
            img.height()
        )));
    }
    if pad.original_width == 0 || pad.original_height == 0 {
        return Err(Error::InconsistentPadding("original size is empty".into()));
    }
    let ch = img.channels();
    let row = pad.original_width * ch;
    let mut data = Vec::with_capacity(row * pad.original_height);
    for y in 0..pad.original_height {
        let src = y * img.width() * ch;
        data.extend_from_slice(&img.data()[src..src + row]);
    }
    Ok(ImageBuf {
        width: pad.original_width,
        height: pad.original_height,
        channels: ch,
        data,
    })
}

/// `clip(img + delta * n)` with `n` i.i.d. standard normal, one draw per
/// stored value in storage order.
pub fn add_gaussian_noise(img: &ImageBuf, delta: f64, seed: u64) -> ImageBuf {
    if delta == 0.0 {
        return img.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = img
        .data()
        .iter()
        .map(|&v| {
            let n: f64 = StandardNormal.sample(&mut rng);
            (v + delta * n).clamp(0.0, 1.0)
        })
        .collect();
    ImageBuf { data, ..img.clone() }
}

/// Normalized 1-D Gaussian sampled at integer offsets `-(ksize/2)..=ksize/2`.
pub fn gaussian_kernel(ksize: usize, sigma: f64) -> Result<Vec<f64>> {
    if ksize == 0 || ksize.is_multiple_of(2) {
        return Err(Error::InvalidKernel(ksize));
    }
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let r = (ksize / 2) as i64;
    let mut k: Vec<f64> = (-r..=r)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|w| *w /= sum);
    Ok(k)
}

#[inline]
fn clamp_index(i: i64, n: usize) -> usize {
    i.clamp(0, n as i64 - 1) as usize
}

/// Separable convolution of a single plane with edge replication.
pub(crate) fn convolve_separable(
    plane: &[f64],
    width: usize,
    height: usize,
    kernel: &[f64],
) -> Vec<f64> {
    let r = (kernel.len() / 2) as i64;
    let mut tmp = vec![0.0; plane.len()];
    for y in 0..height {
        let row = &plane[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (j, w) in kernel.iter().enumerate() {
                acc += w * row[clamp_index(x as i64 + j as i64 - r, width)];
            }
            tmp[y * width + x] = acc;
        }
    }
    let mut out = vec![0.0; plane.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (j, w) in kernel.iter().enumerate() {
                acc += w * tmp[clamp_index(y as i64 + j as i64 - r, height) * width + x];
            }
            out[y * width + x] = acc;
        }
    }
    out
}

fn map_planes(img: &ImageBuf, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> ImageBuf {
    let ch = img.channels();
    let mut data = vec![0.0; img.data().len()];
    for c in 0..ch {
        let plane = f(&img.channel_plane(c));
        for (i, v) in plane.into_iter().enumerate() {
            data[i * ch + c] = v.clamp(0.0, 1.0);
        }
    }
    ImageBuf { data, ..img.clone() }
}

pub fn gaussian_blur(img: &ImageBuf, ksize: usize, sigma: f64) -> Result<ImageBuf> {
    let kernel = gaussian_kernel(ksize, sigma)?;
    let (w, h) = (img.width(), img.height());
    Ok(map_planes(img, |p| convolve_separable(p, w, h, &kernel)))
}

pub fn median_blur(img: &ImageBuf, ksize: usize) -> Result<ImageBuf> {
    if ksize == 0 || ksize.is_multiple_of(2) {
        return Err(Error::InvalidKernel(ksize));
    }
    let (w, h) = (img.width(), img.height());
    let r = (ksize / 2) as i64;
    let mut window = Vec::with_capacity(ksize * ksize);
    Ok(map_planes(img, |p| {
        let mut out = vec![0.0; p.len()];
        for y in 0..h {
            for x in 0..w {
                window.clear();
                for dy in -r..=r {
                    let yy = clamp_index(y as i64 + dy, h);
                    for dx in -r..=r {
                        window.push(p[yy * w + clamp_index(x as i64 + dx, w)]);
                    }
                }
                let mid = window.len() / 2;
                let (_, m, _) = window.select_nth_unstable_by(mid, f64::total_cmp);
                out[y * w + x] = *m;
            }
        }
        out
    }))
}
