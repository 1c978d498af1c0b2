//! Camera-frame decoding and the luminosity/color threshold filters.
//!
//! Frames arrive as PNG bytes and are held as row-major matrices of
//! double-precision channel triples normalized to `[0, 1]`. Each filter
//! stage produces a [`MonoMask`] of the same dimensions; masks combine
//! with a pointwise AND before blob extraction.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("malformed PNG: {0}")]
    MalformedPng(String),
    #[error("unsupported PNG format: {0}")]
    UnsupportedFormat(String),
    #[error("PNG encode failed: {0}")]
    Encode(String),
    #[error("{what} must lie in [{lo}, {hi}], got {value}")]
    OutOfRange {
        what: &'static str,
        lo: f64,
        hi: f64,
        value: f64,
    },
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("pixel buffer length {got} does not match {width}x{height}")]
    BadLength { got: usize, width: u32, height: u32 },
}

fn check_unit(what: &'static str, value: f64) -> Result<(), ImageError> {
    if !(0.0..=1.0).contains(&value) {
        return Err(ImageError::OutOfRange {
            what,
            lo: 0.0,
            hi: 1.0,
            value,
        });
    }
    Ok(())
}

/// Row-major RGB image with channels normalized to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    pixels: Vec<[f64; 3]>,
}

impl RgbImage {
    pub fn new(width: u32, height: u32, pixels: Vec<[f64; 3]>) -> Result<Self, ImageError> {
        if pixels.len() != (width as usize) * (height as usize) {
            return Err(ImageError::BadLength {
                got: pixels.len(),
                width,
                height,
            });
        }
        for p in &pixels {
            for &c in p {
                check_unit("rgb channel", c)?;
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [f64; 3]) -> Self {
        let mut pixels = Vec::with_capacity((width as usize) * (height as usize));
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel(&self, x: u32, y: u32) -> [f64; 3] {
        self.pixels[(y as usize) * (self.width as usize) + (x as usize)]
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }
}

/// Row-major HSV image; every component in `[0, 1]`, hue circular
/// (0 and 1 are the same color).
#[derive(Debug, Clone, PartialEq)]
pub struct HsvImage {
    width: u32,
    height: u32,
    pixels: Vec<[f64; 3]>,
}

impl HsvImage {
    pub fn new(width: u32, height: u32, pixels: Vec<[f64; 3]>) -> Result<Self, ImageError> {
        if pixels.len() != (width as usize) * (height as usize) {
            return Err(ImageError::BadLength {
                got: pixels.len(),
                width,
                height,
            });
        }
        for p in &pixels {
            for &c in p {
                check_unit("hsv component", c)?;
            }
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> [f64; 3]) -> Self {
        let mut pixels = Vec::with_capacity((width as usize) * (height as usize));
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixel(&self, x: u32, y: u32) -> [f64; 3] {
        self.pixels[(y as usize) * (self.width as usize) + (x as usize)]
    }

    pub fn pixels(&self) -> &[[f64; 3]] {
        &self.pixels
    }
}

/// Row-major boolean mask with the dimensions of its source image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonoMask {
    width: u32,
    height: u32,
    bits: Vec<bool>,
}

impl MonoMask {
    pub fn new(width: u32, height: u32, bits: Vec<bool>) -> Result<Self, ImageError> {
        if bits.len() != (width as usize) * (height as usize) {
            return Err(ImageError::BadLength {
                got: bits.len(),
                width,
                height,
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn filled(width: u32, height: u32, value: bool) -> Self {
        Self {
            width,
            height,
            bits: vec![value; (width as usize) * (height as usize)],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut bits = Vec::with_capacity((width as usize) * (height as usize));
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        self.bits[(y as usize) * (self.width as usize) + (x as usize)]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_true(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }
}

/// Decodes a PNG byte stream into a normalized [`RgbImage`].
///
/// Accepts 8- and 16-bit RGB, RGBA, grayscale and grayscale-alpha images as
/// well as paletted ones (expanded on load). Alpha is discarded; grayscale
/// replicates into all three channels. 8-bit channels divide by 255,
/// 16-bit by 65535.
pub fn decode_png(bytes: &[u8]) -> Result<RgbImage, ImageError> {
    let mut decoder = png::Decoder::new(bytes);
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder
        .read_info()
        .map_err(|e| ImageError::MalformedPng(e.to_string()))?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| ImageError::MalformedPng(e.to_string()))?;
    buf.truncate(info.buffer_size());

    let (width, height) = (info.width, info.height);
    let channels = match info.color_type {
        png::ColorType::Grayscale => 1,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Rgb => 3,
        png::ColorType::Rgba => 4,
        png::ColorType::Indexed => {
            return Err(ImageError::UnsupportedFormat(
                "indexed PNG was not expanded by the decoder".into(),
            ))
        }
    };

    let n = (width as usize) * (height as usize);
    let mut pixels = Vec::with_capacity(n);
    match info.bit_depth {
        png::BitDepth::Eight => {
            for px in buf.chunks_exact(channels) {
                pixels.push(expand_channels(px, channels, 255.0, |i| px[i] as f64));
            }
        }
        png::BitDepth::Sixteen => {
            for px in buf.chunks_exact(channels * 2) {
                pixels.push(expand_channels(px, channels, 65535.0, |i| {
                    u16::from_be_bytes([px[2 * i], px[2 * i + 1]]) as f64
                }));
            }
        }
        other => {
            return Err(ImageError::UnsupportedFormat(format!(
                "bit depth {other:?} after expansion"
            )))
        }
    }
    if pixels.len() != n {
        return Err(ImageError::MalformedPng(format!(
            "decoded {} pixels for a {width}x{height} image",
            pixels.len()
        )));
    }
    RgbImage::new(width, height, pixels)
}

fn expand_channels(
    _px: &[u8],
    channels: usize,
    scale: f64,
    read: impl Fn(usize) -> f64,
) -> [f64; 3] {
    match channels {
        1 | 2 => {
            let g = read(0) / scale;
            [g, g, g]
        }
        _ => [read(0) / scale, read(1) / scale, read(2) / scale],
    }
}

/// Encodes an [`RgbImage`] as a 16-bit RGB PNG.
///
/// 16-bit output makes encode/decode a lossless round trip for any image
/// whose channels are multiples of 1/65535 — which includes everything this
/// module itself decodes (k/255 = 257k/65535).
pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>, ImageError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, img.width(), img.height());
        enc.set_color(png::ColorType::Rgb);
        enc.set_depth(png::BitDepth::Sixteen);
        let mut writer = enc
            .write_header()
            .map_err(|e| ImageError::Encode(e.to_string()))?;
        let mut data = Vec::with_capacity(img.pixels().len() * 6);
        for p in img.pixels() {
            for &c in p {
                let q = (c * 65535.0).round() as u16;
                data.extend_from_slice(&q.to_be_bytes());
            }
        }
        writer
            .write_image_data(&data)
            .map_err(|e| ImageError::Encode(e.to_string()))?;
    }
    Ok(out)
}

/// Encodes a [`MonoMask`] as an 8-bit grayscale PNG (true = white).
pub fn encode_mask_png(mask: &MonoMask) -> Result<Vec<u8>, ImageError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, mask.width(), mask.height());
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc
            .write_header()
            .map_err(|e| ImageError::Encode(e.to_string()))?;
        let data: Vec<u8> = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
        writer
            .write_image_data(&data)
            .map_err(|e| ImageError::Encode(e.to_string()))?;
    }
    Ok(out)
}

/// Converts one RGB triple to HSV with all components in `[0, 1]`.
///
/// Standard hexcone conversion with hue scaled by 1/360. Achromatic pixels
/// get hue 0 and saturation 0; value is exactly `max(r, g, b)`.
pub fn rgb_pixel_to_hsv(rgb: [f64; 3]) -> [f64; 3] {
    let [r, g, b] = rgb;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;

    let h = if delta == 0.0 {
        0.0
    } else if max == r {
        let mut h = (g - b) / delta / 6.0;
        if h < 0.0 {
            h += 1.0;
        }
        h
    } else if max == g {
        ((b - r) / delta + 2.0) / 6.0
    } else {
        ((r - g) / delta + 4.0) / 6.0
    };
    let s = if max == 0.0 { 0.0 } else { delta / max };
    [if h >= 1.0 { h - 1.0 } else { h }, s, max]
}

/// Inverse hexcone conversion, used by the simulator's frame renderer.
pub fn hsv_pixel_to_rgb(hsv: [f64; 3]) -> [f64; 3] {
    let [h, s, v] = hsv;
    if s == 0.0 {
        return [v, v, v];
    }
    let h6 = (h % 1.0) * 6.0;
    let sector = h6.floor() as i64 % 6;
    let f = h6 - h6.floor();
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match sector {
        0 => [v, t, p],
        1 => [q, v, p],
        2 => [p, v, t],
        3 => [p, q, v],
        4 => [t, p, v],
        _ => [v, p, q],
    }
}

/// Converts an RGB image to HSV, preserving dimensions.
pub fn rgb_to_hsv(img: &RgbImage) -> HsvImage {
    HsvImage {
        width: img.width(),
        height: img.height(),
        pixels: img.pixels().iter().map(|&p| rgb_pixel_to_hsv(p)).collect(),
    }
}

/// Masks pixels whose value component meets the threshold
/// (`true` iff `value >= value_threshold`).
pub fn luminosity_mask(img: &HsvImage, value_threshold: f64) -> Result<MonoMask, ImageError> {
    check_unit("value_threshold", value_threshold)?;
    Ok(MonoMask {
        width: img.width(),
        height: img.height(),
        bits: img.pixels().iter().map(|p| p[2] >= value_threshold).collect(),
    })
}

/// Circular distance between two hues on the `[0, 1)` color wheel.
pub fn circular_hue_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % 1.0;
    d.min(1.0 - d)
}

/// Masks pixels whose hue lies within `hue_threshold` of `hue_target`
/// (circular distance) and whose saturation is at least `saturation_min`.
///
/// The hue comparison wraps around the 0/1 seam so red targets behave like
/// any other color. Pass `saturation_min = 0.0` to disable the saturation
/// floor; achromatic pixels carry hue 0 by convention, so a floor is
/// advisable when hunting a colored laser.
pub fn hue_mask(
    img: &HsvImage,
    hue_target: f64,
    hue_threshold: f64,
    saturation_min: f64,
) -> Result<MonoMask, ImageError> {
    check_unit("hue_target", hue_target)?;
    if !(0.0..=0.5).contains(&hue_threshold) {
        return Err(ImageError::OutOfRange {
            what: "hue_threshold",
            lo: 0.0,
            hi: 0.5,
            value: hue_threshold,
        });
    }
    check_unit("saturation_min", saturation_min)?;
    Ok(MonoMask {
        width: img.width(),
        height: img.height(),
        bits: img
            .pixels()
            .iter()
            .map(|p| {
                circular_hue_distance(p[0], hue_target) <= hue_threshold && p[1] >= saturation_min
            })
            .collect(),
    })
}

/// Pointwise logical AND of two masks of identical dimensions.
pub fn mask_and(a: &MonoMask, b: &MonoMask) -> Result<MonoMask, ImageError> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(ImageError::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    Ok(MonoMask {
        width: a.width(),
        height: a.height(),
        bits: a
            .bits()
            .iter()
            .zip(b.bits())
            .map(|(&x, &y)| x && y)
            .collect(),
    })
}
