//! Raster types, binary PGM/PPM file IO and the pre-processing stages of
//! the perception pipeline: bottom-half crop, grayscale conversion, band
//! thresholding and separable Gaussian blur.

use crate::error::{Error, Result};

/// An 8-bit raster image, 1 channel (gray) or 3 channels (RGB),
/// stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl Frame {
    /// Builds a frame from raw row-major samples.
    ///
    /// `channels` must be 1 or 3 and `data.len()` must equal
    /// `width * height * channels`.
    pub fn from_data(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::ChannelMismatch {
                expected: 1,
                actual: channels,
            });
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(Error::TruncatedPayload {
                expected,
                actual: data.len(),
            });
        }
        Ok(Frame {
            width,
            height,
            channels,
            data,
        })
    }

    /// A gray frame filled with a constant intensity.
    pub fn gray(width: usize, height: usize, value: u8) -> Self {
        Frame {
            width,
            height,
            channels: 1,
            data: vec![value; width * height],
        }
    }

    /// An RGB frame filled with a constant color.
    pub fn rgb(width: usize, height: usize, color: [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            data.extend_from_slice(&color);
        }
        Frame {
            width,
            height,
            channels: 3,
            data,
        }
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

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// Sample channel `c` at pixel (x, y). Panics when out of bounds.
    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, value: u8) {
        self.data[(y * self.width + x) * self.channels + c] = value;
    }

    /// Sets all channels of pixel (x, y) at once; `color` length must
    /// match the channel count.
    pub fn put_pixel(&mut self, x: usize, y: usize, color: &[u8]) {
        let base = (y * self.width + x) * self.channels;
        self.data[base..base + self.channels].copy_from_slice(color);
    }

    /// Horizontal mirror (left-right flip), used by the symmetry tests
    /// and the mirror acceptance checks.
    pub fn mirrored(&self) -> Frame {
        let mut out = self.clone();
        for y in 0..self.height {
            for x in 0..self.width {
                for c in 0..self.channels {
                    out.set(x, y, c, self.get(self.width - 1 - x, y, c));
                }
            }
        }
        out
    }
}

/// One boolean per pixel, row-major. Carrier for threshold and edge maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryMask {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    /// Number of set pixels.
    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Row-major (x, y) coordinates of all set pixels.
    pub fn set_pixels(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// Renders the mask as a gray frame (255 where set), the form the
    /// blur and edge stages consume.
    pub fn to_frame(&self) -> Frame {
        let data = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        Frame {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }

    pub fn mirrored(&self) -> BinaryMask {
        let mut out = BinaryMask::new(self.width, self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                out.set(x, y, self.get(self.width - 1 - x, y));
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// PGM / PPM codec
// ---------------------------------------------------------------------------

/// Decodes a binary PGM (P5) or PPM (P6) file with maxval 255.
///
/// Header fields may be separated by any whitespace; `#` comments are
/// skipped. The canonical encoding produced by [`encode_image`] always
/// round-trips bit-exactly.
pub fn decode_image(bytes: &[u8]) -> Result<Frame> {
    let channels = match bytes.get(0..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err(Error::BadMagic),
    };
    let mut pos = 2;
    let mut fields = [0usize; 3]; // width, height, maxval
    for field in fields.iter_mut() {
        *field = parse_header_int(bytes, &mut pos)?;
    }
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(Error::UnsupportedMaxval(maxval as u32));
    }
    // Exactly one whitespace byte separates the header from the payload.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(Error::MalformedHeader("missing payload separator".into())),
    }
    let expected = width * height * channels;
    let payload = &bytes[pos..];
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            actual: payload.len(),
        });
    }
    Frame::from_data(width, height, channels, payload[..expected].to_vec())
}

fn parse_header_int(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    // Skip whitespace and comment lines.
    loop {
        match bytes.get(*pos) {
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            _ => break,
        }
    }
    let start = *pos;
    while matches!(bytes.get(*pos), Some(b) if b.is_ascii_digit()) {
        *pos += 1;
    }
    if *pos == start {
        return Err(Error::MalformedHeader("expected an integer field".into()));
    }
    let text = std::str::from_utf8(&bytes[start..*pos]).expect("digits are ASCII");
    text.parse::<usize>()
        .map_err(|_| Error::MalformedHeader(format!("integer field out of range: {text}")))
}

/// Encodes a frame as binary PGM (1 channel) or PPM (3 channels):
/// `MAGIC\nW H\n255\n` followed by the raw samples.
pub fn encode_image(frame: &Frame) -> Vec<u8> {
    let magic = if frame.channels == 1 { "P5" } else { "P6" };
    let mut out = format!("{magic}\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.extend_from_slice(&frame.data);
    out
}

// ---------------------------------------------------------------------------
// Pre-processing stages
// ---------------------------------------------------------------------------

/// Rec.601 luma: round(0.299 R + 0.587 G + 0.114 B) per pixel.
pub fn to_grayscale(frame: &Frame) -> Result<Frame> {
    if frame.channels != 3 {
        return Err(Error::ChannelMismatch {
            expected: 3,
            actual: frame.channels,
        });
    }
    let mut data = Vec::with_capacity(frame.width * frame.height);
    for px in frame.data.chunks_exact(3) {
        let luma = 0.299 * px[0] as f64 + 0.587 * px[1] as f64 + 0.114 * px[2] as f64;
        data.push(luma.round().clamp(0.0, 255.0) as u8);
    }
    Ok(Frame {
        width: frame.width,
        height: frame.height,
        channels: 1,
        data,
    })
}

/// Keeps the bottom `ceil(height/2)` rows (the road region of a
/// forward-facing camera); the top half is discarded.
pub fn crop_bottom_half(frame: &Frame) -> Result<Frame> {
    if frame.height < 2 {
        return Err(Error::DegenerateImage(format!(
            "cannot crop a {}-row frame",
            frame.height
        )));
    }
    let out_height = frame.height.div_ceil(2);
    let row_bytes = frame.width * frame.channels;
    let start = (frame.height - out_height) * row_bytes;
    Ok(Frame {
        width: frame.width,
        height: out_height,
        channels: frame.channels,
        data: frame.data[start..].to_vec(),
    })
}

/// Marks pixels with `lo <= intensity <= hi`. A closed band rather than a
/// one-sided threshold, so the mid-luma center marking separates from the
/// brighter edge lines.
pub fn band_threshold(gray: &Frame, lo: u8, hi: u8) -> Result<BinaryMask> {
    if gray.channels != 1 {
        return Err(Error::ChannelMismatch {
            expected: 1,
            actual: gray.channels,
        });
    }
    if lo > hi {
        return Err(Error::InvalidThresholdBand { lo, hi });
    }
    let mut mask = BinaryMask::new(gray.width, gray.height);
    for (i, &v) in gray.data.iter().enumerate() {
        mask.bits[i] = v >= lo && v <= hi;
    }
    Ok(mask)
}

/// Normalized 1-D Gaussian taps for a (2 radius + 1)-wide kernel,
/// w(i) proportional to exp(-i^2 / (2 sigma^2)).
pub fn gaussian_kernel(radius: usize, sigma: f64) -> Vec<f64> {
    let mut taps: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|i| (-((i * i) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = taps.iter().sum();
    for t in taps.iter_mut() {
        *t /= sum;
    }
    taps
}

/// Separable Gaussian blur with edge replication at the borders.
///
/// Both passes accumulate in f64 and the result is rounded to the nearest
/// integer once, so the output matches a direct 2-D convolution.
pub fn gaussian_blur(gray: &Frame, radius: usize, sigma: f64) -> Result<Frame> {
    if gray.channels != 1 {
        return Err(Error::ChannelMismatch {
            expected: 1,
            actual: gray.channels,
        });
    }
    if radius < 1 || sigma <= 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidBlurParams { radius, sigma });
    }
    let (w, h) = (gray.width as isize, gray.height as isize);
    let kernel = gaussian_kernel(radius, sigma);
    let r = radius as isize;

    // Horizontal pass. Mirror-symmetric tap pairs are added before being
    // accumulated so horizontally mirrored inputs sum the exact same f64
    // terms and the pass commutes with mirroring bit-exactly.
    let mut tmp = vec![0.0f64; gray.data.len()];
    for y in 0..h {
        for x in 0..w {
            let sample = |dx: isize| {
                gray.data[(y * w + (x + dx).clamp(0, w - 1)) as usize] as f64
            };
            let mut acc = kernel[radius] * sample(0);
            for k in 1..=r {
                acc += kernel[(r - k) as usize] * (sample(-k) + sample(k));
            }
            tmp[(y * w + x) as usize] = acc;
        }
    }
    // Vertical pass, rounding once at the end.
    let mut data = vec![0u8; gray.data.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, &tap) in kernel.iter().enumerate() {
                let sy = (y + k as isize - r).clamp(0, h - 1);
                acc += tap * tmp[(sy * w + x) as usize];
            }
            data[(y * w + x) as usize] = acc.round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(Frame {
        width: gray.width,
        height: gray.height,
        channels: 1,
        data,
    })
}
