//! Denoising and binarization: adaptive Wiener filter, local-mean threshold
//! and the 3×3 binary median.
//!
//! All window statistics use edge-replicated borders and are computed from
//! integer integral images, so cost does not depend on the window size.

use thiserror::Error;

use crate::image::{BinaryImage, GrayImage};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PreprocessError {
    #[error("window {window} exceeds image size {width}x{height}")]
    WindowTooLarge { window: usize, width: usize, height: usize },
    #[error("window must be odd and at least 3, got {0}")]
    InvalidWindow(usize),
    #[error("threshold bias must be finite, got {0}")]
    InvalidBias(f64),
}

impl PreprocessError {
    pub fn kind(&self) -> &'static str {
        match self {
            PreprocessError::WindowTooLarge { .. } => "WindowTooLarge",
            PreprocessError::InvalidWindow(_) => "InvalidWindow",
            PreprocessError::InvalidBias(_) => "InvalidBias",
        }
    }
}

/// Parameters of the local-mean threshold rule `T = mean · (1 − bias)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConfig {
    pub window: usize,
    pub bias: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self { window: 31, bias: 0.10 }
    }
}

fn check_window(window: usize, img: &GrayImage) -> Result<(), PreprocessError> {
    if window < 3 || window.is_multiple_of(2) {
        return Err(PreprocessError::InvalidWindow(window));
    }
    if window > img.width().max(img.height()) {
        return Err(PreprocessError::WindowTooLarge { window, width: img.width(), height: img.height() });
    }
    Ok(())
}

/// Summed-area tables of values and squared values over an edge-padded copy.
struct WindowSums {
    width: usize,
    radius: usize,
    stride: usize,
    sum: Vec<u64>,
    sum_sq: Vec<u64>,
}

impl WindowSums {
    fn new(img: &GrayImage, window: usize) -> Self {
        let radius = window / 2;
        let pw = img.width() + 2 * radius;
        let ph = img.height() + 2 * radius;
        let stride = pw + 1;
        let mut sum = vec![0u64; stride * (ph + 1)];
        let mut sum_sq = vec![0u64; stride * (ph + 1)];
        for py in 0..ph {
            let mut row = 0u64;
            let mut row_sq = 0u64;
            for px in 0..pw {
                let v = u64::from(img.get_clamped(px as isize - radius as isize, py as isize - radius as isize));
                row += v;
                row_sq += v * v;
                let i = (py + 1) * stride + px + 1;
                sum[i] = sum[i - stride] + row;
                sum_sq[i] = sum_sq[i - stride] + row_sq;
            }
        }
        Self { width: img.width(), radius, stride, sum, sum_sq }
    }

    /// (sum, sum of squares) over the window centered at image pixel (x, y).
    fn at(&self, x: usize, y: usize) -> (u64, u64) {
        let w = 2 * self.radius + 1;
        let (x0, y0, x1, y1) = (x, y, x + w, y + w);
        let s = self.stride;
        let get = |t: &[u64]| t[y1 * s + x1] + t[y0 * s + x0] - t[y0 * s + x1] - t[y1 * s + x0];
        debug_assert!(x < self.width);
        (get(&self.sum), get(&self.sum_sq))
    }
}

/// Local-statistics Wiener filter.
///
/// `out = m + max(0, v − nv) / max(v, nv) · (x − m)`, with `m`, `v` the
/// window mean and variance and `nv` the mean of all local variances. An
/// image with `nv = 0` is returned unchanged.
pub fn wiener_denoise(img: &GrayImage, window: usize) -> Result<GrayImage, PreprocessError> {
    check_window(window, img)?;
    let sums = WindowSums::new(img, window);
    let n = (window * window) as f64;
    let (w, h) = (img.width(), img.height());
    let mut means = Vec::with_capacity(w * h);
    let mut vars = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (s, sq) = sums.at(x, y);
            let m = s as f64 / n;
            let v = (sq as f64 / n - m * m).max(0.0);
            means.push(m);
            vars.push(v);
        }
    }
    let noise = vars.iter().sum::<f64>() / vars.len() as f64;
    if noise == 0.0 {
        return Ok(img.clone());
    }
    let pixels = img
        .pixels()
        .iter()
        .zip(means.iter().zip(&vars))
        .map(|(&px, (&m, &v))| {
            let gain = (v - noise).max(0.0) / v.max(noise);
            let out = m + gain * (f64::from(px) - m);
            (out + 0.5).floor().clamp(0.0, 255.0) as u8
        })
        .collect();
    Ok(GrayImage::new(w, h, pixels).expect("same dimensions"))
}

/// Local-mean binarization. A pixel is foreground iff `intensity ≥ mean · (1 − bias)`.
pub fn adaptive_threshold(img: &GrayImage, cfg: &ThresholdConfig) -> Result<BinaryImage, PreprocessError> {
    check_window(cfg.window, img)?;
    if !cfg.bias.is_finite() {
        return Err(PreprocessError::InvalidBias(cfg.bias));
    }
    let sums = WindowSums::new(img, cfg.window);
    let n = (cfg.window * cfg.window) as f64;
    Ok(BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        let (s, _) = sums.at(x, y);
        passes_threshold(img.get(x, y), s as f64 / n, cfg.bias)
    }))
}

/// The per-pixel rule shared by [`adaptive_threshold`] and its test oracle.
pub fn passes_threshold(intensity: u8, local_mean: f64, bias: f64) -> bool {
    f64::from(intensity) >= local_mean * (1.0 - bias)
}

/// 3×3 majority filter with edge-replicated borders.
pub fn median3x3(img: &BinaryImage) -> BinaryImage {
    let (w, h) = (img.width() as isize, img.height() as isize);
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        let mut ones = 0;
        for dy in -1..=1 {
            for dx in -1..=1 {
                let sx = (x as isize + dx).clamp(0, w - 1) as usize;
                let sy = (y as isize + dy).clamp(0, h - 1) as usize;
                ones += usize::from(img.get(sx, sy));
            }
        }
        ones >= 5
    })
}
