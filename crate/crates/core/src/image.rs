//! Raster types shared by every stage, plus grayscale conversion and rotation.
//!
//! Coordinates are raster-native: `x` is the column index growing rightward,
//! `y` is the row index growing downward. Every centroid, line and angle in
//! the crate uses this frame.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ImageError {
    #[error("cannot read {path}: {source}")]
    UnreadableFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image data: {0}")]
    CorruptData(String),
    #[error("invalid dimensions {width}x{height} for buffer of length {len}")]
    InvalidDimensions { width: usize, height: usize, len: usize },
}

impl ImageError {
    pub fn kind(&self) -> &'static str {
        match self {
            ImageError::UnreadableFile { .. } => "UnreadableFile",
            ImageError::UnsupportedFormat(_) => "UnsupportedFormat",
            ImageError::CorruptData(_) => "CorruptData",
            ImageError::InvalidDimensions { .. } => "InvalidDimensions",
        }
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<(), ImageError> {
    if width == 0 || height == 0 || width.checked_mul(height) != Some(len) {
        return Err(ImageError::InvalidDimensions { width, height, len });
    }
    Ok(())
}

/// RGB raster, row-major, one `[r, g, b]` triple per pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self, ImageError> {
        check_dims(width, height, pixels.len())?;
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Self {
        assert!(width > 0 && height > 0, "image must be non-empty");
        Self { width, height, pixels: vec![rgb; width * height] }
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

    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        self.pixels[y * self.width + x] = rgb;
    }

    /// Converts to luma with weights 0.299 / 0.587 / 0.114, rounded half up.
    pub fn to_gray(&self) -> GrayImage {
        let pixels = self.pixels.iter().map(|&p| luma(p)).collect();
        GrayImage { width: self.width, height: self.height, pixels }
    }
}

/// Luma of one RGB triple.
pub fn luma([r, g, b]: [u8; 3]) -> u8 {
    let y = 0.299 * f64::from(r) + 0.587 * f64::from(g) + 0.114 * f64::from(b);
    (y + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Free-function form of [`ColorImage::to_gray`].
pub fn to_gray(img: &ColorImage) -> GrayImage {
    img.to_gray()
}

/// 8-bit grayscale raster, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height, pixels.len())?;
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image must be non-empty");
        Self { width, height, pixels: vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image must be non-empty");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.pixels[y * self.width + x] = v;
    }

    /// Pixel at a possibly out-of-range coordinate, clamped to the border.
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn to_color(&self) -> ColorImage {
        let pixels = self.pixels.iter().map(|&v| [v, v, v]).collect();
        ColorImage { width: self.width, height: self.height, pixels }
    }
}

/// Two-level raster. `true` is foreground (white), `false` background.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self, ImageError> {
        check_dims(width, height, pixels.len())?;
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        assert!(width > 0 && height > 0, "image must be non-empty");
        Self { width, height, pixels: vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(width > 0 && height > 0, "image must be non-empty");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self { width, height, pixels }
    }

    /// Parses rows of `#` (foreground) and `.` (background). Whitespace is ignored.
    ///
    /// Handy for small fixtures in tests.
    pub fn from_ascii(rows: &[&str]) -> Self {
        let rows: Vec<Vec<bool>> =
            rows.iter().map(|r| r.chars().filter(|c| !c.is_whitespace()).map(|c| c == '#').collect()).collect();
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == width), "ragged ascii image");
        Self::new(width, height, rows.concat()).expect("non-empty ascii image")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    /// Out-of-range coordinates read as background.
    pub fn get_or_bg(&self, x: isize, y: isize) -> bool {
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            false
        } else {
            self.get(x as usize, y as usize)
        }
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.pixels[y * self.width + x] = v;
    }

    pub fn count_foreground(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    pub fn complement(&self) -> Self {
        Self { width: self.width, height: self.height, pixels: self.pixels.iter().map(|&p| !p).collect() }
    }

    /// 255 for foreground, 0 for background.
    pub fn to_gray(&self) -> GrayImage {
        let pixels = self.pixels.iter().map(|&p| if p { 255 } else { 0 }).collect();
        GrayImage { width: self.width, height: self.height, pixels }
    }
}

/// Geometry of a canvas-enlarging rotation.
///
/// The rotation turns content by `-angle`, so a line lying at `+angle` in the
/// source becomes horizontal in the output. The output canvas is large enough
/// to hold every source pixel, and its size keeps the parity of the source so
/// the center pixel of an odd-sized image maps to a pixel center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    pub angle_deg: f64,
    pub src_width: usize,
    pub src_height: usize,
    pub dst_width: usize,
    pub dst_height: usize,
    cos: f64,
    sin: f64,
}

impl Rotation {
    pub fn new(src_width: usize, src_height: usize, angle_deg: f64) -> Self {
        let theta = angle_deg.to_radians();
        let (sin, cos) = theta.sin_cos();
        let (dst_width, dst_height) = if angle_deg == 0.0 {
            (src_width, src_height)
        } else {
            let (w, h) = (src_width as f64, src_height as f64);
            let need_w = (w * cos.abs() + h * sin.abs() - 1e-9).ceil() as usize;
            let need_h = (w * sin.abs() + h * cos.abs() - 1e-9).ceil() as usize;
            (match_parity(need_w.max(1), src_width), match_parity(need_h.max(1), src_height))
        };
        Self { angle_deg, src_width, src_height, dst_width, dst_height, cos, sin }
    }

    fn src_center(&self) -> (f64, f64) {
        ((self.src_width as f64 - 1.0) / 2.0, (self.src_height as f64 - 1.0) / 2.0)
    }

    fn dst_center(&self) -> (f64, f64) {
        ((self.dst_width as f64 - 1.0) / 2.0, (self.dst_height as f64 - 1.0) / 2.0)
    }

    /// Source point to output point.
    pub fn forward(&self, x: f64, y: f64) -> (f64, f64) {
        let (scx, scy) = self.src_center();
        let (dcx, dcy) = self.dst_center();
        let (dx, dy) = (x - scx, y - scy);
        // R(-angle)
        (dcx + self.cos * dx + self.sin * dy, dcy - self.sin * dx + self.cos * dy)
    }

    /// Output point to source point.
    pub fn inverse(&self, x: f64, y: f64) -> (f64, f64) {
        let (scx, scy) = self.src_center();
        let (dcx, dcy) = self.dst_center();
        let (dx, dy) = (x - dcx, y - dcy);
        // R(+angle)
        (scx + self.cos * dx - self.sin * dy, scy + self.sin * dx + self.cos * dy)
    }

    /// Nearest-neighbour resampling of `img` through this rotation.
    pub fn apply(&self, img: &BinaryImage) -> BinaryImage {
        assert_eq!((img.width(), img.height()), (self.src_width, self.src_height));
        if self.angle_deg == 0.0 {
            return img.clone();
        }
        BinaryImage::from_fn(self.dst_width, self.dst_height, |x, y| {
            let (sx, sy) = self.inverse(x as f64, y as f64);
            img.get_or_bg(round_half_up(sx), round_half_up(sy))
        })
    }
}

fn match_parity(n: usize, reference: usize) -> usize {
    if (n % 2) == (reference % 2) {
        n
    } else {
        n + 1
    }
}

fn round_half_up(v: f64) -> isize {
    // Absorb floating error so exact half-pixel hits land deterministically.
    (v + 0.5 + 1e-9).floor() as isize
}

/// Rotates `img` by `-angle_deg` about its center (nearest neighbour, enlarged canvas).
pub fn rotate(img: &BinaryImage, angle_deg: f64) -> BinaryImage {
    Rotation::new(img.width(), img.height(), angle_deg).apply(img)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn luma_examples() {
        assert_eq!(luma([255, 255, 255]), 255);
        assert_eq!(luma([0, 0, 0]), 0);
        // 0.299 * 255 = 76.245
        assert_eq!(luma([255, 0, 0]), 76);
    }

    #[test]
    fn gray_roundtrip_is_idempotent() {
        let g = GrayImage::from_fn(16, 16, |x, y| (x * 16 + y) as u8);
        assert_eq!(g.to_color().to_gray(), g);
    }

    #[test]
    fn rotate_zero_is_identity() {
        let img = BinaryImage::from_fn(7, 5, |x, y| (x * 3 + y * 5) % 4 == 0);
        assert_eq!(rotate(&img, 0.0), img);
    }

    #[test]
    fn rotate_center_pixel_is_fixed() {
        let mut img = BinaryImage::filled(5, 5, false);
        img.set(2, 2, true);
        let out = rotate(&img, 45.0);
        assert_eq!(out.count_foreground(), 1);
        let (cx, cy) = (out.width() / 2, out.height() / 2);
        assert!(out.get(cx, cy));
        assert_eq!(out.width() % 2, 1);
    }

    #[test]
    fn rotate_bar_there_and_back() {
        let mut img = BinaryImage::filled(7, 7, false);
        for x in 2..5 {
            img.set(x, 3, true);
        }
        let back = rotate(&rotate(&img, 90.0), -90.0);
        let dx = (back.width() as isize - 7) / 2;
        let dy = (back.height() as isize - 7) / 2;
        for y in 0..7 {
            for x in 0..7 {
                if img.get(x, y) {
                    let hit = (-1..=1)
                        .any(|oy| (-1..=1).any(|ox| back.get_or_bg(x as isize + dx + ox, y as isize + dy + oy)));
                    assert!(hit, "lost foreground at ({x},{y})");
                }
            }
        }
    }

    #[test]
    fn rotation_levels_a_tilted_line() {
        let r = Rotation::new(101, 81, 30.0);
        let t = 30f64.to_radians();
        let (x0, y0) = r.forward(50.0, 40.0);
        let (x1, y1) = r.forward(50.0 + 20.0 * t.cos(), 40.0 + 20.0 * t.sin());
        assert!((y1 - y0).abs() < 1e-9);
        assert!((x1 - x0 - 20.0).abs() < 1e-9);
        let (bx, by) = r.inverse(x1, y1);
        assert!((bx - 50.0 - 20.0 * t.cos()).abs() < 1e-9);
        assert!((by - 40.0 - 20.0 * t.sin()).abs() < 1e-9);
    }

    #[test]
    fn mismatched_buffer_is_rejected() {
        assert!(GrayImage::new(3, 3, vec![0; 8]).is_err());
        assert!(BinaryImage::new(0, 3, vec![]).is_err());
    }
}
