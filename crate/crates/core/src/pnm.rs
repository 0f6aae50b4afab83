//! Netpbm decoding (P2, P3, P5, P6) and encoding (P5, P6).

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::image::{ColorImage, GrayImage, ImageError};

/// Reads a PGM or PPM file. Gray images are expanded to RGB.
pub fn load_image(path: impl AsRef<Path>) -> Result<ColorImage, ImageError> {
    let path = path.as_ref();
    let data =
        fs::read(path).map_err(|source| ImageError::UnreadableFile { path: path.display().to_string(), source })?;
    decode(&data)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Kind {
    PlainGray,
    PlainColor,
    RawGray,
    RawColor,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws_and_comments(&mut self) {
        while self.pos < self.data.len() {
            let c = self.data[self.pos];
            if c == b'#' {
                while self.pos < self.data.len() && self.data[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else if c.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize, ImageError> {
        self.skip_ws_and_comments();
        let start = self.pos;
        while self.pos < self.data.len() && self.data[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(ImageError::CorruptData(format!("expected {what} at byte {start}")));
        }
        std::str::from_utf8(&self.data[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| ImageError::CorruptData(format!("{what} out of range")))
    }
}

/// Decodes an in-memory netpbm image.
pub fn decode(data: &[u8]) -> Result<ColorImage, ImageError> {
    if data.len() < 2 {
        return Err(ImageError::CorruptData("file too short".into()));
    }
    let kind = match &data[..2] {
        b"P2" => Kind::PlainGray,
        b"P3" => Kind::PlainColor,
        b"P5" => Kind::RawGray,
        b"P6" => Kind::RawColor,
        [b'P', d] => return Err(ImageError::UnsupportedFormat(format!("netpbm variant P{}", *d as char))),
        _ => return Err(ImageError::UnsupportedFormat("not a PGM/PPM file".into())),
    };
    let mut cur = Cursor { data, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(ImageError::CorruptData("zero image dimension".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(ImageError::CorruptData(format!("invalid maxval {maxval}")));
    }
    let channels = match kind {
        Kind::PlainGray | Kind::RawGray => 1,
        Kind::PlainColor | Kind::RawColor => 3,
    };
    let count = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(channels))
        .ok_or_else(|| ImageError::CorruptData("dimensions overflow".into()))?;

    let mut samples = Vec::with_capacity(count);
    match kind {
        Kind::PlainGray | Kind::PlainColor => {
            for _ in 0..count {
                let v = cur.number("sample")?;
                if v > maxval {
                    return Err(ImageError::CorruptData(format!("sample {v} exceeds maxval")));
                }
                samples.push(v);
            }
        }
        Kind::RawGray | Kind::RawColor => {
            // Exactly one whitespace byte separates the header from raster data.
            if cur.pos >= data.len() || !data[cur.pos].is_ascii_whitespace() {
                return Err(ImageError::CorruptData("missing raster separator".into()));
            }
            let start = cur.pos + 1;
            let bytes_per = if maxval > 255 { 2 } else { 1 };
            let need = count * bytes_per;
            let raster =
                data.get(start..start + need).ok_or_else(|| ImageError::CorruptData("truncated raster".into()))?;
            if bytes_per == 1 {
                samples.extend(raster.iter().map(|&b| usize::from(b)));
            } else {
                samples.extend(raster.chunks_exact(2).map(|c| usize::from(c[0]) << 8 | usize::from(c[1])));
            }
            if let Some(&v) = samples.iter().find(|&&v| v > maxval) {
                return Err(ImageError::CorruptData(format!("sample {v} exceeds maxval")));
            }
        }
    }

    let scale = |v: usize| -> u8 {
        if maxval == 255 {
            v as u8
        } else {
            ((v * 255 + maxval / 2) / maxval) as u8
        }
    };
    let pixels = if channels == 1 {
        samples
            .iter()
            .map(|&v| {
                let g = scale(v);
                [g, g, g]
            })
            .collect()
    } else {
        samples.chunks_exact(3).map(|c| [scale(c[0]), scale(c[1]), scale(c[2])]).collect()
    };
    ColorImage::new(width, height, pixels)
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn encode_ppm(img: &ColorImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.reserve(img.pixels().len() * 3);
    for p in img.pixels() {
        out.extend_from_slice(p);
    }
    out
}

fn write_bytes(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    f.flush()
}

pub fn save_pgm(img: &GrayImage, path: impl AsRef<Path>) -> std::io::Result<()> {
    write_bytes(path.as_ref(), &encode_pgm(img))
}

pub fn save_ppm(img: &ColorImage, path: impl AsRef<Path>) -> std::io::Result<()> {
    write_bytes(path.as_ref(), &encode_ppm(img))
}
