//! Locating the nonzero digit next to the zero batch and describing it with
//! four shape ratios.

use thiserror::Error;

use crate::components::{label_components, BBox, ComponentSet, Connectivity};
use crate::image::{BinaryImage, Rotation};
use crate::localize::ZeroLine;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DigitError {
    #[error("no digit component found on either side of the zeros")]
    DigitNotFound,
    #[error("digit crop holds no foreground")]
    EmptyCrop,
}

impl DigitError {
    pub fn kind(&self) -> &'static str {
        match self {
            DigitError::DigitNotFound => "DigitNotFound",
            DigitError::EmptyCrop => "EmptyCrop",
        }
    }
}

pub const MIN_CROP_SIDE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Square crop holding only the digit's largest component.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitCrop {
    pub image: BinaryImage,
    /// Top-left corner of the crop in the levelled image (may be negative).
    pub origin: (isize, isize),
    pub side: Side,
}

impl DigitCrop {
    pub fn size(&self) -> usize {
        self.image.width()
    }

    /// Whether a levelled-image point lies inside the crop square.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (ox, oy) = (self.origin.0 as f64 - 0.5, self.origin.1 as f64 - 0.5);
        let l = self.size() as f64;
        x >= ox && x < ox + l && y >= oy && y < oy + l
    }
}

/// Side of the digit crop square: `3 · length / count`, rounded, at least 8.
pub fn crop_side(length: f64, count: usize) -> usize {
    ((3.0 * length / count as f64).round() as usize).max(MIN_CROP_SIDE)
}

/// Scan hits must have an area within these multiples of the mean zero area.
const DIGIT_AREA_RANGE: (f64, f64) = (0.2, 4.0);
/// ... and be at most this many zero heights tall.
const MAX_DIGIT_HEIGHT: f64 = 3.0;

/// Scans outward from both extreme zeros and crops the first component hit.
///
/// `level` is the binary image after `rotation` was applied, so the zeros of
/// `z` (given in source coordinates) lie on a horizontal row. The scan
/// covers a band one zero-height tall around that row and steps both sides
/// one column at a time; on a simultaneous hit the right side wins. Only
/// the hit component's pixels are kept in the crop.
pub fn find_nonzero_digit(level: &BinaryImage, z: &ZeroLine, rotation: &Rotation) -> Result<DigitCrop, DigitError> {
    let set = label_components(level, Connectivity::Eight);
    let centers: Vec<(f64, f64)> = z.zeros.iter().map(|c| rotation.forward(c.centroid.0, c.centroid.1)).collect();
    let zero_height = z.mean_height().max(1.0);

    let mut zero_labels: Vec<u32> =
        centers.iter().filter_map(|&(x, y)| nearest_label(&set, x, y, zero_height.ceil() as isize)).collect();
    zero_labels.sort_unstable();
    zero_labels.dedup();

    let line_y = centers.iter().map(|c| c.1).sum::<f64>() / centers.len() as f64;
    let (left_edge, right_edge) = zero_extent(&set, &zero_labels, &centers, z);

    let half = (zero_height / 2.0).round().max(1.0) as isize;
    let cy = (line_y + 0.5).floor() as isize;
    let mean_area = z.mean_area();
    let (min_area, max_area) = (DIGIT_AREA_RANGE.0 * mean_area, DIGIT_AREA_RANGE.1 * mean_area);
    let max_height = MAX_DIGIT_HEIGHT * zero_height;
    let (w, h) = (level.width() as isize, level.height() as isize);

    let hit_at = |x: isize| -> Option<u32> {
        if x < 0 || x >= w {
            return None;
        }
        ((cy - half).max(0)..=(cy + half).min(h - 1)).map(|y| set.label_at(x as usize, y as usize)).find(|&l| {
            l != 0
                && zero_labels.binary_search(&l).is_err()
                && set.get(l).is_some_and(|c| {
                    let a = c.area as f64;
                    a >= min_area && a <= max_area && c.bbox.height() as f64 <= max_height
                })
        })
    };

    let mut found = None;
    for k in 1.. {
        let (lx, rx) = (left_edge - k, right_edge + k);
        if lx < 0 && rx >= w {
            break;
        }
        if let Some(l) = hit_at(rx) {
            found = Some((Side::Right, l));
            break;
        }
        if let Some(l) = hit_at(lx) {
            found = Some((Side::Left, l));
            break;
        }
    }
    let (side, label) = found.ok_or(DigitError::DigitNotFound)?;

    let l = crop_side(z.length, z.count);
    let x0 = match side {
        Side::Right => right_edge + 1,
        Side::Left => left_edge - l as isize,
    };
    let y0 = (line_y - l as f64 / 2.0 + 0.5).floor() as isize;
    let raw = BinaryImage::from_fn(l, l, |x, y| {
        let (sx, sy) = (x0 + x as isize, y0 + y as isize);
        sx >= 0 && sy >= 0 && sx < w && sy < h && set.label_at(sx as usize, sy as usize) == label
    });
    let image = keep_largest(&raw).ok_or(DigitError::EmptyCrop)?;
    Ok(DigitCrop { image, origin: (x0, y0), side })
}

fn nearest_label(set: &ComponentSet, x: f64, y: f64, reach: isize) -> Option<u32> {
    let (cx, cy) = ((x + 0.5).floor() as isize, (y + 0.5).floor() as isize);
    let (w, h) = (set.width() as isize, set.height() as isize);
    let mut best: Option<(f64, u32)> = None;
    for py in (cy - reach).max(0)..=(cy + reach).min(h - 1) {
        for px in (cx - reach).max(0)..=(cx + reach).min(w - 1) {
            let l = set.label_at(px as usize, py as usize);
            if l == 0 {
                continue;
            }
            let d = (px as f64 - x).powi(2) + (py as f64 - y).powi(2);
            if best.is_none_or(|(bd, bl)| d < bd || (d == bd && l < bl)) {
                best = Some((d, l));
            }
        }
    }
    best.map(|(_, l)| l)
}

/// Leftmost and rightmost columns of the zero batch in the levelled image.
fn zero_extent(set: &ComponentSet, labels: &[u32], centers: &[(f64, f64)], z: &ZeroLine) -> (isize, isize) {
    let boxes: Vec<BBox> = labels.iter().filter_map(|&l| set.get(l)).map(|c| c.bbox).collect();
    if boxes.is_empty() {
        let half_w = z.zeros.iter().map(|c| c.bbox.width() as f64).sum::<f64>() / (2.0 * z.count as f64);
        let min_x = centers.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
        let max_x = centers.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max);
        return ((min_x - half_w).floor() as isize, (max_x + half_w).ceil() as isize);
    }
    let left = boxes.iter().map(|b| b.min_x).min().unwrap_or(0) as isize;
    let right = boxes.iter().map(|b| b.max_x).max().unwrap_or(0) as isize;
    (left, right)
}

/// Largest 8-connected component (lowest label on ties), or `None` if empty.
pub fn keep_largest(img: &BinaryImage) -> Option<BinaryImage> {
    let set = label_components(img, Connectivity::Eight);
    let best = set.components().iter().max_by(|a, b| a.area.cmp(&b.area).then(b.label.cmp(&a.label)))?;
    Some(set.retain(|c| c.label == best.label).to_binary())
}

/// Four shape ratios of the digit's tight bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    /// Foreground pixels over bbox area.
    pub fill: f64,
    /// Bbox height over bbox width.
    pub aspect: f64,
    /// Left-half mass over right-half mass.
    pub left_right: f64,
    /// Top-half mass over bottom-half mass.
    pub top_bottom: f64,
}

impl FeatureVector {
    pub const LEN: usize = 4;

    pub fn new(values: [f64; 4]) -> Self {
        let [fill, aspect, left_right, top_bottom] = values;
        Self { fill, aspect, left_right, top_bottom }
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.fill, self.aspect, self.left_right, self.top_bottom]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

pub fn extract_features(crop: &DigitCrop) -> Result<FeatureVector, DigitError> {
    glyph_features(&crop.image)
}

/// Shape ratios of all foreground in `img`.
///
/// Halves split at the bbox midlines; an odd middle column (row) counts
/// toward the left (top). A one-pixel-wide (or tall) glyph has a mass
/// ratio of 1 along that axis.
pub fn glyph_features(img: &BinaryImage) -> Result<FeatureVector, DigitError> {
    let bbox = tight_bbox(img).ok_or(DigitError::EmptyCrop)?;
    let (bw, bh) = (bbox.width(), bbox.height());
    let split_x = bbox.min_x + bw.div_ceil(2);
    let split_y = bbox.min_y + bh.div_ceil(2);
    let (mut area, mut left, mut right, mut top, mut bottom) = (0usize, 0usize, 0usize, 0usize, 0usize);
    for y in bbox.min_y..=bbox.max_y {
        for x in bbox.min_x..=bbox.max_x {
            if !img.get(x, y) {
                continue;
            }
            area += 1;
            if x < split_x {
                left += 1;
            } else {
                right += 1;
            }
            if y < split_y {
                top += 1;
            } else {
                bottom += 1;
            }
        }
    }
    let ratio = |a: usize, b: usize, span: usize| if span == 1 { 1.0 } else { a as f64 / b as f64 };
    Ok(FeatureVector {
        fill: area as f64 / bbox.area() as f64,
        aspect: bh as f64 / bw as f64,
        left_right: ratio(left, right, bw),
        top_bottom: ratio(top, bottom, bh),
    })
}

/// Mirror-overlap symmetry scores `(horizontal, vertical)`: the fraction of
/// foreground pixels whose reflection across the vertical (resp. horizontal)
/// bbox midline is also foreground. Not part of the classifier input.
pub fn symmetry_scores(img: &BinaryImage) -> Result<(f64, f64), DigitError> {
    let b = tight_bbox(img).ok_or(DigitError::EmptyCrop)?;
    let (mut n, mut h, mut v) = (0usize, 0usize, 0usize);
    for y in b.min_y..=b.max_y {
        for x in b.min_x..=b.max_x {
            if img.get(x, y) {
                n += 1;
                h += usize::from(img.get(b.min_x + b.max_x - x, y));
                v += usize::from(img.get(x, b.min_y + b.max_y - y));
            }
        }
    }
    Ok((h as f64 / n as f64, v as f64 / n as f64))
}

fn tight_bbox(img: &BinaryImage) -> Option<BBox> {
    let mut b: Option<BBox> = None;
    for y in 0..img.height() {
        for x in 0..img.width() {
            if img.get(x, y) {
                let bb = b.get_or_insert(BBox { min_x: x, min_y: y, max_x: x, max_y: y });
                bb.min_x = bb.min_x.min(x);
                bb.max_x = bb.max_x.max(x);
                bb.max_y = y;
            }
        }
    }
    b
}
