//! Binary erosion, dilation and closing.

use thiserror::Error;

use crate::image::BinaryImage;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorphologyError {
    #[error("structuring element sides must be odd and non-zero, got {0}x{1}")]
    EvenSide(usize, usize),
    #[error("structuring element mask has {got} cells, expected {expected}")]
    MaskSize { got: usize, expected: usize },
    #[error("structuring element origin cell must be set")]
    OriginUnset,
}

impl MorphologyError {
    pub fn kind(&self) -> &'static str {
        match self {
            MorphologyError::EvenSide(..) => "EvenSide",
            MorphologyError::MaskSize { .. } => "MaskSize",
            MorphologyError::OriginUnset => "OriginUnset",
        }
    }
}

/// Odd-sided binary mask with its origin at the center cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringElement {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl StructuringElement {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self, MorphologyError> {
        if width.is_multiple_of(2) || height.is_multiple_of(2) {
            return Err(MorphologyError::EvenSide(width, height));
        }
        if mask.len() != width * height {
            return Err(MorphologyError::MaskSize { got: mask.len(), expected: width * height });
        }
        if !mask[(height / 2) * width + width / 2] {
            return Err(MorphologyError::OriginUnset);
        }
        Ok(Self { width, height, mask })
    }

    /// Full rectangle.
    pub fn rect(width: usize, height: usize) -> Result<Self, MorphologyError> {
        Self::new(width, height, vec![true; width * height])
    }

    /// Full rectangle with both sides forced odd (rounded up) and at least 1.
    pub fn rect_odd(width: usize, height: usize) -> Self {
        let odd = |n: usize| if n == 0 { 1 } else { n | 1 };
        Self::rect(odd(width), odd(height)).expect("odd sides")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Point reflection through the origin.
    pub fn reflect(&self) -> Self {
        let mut mask = self.mask.clone();
        mask.reverse();
        Self { width: self.width, height: self.height, mask }
    }

    /// Offsets of set cells relative to the origin.
    fn offsets(&self) -> Vec<(isize, isize)> {
        let (rx, ry) = ((self.width / 2) as isize, (self.height / 2) as isize);
        (0..self.height)
            .flat_map(|y| (0..self.width).map(move |x| (x, y)))
            .filter(|&(x, y)| self.mask[y * self.width + x])
            .map(|(x, y)| (x as isize - rx, y as isize - ry))
            .collect()
    }
}

/// Pixel is foreground iff every mask cell placed at it covers foreground.
/// Cells outside the image count as background.
pub fn erode(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let offsets = se.offsets();
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        let (x, y) = (x as isize, y as isize);
        offsets.iter().all(|&(dx, dy)| img.get_or_bg(x + dx, y + dy))
    })
}

/// Minkowski sum of the foreground with the mask. Cells outside the image
/// count as background.
///
/// For the symmetric masks used by the pipeline this is the same as asking
/// whether any mask cell placed at the pixel covers foreground.
pub fn dilate(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let offsets = se.offsets();
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        let (x, y) = (x as isize, y as isize);
        offsets.iter().any(|&(dx, dy)| img.get_or_bg(x - dx, y - dy))
    })
}

/// Dilation followed by erosion with the same mask.
///
/// Evaluated on a canvas padded by the mask radius so that the dilation is
/// not clipped at the image border; this keeps closing extensive and
/// idempotent up to the edge.
pub fn close(img: &BinaryImage, se: &StructuringElement) -> BinaryImage {
    let (px, py) = (se.width / 2, se.height / 2);
    let padded = BinaryImage::from_fn(img.width() + 2 * px, img.height() + 2 * py, |x, y| {
        img.get_or_bg(x as isize - px as isize, y as isize - py as isize)
    });
    let closed = erode(&dilate(&padded, se), se);
    BinaryImage::from_fn(img.width(), img.height(), |x, y| closed.get(x + px, y + py))
}
