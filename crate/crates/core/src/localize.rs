//! Zero-batch localization.
//!
//! Candidate components are fused by closing; every fused blob that gathers
//! at least three original components becomes a [`Region`]. Within a region
//! the line through two gravity centers that touches the most members is
//! kept, and among all regions the one whose on-line members have the most
//! uniform area wins. Its first and last zero give the rotation angle.

use thiserror::Error;

use crate::components::{Component, ComponentSet};
use crate::morphology::StructuringElement;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LocalizeError {
    #[error("region {0} has all member centroids at one point")]
    DegenerateRegion(u32),
    #[error("no region with at least three collinear components")]
    NoCandidates,
    #[error("zero line has {0} members, more than five")]
    TooManyZeros(usize),
    #[error("zero line has {0} members, fewer than three")]
    TooFewZeros(usize),
}

impl LocalizeError {
    pub fn kind(&self) -> &'static str {
        match self {
            LocalizeError::DegenerateRegion(_) => "DegenerateRegion",
            LocalizeError::NoCandidates => "NoCandidates",
            LocalizeError::TooManyZeros(_) => "TooManyZeros",
            LocalizeError::TooFewZeros(_) => "TooFewZeros",
        }
    }
}

pub const MIN_ZEROS: usize = 3;
pub const MAX_ZEROS: usize = 5;

/// Pre-closing components whose centroids fall in one post-closing blob.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    /// Label of the post-closing blob.
    pub id: u32,
    pub members: Vec<Component>,
}

/// Infinite line in point/direction form; `direction` has unit length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub point: (f64, f64),
    pub direction: (f64, f64),
}

impl Line {
    /// Returns `None` when the two points coincide.
    pub fn through(a: (f64, f64), b: (f64, f64)) -> Option<Self> {
        let (dx, dy) = (b.0 - a.0, b.1 - a.1);
        let norm = dx.hypot(dy);
        if norm < 1e-9 {
            return None;
        }
        Some(Self { point: a, direction: (dx / norm, dy / norm) })
    }

    pub fn distance(&self, x: f64, y: f64) -> f64 {
        let (px, py) = (x - self.point.0, y - self.point.1);
        (self.direction.0 * py - self.direction.1 * px).abs()
    }

    pub fn projection(&self, x: f64, y: f64) -> f64 {
        (x - self.point.0) * self.direction.0 + (y - self.point.1) * self.direction.1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineCandidate {
    pub region_id: u32,
    /// Labels of the two members whose centroids define the line.
    pub anchors: (u32, u32),
    /// Members touched by the line, in label order.
    pub on_line: Vec<Component>,
    pub line: Line,
}

/// The accepted batch of zeros, ordered along the line.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroLine {
    pub region_id: u32,
    pub zeros: Vec<Component>,
    pub line: Line,
    pub angle: f64,
    /// Distance between the first and last zero centers.
    pub length: f64,
    pub count: usize,
}

impl ZeroLine {
    /// Orders `members` along `line` and checks the 3..=5 count range.
    pub fn new(region_id: u32, mut members: Vec<Component>, line: Line) -> Result<Self, LocalizeError> {
        let count = members.len();
        if count > MAX_ZEROS {
            return Err(LocalizeError::TooManyZeros(count));
        }
        if count < MIN_ZEROS {
            return Err(LocalizeError::TooFewZeros(count));
        }
        // Orient the direction left to right (top to bottom when vertical).
        let (mut dx, mut dy) = line.direction;
        if dx < -1e-12 || (dx.abs() <= 1e-12 && dy < 0.0) {
            dx = -dx;
            dy = -dy;
        }
        let line = Line { point: line.point, direction: (dx, dy) };
        members.sort_by(|a, b| {
            let pa = line.projection(a.centroid.0, a.centroid.1);
            let pb = line.projection(b.centroid.0, b.centroid.1);
            pa.total_cmp(&pb).then(a.label.cmp(&b.label))
        });
        let first = members[0].centroid;
        let last = members[count - 1].centroid;
        let length = (last.0 - first.0).hypot(last.1 - first.1);
        if length <= 0.0 {
            return Err(LocalizeError::DegenerateRegion(region_id));
        }
        let angle = line_angle(first, last);
        Ok(Self { region_id, zeros: members, line, angle, length, count })
    }

    pub fn first_center(&self) -> (f64, f64) {
        self.zeros[0].centroid
    }

    pub fn last_center(&self) -> (f64, f64) {
        self.zeros[self.count - 1].centroid
    }

    pub fn mean_area(&self) -> f64 {
        self.zeros.iter().map(|c| c.area as f64).sum::<f64>() / self.count as f64
    }

    pub fn mean_height(&self) -> f64 {
        self.zeros.iter().map(|c| c.bbox.height() as f64).sum::<f64>() / self.count as f64
    }
}

/// Angle in degrees of the line through `p0` and `p1`, folded into (−90°, 90°].
pub fn line_angle(p0: (f64, f64), p1: (f64, f64)) -> f64 {
    let mut a = (p1.1 - p0.1).atan2(p1.0 - p0.0).to_degrees();
    if a > 90.0 {
        a -= 180.0;
    } else if a <= -90.0 {
        a += 180.0;
    }
    a
}

/// Rotation angle of the note, from the first and last zero centers.
pub fn rotation_angle(z: &ZeroLine) -> f64 {
    line_angle(z.first_center(), z.last_center())
}

pub fn count_zeros(z: &ZeroLine) -> usize {
    z.count
}

/// Structuring element used to fuse neighbouring zeros: a full rectangle of
/// `round(0.6·h) × round(0.3·h)` (sides bumped to odd), `h` being the median
/// candidate height. Falls back to 9×5 with no candidates.
pub fn closing_element(candidates: &ComponentSet) -> StructuringElement {
    let mut heights: Vec<usize> = candidates.components().iter().map(|c| c.bbox.height()).collect();
    if heights.is_empty() {
        return StructuringElement::rect_odd(9, 5);
    }
    heights.sort_unstable();
    let n = heights.len();
    let h = if n % 2 == 1 { heights[n / 2] as f64 } else { (heights[n / 2 - 1] + heights[n / 2]) as f64 / 2.0 };
    let w = (0.6 * h).round() as usize;
    let hh = (0.3 * h).round() as usize;
    StructuringElement::rect_odd(w, hh)
}

/// Assigns each pre-closing component to the post-closing blob holding its
/// (rounded) centroid, or to the nearest blob when that pixel is background.
/// Regions with fewer than three members are dropped.
pub fn group_regions(pre: &ComponentSet, post: &ComponentSet) -> Vec<Region> {
    assert_eq!((pre.width(), pre.height()), (post.width(), post.height()));
    let mut buckets: std::collections::BTreeMap<u32, Vec<Component>> = Default::default();
    for c in pre.components() {
        if let Some(id) = blob_for(c, post) {
            buckets.entry(id).or_default().push(c.clone());
        }
    }
    buckets.into_iter().filter(|(_, m)| m.len() >= MIN_ZEROS).map(|(id, members)| Region { id, members }).collect()
}

fn blob_for(c: &Component, post: &ComponentSet) -> Option<u32> {
    let (w, h) = (post.width() as isize, post.height() as isize);
    let cx = (c.centroid.0 + 0.5).floor() as isize;
    let cy = (c.centroid.1 + 0.5).floor() as isize;
    if cx >= 0 && cy >= 0 && cx < w && cy < h {
        let l = post.label_at(cx as usize, cy as usize);
        if l != 0 {
            return Some(l);
        }
    }
    // Search radius bounded by the component's own nearest pixel, which is
    // foreground after closing whenever post came from closing pre.
    let d2 = |x: f64, y: f64| (x - c.centroid.0).powi(2) + (y - c.centroid.1).powi(2);
    let reach = c.pixels().iter().map(|&(x, y)| d2(x as f64, y as f64)).fold(f64::INFINITY, f64::min).sqrt().ceil()
        as isize
        + 1;
    let mut best: Option<(f64, u32)> = None;
    for y in (cy - reach).max(0)..=(cy + reach).min(h - 1) {
        for x in (cx - reach).max(0)..=(cx + reach).min(w - 1) {
            let l = post.label_at(x as usize, y as usize);
            if l == 0 {
                continue;
            }
            let d = d2(x as f64, y as f64);
            if best.is_none_or(|(bd, bl)| d < bd || (d == bd && l < bl)) {
                best = Some((d, l));
            }
        }
    }
    best.map(|(_, l)| l)
}

fn touches_line(c: &Component, line: &Line, tolerance: f64) -> bool {
    c.pixels().iter().any(|&(x, y)| line.distance(x as f64, y as f64) <= tolerance)
}

/// Best line through two member centroids, scored by how many members it
/// touches (any pixel within `tolerance`). Ties go to the smaller sum of
/// squared centroid distances, then to the lowest anchor labels.
pub fn candidate_lines(region: &Region, tolerance: f64) -> Result<LineCandidate, LocalizeError> {
    let mut members = region.members.clone();
    members.sort_by_key(|c| c.label);

    struct Best {
        count: usize,
        ssd: f64,
        anchors: (u32, u32),
        line: Line,
        on_line: Vec<usize>,
    }
    let mut best: Option<Best> = None;

    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let Some(line) = Line::through(members[i].centroid, members[j].centroid) else {
                continue;
            };
            let on_line: Vec<usize> = (0..members.len())
                .filter(|&k| k == i || k == j || touches_line(&members[k], &line, tolerance))
                .collect();
            let ssd: f64 =
                on_line.iter().map(|&k| line.distance(members[k].centroid.0, members[k].centroid.1).powi(2)).sum();
            let anchors = (members[i].label, members[j].label);
            let better = match &best {
                None => true,
                Some(b) => {
                    on_line.len() > b.count
                        || (on_line.len() == b.count && (ssd < b.ssd || (ssd == b.ssd && anchors < b.anchors)))
                }
            };
            if better {
                best = Some(Best { count: on_line.len(), ssd, anchors, line, on_line });
            }
        }
    }

    let best = best.ok_or(LocalizeError::DegenerateRegion(region.id))?;
    Ok(LineCandidate {
        region_id: region.id,
        anchors: best.anchors,
        on_line: best.on_line.iter().map(|&k| members[k].clone()).collect(),
        line: best.line,
    })
}

/// Coefficient of variation (population) of member areas.
pub fn area_spread(members: &[Component]) -> f64 {
    let n = members.len() as f64;
    let mean = members.iter().map(|c| c.area as f64).sum::<f64>() / n;
    let var = members.iter().map(|c| (c.area as f64 - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

/// Picks the candidate with the most uniform member areas.
pub fn select_zero_line(candidates: &[LineCandidate]) -> Result<ZeroLine, LocalizeError> {
    if candidates.is_empty() {
        return Err(LocalizeError::NoCandidates);
    }
    let viable: Vec<&LineCandidate> = candidates.iter().filter(|c| c.on_line.len() >= MIN_ZEROS).collect();
    if viable.is_empty() {
        let most = candidates.iter().map(|c| c.on_line.len()).max().unwrap_or(0);
        return Err(LocalizeError::TooFewZeros(most));
    }
    let best = viable
        .into_iter()
        .map(|c| (area_spread(&c.on_line), c))
        .min_by(|(sa, a), (sb, b)| sa.total_cmp(sb).then(a.region_id.cmp(&b.region_id)))
        .map(|(_, c)| c)
        .expect("non-empty");
    ZeroLine::new(best.region_id, best.on_line.clone(), best.line)
}
