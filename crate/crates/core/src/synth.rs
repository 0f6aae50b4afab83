//! Seeded synthetic banknote photographs.
//!
//! A note is a dark paper rectangle carrying the value row (digit, then the
//! zeros) in light ink, placed on a background, rotated and scaled about the
//! value row, then lit and noised. Stands in for a real photo corpus; every
//! image is a pure function of its [`SynthSpec`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::classifier::DigitClass;
use crate::components::BBox;
use crate::digit::FeatureVector;
use crate::eval::Denomination;
use crate::image::ColorImage;

pub const CANVAS_WIDTH: usize = 320;
pub const CANVAS_HEIGHT: usize = 240;

const CELL_W: usize = 16;
const CELL_H: usize = 24;
/// Advance from one zero cell to the next.
const ZERO_PITCH: f64 = 15.0;
/// Ink gap between the digit and the first zero.
const DIGIT_GAP: f64 = 16.0;
/// Paper around the value row, in image pixels at scale 1 and never less
/// than this many pixels at smaller scales.
const NOTE_MARGIN_X: f64 = 60.0;
const NOTE_MARGIN_Y: f64 = 40.0;

const ZERO: [&str; CELL_H] = [
    "................",
    "................",
    "................",
    "................",
    "................",
    "................",
    "......####......",
    "....########....",
    "...##########...",
    "...##########...",
    "...##########...",
    "...##########...",
    "...##########...",
    "...##########...",
    "...##########...",
    "...##########...",
    "....########....",
    "......####......",
    "................",
    "................",
    "................",
    "................",
    "................",
    "................",
];

const ONE: [&str; CELL_H] = [
    "................",
    "................",
    ".....###........",
    ".....###........",
    ".....####.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "......###.......",
    "................",
    "................",
];

const TWO: [&str; CELL_H] = [
    "................",
    "................",
    "..###....###.###",
    "..###....###.###",
    "..###....###.###",
    "..##############",
    "..#############.",
    "..###...........",
    "..###...........",
    "..###...........",
    "..###...........",
    "...###..........",
    "...###..........",
    "...###..........",
    "...###..........",
    "...###..........",
    "...###..........",
    "...###..........",
    "...###..........",
    "...###..........",
    "...###..........",
    "...###..........",
    "................",
    "................",
];

const FIVE: [&str; CELL_H] = [
    "................",
    "................",
    "................",
    "....###..###....",
    "...####..####...",
    "..###.####.###..",
    "..###..##..###..",
    ".###........###.",
    ".###........###.",
    ".###........###.",
    ".###........###.",
    ".###........###.",
    ".###........###.",
    ".###........###.",
    ".###........###.",
    "..###......###..",
    "..###......###..",
    "...###....###...",
    "....########....",
    ".....######.....",
    "................",
    "................",
    "................",
    "................",
];

/// One glyph of the built-in 16×24 font.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Glyph {
    Zero,
    Digit(DigitClass),
}

impl Glyph {
    fn rows(self) -> &'static [&'static str; CELL_H] {
        match self {
            Glyph::Zero => &ZERO,
            Glyph::Digit(DigitClass::One) => &ONE,
            Glyph::Digit(DigitClass::Two) => &TWO,
            Glyph::Digit(DigitClass::Five) => &FIVE,
        }
    }

    pub fn ink(self, x: usize, y: usize) -> bool {
        x < CELL_W && y < CELL_H && self.rows()[y].as_bytes()[x] == b'#'
    }

    /// Inclusive ink columns and rows within the cell.
    fn extent(self) -> BBox {
        let mut b = BBox { min_x: CELL_W, min_y: CELL_H, max_x: 0, max_y: 0 };
        for y in 0..CELL_H {
            for x in 0..CELL_W {
                if self.ink(x, y) {
                    b.min_x = b.min_x.min(x);
                    b.min_y = b.min_y.min(y);
                    b.max_x = b.max_x.max(x);
                    b.max_y = b.max_y.max(y);
                }
            }
        }
        b
    }

    fn ink_centroid(self) -> (f64, f64) {
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0.0);
        for y in 0..CELL_H {
            for x in 0..CELL_W {
                if self.ink(x, y) {
                    sx += x as f64 + 0.5;
                    sy += y as f64 + 0.5;
                    n += 1.0;
                }
            }
        }
        (sx / n, sy / n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Background {
    #[default]
    Plain,
    Textured,
    Cluttered,
}

impl Background {
    pub const ALL: [Background; 3] = [Background::Plain, Background::Textured, Background::Cluttered];

    pub fn name(self) -> &'static str {
        match self {
            Background::Plain => "plain",
            Background::Textured => "textured",
            Background::Cluttered => "cluttered",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub denomination: Denomination,
    /// Degrees, image frame (positive turns the value row clockwise on screen).
    pub rotation: f64,
    pub scale: f64,
    /// 0 (clean) to 1 (Gaussian noise with σ = 40 gray levels).
    pub noise: f64,
    pub background: Background,
    pub illumination: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(denomination: Denomination, seed: u64) -> Self {
        Self {
            denomination,
            rotation: 0.0,
            scale: 1.0,
            noise: 0.0,
            background: Background::Plain,
            illumination: 1.0,
            seed,
        }
    }

    pub fn is_valid(&self) -> bool {
        (0.3..=2.0).contains(&self.scale)
            && self.rotation.abs() <= 45.0
            && (0.0..=1.0).contains(&self.noise)
            && self.illumination.is_finite()
            && self.illumination > 0.0
    }
}

/// What the generator put where.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub denomination: Denomination,
    pub angle: f64,
    /// Pixel bounds of the digit ink in the image.
    pub digit_box: BBox,
    pub zero_boxes: Vec<BBox>,
    /// Ink centers of the zeros in image coordinates, left to right along the row.
    pub zero_centers: Vec<(f64, f64)>,
}

struct Placed {
    glyph: Glyph,
    /// Cell origin in note coordinates.
    origin: (f64, f64),
}

struct Layout {
    glyphs: Vec<Placed>,
    /// Center of the ink row in note coordinates.
    center: (f64, f64),
    ink: (f64, f64, f64, f64),
}

fn layout(d: Denomination) -> Layout {
    let digit = Glyph::Digit(d.digit());
    let de = digit.extent();
    let ze = Glyph::Zero.extent();
    let mut glyphs = vec![Placed { glyph: digit, origin: (0.0, 0.0) }];
    let first_zero = de.max_x as f64 + 1.0 + DIGIT_GAP - ze.min_x as f64;
    for i in 0..d.zeros() {
        glyphs.push(Placed { glyph: Glyph::Zero, origin: (first_zero + ZERO_PITCH * i as f64, 0.0) });
    }
    let last = glyphs.last().unwrap().origin.0;
    let ink = (
        de.min_x as f64,
        de.min_y.min(ze.min_y) as f64,
        last + ze.max_x as f64 + 1.0,
        (de.max_y.max(ze.max_y) + 1) as f64,
    );
    let center = ((ink.0 + ink.2) / 2.0, (ink.1 + ink.3) / 2.0);
    Layout { glyphs, center, ink }
}

impl Layout {
    fn glyph_at(&self, u: f64, v: f64) -> Option<usize> {
        if v < 0.0 || v >= CELL_H as f64 {
            return None;
        }
        self.glyphs.iter().position(|g| {
            let x = u - g.origin.0;
            x >= 0.0 && x < CELL_W as f64 && g.glyph.ink(x as usize, (v - g.origin.1) as usize)
        })
    }
}

struct Transform {
    center_img: (f64, f64),
    center_note: (f64, f64),
    cos: f64,
    sin: f64,
    scale: f64,
}

impl Transform {
    fn to_note(&self, x: f64, y: f64) -> (f64, f64) {
        let (dx, dy) = (x - self.center_img.0, y - self.center_img.1);
        let u = (self.cos * dx + self.sin * dy) / self.scale;
        let v = (-self.sin * dx + self.cos * dy) / self.scale;
        (self.center_note.0 + u, self.center_note.1 + v)
    }

    fn to_image(&self, u: f64, v: f64) -> (f64, f64) {
        let (du, dv) = ((u - self.center_note.0) * self.scale, (v - self.center_note.1) * self.scale);
        (self.center_img.0 + self.cos * du - self.sin * dv, self.center_img.1 + self.sin * du + self.cos * dv)
    }
}

/// Smooth interference pattern in roughly [−1, 1].
struct Waves {
    terms: Vec<(f64, f64, f64, f64)>,
}

impl Waves {
    fn random(rng: &mut ChaCha8Rng, count: usize, min_period: f64, max_period: f64) -> Self {
        let terms = (0..count)
            .map(|_| {
                let period = rng.random_range(min_period..max_period);
                let dir = rng.random_range(0.0..std::f64::consts::PI);
                let k = std::f64::consts::TAU / period;
                (k * dir.cos(), k * dir.sin(), rng.random_range(0.0..std::f64::consts::TAU), 1.0 / count as f64)
            })
            .collect();
        Self { terms }
    }

    fn at(&self, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|&(kx, ky, ph, w)| w * (kx * x + ky * y + ph).sin()).sum()
    }
}

enum Shape {
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
    Bar { x0: f64, y0: f64, x1: f64, y1: f64, half: f64 },
}

impl Shape {
    fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Rect { x0, y0, x1, y1 } => x >= x0 && x <= x1 && y >= y0 && y <= y1,
            Shape::Ellipse { cx, cy, rx, ry } => ((x - cx) / rx).powi(2) + ((y - cy) / ry).powi(2) <= 1.0,
            Shape::Bar { x0, y0, x1, y1, half } => {
                let (dx, dy) = (x1 - x0, y1 - y0);
                let len2 = dx * dx + dy * dy;
                let t = (((x - x0) * dx + (y - y0) * dy) / len2).clamp(0.0, 1.0);
                (x - x0 - t * dx).hypot(y - y0 - t * dy) <= half
            }
        }
    }
}

/// Renders one note photo and its ground truth. Deterministic in `spec`.
pub fn generate_sample(spec: &SynthSpec) -> (ColorImage, GroundTruth) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let lay = layout(spec.denomination);
    let theta = spec.rotation.to_radians();

    // Random placement that keeps the whole value row on the canvas.
    let half_row = (lay.ink.2 - lay.ink.0) / 2.0 * spec.scale + 12.0;
    let slack_x = (CANVAS_WIDTH as f64 / 2.0 - half_row * theta.cos().abs() - 8.0).clamp(0.0, 30.0);
    let slack_y = (CANVAS_HEIGHT as f64 / 2.0 - half_row * theta.sin().abs() - 20.0 * spec.scale).clamp(0.0, 25.0);
    let jitter_x = rng.random_range(-1.0..=1.0) * slack_x;
    let jitter_y = rng.random_range(-1.0..=1.0) * slack_y;
    let tf = Transform {
        center_img: (CANVAS_WIDTH as f64 / 2.0 + jitter_x, CANVAS_HEIGHT as f64 / 2.0 + jitter_y),
        center_note: lay.center,
        cos: theta.cos(),
        sin: theta.sin(),
        scale: spec.scale,
    };

    let paper: [f64; 3] = [rng.random_range(10.0..22.0), rng.random_range(14.0..28.0), rng.random_range(12.0..25.0)];
    let ink: [f64; 3] =
        [rng.random_range(205.0..235.0), rng.random_range(205.0..235.0), rng.random_range(190.0..225.0)];
    let backdrop: [f64; 3] = {
        let g = rng.random_range(120.0..180.0);
        [g + rng.random_range(-15.0..15.0), g, g + rng.random_range(-15.0..15.0)]
    };
    let (mx, my) = (NOTE_MARGIN_X.max(NOTE_MARGIN_X / spec.scale), NOTE_MARGIN_Y.max(NOTE_MARGIN_Y / spec.scale));
    let note_box = (lay.ink.0 - mx, lay.ink.1 - my, lay.ink.2 + mx, lay.ink.3 + my);
    let bg_waves = Waves::random(&mut rng, 3, 50.0, 140.0);
    let paper_waves = Waves::random(&mut rng, 2, 20.0, 40.0);
    let clutter: Vec<(Shape, f64)> = if spec.background == Background::Cluttered {
        (0..rng.random_range(6..12))
            .map(|_| {
                let x = rng.random_range(0.0..CANVAS_WIDTH as f64);
                let y = rng.random_range(0.0..CANVAS_HEIGHT as f64);
                let a = rng.random_range(6.0..40.0);
                let b = rng.random_range(6.0..40.0);
                let shape = match rng.random_range(0..3) {
                    0 => Shape::Rect { x0: x, y0: y, x1: x + a, y1: y + b },
                    1 => Shape::Ellipse { cx: x, cy: y, rx: a / 2.0, ry: b / 2.0 },
                    _ => Shape::Bar { x0: x, y0: y, x1: x + a * 2.0, y1: y + b - 20.0, half: 1.5 },
                };
                (shape, rng.random_range(20.0..240.0))
            })
            .collect()
    } else {
        Vec::new()
    };
    let sigma = 40.0 * spec.noise;
    let noise = Normal::new(0.0, sigma.max(1e-12)).expect("finite sigma");

    let in_note = |u: f64, v: f64| u >= note_box.0 && u <= note_box.2 && v >= note_box.1 && v <= note_box.3;
    // Thin frame line inset from the note edge.
    let on_frame = |u: f64, v: f64| {
        let inset = 8.0;
        let d = (u - note_box.0 - inset)
            .abs()
            .min((note_box.2 - inset - u).abs())
            .min((v - note_box.1 - inset).abs())
            .min((note_box.3 - inset - v).abs());
        d < 1.5
            && u >= note_box.0 + inset - 1.5
            && u <= note_box.2 - inset + 1.5
            && v >= note_box.1 + inset - 1.5
            && v <= note_box.3 - inset + 1.5
    };

    let sample = |x: f64, y: f64| -> [f64; 3] {
        let (u, v) = tf.to_note(x, y);
        if in_note(u, v) {
            if lay.glyph_at(u, v).is_some() || on_frame(u, v) {
                return ink;
            }
            let t = if spec.background == Background::Plain { 0.0 } else { 1.5 * paper_waves.at(u, v) };
            return paper.map(|c| c + t);
        }
        let mut c = backdrop;
        if spec.background != Background::Plain {
            let t = 35.0 * bg_waves.at(x, y);
            c = c.map(|v| v + t);
        }
        if let Some((_, level)) = clutter.iter().rev().find(|(s, _)| s.contains(x, y)) {
            c = [*level; 3];
        }
        c
    };

    let mut pixels = Vec::with_capacity(CANVAS_WIDTH * CANVAS_HEIGHT);
    for y in 0..CANVAS_HEIGHT {
        for x in 0..CANVAS_WIDTH {
            let mut acc = [0.0; 3];
            for (ox, oy) in [(-0.25, -0.25), (0.25, -0.25), (-0.25, 0.25), (0.25, 0.25)] {
                let s = sample(x as f64 + ox, y as f64 + oy);
                for c in 0..3 {
                    acc[c] += s[c] / 4.0;
                }
            }
            let px = acc.map(|v| {
                let n = if sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
                (v * spec.illumination + n).round().clamp(0.0, 255.0) as u8
            });
            pixels.push(px);
        }
    }
    let image = ColorImage::new(CANVAS_WIDTH, CANVAS_HEIGHT, pixels).expect("canvas dimensions");

    // Ground truth from pixel centers.
    let mut boxes: Vec<Option<BBox>> = vec![None; lay.glyphs.len()];
    for y in 0..CANVAS_HEIGHT {
        for x in 0..CANVAS_WIDTH {
            let (u, v) = tf.to_note(x as f64, y as f64);
            if let Some(i) = lay.glyph_at(u, v) {
                let b = boxes[i].get_or_insert(BBox { min_x: x, min_y: y, max_x: x, max_y: y });
                b.min_x = b.min_x.min(x);
                b.max_x = b.max_x.max(x);
                b.min_y = b.min_y.min(y);
                b.max_y = b.max_y.max(y);
            }
        }
    }
    let empty = BBox { min_x: 0, min_y: 0, max_x: 0, max_y: 0 };
    let zero_centers = lay.glyphs[1..]
        .iter()
        .map(|g| {
            let (cx, cy) = g.glyph.ink_centroid();
            tf.to_image(g.origin.0 + cx, g.origin.1 + cy)
        })
        .collect();
    let truth = GroundTruth {
        denomination: spec.denomination,
        angle: spec.rotation,
        digit_box: boxes[0].unwrap_or(empty),
        zero_boxes: boxes[1..].iter().map(|b| b.unwrap_or(empty)).collect(),
        zero_centers,
    };
    (image, truth)
}

/// Ranges a batch of specs is drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecGrid {
    pub max_rotation: f64,
    pub min_scale: f64,
    pub max_scale: f64,
    pub max_noise: f64,
    pub backgrounds: Vec<Background>,
    pub min_illumination: f64,
    pub max_illumination: f64,
}

impl Default for SpecGrid {
    fn default() -> Self {
        Self {
            max_rotation: 30.0,
            min_scale: 0.5,
            max_scale: 1.5,
            max_noise: 0.3,
            backgrounds: vec![Background::Plain, Background::Textured],
            min_illumination: 0.75,
            max_illumination: 1.25,
        }
    }
}

/// `count` specs cycling through all seven denominations, parameters drawn
/// from `grid` with a generator seeded by `seed`.
pub fn spec_batch(count: usize, seed: u64, grid: &SpecGrid) -> Vec<SynthSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let denomination = Denomination::ALL[i % Denomination::ALL.len()];
            let rotation =
                if grid.max_rotation > 0.0 { rng.random_range(-grid.max_rotation..=grid.max_rotation) } else { 0.0 };
            let scale = rng.random_range(grid.min_scale..=grid.max_scale);
            let noise = rng.random_range(0.0..=grid.max_noise);
            let background = grid.backgrounds[rng.random_range(0..grid.backgrounds.len())];
            let illumination = rng.random_range(grid.min_illumination..=grid.max_illumination);
            let sample_seed = rng.random::<u64>();
            SynthSpec {
                denomination,
                rotation: (rotation * 100.0).round() / 100.0,
                scale: (scale * 1000.0).round() / 1000.0,
                noise: (noise * 1000.0).round() / 1000.0,
                background,
                illumination: (illumination * 1000.0).round() / 1000.0,
                seed: sample_seed,
            }
        })
        .collect()
}

/// Renders every spec, in parallel; output order follows `specs`.
pub fn render_batch(specs: &[SynthSpec]) -> Vec<(ColorImage, GroundTruth)> {
    specs.par_iter().map(generate_sample).collect()
}

/// Three separated Gaussian clusters in feature space, one per digit,
/// `n` samples in total (classes interleaved).
pub fn feature_clusters(n: usize, seed: u64) -> Vec<(FeatureVector, DigitClass)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = [
        (DigitClass::One, [0.85, 5.0, 1.0, 1.0]),
        (DigitClass::Two, [0.35, 1.4, 1.8, 1.7]),
        (DigitClass::Five, [0.40, 1.3, 1.0, 0.8]),
    ];
    let spread = [0.04, 0.15, 0.08, 0.08];
    (0..n)
        .map(|i| {
            let (class, mean) = centers[i % 3];
            let values: [f64; 4] = std::array::from_fn(|k| {
                let d = Normal::new(mean[k], spread[k]).expect("valid normal");
                let v: f64 = d.sample(&mut rng);
                v.max(1e-3)
            });
            (FeatureVector::new(values), class)
        })
        .collect()
}
