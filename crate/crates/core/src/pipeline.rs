//! The full recognition chain, from a color photo to a denomination.

use std::path::PathBuf;

use crate::classifier::{DigitClass, MlpModel, OUTPUTS};
use crate::components::{filter_by_area, filter_by_shape, label_components, ComponentSet, Connectivity};
use crate::digit::{extract_features, find_nonzero_digit, symmetry_scores, DigitCrop, FeatureVector};
use crate::error::{Error, Result};
use crate::eval::{value_of, Denomination};
use crate::image::{BinaryImage, ColorImage, GrayImage, Rotation};
use crate::localize::{
    candidate_lines, closing_element, group_regions, select_zero_line, Line, LineCandidate, LocalizeError, ZeroLine,
};
use crate::morphology::{close, dilate, erode, StructuringElement};
use crate::preprocess::{adaptive_threshold, median3x3, wiener_denoise, ThresholdConfig};

pub const DEFAULT_MODEL_PATH: &str = "rialscan-model.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub threshold: ThresholdConfig,
    pub wiener_window: usize,
    /// Fixed closing element `(width, height)`; adaptive when `None`.
    pub closing_se: Option<(usize, usize)>,
    pub connectivity: Connectivity,
    pub line_tolerance: f64,
    pub model_path: PathBuf,
    /// Also erode then dilate (3×3) after the median filter.
    pub erode_dilate: bool,
    /// Replace the mass ratios with mirror-overlap symmetry scores.
    pub symmetry_features: bool,
    /// Candidates smaller than this many pixels are dropped before closing.
    pub min_component_area: usize,
    /// Candidates larger than this fraction of the image are dropped.
    pub max_area_fraction: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            threshold: ThresholdConfig::default(),
            wiener_window: 5,
            closing_se: None,
            connectivity: Connectivity::Eight,
            line_tolerance: 1.5,
            model_path: PathBuf::from(DEFAULT_MODEL_PATH),
            erode_dilate: false,
            symmetry_features: false,
            min_component_area: 20,
            max_area_fraction: 0.02,
        }
    }
}

/// Parses `WxH` (e.g. `9x5`) into odd sides.
pub fn parse_se_size(s: &str) -> Option<(usize, usize)> {
    let (w, h) = s.trim().split_once(['x', 'X'])?;
    let (w, h) = (w.trim().parse::<usize>().ok()?, h.trim().parse::<usize>().ok()?);
    (w % 2 == 1 && h % 2 == 1).then_some((w, h))
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

impl PipelineConfig {
    /// Applies one `key=value` setting. Keys accept `-` or `_`.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let value = value.trim();
        let bad = || format!("invalid value {value:?} for {key}");
        match key.trim().replace('-', "_").as_str() {
            "threshold_window" => self.threshold.window = value.parse().map_err(|_| bad())?,
            "threshold_bias" => self.threshold.bias = value.parse().map_err(|_| bad())?,
            "wiener_window" => self.wiener_window = value.parse().map_err(|_| bad())?,
            "closing_se" => {
                self.closing_se = if value == "auto" { None } else { Some(parse_se_size(value).ok_or_else(bad)?) }
            }
            "connectivity" => {
                self.connectivity = value.parse().ok().and_then(Connectivity::from_number).ok_or_else(bad)?
            }
            "line_tolerance" => self.line_tolerance = value.parse().map_err(|_| bad())?,
            "model" | "model_path" => self.model_path = PathBuf::from(value),
            "erode_dilate" => self.erode_dilate = parse_bool(value).ok_or_else(bad)?,
            "symmetry_features" => self.symmetry_features = parse_bool(value).ok_or_else(bad)?,
            "min_component_area" => self.min_component_area = value.parse().map_err(|_| bad())?,
            "max_area_fraction" => self.max_area_fraction = value.parse().map_err(|_| bad())?,
            other => return Err(format!("unknown key {other:?}")),
        }
        Ok(())
    }

    /// Reads `key=value` lines over the defaults. `#` starts a comment.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config { line: i + 1, message: format!("expected key=value, got {line:?}") })?;
            cfg.set(k, v).map_err(|message| Error::Config { line: i + 1, message })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks that do not depend on the image.
    pub fn validate(&self) -> Result<()> {
        let fail = |message: String| Err(Error::Config { line: 0, message });
        if self.threshold.window < 3 || self.threshold.window.is_multiple_of(2) {
            return fail(format!("threshold window {} must be odd and at least 3", self.threshold.window));
        }
        if !self.threshold.bias.is_finite() || self.threshold.bias >= 1.0 {
            return fail(format!("threshold bias {} must be finite and below 1", self.threshold.bias));
        }
        if self.wiener_window < 3 || self.wiener_window.is_multiple_of(2) {
            return fail(format!("wiener window {} must be odd and at least 3", self.wiener_window));
        }
        if !self.line_tolerance.is_finite() || self.line_tolerance < 0.0 {
            return fail(format!("line tolerance {} must be non-negative", self.line_tolerance));
        }
        if !(self.max_area_fraction > 0.0 && self.max_area_fraction <= 1.0) {
            return fail(format!("max area fraction {} outside (0, 1]", self.max_area_fraction));
        }
        Ok(())
    }
}

/// A successful read of one note.
#[derive(Debug, Clone, PartialEq)]
pub struct Recognition {
    pub denomination: Denomination,
    pub digit: DigitClass,
    pub zeros: usize,
    /// Degrees, in (−90, 90].
    pub angle: f64,
    pub scores: [f64; OUTPUTS],
    pub features: FeatureVector,
    pub crop: DigitCrop,
    pub rotation: Rotation,
    pub zero_line: ZeroLine,
}

/// Intermediate results, kept for inspection. Fields stay `None` past the
/// stage that failed.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    pub gray: Option<GrayImage>,
    pub denoised: Option<GrayImage>,
    pub binary: Option<BinaryImage>,
    pub cleaned: Option<BinaryImage>,
    pub candidates: Option<ComponentSet>,
    pub closing_se: Option<StructuringElement>,
    pub closed: Option<BinaryImage>,
    pub lines: Vec<LineCandidate>,
    pub zero_line: Option<ZeroLine>,
    pub rotation: Option<Rotation>,
    pub levelled: Option<BinaryImage>,
    pub crop: Option<DigitCrop>,
    pub features: Option<FeatureVector>,
}

pub const STAGE_NAMES: [&str; 10] =
    ["gray", "wiener", "binary", "median", "shape-filtered", "closed", "lines", "selected", "rotated", "crop"];

fn draw_line(img: &mut GrayImage, line: &Line, value: u8) {
    for y in 0..img.height() {
        for x in 0..img.width() {
            if line.distance(x as f64, y as f64) <= 0.5 {
                img.set(x, y, value);
            }
        }
    }
}

fn paint(img: &mut GrayImage, comps: &[crate::components::Component], value: u8) {
    for c in comps {
        for &(x, y) in c.pixels() {
            img.set(x as usize, y as usize, value);
        }
    }
}

impl Trace {
    /// Stage images in pipeline order, named like [`STAGE_NAMES`]. Stages
    /// that were not reached are omitted.
    pub fn stage_images(&self) -> Vec<(&'static str, GrayImage)> {
        let mut out = Vec::new();
        let mut push = |i: usize, img: Option<GrayImage>| {
            if let Some(img) = img {
                out.push((STAGE_NAMES[i], img));
            }
        };
        push(0, self.gray.clone());
        push(1, self.denoised.clone());
        push(2, self.binary.as_ref().map(BinaryImage::to_gray));
        push(3, self.cleaned.as_ref().map(BinaryImage::to_gray));
        push(4, self.candidates.as_ref().map(|c| c.to_binary().to_gray()));
        push(5, self.closed.as_ref().map(BinaryImage::to_gray));
        let candidates = self.candidates.as_ref();
        push(
            6,
            candidates.filter(|_| self.closed.is_some()).map(|c| {
                let bin = c.to_binary();
                let mut img = GrayImage::from_fn(c.width(), c.height(), |x, y| if bin.get(x, y) { 128 } else { 0 });
                for lc in &self.lines {
                    draw_line(&mut img, &lc.line, 255);
                }
                img
            }),
        );
        push(
            7,
            candidates.zip(self.zero_line.as_ref()).map(|(c, z)| {
                let mut img = GrayImage::filled(c.width(), c.height(), 0);
                draw_line(&mut img, &z.line, 96);
                paint(&mut img, &z.zeros, 255);
                img
            }),
        );
        push(8, self.levelled.as_ref().map(BinaryImage::to_gray));
        push(9, self.crop.as_ref().map(|c| c.image.to_gray()));
        out
    }
}

/// Runs every stage it can and records the results. With `model == None`
/// the chain stops after feature extraction and the result is `Ok(None)`.
pub fn run_pipeline(
    image: &ColorImage,
    cfg: &PipelineConfig,
    model: Option<&MlpModel>,
) -> (Trace, Result<Option<Recognition>>) {
    let mut trace = Trace::default();
    let result = run_stages(image, cfg, model, &mut trace);
    (trace, result)
}

fn run_stages(
    image: &ColorImage,
    cfg: &PipelineConfig,
    model: Option<&MlpModel>,
    t: &mut Trace,
) -> Result<Option<Recognition>> {
    cfg.validate()?;
    let (w, h) = (image.width(), image.height());
    let gray = image.to_gray();
    let denoised = wiener_denoise(&gray, cfg.wiener_window)?;
    t.gray = Some(gray);
    let binary = adaptive_threshold(&denoised, &cfg.threshold)?;
    t.denoised = Some(denoised);
    let mut cleaned = median3x3(&binary);
    t.binary = Some(binary);
    if cfg.erode_dilate {
        let se = StructuringElement::rect_odd(3, 3);
        cleaned = dilate(&erode(&cleaned, &se), &se);
    }

    let labelled = label_components(&cleaned, cfg.connectivity);
    t.cleaned = Some(cleaned);
    let max_area = ((w * h) as f64 * cfg.max_area_fraction).floor() as usize;
    let candidates = filter_by_shape(&filter_by_area(&labelled, cfg.min_component_area, max_area));

    let se = match cfg.closing_se {
        Some((sw, sh)) => StructuringElement::rect(sw, sh)?,
        None => closing_element(&candidates),
    };
    let closed = close(&candidates.to_binary(), &se);
    let post = label_components(&closed, cfg.connectivity);
    t.closing_se = Some(se);
    t.closed = Some(closed);
    let regions = group_regions(&candidates, &post);
    t.candidates = Some(candidates);

    for region in &regions {
        match candidate_lines(region, cfg.line_tolerance) {
            Ok(lc) => t.lines.push(lc),
            Err(LocalizeError::DegenerateRegion(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    let zero_line = select_zero_line(&t.lines)?;
    let angle = zero_line.angle;
    let zeros = zero_line.count;
    t.zero_line = Some(zero_line.clone());

    let rotation = Rotation::new(w, h, angle);
    let levelled = rotation.apply(t.cleaned.as_ref().expect("set above"));
    t.rotation = Some(rotation);
    let crop = find_nonzero_digit(&levelled, &zero_line, &rotation);
    t.levelled = Some(levelled);
    let crop = crop?;
    let mut features = extract_features(&crop)?;
    if cfg.symmetry_features {
        let (sh, sv) = symmetry_scores(&crop.image)?;
        features.left_right = sh;
        features.top_bottom = sv;
    }
    t.crop = Some(crop.clone());
    t.features = Some(features);

    let Some(model) = model else {
        return Ok(None);
    };
    let (digit, scores) = model.predict(&features)?;
    let denomination = value_of(digit, zeros)?;
    Ok(Some(Recognition { denomination, digit, zeros, angle, scores, features, crop, rotation, zero_line }))
}

/// Reads one note.
pub fn recognize(image: &ColorImage, cfg: &PipelineConfig, model: &MlpModel) -> Result<Recognition> {
    run_pipeline(image, cfg, Some(model)).1.map(|r| r.expect("model supplied"))
}

/// Runs the chain up to the feature vector, for building training sets.
pub fn digit_features(image: &ColorImage, cfg: &PipelineConfig) -> Result<FeatureVector> {
    let (trace, result) = run_pipeline(image, cfg, None);
    result?;
    Ok(trace.features.expect("features computed when no error"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_overrides() {
        let text = "# tuned\nthreshold_window = 21\nthreshold-bias=0.2\nclosing_se=9x5\nconnectivity=4\nmodel=m.txt\n";
        let cfg = PipelineConfig::from_text(text).unwrap();
        assert_eq!(cfg.threshold.window, 21);
        assert_eq!(cfg.threshold.bias, 0.2);
        assert_eq!(cfg.closing_se, Some((9, 5)));
        assert_eq!(cfg.connectivity, Connectivity::Four);
        assert_eq!(cfg.model_path, PathBuf::from("m.txt"));
        assert_eq!(cfg.wiener_window, 5);
    }

    #[test]
    fn config_errors_name_line() {
        let e = PipelineConfig::from_text("wiener_window=5\nbogus=1\n").unwrap_err();
        assert!(matches!(e, Error::Config { line: 2, .. }));
        assert!(PipelineConfig::from_text("closing_se=8x5").is_err());
        assert!(PipelineConfig::from_text("threshold_window=4").is_err());
        assert!(PipelineConfig::from_text("connectivity=6").is_err());
    }

    #[test]
    fn black_image_has_no_candidates() {
        let img = ColorImage::filled(64, 48, [0, 0, 0]);
        let (trace, res) = run_pipeline(&img, &PipelineConfig::default(), None);
        let err = res.unwrap_err();
        assert_eq!(err.qualified_name(), "zero-localizer.NoCandidates");
        assert!(trace.closed.is_some());
        assert!(trace.zero_line.is_none());
    }
}
