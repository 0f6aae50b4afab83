//! Denominations, the two-phase accuracy arithmetic and evaluation reports.
//!
//! Phase 1 is localizing the zeros and counting them; phase 2 is naming the
//! digit, measured only on images that passed phase 1. Total accuracy of a
//! note is the product of its phase-1 rate and its digit's phase-2 rate.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;

use crate::classifier::{DigitClass, MlpModel};
use crate::components::BBox;
use crate::digit::DigitCrop;
use crate::digit::FeatureVector;
use crate::image::{ColorImage, Rotation};
use crate::pipeline::{digit_features, run_pipeline, PipelineConfig};
use crate::pnm::load_image;
use crate::synth::{Background, GroundTruth, SynthSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("no {digit} note with {zeros} zeros exists")]
    InvalidDenomination { digit: u64, zeros: usize },
    #[error("accuracy {0} outside 0..=100")]
    OutOfRange(f64),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
}

impl EvalError {
    pub fn kind(&self) -> &'static str {
        match self {
            EvalError::InvalidDenomination { .. } => "InvalidDenomination",
            EvalError::OutOfRange(_) => "OutOfRange",
            EvalError::EmptyDataset => "EmptyDataset",
            EvalError::Manifest { .. } => "Manifest",
        }
    }
}

/// One of the seven notes in circulation: a leading digit followed by 3 to 5 zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Denomination {
    digit: DigitClass,
    zeros: usize,
}

impl Denomination {
    /// In ascending value order.
    pub const ALL: [Denomination; 7] = [
        Denomination { digit: DigitClass::One, zeros: 3 },
        Denomination { digit: DigitClass::Two, zeros: 3 },
        Denomination { digit: DigitClass::Five, zeros: 3 },
        Denomination { digit: DigitClass::One, zeros: 4 },
        Denomination { digit: DigitClass::Two, zeros: 4 },
        Denomination { digit: DigitClass::Five, zeros: 4 },
        Denomination { digit: DigitClass::One, zeros: 5 },
    ];

    pub fn digit(&self) -> DigitClass {
        self.digit
    }

    pub fn zeros(&self) -> usize {
        self.zeros
    }

    /// Value in Riyals.
    pub fn value(&self) -> u64 {
        self.digit.value() * 10u64.pow(self.zeros as u32)
    }

    pub fn from_value(value: u64) -> Option<Self> {
        Self::ALL.into_iter().find(|d| d.value() == value)
    }

    pub fn index(&self) -> usize {
        Self::ALL.iter().position(|d| d == self).expect("valid denomination")
    }
}

impl std::fmt::Display for Denomination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value())
    }
}

pub fn value_of(digit: DigitClass, zeros: usize) -> Result<Denomination, EvalError> {
    let d = Denomination { digit, zeros };
    if Denomination::ALL.contains(&d) {
        Ok(d)
    } else {
        Err(EvalError::InvalidDenomination { digit: digit.value(), zeros })
    }
}

/// Total accuracy (percent) from phase-1 and conditional phase-2 accuracies (percent).
pub fn conditional_accuracy(a: f64, b: f64) -> Result<f64, EvalError> {
    for v in [a, b] {
        if !(0.0..=100.0).contains(&v) {
            return Err(EvalError::OutOfRange(v));
        }
    }
    Ok(a * b / 100.0)
}

/// Rounds a percentage to two decimals, as printed in the tables.
pub fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

/// What happened to one image.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub truth: Denomination,
    /// Zero count found, if localization succeeded.
    pub zeros: Option<usize>,
    /// Whether the digit crop covers at least half of the true digit box.
    pub crop_hit: bool,
    pub digit: Option<DigitClass>,
    pub angle: Option<f64>,
    pub true_angle: Option<f64>,
}

impl Outcome {
    pub fn phase1(&self) -> bool {
        self.zeros == Some(self.truth.zeros()) && self.crop_hit
    }

    pub fn phase2(&self) -> bool {
        self.phase1() && self.digit == Some(self.truth.digit())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub samples: usize,
    pub correct: usize,
}

impl Tally {
    /// Percentage, or `None` without samples.
    pub fn percent(&self) -> Option<f64> {
        (self.samples > 0).then(|| 100.0 * self.correct as f64 / self.samples as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    /// Localization and zero count, per denomination (indexed like `Denomination::ALL`).
    pub phase1: [Tally; 7],
    /// Digit identification among phase-1 successes, per digit class.
    pub phase2: [Tally; 3],
    /// Rows: true zero count 3..=5. Columns: found 3, 4, 5, failed.
    pub zero_confusion: [[usize; 4]; 3],
    /// Rows: true digit. Columns: predicted digit. Phase-1 successes only.
    pub digit_confusion: [[usize; 3]; 3],
    /// Images whose full value was read correctly.
    pub end_to_end: Tally,
}

impl EvalReport {
    pub fn from_outcomes(outcomes: &[Outcome]) -> Result<Self, EvalError> {
        if outcomes.is_empty() {
            return Err(EvalError::EmptyDataset);
        }
        let mut r = EvalReport {
            phase1: [Tally::default(); 7],
            phase2: [Tally::default(); 3],
            zero_confusion: [[0; 4]; 3],
            digit_confusion: [[0; 3]; 3],
            end_to_end: Tally::default(),
        };
        for o in outcomes {
            let p1 = &mut r.phase1[o.truth.index()];
            p1.samples += 1;
            p1.correct += usize::from(o.phase1());
            let col = match o.zeros {
                Some(z @ 3..=5) => z - 3,
                _ => 3,
            };
            r.zero_confusion[o.truth.zeros() - 3][col] += 1;
            if o.phase1() {
                let p2 = &mut r.phase2[o.truth.digit().index()];
                p2.samples += 1;
                p2.correct += usize::from(o.phase2());
                if let Some(d) = o.digit {
                    r.digit_confusion[o.truth.digit().index()][d.index()] += 1;
                }
            }
            r.end_to_end.samples += 1;
            r.end_to_end.correct += usize::from(o.phase2());
        }
        Ok(r)
    }

    pub fn phase1_percent(&self, d: Denomination) -> Option<f64> {
        self.phase1[d.index()].percent()
    }

    /// Phase-2 accuracy of a digit; 0 when no image of it passed phase 1.
    pub fn phase2_percent(&self, c: DigitClass) -> Option<f64> {
        let t = self.phase2[c.index()];
        if t.samples == 0 {
            // Nothing reached phase 2: the product is zero whatever b is.
            return (self.phase1.iter().zip(Denomination::ALL).any(|(p, d)| d.digit() == c && p.samples > 0))
                .then_some(0.0);
        }
        t.percent()
    }

    /// `phase1(d) · phase2(digit of d) / 100`, unrounded.
    pub fn total_percent(&self, d: Denomination) -> Option<f64> {
        let a = self.phase1_percent(d)?;
        let b = self.phase2_percent(d.digit())?;
        Some(conditional_accuracy(a, b).expect("percentages in range"))
    }

    fn mean(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
        let v: Vec<f64> = values.flatten().collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }

    pub fn average_phase1(&self) -> Option<f64> {
        Self::mean(Denomination::ALL.iter().map(|&d| self.phase1_percent(d)))
    }

    pub fn average_phase2(&self) -> Option<f64> {
        Self::mean(DigitClass::ALL.iter().map(|&c| self.phase2[c.index()].percent()))
    }

    pub fn average_total(&self) -> Option<f64> {
        Self::mean(Denomination::ALL.iter().map(|&d| self.total_percent(d)))
    }

    /// Zero-count accuracy over all images.
    pub fn zero_count_percent(&self) -> f64 {
        let right: usize = (0..3).map(|i| self.zero_confusion[i][i]).sum();
        let all: usize = self.zero_confusion.iter().flatten().sum();
        100.0 * right as f64 / all as f64
    }

    /// The three tables as aligned text.
    pub fn tables(&self) -> String {
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{:.2}%", round2(x)));
        let mut s = String::new();
        let _ = writeln!(s, "Localization and zero count");
        let _ = writeln!(s, "{:<16}{:>10}{:>10}", "Cash", "Samples", "Accuracy");
        for d in Denomination::ALL {
            let t = self.phase1[d.index()];
            if t.samples > 0 {
                let _ = writeln!(s, "{:<16}{:>10}{:>10}", format!("{d} Riyals"), t.samples, pct(t.percent()));
            }
        }
        let _ = writeln!(s, "{:<16}{:>10}{:>10}", "Average", "", pct(self.average_phase1()));
        let _ = writeln!(s);
        let _ = writeln!(s, "Nonzero digit identification");
        let _ = writeln!(s, "{:<16}{:>10}{:>10}", "Nonzero Digit", "Samples", "Accuracy");
        for c in DigitClass::ALL {
            let t = self.phase2[c.index()];
            if t.samples > 0 {
                let _ = writeln!(s, "{:<16}{:>10}{:>10}", c.to_string(), t.samples, pct(t.percent()));
            }
        }
        let _ = writeln!(s, "{:<16}{:>10}{:>10}", "Average", "", pct(self.average_phase2()));
        let _ = writeln!(s);
        let _ = writeln!(s, "Total accuracy");
        let _ = writeln!(s, "{:<16}{:>20}", "Cash", "Total Accuracy");
        for d in Denomination::ALL {
            if self.phase1[d.index()].samples > 0 {
                let _ = writeln!(s, "{:<16}{:>20}", format!("{d} Riyals"), pct(self.total_percent(d)));
            }
        }
        let _ = writeln!(s, "{:<16}{:>20}", "Average", pct(self.average_total()));
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "End-to-end: {}/{} ({})   zero count: {:.2}%",
            self.end_to_end.correct,
            self.end_to_end.samples,
            pct(self.end_to_end.percent()),
            round2(self.zero_count_percent())
        );
        let _ = writeln!(s, "Zero-count confusion (rows true 3/4/5; cols found 3/4/5/failed):");
        for (i, row) in self.zero_confusion.iter().enumerate() {
            let _ = writeln!(s, "  {}: {:>5}{:>5}{:>5}{:>5}", i + 3, row[0], row[1], row[2], row[3]);
        }
        let _ = writeln!(s, "Digit confusion (rows true 1/2/5; cols predicted 1/2/5):");
        for (c, row) in DigitClass::ALL.iter().zip(&self.digit_confusion) {
            let _ = writeln!(s, "  {}: {:>5}{:>5}{:>5}", c, row[0], row[1], row[2]);
        }
        s
    }

    /// `section,label,samples,correct,accuracy` rows.
    pub fn to_csv(&self) -> String {
        let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{:.2}", round2(x)));
        let mut s = String::from("section,label,samples,correct,accuracy\n");
        for d in Denomination::ALL {
            let t = self.phase1[d.index()];
            if t.samples > 0 {
                let _ = writeln!(s, "phase1,{d},{},{},{}", t.samples, t.correct, fmt(t.percent()));
            }
        }
        let _ = writeln!(s, "phase1,average,,,{}", fmt(self.average_phase1()));
        for c in DigitClass::ALL {
            let t = self.phase2[c.index()];
            if t.samples > 0 {
                let _ = writeln!(s, "phase2,{c},{},{},{}", t.samples, t.correct, fmt(t.percent()));
            }
        }
        let _ = writeln!(s, "phase2,average,,,{}", fmt(self.average_phase2()));
        for d in Denomination::ALL {
            if self.phase1[d.index()].samples > 0 {
                let _ = writeln!(s, "total,{d},,,{}", fmt(self.total_percent(d)));
            }
        }
        let _ = writeln!(s, "total,average,,,{}", fmt(self.average_total()));
        let e = self.end_to_end;
        let _ = writeln!(s, "end_to_end,all,{},{},{}", e.samples, e.correct, fmt(e.percent()));
        s
    }
}

/// Fraction of the pixels of `truth_box` (source image) that land inside the
/// digit crop.
pub fn crop_coverage(crop: &DigitCrop, rotation: &Rotation, truth_box: &BBox) -> f64 {
    let mut inside = 0usize;
    for y in truth_box.min_y..=truth_box.max_y {
        for x in truth_box.min_x..=truth_box.max_x {
            let (lx, ly) = rotation.forward(x as f64, y as f64);
            inside += usize::from(crop.contains(lx, ly));
        }
    }
    inside as f64 / truth_box.area() as f64
}

/// Runs the pipeline on one image and scores it against its truth. The two
/// phases are scored separately, so a digit that forms no valid note with
/// the zero count found still counts toward phase 2.
pub fn score_image(image: &ColorImage, truth: &GroundTruth, model: &MlpModel, cfg: &PipelineConfig) -> Outcome {
    score(image, truth.denomination, truth.angle, Some(&truth.digit_box), model, cfg)
}

/// Like [`score_image`] for images whose digit box may be unknown; without
/// one, any crop counts as a hit.
pub fn score(
    image: &ColorImage,
    denomination: Denomination,
    angle: f64,
    digit_box: Option<&BBox>,
    model: &MlpModel,
    cfg: &PipelineConfig,
) -> Outcome {
    let (trace, _) = run_pipeline(image, cfg, None);
    let crop_hit = match (&trace.crop, &trace.rotation, digit_box) {
        (Some(crop), Some(rotation), Some(b)) => crop_coverage(crop, rotation, b) >= 0.5,
        (Some(_), Some(_), None) => true,
        _ => false,
    };
    Outcome {
        truth: denomination,
        zeros: trace.zero_line.as_ref().map(|z| z.count),
        crop_hit,
        digit: trace.features.and_then(|f| model.predict(&f).ok()).map(|(d, _)| d),
        angle: trace.zero_line.as_ref().map(|z| z.angle),
        true_angle: Some(angle),
    }
}

/// Scores every image (in parallel) and assembles the report.
pub fn evaluate(
    dataset: &[(ColorImage, GroundTruth)],
    model: &MlpModel,
    cfg: &PipelineConfig,
) -> Result<EvalReport, EvalError> {
    if dataset.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let outcomes: Vec<Outcome> = dataset.par_iter().map(|(img, t)| score_image(img, t, model, cfg)).collect();
    EvalReport::from_outcomes(&outcomes)
}

/// Loads and scores every manifest image (in parallel). Relative paths are
/// resolved against `dir`.
pub fn evaluate_manifest(
    entries: &[ManifestEntry],
    dir: &Path,
    model: &MlpModel,
    cfg: &PipelineConfig,
) -> Result<EvalReport, crate::Error> {
    if entries.is_empty() {
        return Err(EvalError::EmptyDataset.into());
    }
    let outcomes = entries
        .par_iter()
        .map(|e| {
            let image = load_image(e.resolve(dir))?;
            Ok(score(&image, e.denomination, e.rotation, e.digit_box.as_ref(), model, cfg))
        })
        .collect::<Result<Vec<Outcome>, crate::Error>>()?;
    Ok(EvalReport::from_outcomes(&outcomes)?)
}

/// Digit features and true classes of every image the pipeline gets through
/// (in input order), plus the number it failed on.
pub fn sample_features(
    dataset: &[(ColorImage, GroundTruth)],
    cfg: &PipelineConfig,
) -> (Vec<(FeatureVector, DigitClass)>, usize) {
    let found: Vec<Option<(FeatureVector, DigitClass)>> =
        dataset.par_iter().map(|(img, t)| digit_features(img, cfg).ok().map(|f| (f, t.denomination.digit()))).collect();
    let skipped = found.iter().filter(|f| f.is_none()).count();
    (found.into_iter().flatten().collect(), skipped)
}

/// [`sample_features`] over manifest images.
pub fn manifest_features(
    entries: &[ManifestEntry],
    dir: &Path,
    cfg: &PipelineConfig,
) -> Result<(Vec<(FeatureVector, DigitClass)>, usize), crate::Error> {
    let found = entries
        .par_iter()
        .map(|e| {
            let image = load_image(e.resolve(dir))?;
            Ok(digit_features(&image, cfg).ok().map(|f| (f, e.denomination.digit())))
        })
        .collect::<Result<Vec<_>, crate::Error>>()?;
    let skipped = found.iter().filter(|f| f.is_none()).count();
    Ok((found.into_iter().flatten().collect(), skipped))
}

/// One manifest row.
///
/// The first six columns are `path,denomination,rotation,scale,noise,seed`.
/// Rows written by the generator append
/// `background,illumination,digit_min_x,digit_min_y,digit_max_x,digit_max_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub denomination: Denomination,
    pub rotation: f64,
    pub scale: f64,
    pub noise: f64,
    pub seed: u64,
    pub background: Option<Background>,
    pub illumination: Option<f64>,
    pub digit_box: Option<BBox>,
}

impl ManifestEntry {
    pub fn from_spec(path: PathBuf, spec: &SynthSpec, truth: &GroundTruth) -> Self {
        Self {
            path,
            denomination: spec.denomination,
            rotation: spec.rotation,
            scale: spec.scale,
            noise: spec.noise,
            seed: spec.seed,
            background: Some(spec.background),
            illumination: Some(spec.illumination),
            digit_box: Some(truth.digit_box),
        }
    }

    pub fn to_line(&self) -> String {
        let mut s = format!(
            "{},{},{},{},{},{}",
            self.path.display(),
            self.denomination.value(),
            self.rotation,
            self.scale,
            self.noise,
            self.seed
        );
        if let (Some(bg), Some(il), Some(b)) = (self.background, self.illumination, self.digit_box) {
            let _ = write!(s, ",{},{},{},{},{},{}", bg.name(), il, b.min_x, b.min_y, b.max_x, b.max_y);
        }
        s
    }

    /// Resolves a relative path against the manifest's directory.
    pub fn resolve(&self, manifest_dir: &Path) -> PathBuf {
        if self.path.is_absolute() {
            self.path.clone()
        } else {
            manifest_dir.join(&self.path)
        }
    }
}

/// Parses manifest text. Blank lines and lines starting with `#` are skipped;
/// line numbers in errors are 1-based.
pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, EvalError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| EvalError::Manifest { line, message };
        let cols: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if cols.len() != 6 && cols.len() != 12 {
            return Err(err(format!("expected 6 or 12 fields, found {}", cols.len())));
        }
        let num = |idx: usize, name: &str| -> Result<f64, EvalError> {
            cols[idx]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(format!("bad {name} {:?}", cols[idx])))
        };
        let uint = |idx: usize, name: &str| -> Result<u64, EvalError> {
            cols[idx].parse::<u64>().map_err(|_| err(format!("bad {name} {:?}", cols[idx])))
        };
        if cols[0].is_empty() {
            return Err(err("empty path".into()));
        }
        let value = uint(1, "denomination")?;
        let denomination =
            Denomination::from_value(value).ok_or_else(|| err(format!("unknown denomination {value}")))?;
        let mut entry = ManifestEntry {
            path: PathBuf::from(cols[0]),
            denomination,
            rotation: num(2, "rotation")?,
            scale: num(3, "scale")?,
            noise: num(4, "noise")?,
            seed: uint(5, "seed")?,
            background: None,
            illumination: None,
            digit_box: None,
        };
        if cols.len() == 12 {
            entry.background =
                Some(Background::parse(cols[6]).ok_or_else(|| err(format!("bad background {:?}", cols[6])))?);
            entry.illumination = Some(num(7, "illumination")?);
            let b: Vec<usize> = (8..12).map(|k| uint(k, "digit box").map(|v| v as usize)).collect::<Result<_, _>>()?;
            if b[0] > b[2] || b[1] > b[3] {
                return Err(err("inverted digit box".into()));
            }
            entry.digit_box = Some(BBox { min_x: b[0], min_y: b[1], max_x: b[2], max_y: b[3] });
        }
        out.push(entry);
    }
    Ok(out)
}

pub fn manifest_text(entries: &[ManifestEntry]) -> String {
    let mut s = String::from("# path,denomination,rotation,scale,noise,seed,background,illumination,digit_box\n");
    for e in entries {
        s += &e.to_line();
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn denomination_values() {
        assert_eq!(value_of(DigitClass::One, 3).unwrap().value(), 1000);
        assert_eq!(value_of(DigitClass::Five, 4).unwrap().value(), 50000);
        assert_eq!(value_of(DigitClass::Two, 5), Err(EvalError::InvalidDenomination { digit: 2, zeros: 5 }));
        assert!(value_of(DigitClass::One, 6).is_err());
        assert_eq!(Denomination::from_value(100000).unwrap().zeros(), 5);
        assert!(Denomination::from_value(200).is_none());
    }

    #[test]
    fn conditional_accuracy_examples() {
        assert_eq!(round2(conditional_accuracy(96.8, 98.83).unwrap()), 95.67);
        assert_eq!(round2(conditional_accuracy(89.4, 98.83).unwrap()), 88.35);
        assert_eq!(conditional_accuracy(100.0, 100.0).unwrap(), 100.0);
        assert_eq!(conditional_accuracy(100.5, 50.0), Err(EvalError::OutOfRange(100.5)));
        assert!(conditional_accuracy(50.0, -1.0).is_err());
    }

    fn outcome(d: Denomination, zeros: Option<usize>, hit: bool, digit: Option<DigitClass>) -> Outcome {
        Outcome { truth: d, zeros, crop_hit: hit, digit, angle: None, true_angle: None }
    }

    #[test]
    fn perfect_run_is_all_hundred() {
        let outcomes: Vec<Outcome> =
            Denomination::ALL.iter().map(|&d| outcome(d, Some(d.zeros()), true, Some(d.digit()))).collect();
        let r = EvalReport::from_outcomes(&outcomes).unwrap();
        for d in Denomination::ALL {
            assert_eq!(r.total_percent(d), Some(100.0));
        }
        assert_eq!(r.average_total(), Some(100.0));
    }

    #[test]
    fn single_failure_is_zero() {
        let d = Denomination::ALL[3];
        let r = EvalReport::from_outcomes(&[outcome(d, None, false, None)]).unwrap();
        assert_eq!(r.total_percent(d), Some(0.0));
        assert_eq!(r.zero_confusion[1][3], 1);
    }

    #[test]
    fn totals_follow_product_rule() {
        let d = Denomination::ALL[0];
        let mut v = vec![outcome(d, Some(3), true, Some(DigitClass::One)); 3];
        v.push(outcome(d, Some(4), true, Some(DigitClass::One)));
        v.push(outcome(Denomination::ALL[3], Some(4), true, Some(DigitClass::Two)));
        let r = EvalReport::from_outcomes(&v).unwrap();
        // phase 1 for 1000: 3/4; digit One: 3 right of 4 reaching phase 2.
        assert_eq!(r.phase1_percent(d), Some(75.0));
        assert_eq!(r.phase2_percent(DigitClass::One), Some(75.0));
        assert_eq!(r.total_percent(d), Some(75.0 * 75.0 / 100.0));
        assert!(r.tables().contains("56.25%"));
        assert!(r.to_csv().contains("total,1000,,,56.25"));
    }

    #[test]
    fn empty_outcomes() {
        assert_eq!(EvalReport::from_outcomes(&[]), Err(EvalError::EmptyDataset));
    }

    #[test]
    fn manifest_parsing() {
        let text = "# header\nimg/a.ppm,1000,12.5,0.8,0.1,42\n\nimg/b.ppm,50000,-3,1,0,7,textured,1.1,10,20,30,40\n";
        let m = parse_manifest(text).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].denomination.value(), 1000);
        assert_eq!(m[0].rotation, 12.5);
        assert_eq!(m[1].background, Some(Background::Textured));
        assert_eq!(m[1].digit_box.unwrap().max_y, 40);
        assert_eq!(parse_manifest(&manifest_text(&m)).unwrap(), m);
    }

    #[test]
    fn manifest_errors_carry_line() {
        let text = "a,1000,0,1,0,1\nb,1000,0,1,0,1\nc,1000,0,1,0,1\nd,1000,0,1,0,1\ne,1000,zero,1,0,1\n";
        assert!(matches!(parse_manifest(text), Err(EvalError::Manifest { line: 5, .. })));
        assert!(matches!(parse_manifest("x,200000,0,1,0,1"), Err(EvalError::Manifest { line: 1, .. })));
        assert!(matches!(parse_manifest("x,1000,0,1"), Err(EvalError::Manifest { line: 1, .. })));
    }
}
