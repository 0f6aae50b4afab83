//! The 4-20-3 multilayer perceptron that names the nonzero digit.
//!
//! Hidden units are logistic, the three outputs go through a softmax, and
//! training minimizes mean cross-entropy by full-batch gradient descent on
//! standardized features. Everything random comes from one seeded ChaCha
//! stream, so a fixed seed reproduces the model bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::digit::FeatureVector;

pub const INPUTS: usize = 4;
pub const HIDDEN: usize = 20;
pub const OUTPUTS: usize = 3;
/// Weights and biases of both layers.
pub const PARAM_COUNT: usize = HIDDEN * (INPUTS + 1) + OUTPUTS * (HIDDEN + 1);
pub const MIN_SAMPLES_PER_CLASS: usize = 10;

const MAGIC: &str = "RIALMLP";
const VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("class {class} has {got} samples, need at least {MIN_SAMPLES_PER_CLASS}")]
    InsufficientData { class: DigitClass, got: usize },
    #[error("feature {0} has zero variance over the training split")]
    DegenerateFeatures(usize),
    #[error("input features must be finite")]
    NonFiniteInput,
    #[error("cannot read model {path}: {source}")]
    UnreadableFile {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write model {path}: {source}")]
    WriteFailed {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model version {0:?} is not {VERSION}")]
    VersionMismatch(String),
    #[error("corrupt model file: {0}")]
    CorruptModel(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
}

impl ClassifierError {
    pub fn kind(&self) -> &'static str {
        match self {
            ClassifierError::InsufficientData { .. } => "InsufficientData",
            ClassifierError::DegenerateFeatures(_) => "DegenerateFeatures",
            ClassifierError::NonFiniteInput => "NonFiniteInput",
            ClassifierError::UnreadableFile { .. } => "UnreadableFile",
            ClassifierError::WriteFailed { .. } => "WriteFailed",
            ClassifierError::VersionMismatch(_) => "VersionMismatch",
            ClassifierError::CorruptModel(_) => "CorruptModel",
            ClassifierError::InvalidConfig(_) => "InvalidConfig",
        }
    }
}

/// The leading digit of a note value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DigitClass {
    One,
    Two,
    Five,
}

impl DigitClass {
    pub const ALL: [DigitClass; 3] = [DigitClass::One, DigitClass::Two, DigitClass::Five];

    pub fn index(self) -> usize {
        match self {
            DigitClass::One => 0,
            DigitClass::Two => 1,
            DigitClass::Five => 2,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn value(self) -> u64 {
        match self {
            DigitClass::One => 1,
            DigitClass::Two => 2,
            DigitClass::Five => 5,
        }
    }

    pub fn from_value(v: u64) -> Option<Self> {
        match v {
            1 => Some(DigitClass::One),
            2 => Some(DigitClass::Two),
            5 => Some(DigitClass::Five),
            _ => None,
        }
    }
}

impl std::fmt::Display for DigitClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Weights and biases. `hidden_w[j][i]` connects input `i` to hidden unit `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub hidden_w: [[f64; INPUTS]; HIDDEN],
    pub hidden_b: [f64; HIDDEN],
    pub output_w: [[f64; HIDDEN]; OUTPUTS],
    pub output_b: [f64; OUTPUTS],
}

impl Params {
    pub fn zeros() -> Self {
        Self {
            hidden_w: [[0.0; INPUTS]; HIDDEN],
            hidden_b: [0.0; HIDDEN],
            output_w: [[0.0; HIDDEN]; OUTPUTS],
            output_b: [0.0; OUTPUTS],
        }
    }

    /// Uniform in [−0.5, 0.5], drawn in flat-vector order.
    pub fn random(rng: &mut impl Rng) -> Self {
        let flat: Vec<f64> = (0..PARAM_COUNT).map(|_| rng.random_range(-0.5..=0.5)).collect();
        Self::from_flat(&flat)
    }

    /// Flat order: per hidden unit its weights then bias, then per output
    /// unit its weights then bias.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(PARAM_COUNT);
        for j in 0..HIDDEN {
            v.extend_from_slice(&self.hidden_w[j]);
            v.push(self.hidden_b[j]);
        }
        for k in 0..OUTPUTS {
            v.extend_from_slice(&self.output_w[k]);
            v.push(self.output_b[k]);
        }
        v
    }

    pub fn from_flat(v: &[f64]) -> Self {
        assert_eq!(v.len(), PARAM_COUNT);
        let mut p = Self::zeros();
        let mut it = v.iter().copied();
        for j in 0..HIDDEN {
            for w in p.hidden_w[j].iter_mut() {
                *w = it.next().unwrap();
            }
            p.hidden_b[j] = it.next().unwrap();
        }
        for k in 0..OUTPUTS {
            for w in p.output_w[k].iter_mut() {
                *w = it.next().unwrap();
            }
            p.output_b[k] = it.next().unwrap();
        }
        p
    }

    fn forward(&self, x: &[f64; INPUTS]) -> ([f64; HIDDEN], [f64; OUTPUTS]) {
        let mut hidden = [0.0; HIDDEN];
        for (j, h) in hidden.iter_mut().enumerate() {
            let z = self.hidden_b[j] + dot(&self.hidden_w[j], x);
            *h = logistic(z);
        }
        let mut logits = [0.0; OUTPUTS];
        for (k, o) in logits.iter_mut().enumerate() {
            *o = self.output_b[k] + dot(&self.output_w[k], &hidden);
        }
        (hidden, softmax(&logits))
    }

    /// Mean cross-entropy over `(inputs, class index)` pairs and its gradient.
    #[allow(clippy::needless_range_loop)]
    pub fn loss_and_gradient(&self, data: &[([f64; INPUTS], usize)]) -> (f64, Params) {
        let mut grad = Params::zeros();
        let mut loss = 0.0;
        let n = data.len() as f64;
        for (x, y) in data {
            let (hidden, probs) = self.forward(x);
            loss -= probs[*y].ln();
            // dL/dlogit = p − onehot
            let mut d_out = probs;
            d_out[*y] -= 1.0;
            let mut d_hidden = [0.0; HIDDEN];
            for k in 0..OUTPUTS {
                for j in 0..HIDDEN {
                    grad.output_w[k][j] += d_out[k] * hidden[j];
                    d_hidden[j] += d_out[k] * self.output_w[k][j];
                }
                grad.output_b[k] += d_out[k];
            }
            for j in 0..HIDDEN {
                let dz = d_hidden[j] * hidden[j] * (1.0 - hidden[j]);
                for i in 0..INPUTS {
                    grad.hidden_w[j][i] += dz * x[i];
                }
                grad.hidden_b[j] += dz;
            }
        }
        let g: Vec<f64> = grad.to_flat().iter().map(|v| v / n).collect();
        (loss / n, Params::from_flat(&g))
    }

    /// Mean cross-entropy only.
    pub fn loss(&self, data: &[([f64; INPUTS], usize)]) -> f64 {
        data.iter().map(|(x, y)| -self.forward(x).1[*y].ln()).sum::<f64>() / data.len() as f64
    }
}

fn dot<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

pub fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn softmax<const N: usize>(logits: &[f64; N]) -> [f64; N] {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out = [0.0; N];
    let mut sum = 0.0;
    for (o, &l) in out.iter_mut().zip(logits) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
    out
}

/// Trained network plus the feature standardization it expects.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub mean: [f64; INPUTS],
    pub std: [f64; INPUTS],
    pub params: Params,
}

impl MlpModel {
    pub fn standardize(&self, f: &FeatureVector) -> [f64; INPUTS] {
        let a = f.to_array();
        std::array::from_fn(|i| (a[i] - self.mean[i]) / self.std[i])
    }

    /// Predicted class and the three softmax scores.
    pub fn predict(&self, f: &FeatureVector) -> Result<(DigitClass, [f64; OUTPUTS]), ClassifierError> {
        if !f.is_finite() {
            return Err(ClassifierError::NonFiniteInput);
        }
        let (_, scores) = self.params.forward(&self.standardize(f));
        Ok((argmax_class(&scores), scores))
    }

    fn validate(&self) -> Result<(), ClassifierError> {
        if self.std.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(ClassifierError::CorruptModel("normalization stddev must be > 0".into()));
        }
        if self.mean.iter().chain(self.params.to_flat().iter()).any(|v| !v.is_finite()) {
            return Err(ClassifierError::CorruptModel("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Line-oriented text form with 17 significant digits per value.
    pub fn to_text(&self) -> String {
        let num = |v: f64| format!("{v:.16e}");
        let row = |label: &str, vals: &[f64]| {
            let body: Vec<String> = vals.iter().map(|&v| num(v)).collect();
            format!("{label} {}\n", body.join(" "))
        };
        let mut s = String::new();
        writeln!(s, "{MAGIC} {VERSION}").unwrap();
        writeln!(s, "sizes {INPUTS} {HIDDEN} {OUTPUTS}").unwrap();
        s += &row("mean", &self.mean);
        s += &row("std", &self.std);
        for j in 0..HIDDEN {
            let mut v = self.params.hidden_w[j].to_vec();
            v.push(self.params.hidden_b[j]);
            s += &row("hidden", &v);
        }
        for k in 0..OUTPUTS {
            let mut v = self.params.output_w[k].to_vec();
            v.push(self.params.output_b[k]);
            s += &row("output", &v);
        }
        s += "end\n";
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ClassifierError> {
        let corrupt = |m: &str| ClassifierError::CorruptModel(m.to_string());
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());

        let header = lines.next().ok_or_else(|| corrupt("empty file"))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some(MAGIC) {
            return Err(corrupt("missing RIALMLP header"));
        }
        let version = parts.next().unwrap_or("");
        if version != VERSION {
            return Err(ClassifierError::VersionMismatch(version.to_string()));
        }

        let mut row = |label: &str, n: usize| -> Result<Vec<f64>, ClassifierError> {
            let line = lines.next().ok_or_else(|| corrupt(&format!("missing {label} row")))?;
            let mut it = line.split_whitespace();
            if it.next() != Some(label) {
                return Err(corrupt(&format!("expected {label} row, found {line:?}")));
            }
            let vals: Vec<f64> = it
                .map(|t| t.parse::<f64>().map_err(|_| corrupt(&format!("bad number {t:?}"))))
                .collect::<Result<_, _>>()?;
            if vals.len() != n {
                return Err(corrupt(&format!("{label} row has {} values, expected {n}", vals.len())));
            }
            Ok(vals)
        };

        let sizes = row("sizes", 3)?;
        if sizes != [INPUTS as f64, HIDDEN as f64, OUTPUTS as f64] {
            return Err(corrupt("layer sizes must be 4 20 3"));
        }
        let mean: [f64; INPUTS] = row("mean", INPUTS)?.try_into().unwrap();
        let std: [f64; INPUTS] = row("std", INPUTS)?.try_into().unwrap();
        let mut flat = Vec::with_capacity(PARAM_COUNT);
        for _ in 0..HIDDEN {
            flat.extend(row("hidden", INPUTS + 1)?);
        }
        for _ in 0..OUTPUTS {
            flat.extend(row("output", HIDDEN + 1)?);
        }
        match lines.next() {
            Some("end") => {}
            _ => return Err(corrupt("missing end marker")),
        }
        let model = MlpModel { mean, std, params: Params::from_flat(&flat) };
        model.validate()?;
        Ok(model)
    }
}

fn argmax_class(scores: &[f64; OUTPUTS]) -> DigitClass {
    let mut best = 0;
    for k in 1..OUTPUTS {
        if scores[k] > scores[best] {
            best = k;
        }
    }
    DigitClass::from_index(best).expect("three outputs")
}

pub fn predict(model: &MlpModel, f: &FeatureVector) -> Result<(DigitClass, [f64; OUTPUTS]), ClassifierError> {
    model.predict(f)
}

pub fn save_model(model: &MlpModel, path: impl AsRef<Path>) -> Result<(), ClassifierError> {
    let path = path.as_ref();
    fs::write(path, model.to_text())
        .map_err(|source| ClassifierError::WriteFailed { path: path.display().to_string(), source })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<MlpModel, ClassifierError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|source| ClassifierError::UnreadableFile { path: path.display().to_string(), source })?;
    MlpModel::from_text(&text)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub train_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 0.5, epochs: 2000, seed: 7, train_fraction: 0.70 }
    }
}

/// Per-class correct/total counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassTally {
    pub correct: [usize; OUTPUTS],
    pub total: [usize; OUTPUTS],
}

impl ClassTally {
    pub fn record(&mut self, truth: DigitClass, predicted: DigitClass) {
        self.total[truth.index()] += 1;
        if truth == predicted {
            self.correct[truth.index()] += 1;
        }
    }

    /// Accuracy of one class in [0, 1]; `None` without samples.
    pub fn class_accuracy(&self, c: DigitClass) -> Option<f64> {
        let t = self.total[c.index()];
        (t > 0).then(|| self.correct[c.index()] as f64 / t as f64)
    }

    /// Mean of the per-class accuracies over classes that have samples.
    pub fn mean_class_accuracy(&self) -> f64 {
        let accs: Vec<f64> = DigitClass::ALL.iter().filter_map(|&c| self.class_accuracy(c)).collect();
        if accs.is_empty() {
            0.0
        } else {
            accs.iter().sum::<f64>() / accs.len() as f64
        }
    }

    pub fn overall(&self) -> f64 {
        let t: usize = self.total.iter().sum();
        if t == 0 {
            0.0
        } else {
            self.correct.iter().sum::<usize>() as f64 / t as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub train: ClassTally,
    pub test: ClassTally,
    pub final_loss: f64,
}

impl TrainReport {
    /// Per-digit train/test accuracy table.
    pub fn table(&self) -> String {
        let pct = |v: Option<f64>| v.map_or("-".to_string(), |a| format!("{:.2}%", 100.0 * a));
        let mut s = format!("{:<14}{:>22}{:>20}\n", "Nonzero Digit", "Accuracy in Training", "Accuracy in Test");
        for c in DigitClass::ALL {
            let _ = writeln!(
                s,
                "{:<14}{:>22}{:>20}",
                c.value(),
                pct(self.train.class_accuracy(c)),
                pct(self.test.class_accuracy(c))
            );
        }
        let _ = writeln!(
            s,
            "{:<14}{:>22}{:>20}",
            "Average",
            pct(Some(self.train.mean_class_accuracy())),
            pct(Some(self.test.mean_class_accuracy()))
        );
        s
    }
}

/// Seeded 70/30 split, standardization and full-batch gradient descent.
pub fn train_mlp(
    samples: &[(FeatureVector, DigitClass)],
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainReport), ClassifierError> {
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(ClassifierError::InvalidConfig(format!("train fraction {}", cfg.train_fraction)));
    }
    if cfg.epochs == 0 {
        return Err(ClassifierError::InvalidConfig("epochs must be at least 1".into()));
    }
    if !(cfg.learning_rate.is_finite() && cfg.learning_rate > 0.0) {
        return Err(ClassifierError::InvalidConfig(format!("learning rate {}", cfg.learning_rate)));
    }
    for c in DigitClass::ALL {
        let got = samples.iter().filter(|(_, k)| *k == c).count();
        if got < MIN_SAMPLES_PER_CLASS {
            return Err(ClassifierError::InsufficientData { class: c, got });
        }
    }
    if samples.iter().any(|(f, _)| !f.is_finite()) {
        return Err(ClassifierError::NonFiniteInput);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.shuffle(&mut rng);
    let n_train = ((samples.len() as f64 * cfg.train_fraction).round() as usize).clamp(1, samples.len() - 1);
    let (train_idx, test_idx) = order.split_at(n_train);

    let mut mean = [0.0; INPUTS];
    let mut std = [0.0; INPUTS];
    for i in 0..INPUTS {
        let vals: Vec<f64> = train_idx.iter().map(|&s| samples[s].0.to_array()[i]).collect();
        let m = vals.iter().sum::<f64>() / vals.len() as f64;
        let v = vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / vals.len() as f64;
        if v <= 0.0 {
            return Err(ClassifierError::DegenerateFeatures(i));
        }
        mean[i] = m;
        std[i] = v.sqrt();
    }
    let mut model = MlpModel { mean, std, params: Params::random(&mut rng) };

    let data: Vec<([f64; INPUTS], usize)> =
        train_idx.iter().map(|&s| (model.standardize(&samples[s].0), samples[s].1.index())).collect();

    let mut flat = model.params.to_flat();
    let mut final_loss = f64::NAN;
    for _ in 0..cfg.epochs {
        let (loss, grad) = Params::from_flat(&flat).loss_and_gradient(&data);
        final_loss = loss;
        for (p, g) in flat.iter_mut().zip(grad.to_flat()) {
            *p -= cfg.learning_rate * g;
        }
    }
    model.params = Params::from_flat(&flat);

    let tally = |idx: &[usize]| {
        let mut t = ClassTally::default();
        for &s in idx {
            let (pred, _) = model.predict(&samples[s].0).expect("finite features");
            t.record(samples[s].1, pred);
        }
        t
    };
    let report = TrainReport { train: tally(train_idx), test: tally(test_idx), final_loss };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_model(params: Params) -> MlpModel {
        MlpModel { mean: [0.0; INPUTS], std: [1.0; INPUTS], params }
    }

    #[test]
    fn hand_set_forward_pass() {
        let mut p = Params::zeros();
        p.output_b = [1.0, 0.0, 0.0];
        let model = unit_model(p);
        let (class, scores) = model.predict(&FeatureVector::new([0.3, 2.0, 1.1, 0.9])).unwrap();
        assert_eq!(class, DigitClass::One);
        // Hidden units all sit at logistic(0) = 0.5 but carry zero weight,
        // so the logits are exactly the biases (1, 0, 0).
        let e = std::f64::consts::E;
        let denom = e + 2.0;
        assert!((scores[0] - e / denom).abs() < 1e-15);
        assert!((scores[1] - 1.0 / denom).abs() < 1e-15);
        assert!((scores[2] - 1.0 / denom).abs() < 1e-15);
        assert_eq!(logistic(0.0), 0.5);
    }

    #[test]
    fn non_finite_input_rejected() {
        let model = unit_model(Params::zeros());
        let err = model.predict(&FeatureVector::new([f64::NAN, 1.0, 1.0, 1.0])).unwrap_err();
        assert!(matches!(err, ClassifierError::NonFiniteInput));
    }

    #[test]
    fn too_few_samples() {
        let s: Vec<_> = (0..5).map(|i| (FeatureVector::new([i as f64, 1.0, 1.0, 1.0]), DigitClass::One)).collect();
        let err = train_mlp(&s, &TrainConfig::default()).unwrap_err();
        assert!(matches!(err, ClassifierError::InsufficientData { .. }));
    }

    #[test]
    fn constant_feature_is_degenerate() {
        let s: Vec<_> = (0..60)
            .map(|i| (FeatureVector::new([i as f64, 1.0, (i % 7) as f64, (i % 5) as f64]), DigitClass::ALL[i % 3]))
            .collect();
        let err = train_mlp(&s, &TrainConfig { epochs: 1, ..Default::default() }).unwrap_err();
        assert!(matches!(err, ClassifierError::DegenerateFeatures(1)));
    }

    #[test]
    fn text_roundtrip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = MlpModel {
            mean: [0.1, 1.0 / 3.0, 2.5, -7.0e-12],
            std: [1.0, 0.2, std::f64::consts::PI, 1e300],
            params: Params::random(&mut rng),
        };
        assert_eq!(MlpModel::from_text(&model.to_text()).unwrap(), model);
    }

    #[test]
    fn version_and_truncation() {
        let model = unit_model(Params::zeros());
        let text = model.to_text();
        let wrong = text.replacen("RIALMLP v1", "RIALMLP v2", 1);
        assert!(matches!(MlpModel::from_text(&wrong), Err(ClassifierError::VersionMismatch(v)) if v == "v2"));
        let cut = &text[..text.len() / 2];
        assert!(matches!(MlpModel::from_text(cut), Err(ClassifierError::CorruptModel(_))));
        let no_end = text.trim_end().trim_end_matches("end");
        assert!(matches!(MlpModel::from_text(no_end), Err(ClassifierError::CorruptModel(_))));
    }

    #[test]
    fn flat_layout_roundtrip() {
        let v: Vec<f64> = (0..PARAM_COUNT).map(|i| i as f64).collect();
        let p = Params::from_flat(&v);
        assert_eq!(p.hidden_w[0], [0.0, 1.0, 2.0, 3.0]);
        assert_eq!(p.hidden_b[0], 4.0);
        assert_eq!(p.output_b[2], (PARAM_COUNT - 1) as f64);
        assert_eq!(p.to_flat(), v);
        assert_eq!(PARAM_COUNT, 163);
    }
}
