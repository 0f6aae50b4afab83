//! Reads the value of an Iranian banknote from a photo.
//!
//! The chain binarizes the photo, finds the row of zero glyphs, levels the
//! image by the row's angle, crops the digit beside the zeros and names it
//! with a 4-20-3 perceptron. [`synth`] renders labelled test notes and
//! [`eval`] scores a run.

pub mod classifier;
pub mod components;
pub mod digit;
pub mod error;
pub mod eval;
pub mod image;
pub mod localize;
pub mod morphology;
pub mod pipeline;
pub mod pnm;
pub mod preprocess;
pub mod synth;

pub use classifier::{
    load_model, predict, save_model, train_mlp, ClassifierError, DigitClass, MlpModel, TrainConfig, TrainReport,
};
pub use components::{label_components, BBox, Component, ComponentSet, Connectivity};
pub use digit::{extract_features, find_nonzero_digit, DigitCrop, DigitError, FeatureVector};
pub use error::{Error, Result};
pub use eval::{
    conditional_accuracy, evaluate, parse_manifest, value_of, Denomination, EvalError, EvalReport, ManifestEntry,
};
pub use image::{rotate, to_gray, BinaryImage, ColorImage, GrayImage, ImageError, Rotation};
pub use localize::{rotation_angle, LocalizeError, ZeroLine};
pub use morphology::{close, dilate, erode, StructuringElement};
pub use pipeline::{recognize, run_pipeline, PipelineConfig, Recognition, Trace};
pub use pnm::{load_image, save_pgm, save_ppm};
pub use preprocess::{adaptive_threshold, median3x3, wiener_denoise, ThresholdConfig};
pub use synth::{generate_sample, render_batch, spec_batch, Background, GroundTruth, SpecGrid, SynthSpec};
