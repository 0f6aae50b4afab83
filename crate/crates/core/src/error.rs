use thiserror::Error;

use crate::classifier::ClassifierError;
use crate::digit::DigitError;
use crate::eval::EvalError;
use crate::image::ImageError;
use crate::localize::LocalizeError;
use crate::morphology::MorphologyError;
use crate::preprocess::PreprocessError;

/// Any failure along the pipeline, tagged with the stage that raised it.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Image(#[from] ImageError),
    #[error(transparent)]
    Preprocess(#[from] PreprocessError),
    #[error(transparent)]
    Morphology(#[from] MorphologyError),
    #[error(transparent)]
    Localize(#[from] LocalizeError),
    #[error(transparent)]
    Digit(#[from] DigitError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
}

impl Error {
    pub fn module(&self) -> &'static str {
        match self {
            Error::Image(_) => "image-core",
            Error::Preprocess(_) => "preprocess",
            Error::Morphology(_) => "morphology",
            Error::Localize(_) => "zero-localizer",
            Error::Digit(_) => "digit-pipeline",
            Error::Classifier(_) => "classifier",
            Error::Eval(_) => "synth-eval",
            Error::Config { .. } => "config",
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Image(e) => e.kind(),
            Error::Preprocess(e) => e.kind(),
            Error::Morphology(e) => e.kind(),
            Error::Localize(e) => e.kind(),
            Error::Digit(e) => e.kind(),
            Error::Classifier(e) => e.kind(),
            Error::Eval(e) => e.kind(),
            Error::Config { .. } => "InvalidConfig",
        }
    }

    /// `module.Kind`, e.g. `zero-localizer.NoCandidates`.
    pub fn qualified_name(&self) -> String {
        format!("{}.{}", self.module(), self.kind())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
