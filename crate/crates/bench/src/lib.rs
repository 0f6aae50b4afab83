//! Inputs shared by the benchmarks.

use rialscan_core::{
    adaptive_threshold, generate_sample, to_gray, wiener_denoise, BinaryImage, ColorImage, Denomination, GrayImage,
    MlpModel, PipelineConfig, SynthSpec, TrainConfig,
};

/// A rotated, mildly noisy synthetic note.
pub fn note(value: u64, seed: u64) -> ColorImage {
    let spec = SynthSpec {
        rotation: 12.0,
        noise: 0.2,
        ..SynthSpec::new(Denomination::from_value(value).expect("known note"), seed)
    };
    generate_sample(&spec).0
}

pub fn gray_note() -> GrayImage {
    to_gray(&note(20000, 3))
}

/// The note after denoising and thresholding with the default settings.
pub fn binary_note() -> BinaryImage {
    let cfg = PipelineConfig::default();
    let denoised = wiener_denoise(&gray_note(), cfg.wiener_window).expect("window fits");
    adaptive_threshold(&denoised, &cfg.threshold).expect("window fits")
}

/// A small model trained on the separated feature clusters.
pub fn model() -> MlpModel {
    let samples = rialscan_core::synth::feature_clusters(90, 7);
    let cfg = TrainConfig { epochs: 200, ..TrainConfig::default() };
    rialscan_core::train_mlp(&samples, &cfg).expect("clusters cover all digits").0
}
