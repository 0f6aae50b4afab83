use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use rialscan_core::eval::{evaluate_manifest, manifest_features, manifest_text};
use rialscan_core::pipeline::{parse_se_size, run_pipeline, STAGE_NAMES};
use rialscan_core::{
    load_image, load_model, parse_manifest, recognize, render_batch, save_model, save_pgm, save_ppm, spec_batch,
    train_mlp, Background, Connectivity, Error, ManifestEntry, PipelineConfig, Recognition, SpecGrid, TrainConfig,
};

#[derive(Parser)]
#[command(name = "rialscan", version, about = "Read the value of a banknote photo")]
struct Cli {
    /// Seed for every random choice (synthesis, data split, weight init)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// key=value pipeline settings; flags below override it
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(flatten)]
    pipeline: PipelineFlags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PipelineFlags {
    #[arg(long, global = true)]
    threshold_window: Option<usize>,
    #[arg(long, global = true)]
    threshold_bias: Option<f64>,
    #[arg(long, global = true)]
    wiener_window: Option<usize>,
    /// Fixed closing element, e.g. 9x5 (odd sides)
    #[arg(long, global = true, value_name = "WxH", value_parser = se_size)]
    closing_se: Option<(usize, usize)>,
    /// 4 or 8
    #[arg(long, global = true, value_parser = connectivity)]
    connectivity: Option<Connectivity>,
    /// Max pixel distance from a centroid line for a component to be on it
    #[arg(long, global = true)]
    line_tolerance: Option<f64>,
    #[arg(long, global = true, value_name = "PATH")]
    model: Option<PathBuf>,
}

fn se_size(s: &str) -> Result<(usize, usize), String> {
    parse_se_size(s).ok_or_else(|| format!("expected WxH with odd sides, got {s:?}"))
}

fn connectivity(s: &str) -> Result<Connectivity, String> {
    s.parse().ok().and_then(Connectivity::from_number).ok_or_else(|| format!("expected 4 or 8, got {s:?}"))
}

#[derive(Subcommand)]
enum Command {
    /// Print the value of one note image
    Recognize { image: PathBuf },
    /// Fit the digit classifier on the images of a manifest
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[arg(long, default_value_t = 2000)]
        epochs: usize,
        #[arg(long, default_value_t = 0.5)]
        learning_rate: f64,
        #[arg(long, default_value_t = 0.70)]
        train_fraction: f64,
    },
    /// Score the pipeline on a manifest and print the accuracy tables
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        /// Also write the tables as comma-separated rows
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Render labelled note images and their manifest
    Synth(SynthArgs),
    /// Write every intermediate image of one run as NN-name.pgm
    DebugStages {
        image: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 70)]
    count: usize,
    #[arg(long, short, default_value = "synth")]
    out: PathBuf,
    #[arg(long, default_value_t = 30.0)]
    max_rotation: f64,
    #[arg(long, default_value_t = 0.5)]
    min_scale: f64,
    #[arg(long, default_value_t = 1.5)]
    max_scale: f64,
    #[arg(long, default_value_t = 0.3)]
    max_noise: f64,
    /// Comma-separated: plain, textured, cluttered
    #[arg(long, default_value = "plain,textured")]
    backgrounds: String,
}

/// Exit 1: bad input or configuration. Exit 2: the pipeline could not read the note.
enum Failure {
    Usage(String),
    Recognition(Error),
}

impl Failure {
    fn config(e: Error) -> Self {
        Failure::Usage(format!("{}: {e}", e.qualified_name()))
    }
}

fn pipeline_config(cli: &Cli) -> Result<PipelineConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Usage(format!("config.UnreadableFile: {}: {e}", path.display())))?;
            PipelineConfig::from_text(&text).map_err(Failure::config)?
        }
        None => PipelineConfig::default(),
    };
    let f = &cli.pipeline;
    if let Some(v) = f.threshold_window {
        cfg.threshold.window = v;
    }
    if let Some(v) = f.threshold_bias {
        cfg.threshold.bias = v;
    }
    if let Some(v) = f.wiener_window {
        cfg.wiener_window = v;
    }
    if f.closing_se.is_some() {
        cfg.closing_se = f.closing_se;
    }
    if let Some(v) = f.connectivity {
        cfg.connectivity = v;
    }
    if let Some(v) = f.line_tolerance {
        cfg.line_tolerance = v;
    }
    if let Some(v) = &f.model {
        cfg.model_path = v.clone();
    }
    cfg.validate().map_err(Failure::config)?;
    Ok(cfg)
}

fn read_manifest(path: &Path) -> Result<(Vec<ManifestEntry>, PathBuf), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("synth-eval.UnreadableFile: {}: {e}", path.display())))?;
    let entries = parse_manifest(&text).map_err(|e| Failure::Usage(e.to_string()))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok((entries, dir))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = pipeline_config(&cli)?;
    match cli.command {
        Command::Recognize { ref image } => {
            let model = load_model(&cfg.model_path).map_err(|e| Failure::config(e.into()))?;
            let img = load_image(image).map_err(|e| Failure::config(e.into()))?;
            let rec = recognize(&img, &cfg, &model).map_err(Failure::Recognition)?;
            print_recognition(&rec);
        }
        Command::Train { ref manifest, ref output, epochs, learning_rate, train_fraction } => {
            let (entries, dir) = read_manifest(manifest)?;
            let (samples, skipped) = manifest_features(&entries, &dir, &cfg).map_err(Failure::config)?;
            if skipped > 0 {
                eprintln!("skipped {skipped} of {} images the pipeline could not crop", entries.len());
            }
            let tc = TrainConfig { learning_rate, epochs, seed: cli.seed.unwrap_or(7), train_fraction };
            let (model, report) = train_mlp(&samples, &tc).map_err(|e| Failure::config(e.into()))?;
            save_model(&model, output).map_err(|e| Failure::config(e.into()))?;
            print!("{}", report.table());
        }
        Command::Evaluate { ref manifest, ref csv } => {
            let (entries, dir) = read_manifest(manifest)?;
            let model = load_model(&cfg.model_path).map_err(|e| Failure::config(e.into()))?;
            let report = evaluate_manifest(&entries, &dir, &model, &cfg).map_err(Failure::config)?;
            print!("{}", report.tables());
            if let Some(path) = csv {
                fs::write(path, report.to_csv())
                    .map_err(|e| Failure::Usage(format!("synth-eval.WriteFailed: {}: {e}", path.display())))?;
            }
        }
        Command::Synth(ref args) => synth(args, cli.seed.unwrap_or(1))?,
        Command::DebugStages { ref image, ref out } => {
            let img = load_image(image).map_err(|e| Failure::config(e.into()))?;
            let model = load_model(&cfg.model_path).ok();
            let (trace, result) = run_pipeline(&img, &cfg, model.as_ref());
            fs::create_dir_all(out).map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
            for (name, stage) in trace.stage_images() {
                let n = STAGE_NAMES.iter().position(|s| *s == name).expect("known stage") + 1;
                let path = out.join(format!("{n:02}-{name}.pgm"));
                save_pgm(&stage, &path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                println!("{}", path.display());
            }
            match result.map_err(Failure::Recognition)? {
                Some(rec) => print_recognition(&rec),
                None => {
                    if let Some(f) = trace.features {
                        println!("features={:?}", f.to_array());
                    }
                }
            }
        }
    }
    Ok(())
}

fn print_recognition(rec: &Recognition) {
    // adding 0.0 turns -0.0 into 0.0
    let angle = (rec.angle * 10.0).round() / 10.0 + 0.0;
    println!("value={} digit={} zeros={} angle={angle:.1}", rec.denomination.value(), rec.digit, rec.zeros);
}

fn synth(args: &SynthArgs, seed: u64) -> Result<(), Failure> {
    let backgrounds = args
        .backgrounds
        .split(',')
        .map(|b| Background::parse(b.trim()).ok_or_else(|| Failure::Usage(format!("unknown background {b:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let grid = SpecGrid {
        max_rotation: args.max_rotation,
        min_scale: args.min_scale,
        max_scale: args.max_scale,
        max_noise: args.max_noise,
        backgrounds,
        ..SpecGrid::default()
    };
    if !(0.3..=2.0).contains(&grid.min_scale) || !(grid.min_scale..=2.0).contains(&grid.max_scale) {
        return Err(Failure::Usage("scales must satisfy 0.3 <= min <= max <= 2".into()));
    }
    if !(0.0..=45.0).contains(&grid.max_rotation) || !(0.0..=1.0).contains(&grid.max_noise) {
        return Err(Failure::Usage("rotation must be in 0..=45 and noise in 0..=1".into()));
    }
    let specs = spec_batch(args.count, seed, &grid);
    fs::create_dir_all(&args.out).map_err(|e| Failure::Usage(format!("{}: {e}", args.out.display())))?;
    let mut entries = Vec::with_capacity(specs.len());
    for (i, ((img, truth), spec)) in render_batch(&specs).iter().zip(&specs).enumerate() {
        let name = format!("note-{i:04}.ppm");
        let path = args.out.join(&name);
        save_ppm(img, &path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        entries.push(ManifestEntry::from_spec(PathBuf::from(name), spec, truth));
    }
    let manifest = args.out.join("manifest.csv");
    fs::write(&manifest, manifest_text(&entries))
        .map_err(|e| Failure::Usage(format!("{}: {e}", manifest.display())))?;
    println!("wrote {} images and {}", entries.len(), manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return ExitCode::SUCCESS;
            }
            if !e.to_string().contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Recognition(e)) => {
            eprintln!("error: {}: {e}", e.qualified_name());
            ExitCode::from(2)
        }
    }
}
