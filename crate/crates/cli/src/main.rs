use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use saliex::evaluation::{evaluate_dataset, ingest_ground_truth, write_ground_truth_csv};
use saliex::imgcore::io::{
    decode_mask, encode_map_png, encode_mask_png, encode_rgb_png, load_image, write_bytes,
};
use saliex::imgcore::{BinaryMask, RasterImage};
use saliex::manipulate::{desaturate_background, wiggle_gif, WiggleParams};
use saliex::saliency::{build_stack, MapKind};
use saliex::segmentation::segment_pipeline;
use saliex::RunConfig;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "saliex",
    version,
    about = "Salient object detection by saliency-map fusion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute saliency maps and write one PNG per map plus a manifest.
    Saliency(SaliencyArgs),
    /// Segment the salient object into a binary mask.
    Segment(SegmentArgs),
    /// Turn everything but the salient object gray.
    Desaturate(DesaturateArgs),
    /// Render a parallax wiggle of the salient object as an animated GIF.
    Gif(GifArgs),
    /// Score segmentations against ground-truth boxes.
    Evaluate(EvaluateArgs),
    /// Convert a directory of VOC XML annotations into the CSV format.
    Ingest(IngestArgs),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for the color-mixture initialization.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated maps to use, e.g. `contrast,spatial`.
    #[arg(long, value_name = "LIST")]
    maps: Option<String>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(list) = &self.maps {
            cfg.maps = MapKind::parse_list(list)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SaliencyArgs {
    #[arg(long = "in", value_name = "IMAGE")]
    input: PathBuf,
    /// Directory for the map PNGs and `manifest.json`; defaults to the
    /// configured output directory.
    #[arg(long, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SegmentArgs {
    #[arg(long = "in", value_name = "IMAGE")]
    input: PathBuf,
    /// Mask PNG; defaults to `<output_dir>/<stem>_mask.png`.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Write the refinement report as JSON.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct DesaturateArgs {
    #[arg(long = "in", value_name = "IMAGE")]
    input: PathBuf,
    /// Output PNG; defaults to `<output_dir>/<stem>_desaturated.png`.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Use this mask PNG instead of segmenting.
    #[arg(long, value_name = "FILE")]
    mask: Option<PathBuf>,
    /// Box-blur radius of the mask edge.
    #[arg(long, value_name = "PX")]
    feather: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct GifArgs {
    #[arg(long = "in", value_name = "IMAGE")]
    input: PathBuf,
    /// Output GIF; defaults to `<output_dir>/<stem>_wiggle.gif`.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Use this mask PNG instead of segmenting.
    #[arg(long, value_name = "FILE")]
    mask: Option<PathBuf>,
    /// Peak horizontal displacement in pixels.
    #[arg(long, value_name = "PX")]
    shift: Option<usize>,
    /// Number of frames.
    #[arg(long)]
    frames: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Ground truth: a CSV file or a directory of VOC XML annotations.
    #[arg(long, value_name = "PATH")]
    gt: PathBuf,
    /// JSON report; a CSV with the same stem is written next to it.
    /// Defaults to `<output_dir>/report.json`.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Parallel per-image workers.
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct IngestArgs {
    /// Directory of VOC XML annotation files.
    #[arg(long = "in", value_name = "DIR")]
    input: PathBuf,
    /// CSV destination; defaults to the output stream.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "image".into(), |s| s.to_string_lossy().into_owned())
}

fn default_out(cfg: &RunConfig, input: &Path, suffix: &str) -> PathBuf {
    cfg.output_dir.join(format!("{}_{suffix}", stem(input)))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    write_bytes(path, bytes)?;
    println!("{}", path.display());
    Ok(())
}

fn load_input(path: &Path) -> Result<RasterImage> {
    load_image(path).with_context(|| format!("cannot read image {}", path.display()))
}

/// Reads `mask` when given, otherwise segments the image.
fn obtain_mask(img: &RasterImage, mask: Option<&Path>, cfg: &RunConfig) -> Result<BinaryMask> {
    match mask {
        Some(path) => {
            let bytes = std::fs::read(path)
                .with_context(|| format!("cannot read mask {}", path.display()))?;
            let mask = decode_mask(&bytes)?;
            ensure!(
                mask.dims() == img.dims(),
                "mask {} is {}x{}, image is {}x{}",
                path.display(),
                mask.width(),
                mask.height(),
                img.width(),
                img.height()
            );
            Ok(mask)
        }
        None => Ok(segment_pipeline(img, cfg)?.mask),
    }
}

fn saliency(args: &SaliencyArgs) -> Result<()> {
    let cfg = args.common.load()?;
    let img = load_input(&args.input)?;
    let dir = args
        .out_dir
        .clone()
        .unwrap_or_else(|| cfg.output_dir.clone());
    let stack = build_stack(&img, &cfg.stack_config())?;
    let mut maps = Vec::new();
    for layer in stack.layers() {
        let file = format!("{}.png", layer.kind);
        write(&dir.join(&file), &encode_map_png(&layer.map)?)?;
        let v = layer.map.values();
        maps.push(json!({
            "name": layer.kind,
            "file": file,
            "weight": layer.weight,
            "min": v.iter().copied().fold(f64::INFINITY, f64::min),
            "max": v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            "mean": v.iter().sum::<f64>() / v.len() as f64,
        }));
    }
    let manifest = json!({
        "image": args.input.display().to_string(),
        "width": img.width(),
        "height": img.height(),
        "maps": maps,
        "config": cfg,
    });
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    write(&dir.join("manifest.json"), text.as_bytes())
}

fn segment(args: &SegmentArgs) -> Result<()> {
    let cfg = args.common.load()?;
    let img = load_input(&args.input)?;
    let seg = segment_pipeline(&img, &cfg)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| default_out(&cfg, &args.input, "mask.png"));
    write(&out, &encode_mask_png(&seg.mask)?)?;
    if let Some(path) = &args.report {
        let text = serde_json::to_string_pretty(&seg.report)? + "\n";
        write(path, text.as_bytes())?;
    }
    Ok(())
}

fn desaturate(args: &DesaturateArgs) -> Result<()> {
    let mut cfg = args.common.load()?;
    if let Some(f) = args.feather {
        cfg.feather = f;
    }
    let img = load_input(&args.input)?;
    let mask = obtain_mask(&img, args.mask.as_deref(), &cfg)?;
    let out_img = desaturate_background(&img, &mask, cfg.feather)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| default_out(&cfg, &args.input, "desaturated.png"));
    write(&out, &encode_rgb_png(&out_img)?)
}

fn gif(args: &GifArgs) -> Result<()> {
    let mut cfg = args.common.load()?;
    if let Some(s) = args.shift {
        cfg.wiggle_shift = s;
    }
    if let Some(f) = args.frames {
        cfg.wiggle_frames = f;
    }
    cfg.validate()?;
    let img = load_input(&args.input)?;
    let mask = obtain_mask(&img, args.mask.as_deref(), &cfg)?;
    let params = WiggleParams {
        frames: cfg.wiggle_frames,
        shift: cfg.wiggle_shift,
        delay: cfg.wiggle_delay,
    };
    let bytes = wiggle_gif(&img, &mask, &params)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| default_out(&cfg, &args.input, "wiggle.gif"));
    write(&out, &bytes)
}

fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let cfg = args.common.load()?;
    let records = ingest_ground_truth(&args.gt)
        .with_context(|| format!("cannot load ground truth {}", args.gt.display()))?;
    let report = evaluate_dataset(&records, &cfg, args.jobs)?;
    let path = args
        .report
        .clone()
        .unwrap_or_else(|| cfg.output_dir.join("report.json"));
    write(&path, report.to_json()?.as_bytes())?;
    write(&path.with_extension("csv"), report.to_csv().as_bytes())?;
    print!("{}", report.histogram_chart());
    Ok(())
}

fn ingest(args: &IngestArgs) -> Result<()> {
    let records = ingest_ground_truth(&args.input)?;
    let text = write_ground_truth_csv(&records)?;
    match &args.out {
        Some(path) => write(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Saliency(a) => saliency(a),
        Command::Segment(a) => segment(a),
        Command::Desaturate(a) => desaturate(a),
        Command::Gif(a) => gif(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Ingest(a) => ingest(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SALIEX_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            // Help and version go to stdout; usage errors to stderr.
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
