use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use linescan::ala::run_ala;
use linescan::bench::{bench, BenchMethod, BenchResult};
use linescan::config::Settings;
use linescan::detect::{GlyphDetector, PlateDetector};
use linescan::eval::evaluate;
use linescan::ocr::{GlyphReader, PlateReader, PreferDetectorText};
use linescan::pipeline::{recognize_events, Recognizer};
use linescan::plugin::{PluginDetector, PLUGIN_ENV};
use linescan::records::{load_jsonl, save_jsonl, PlateReading};
use linescan::source::{open_stream, write_raw, FrameSource, InputFormat, Y4mWriter};
use linescan::synth::{
    generate_synthetic, random_traffic, GroundTruthRecord, Scenario, TrafficParams,
};
use linescan::vr::run_vr;
use linescan::{ExtractionEvent, Method};

#[derive(Parser)]
#[command(
    name = "linescan",
    version,
    about = "One frame per vehicle from a single scan row"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic traffic video and its ground truth.
    Synth(SynthArgs),
    /// Extract vehicle frames with one of the two methods.
    Run {
        #[arg(value_enum)]
        method: MethodArg,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Shorthand for `run ala`.
    Ala(RunArgs),
    /// Shorthand for `run vr`.
    Vr(RunArgs),
    /// Score events (and readings) against ground truth.
    Eval(EvalArgs),
    /// Measure frames per second of each method on one stream.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ala,
    Vr,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Raw,
    Y4m,
    Images,
}

impl From<FormatArg> for InputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Raw => InputFormat::RawPlanar,
            FormatArg::Y4m => InputFormat::Y4m,
            FormatArg::Images => InputFormat::ImageSequence,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum DetectorArg {
    None,
    Glyph,
    Plugin,
}

#[derive(Clone, Copy, ValueEnum)]
enum OcrArg {
    /// Plugin text when the detector supplies it, glyph templates otherwise.
    Auto,
    Glyph,
    Plugin,
}

/// Overrides for the settings file; unset flags keep the file's values.
#[derive(Args, Default)]
struct SettingArgs {
    /// `key = value` settings file, applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scan row (default 1000).
    #[arg(long)]
    lambda: Option<usize>,
    /// Narrowest vehicle, in pixels (default 100).
    #[arg(long)]
    gamma: Option<usize>,
    /// Background subtractor: mog2 or diff (default mog2).
    #[arg(long)]
    bgsub: Option<String>,
    /// Frames remembered by the subtractor (default 1).
    #[arg(long)]
    history: Option<u32>,
    /// Rows per VR image (default 900).
    #[arg(long)]
    segment: Option<usize>,
    /// Rows shared by consecutive VR images (default 150).
    #[arg(long)]
    overlap: Option<usize>,
    /// Extra `key=value` settings, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl SettingArgs {
    fn resolve(&self) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(p) = &self.config {
            s.apply_file(p)
                .with_context(|| format!("config {}", p.display()))?;
        }
        let flags = [
            ("lambda", self.lambda.map(|v| v.to_string())),
            ("gamma", self.gamma.map(|v| v.to_string())),
            ("bgsub.kind", self.bgsub.clone()),
            ("bgsub.history", self.history.map(|v| v.to_string())),
            ("vr.segment", self.segment.map(|v| v.to_string())),
            ("vr.overlap", self.overlap.map(|v| v.to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                s.set(k, &v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got `{kv}`"))?;
            s.set(k, v)?;
        }
        Ok(s)
    }
}

#[derive(Args)]
struct RunArgs {
    /// Video file (raw planar or y4m) or directory of numbered images.
    #[arg(long)]
    input: PathBuf,
    /// Input format; guessed from the path when omitted.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[command(flatten)]
    settings: SettingArgs,
    /// Extraction events, one JSON record per line.
    #[arg(long)]
    events: PathBuf,
    /// Plate readings; requires a detector.
    #[arg(long)]
    readings: Option<PathBuf>,
    /// Plate detector backend.
    #[arg(long, value_enum, default_value = "none")]
    detector: DetectorArg,
    /// Plugin executable; defaults to $LINESCAN_PLUGIN.
    #[arg(long)]
    plugin: Option<String>,
    /// Argument passed to the plugin, repeatable.
    #[arg(long = "plugin-arg")]
    plugin_args: Vec<String>,
    /// Milliseconds to wait for one plugin reply.
    #[arg(long, default_value_t = 10_000)]
    plugin_timeout: u64,
    /// Plate reader.
    #[arg(long, value_enum, default_value = "auto")]
    ocr: OcrArg,
    /// Directory to save VR images into (vr method only).
    #[arg(long)]
    vr_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Scenario JSON; when omitted a random scenario is drawn.
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output video; `.y4m` writes y4m, anything else raw planar.
    #[arg(long)]
    video: PathBuf,
    /// Ground-truth records.
    #[arg(long)]
    truth: PathBuf,
    /// Also save the scenario actually rendered.
    #[arg(long)]
    save_scenario: Option<PathBuf>,
    /// Random scenario: number of vehicles.
    #[arg(long, default_value_t = 5)]
    vehicles: usize,
    /// Random scenario: number of sub-gamma noise objects.
    #[arg(long, default_value_t = 0)]
    noise_objects: usize,
    /// Random scenario: frame width.
    #[arg(long, default_value_t = 640)]
    width: usize,
    /// Random scenario: frame height.
    #[arg(long, default_value_t = 480)]
    height: usize,
    /// Random scenario: scan row.
    #[arg(long, default_value_t = 300)]
    lambda: usize,
    /// Random scenario: pad or cut the video to this many frames.
    #[arg(long)]
    frames: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    events: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    readings: Option<PathBuf>,
    /// Frame tolerance (default 12).
    #[arg(long)]
    delta: Option<u64>,
    /// Minimum x-interval IoU (default 0.5).
    #[arg(long)]
    iou: Option<f64>,
    /// Settings file; only the `eval.*` keys matter here.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Structured report output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Row label in the table.
    #[arg(long, default_value = "input")]
    label: String,
}

#[derive(Args)]
struct BenchArgs {
    /// Video to benchmark on; a synthetic stream is used when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Synthetic stream size, `WIDTHxHEIGHT`.
    #[arg(long, default_value = "1920x1080")]
    size: String,
    /// Synthetic stream length.
    #[arg(long, default_value_t = 1000)]
    frames: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated methods.
    #[arg(long, default_value = "ala,vr,fullframe")]
    methods: String,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    #[command(flatten)]
    settings: SettingArgs,
    /// Structured results output.
    #[arg(long)]
    report: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Run { method, args } => cmd_run(method, args),
        Command::Ala(args) => cmd_run(MethodArg::Ala, args),
        Command::Vr(args) => cmd_run(MethodArg::Vr, args),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let scenario: Scenario = match &a.scenario {
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("scenario {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("scenario {}", p.display()))?
        }
        None => {
            let params = TrafficParams {
                width: a.width,
                height: a.height,
                lambda: a.lambda,
                vehicles: a.vehicles,
                noise_objects: a.noise_objects,
                ..TrafficParams::default()
            };
            let mut s = random_traffic(&params, a.seed)?;
            if let Some(n) = a.frames {
                s.frames = n;
            }
            s
        }
    };
    let g = generate_synthetic(&scenario, a.seed)?;
    for ex in &g.excluded {
        eprintln!("vehicle {} excluded: {}", ex.id, ex.reason);
    }
    let (w, h) = g.video.dimensions();
    let is_y4m = a
        .video
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("y4m"));
    if is_y4m {
        let file = BufWriter::new(
            File::create(&a.video).with_context(|| format!("{}", a.video.display()))?,
        );
        let mut out = Y4mWriter::new(file, w, h, scenario.fps.round().max(1.0) as u32)?;
        for f in g.video.frames() {
            out.write_frame(&f?)?;
        }
        out.finish()?;
    } else {
        write_raw(&a.video, w, h, g.video.frame_count(), g.video.frames())
            .with_context(|| format!("{}", a.video.display()))?;
    }
    save_jsonl(&a.truth, &g.truth)?;
    if let Some(p) = &a.save_scenario {
        fs::write(p, serde_json::to_string_pretty(&scenario)?)?;
    }
    eprintln!(
        "{} frames, {} vehicles in ground truth",
        g.video.frame_count(),
        g.truth.len()
    );
    Ok(())
}

fn open(input: &Path, format: Option<FormatArg>) -> Result<Box<dyn FrameSource + Send>> {
    let fmt = format
        .map(InputFormat::from)
        .unwrap_or_else(|| InputFormat::infer(input));
    open_stream(input, fmt).with_context(|| format!("input {}", input.display()))
}

fn build_detector(a: &RunArgs) -> Result<Option<Box<dyn PlateDetector>>> {
    Ok(match a.detector {
        DetectorArg::None => None,
        DetectorArg::Glyph => Some(Box::new(GlyphDetector::default())),
        DetectorArg::Plugin => {
            let program = match &a.plugin {
                Some(p) => p.clone(),
                None => std::env::var(PLUGIN_ENV)
                    .map_err(|_| anyhow!("--detector plugin needs --plugin or ${PLUGIN_ENV}"))?,
            };
            Some(Box::new(PluginDetector::spawn(
                &program,
                &a.plugin_args,
                Duration::from_millis(a.plugin_timeout),
            )?))
        }
    })
}

fn cmd_run(method: MethodArg, a: RunArgs) -> Result<()> {
    let settings = a.settings.resolve()?;
    if a.readings.is_some() && a.detector == DetectorArg::None {
        bail!("--readings needs a --detector");
    }
    let source = open(&a.input, a.format)?;
    let (_, height) = source.dimensions();
    settings.validate(height)?;
    let detector = build_detector(&a)?;
    let reader: Box<dyn PlateReader> = match a.ocr {
        OcrArg::Auto => Box::new(PreferDetectorText),
        OcrArg::Glyph => Box::new(GlyphReader),
        OcrArg::Plugin => Box::new(linescan::ocr::DetectorText),
    };
    let recognizer = detector.as_deref().map(|d| Recognizer {
        detector: d,
        reader: reader.as_ref(),
        lambda: settings.lambda,
    });
    if let Some(dir) = &a.vr_dir {
        fs::create_dir_all(dir)?;
    }

    let (events, readings): (Vec<ExtractionEvent>, Option<Vec<PlateReading>>) = match method {
        MethodArg::Ala => {
            let mut readings = Vec::new();
            let events = run_ala(source, &settings.ala(), |e, frame| {
                if let Some(r) = &recognizer {
                    readings.push(r.recognize(frame, e));
                }
                Ok(())
            })?;
            (events, recognizer.as_ref().map(|_| readings))
        }
        MethodArg::Vr => {
            let events = run_vr(source, &settings.vr(), |img| match &a.vr_dir {
                Some(dir) => img.save(&dir.join(format!("vr_{:08}.png", img.segment_start))),
                None => Ok(()),
            })?;
            let readings = match &recognizer {
                Some(r) => Some(recognize_events(open(&a.input, a.format)?, &events, r)?),
                None => None,
            };
            (events, readings)
        }
    };
    save_jsonl(&a.events, &events).with_context(|| format!("{}", a.events.display()))?;
    if let (Some(path), Some(r)) = (&a.readings, &readings) {
        save_jsonl(path, r).with_context(|| format!("{}", path.display()))?;
    }
    let method = match method {
        MethodArg::Ala => Method::Ala,
        MethodArg::Vr => Method::Vr,
    };
    eprintln!("{method}: {} events", events.len());
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let mut s = Settings::default();
    if let Some(p) = &a.config {
        s.apply_file(p)
            .with_context(|| format!("config {}", p.display()))?;
    }
    if let Some(d) = a.delta {
        s.matching.frame_tolerance = d;
    }
    if let Some(i) = a.iou {
        if !(0.0..=1.0).contains(&i) {
            bail!("--iou must lie in [0,1]");
        }
        s.matching.min_iou = i;
    }
    let events: Vec<ExtractionEvent> =
        load_jsonl(&a.events).with_context(|| format!("events {}", a.events.display()))?;
    let truth: Vec<GroundTruthRecord> =
        load_jsonl(&a.truth).with_context(|| format!("truth {}", a.truth.display()))?;
    let readings: Option<Vec<PlateReading>> = match &a.readings {
        Some(p) => Some(load_jsonl(p).with_context(|| format!("readings {}", p.display()))?),
        None => None,
    };
    let report = evaluate(&events, readings.as_deref(), &truth, &s.matching);
    if let Some(p) = &a.report {
        fs::write(p, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    print!("{}", report.to_table(&a.label));
    Ok(())
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (w, h) = s
        .split_once('x')
        .ok_or_else(|| anyhow!("size `{s}` is not WIDTHxHEIGHT"))?;
    Ok((w.parse()?, h.parse()?))
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let mut settings = a.settings.resolve()?;
    let methods = a
        .methods
        .split(',')
        .map(|m| m.trim().parse::<BenchMethod>())
        .collect::<linescan::Result<Vec<_>>>()?;
    let mut results: Vec<BenchResult> = Vec::new();
    match &a.input {
        Some(path) => {
            let probe = open(path, a.format)?;
            settings.validate(probe.dimensions().1)?;
            drop(probe);
            for &m in &methods {
                results.push(bench(
                    m,
                    || open(path, a.format).map_err(to_core),
                    &settings,
                    a.reps,
                )?);
            }
        }
        None => {
            let (width, height) = parse_size(&a.size)?;
            if a.settings.lambda.is_none() && settings.lambda >= height {
                settings.lambda = height * 5 / 6;
            }
            settings.validate(height)?;
            let params = TrafficParams {
                width,
                height,
                lambda: settings.lambda,
                vehicles: 12,
                min_width: (width / 10).max(150),
                max_width: (width / 4).max(260).min(width),
                ..TrafficParams::default()
            };
            let mut scenario = random_traffic(&params, a.seed)?;
            scenario.frames = a.frames;
            let g = generate_synthetic(&scenario, a.seed)?;
            for &m in &methods {
                results.push(bench(m, || Ok(g.video.frames()), &settings, a.reps)?);
            }
        }
    }
    let base = results
        .iter()
        .find(|r| r.method == BenchMethod::FullFrame)
        .map(|r| r.fps);
    println!(
        "| {:<10} | {:>7} | {:>12} | {:>9} |",
        "Method", "Frames", "FPS", "Speedup"
    );
    for r in &results {
        let speedup = base.map_or("-".to_string(), |b| format!("{:.1}x", r.fps / b));
        println!(
            "| {:<10} | {:>7} | {:>12.1} | {:>9} |",
            r.method.to_string(),
            r.frames,
            r.fps,
            speedup
        );
    }
    if let Some(p) = &a.report {
        fs::write(p, serde_json::to_string_pretty(&results)? + "\n")?;
    }
    Ok(())
}

fn to_core(e: anyhow::Error) -> linescan::Error {
    match e.downcast::<linescan::Error>() {
        Ok(e) => e,
        Err(e) => linescan::Error::InvalidParameter(format!("{e:#}")),
    }
}
