//! The `debris` command line: `index`, `detect`, `evaluate`, `synth` and
//! `dump-bands`. Data goes to stdout, diagnostics to stderr.
//!
//! Exit codes: 0 success, 2 input/output failure, 3 bad configuration or
//! arguments, 4 internal error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::bands::{BandOrder, Sensor, WavelengthTable};
use crate::classify::{class_counts, Class, ThresholdConfig, ThresholdMode};
use crate::error::{Error, Result};
use crate::eval::{map_labels, per_index_report, LabelMapping, LabeledScene};
use crate::indices::{fdi, ndvi, wci, FdiParams, WaterReference};
use crate::io::{read_mask, read_stack, write_class_map, write_index, write_mask, write_stack, ReadOptions};
use crate::parallel::{threads_from_env, with_threads};
use crate::pipeline::{choose_water_reference, detect, harmonized, DetectOptions};
use crate::render::write_png;
use crate::spectral::{BandStack, IndexKind};
use crate::synth::{generate, SceneSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Exit code reported for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. }
        | Error::UnsupportedTiffFeature(_)
        | Error::CorruptFile(_)
        | Error::DtypeMismatch(_)
        | Error::BadMagic(_)
        | Error::TruncatedPayload { .. }
        | Error::NonIntegerMask(_)
        | Error::InvalidHeader(_)
        | Error::InvalidStack(_)
        | Error::InconsistentDims(_)
        | Error::GridMismatch(_) => EXIT_IO,
        Error::Json { .. }
        | Error::InvalidConfig(_)
        | Error::MissingBand(_)
        | Error::BadFactor(_)
        | Error::ZeroVarianceReference
        | Error::TooFewWaterPixels { .. }
        | Error::DegenerateHistogram
        | Error::UnmappedCode(_)
        | Error::NoEvaluatedPixels
        | Error::BadAlpha(_) => EXIT_CONFIG,
        Error::OutOfBounds { .. }
        | Error::InvalidPixel { .. }
        | Error::ZeroVariance
        | Error::LengthMismatch { .. }
        | Error::NotHarmonized => EXIT_INTERNAL,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "debris",
    version,
    about = "Floating debris detection from Sentinel-2 spectral indices"
)]
struct Cli {
    /// Worker threads; defaults to $DEBRIS_THREADS, then all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute one index raster and its summary statistics.
    Index(IndexCmd),
    /// Classify a stack and render an overlay.
    Detect(DetectCmd),
    /// Score NDVI, FDI, WCI and combined detectors against a labeled mask.
    Evaluate(EvaluateCmd),
    /// Generate a synthetic labeled scene from a JSON spec.
    Synth(SynthCmd),
    /// Print the band table of a sensor as JSON.
    DumpBands(DumpBandsCmd),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SensorArg {
    S2a,
    S2b,
}

impl From<SensorArg> for Sensor {
    fn from(s: SensorArg) -> Sensor {
        match s {
            SensorArg::S2a => Sensor::S2A,
            SensorArg::S2b => Sensor::S2B,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Tif,
    Bsf,
}

impl FormatArg {
    fn file(self, dir: &Path, stem: &str) -> PathBuf {
        dir.join(match self {
            FormatArg::Tif => format!("{stem}.tif"),
            FormatArg::Bsf => format!("{stem}.bsf"),
        })
    }
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long, value_enum, default_value_t = SensorArg::S2a)]
    sensor: SensorArg,
    /// Wavelength table JSON; overrides --sensor.
    #[arg(long, value_name = "FILE")]
    bands: Option<PathBuf>,
}

impl TableArgs {
    fn table(&self) -> Result<WavelengthTable> {
        match &self.bands {
            Some(path) => WavelengthTable::load(path),
            None => Ok(WavelengthTable::sentinel2(self.sensor.into())),
        }
    }
}

#[derive(Debug, Args)]
struct StackArgs {
    /// Input stack, GeoTIFF or BSF.
    #[arg(long, short)]
    input: PathBuf,
    #[command(flatten)]
    table: TableArgs,
    /// auto, marida, full, or a comma-separated list of band keys.
    #[arg(long, default_value = "auto")]
    band_order: String,
    /// Reflectance scale applied to stored values.
    #[arg(long)]
    scale: Option<f64>,
}

impl StackArgs {
    fn read(&self) -> Result<BandStack> {
        let opts = ReadOptions {
            sensor: self.table.table()?,
            band_order: self.band_order.parse::<BandOrder>()?,
            scale: self.scale,
            expect_dtype: None,
        };
        let stack = read_stack(&self.input, &opts)?;
        log::info!(
            "read {}: {}x{}, {} bands",
            self.input.display(),
            stack.width(),
            stack.height(),
            stack.band_count()
        );
        Ok(harmonized(&stack)?.into_owned())
    }
}

#[derive(Debug, Args)]
struct WaterArgs {
    /// Water reference signature JSON.
    #[arg(long, value_name = "FILE")]
    water_ref: Option<PathBuf>,
    /// Label mask whose water pixels give the reference.
    #[arg(long, value_name = "FILE")]
    water_mask: Option<PathBuf>,
    /// Code mapping for --water-mask (MARIDA codes by default).
    #[arg(long, value_name = "FILE")]
    mapping: Option<PathBuf>,
}

impl WaterArgs {
    fn reference(&self, stack: &BandStack) -> Result<WaterReference> {
        let file = self.water_ref.as_deref().map(WaterReference::load).transpose()?;
        let mask = match (&file, &self.water_mask) {
            (None, Some(path)) => Some(map_labels(&read_mask(path)?, &load_mapping(self.mapping.as_deref())?)?),
            _ => None,
        };
        choose_water_reference(stack, file, mask.as_ref())
    }
}

fn load_mapping(path: Option<&Path>) -> Result<LabelMapping> {
    match path {
        Some(p) => LabelMapping::load(p),
        None => Ok(LabelMapping::marida()),
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Fixed,
    Otsu,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    /// Threshold config JSON; flags below override its fields.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// WCI at or above which a pixel is water [default: 0.9]
    #[arg(long, allow_hyphen_values = true)]
    tau_w: Option<f64>,
    /// FDI at or above which a pixel holds floating material [default: 0.02]
    #[arg(long, allow_hyphen_values = true)]
    tau_f: Option<f64>,
    /// NDVI at or above which floating material is debris [default: 0.0]
    #[arg(long, allow_hyphen_values = true)]
    tau_n_lo: Option<f64>,
    /// NDVI at or above which other pixels are wakes [default: 0.1]
    #[arg(long, allow_hyphen_values = true)]
    tau_n_hi: Option<f64>,
    /// Otsu derives the thresholds per scene; fixed values become fallbacks [default: fixed]
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

impl ThresholdArgs {
    fn config(&self) -> Result<ThresholdConfig> {
        let mut cfg = match &self.config {
            Some(p) => ThresholdConfig::load(p)?,
            None => ThresholdConfig::default(),
        };
        if let Some(v) = self.tau_w {
            cfg.tau_w = v;
        }
        if let Some(v) = self.tau_f {
            cfg.tau_f = v;
        }
        if let Some(v) = self.tau_n_lo {
            cfg.tau_n_lo = v;
        }
        if let Some(v) = self.tau_n_hi {
            cfg.tau_n_hi = v;
        }
        if let Some(m) = self.mode {
            cfg.mode = match m {
                ModeArg::Fixed => ThresholdMode::Fixed,
                ModeArg::Otsu => ThresholdMode::Otsu,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
struct IndexCmd {
    #[command(flatten)]
    stack: StackArgs,
    #[command(flatten)]
    water: WaterArgs,
    /// ndvi, fdi or wci.
    #[arg(long)]
    kind: String,
    /// Output raster; `.bsf` selects BSF, anything else GeoTIFF.
    #[arg(long, short)]
    output: PathBuf,
    /// Write the statistics JSON here instead of stdout.
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DetectCmd {
    #[command(flatten)]
    stack: StackArgs,
    #[command(flatten)]
    water: WaterArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Created if missing; receives classes.*, overlay.png and detect.json.
    #[arg(long, short)]
    out_dir: PathBuf,
    /// Raster format of the class map.
    #[arg(long, value_enum, default_value_t = FormatArg::Tif)]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct EvaluateCmd {
    #[command(flatten)]
    stack: StackArgs,
    /// Ground-truth label mask.
    #[arg(long)]
    mask: PathBuf,
    /// Code mapping JSON for --mask (MARIDA codes by default).
    #[arg(long, value_name = "FILE")]
    mapping: Option<PathBuf>,
    /// Water reference JSON; estimated from the scene when absent.
    #[arg(long, value_name = "FILE")]
    water_ref: Option<PathBuf>,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Print an aligned text table instead of JSON.
    #[arg(long)]
    table: bool,
}

#[derive(Debug, Args)]
struct SynthCmd {
    /// Scene spec JSON.
    #[arg(long)]
    spec: PathBuf,
    /// Created if missing; receives stack.*, mask.* and mapping.json.
    #[arg(long, short)]
    out_dir: PathBuf,
    #[command(flatten)]
    table: TableArgs,
    /// Raster format of the stack and mask.
    #[arg(long, value_enum, default_value_t = FormatArg::Tif)]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct DumpBandsCmd {
    #[arg(long, value_enum, default_value_t = SensorArg::S2a)]
    sensor: SensorArg,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidConfig(format!("cannot serialize output: {e}")))?;
    println!("{text}");
    Ok(())
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("plain data serializes");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn cmd_index(cmd: &IndexCmd) -> Result<()> {
    let kind: IndexKind = cmd.kind.parse()?;
    let stack = cmd.stack.read()?;
    let map = match kind {
        IndexKind::Ndvi => ndvi(&stack)?,
        IndexKind::Fdi => fdi(&stack, &FdiParams::from_table(stack.wavelengths())?)?,
        IndexKind::Wci => wci(&stack, &cmd.water.reference(&stack)?, None)?,
    };
    write_index(&map, &cmd.output)?;
    let stats = map.stats();
    match &cmd.stats {
        Some(path) => write_json(&stats, path),
        None => print_json(&stats),
    }
}

fn cmd_detect(cmd: &DetectCmd) -> Result<()> {
    let cfg = cmd.thresholds.config()?;
    let stack = cmd.stack.read()?;
    let reference = cmd.water.reference(&stack)?;
    let detection = detect(&stack, &reference, &DetectOptions::with_thresholds(cfg))?;
    create_dir(&cmd.out_dir)?;
    let classes = cmd.format.file(&cmd.out_dir, "classes");
    let overlay = cmd.out_dir.join("overlay.png");
    write_class_map(&detection.classes, &classes)?;
    write_png(&detection.classes, &overlay)?;
    let counts = class_counts(&detection.classes);
    let summary = json!({
        "width": detection.classes.width(),
        "height": detection.classes.height(),
        "water_reference": {
            "provenance": reference.provenance(),
            "bands": reference.signature().band_ids(),
            "values": reference.signature().values(),
        },
        "thresholds": detection.thresholds,
        "class_counts": Class::ALL
            .iter()
            .map(|c| (c.name().to_string(), json!(counts[c.code() as usize])))
            .collect::<serde_json::Map<String, serde_json::Value>>(),
        "outputs": {
            "classes": classes,
            "overlay": overlay,
        },
    });
    write_json(&summary, &cmd.out_dir.join("detect.json"))?;
    print_json(&summary)
}

fn cmd_evaluate(cmd: &EvaluateCmd) -> Result<()> {
    let cfg = cmd.thresholds.config()?;
    let mapping = load_mapping(cmd.mapping.as_deref())?;
    let stack = cmd.stack.read()?;
    let truth = map_labels(&read_mask(&cmd.mask)?, &mapping)?;
    let scene = LabeledScene::new(stack, truth)?;
    let reference = cmd.water_ref.as_deref().map(WaterReference::load).transpose()?;
    let report = per_index_report(&scene, &cfg, reference.as_ref())?;
    if cmd.table {
        print!("{}", report.table());
        Ok(())
    } else {
        print_json(&report)
    }
}

fn cmd_synth(cmd: &SynthCmd) -> Result<()> {
    let spec = SceneSpec::load(&cmd.spec)?;
    let table = cmd.table.table()?;
    let scene = generate(&spec, &table)?;
    create_dir(&cmd.out_dir)?;
    let stack = cmd.format.file(&cmd.out_dir, "stack");
    let mask = cmd.format.file(&cmd.out_dir, "mask");
    let mapping = cmd.out_dir.join("mapping.json");
    write_stack(&scene.stack, &stack)?;
    write_mask(&scene.truth.map(|c| c.code() as u16), &mask)?;
    LabelMapping::class_codes().save(&mapping)?;
    print_json(&json!({ "stack": stack, "mask": mask, "mapping": mapping }))
}

fn cmd_dump_bands(cmd: &DumpBandsCmd) -> Result<()> {
    print_json(&WavelengthTable::sentinel2(cmd.sensor.into()).bands())
}

fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Index(c) => cmd_index(c),
        Command::Detect(c) => cmd_detect(c),
        Command::Evaluate(c) => cmd_evaluate(c),
        Command::Synth(c) => cmd_synth(c),
        Command::DumpBands(c) => cmd_dump_bands(c),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_CONFIG,
            };
        }
    };
    let result = match cli.threads.or_else(threads_from_env) {
        Some(n) => with_threads(n, || execute(&cli)).and_then(|r| r),
        None => execute(&cli),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            log::error!("{e}");
            exit_code(&e)
        }
    }
}
