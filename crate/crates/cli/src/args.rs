use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "evdeblur",
    version,
    about = "Event-based deblurring and high-frame-rate video reconstruction"
)]
pub struct Cli {
    /// Worker threads for per-pixel work (0 = all cores)
    #[arg(long, global = true, default_value_t = 0, env = "EVDEBLUR_THREADS")]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate events, blurred frames and ground truth from a synthetic scene
    Simulate(SimulateArgs),
    /// Deblur frames and expand them into a high-frame-rate video
    Reconstruct(ReconstructArgs),
    /// Reconstruct one frame for each c on a grid and record the energies
    Sweep(SweepArgs),
    /// Compare two directories of equally named frames
    Metrics(MetricsArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scene {
    TranslatingBar,
    DriftingSinusoid,
    TwoLevelChecker,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(
        long,
        value_enum,
        default_value = "translating-bar",
        env = "EVDEBLUR_SCENE"
    )]
    pub scene: Scene,
    /// Frame width, and height unless --height is given
    #[arg(long, default_value_t = 64, env = "EVDEBLUR_SIZE")]
    pub size: usize,
    #[arg(long, env = "EVDEBLUR_HEIGHT")]
    pub height: Option<usize>,
    /// Number of sharp frames
    #[arg(long, default_value_t = 110, env = "EVDEBLUR_FRAMES")]
    pub frames: usize,
    /// Sharp frames averaged into each blurred frame (odd)
    #[arg(long, default_value_t = 11, env = "EVDEBLUR_BLUR_SPAN")]
    pub blur_span: usize,
    /// True contrast threshold
    #[arg(long = "c", default_value_t = 0.23, env = "EVDEBLUR_C_TRUE")]
    pub c_true: f64,
    /// Sharp frame rate in Hz
    #[arg(long, default_value_t = 240.0, env = "EVDEBLUR_RATE")]
    pub rate: f64,
    /// Pixels moved per sharp frame
    #[arg(long, default_value_t = 1.0, env = "EVDEBLUR_SPEED")]
    pub speed: f64,
    #[arg(long, default_value_t = 0, env = "EVDEBLUR_SEED")]
    pub seed: u64,
    /// Smallest intensity before taking logs
    #[arg(long, default_value_t = 1.0 / 255.0, env = "EVDEBLUR_LOG_FLOOR")]
    pub log_floor: f64,
    #[arg(long, env = "EVDEBLUR_OUT")]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Edi,
    Medi,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convention {
    Midpoint,
    ExposureStart,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Residual {
    Log,
    Linear,
}

/// Either `auto` or a fixed positive value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ThresholdArg {
    Auto,
    Fixed(f64),
}

pub fn parse_threshold(s: &str) -> Result<ThresholdArg, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(ThresholdArg::Auto);
    }
    let v: f64 = s
        .parse()
        .map_err(|_| format!("expected `auto` or a number, got `{s}`"))?;
    if !(v >= 0.0 && v.is_finite()) {
        return Err(format!("c must be a non-negative number, got {v}"));
    }
    Ok(ThresholdArg::Fixed(v))
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Event file with `t x y p` lines
    #[arg(long, env = "EVDEBLUR_EVENTS")]
    pub events: PathBuf,
    /// Frame manifest with `t filename` lines
    #[arg(long, env = "EVDEBLUR_FRAMES_MANIFEST")]
    pub frames: PathBuf,
    /// Exposure time in seconds; defaults to the manifest's `# exposure` line
    #[arg(long, env = "EVDEBLUR_EXPOSURE")]
    pub exposure: Option<f64>,
    #[arg(
        long,
        value_enum,
        default_value = "midpoint",
        env = "EVDEBLUR_TIMESTAMP_CONVENTION"
    )]
    pub timestamp_convention: Convention,
}

#[derive(Args, Debug)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "medi", env = "EVDEBLUR_MODE")]
    pub mode: Mode,
    /// mEDI sliding window length (0 = all frames)
    #[arg(long, default_value_t = 5, env = "EVDEBLUR_WINDOW")]
    pub window: usize,
    /// Weight of the edge term in the EDI energy
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true, env = "EVDEBLUR_LAMBDA")]
    pub lambda: f64,
    /// Decay rate of the event edge signal in 1/s (default 2 / exposure)
    #[arg(long, env = "EVDEBLUR_DECAY")]
    pub decay: Option<f64>,
    /// Domain of the mEDI re-blur residual
    #[arg(long, value_enum, default_value = "log", env = "EVDEBLUR_RESIDUAL")]
    pub residual: Residual,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Contrast threshold: `auto` or a value
    #[arg(long = "c", default_value = "auto", value_parser = parse_threshold, env = "EVDEBLUR_C")]
    pub c: ThresholdArg,
    #[arg(long, default_value_t = 75, value_parser = clap::value_parser!(u64).range(1..), env = "EVDEBLUR_EVENTS_PER_FRAME")]
    pub events_per_frame: u64,
    #[arg(long, default_value_t = 0.01, env = "EVDEBLUR_C_LO")]
    pub c_lo: f64,
    #[arg(long, default_value_t = 1.0, env = "EVDEBLUR_C_HI")]
    pub c_hi: f64,
    #[arg(long, default_value_t = 1e-3, env = "EVDEBLUR_TOLERANCE")]
    pub tolerance: f64,
    #[arg(long, default_value_t = 64, env = "EVDEBLUR_MAX_EVALS")]
    pub max_evals: usize,
    /// Scan 8 points first to pick the search bracket
    #[arg(long, env = "EVDEBLUR_PRESCAN")]
    pub prescan: bool,
    /// Skip writing the expanded video
    #[arg(long, env = "EVDEBLUR_NO_VIDEO")]
    pub no_video: bool,
    #[arg(long, env = "EVDEBLUR_OUT")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated ascending c values
    #[arg(long, value_delimiter = ',', required = true, env = "EVDEBLUR_GRID")]
    pub grid: Vec<f64>,
    /// Frame whose reconstruction is previewed
    #[arg(long, default_value_t = 0, env = "EVDEBLUR_FRAME_INDEX")]
    pub frame_index: usize,
    #[arg(long, env = "EVDEBLUR_OUT")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Directory of reference frames
    #[arg(long, env = "EVDEBLUR_REFERENCE")]
    pub reference: PathBuf,
    /// Directory of frames to score
    #[arg(long, env = "EVDEBLUR_TEST")]
    pub test: PathBuf,
    /// Also write the summary as JSON here
    #[arg(long, env = "EVDEBLUR_JSON")]
    pub json: Option<PathBuf>,
}
