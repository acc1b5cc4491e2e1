use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use arcspline::corner::CornerParams;
use arcspline::geom::Point2;
use arcspline::io::{curve_from_json, format_curve, parse_points, write_points, CurveFormat};
use arcspline::par::Exec;
use arcspline::pipeline::{find_corners, fit_sections, format_rows, run_pipeline, Method, PipelineConfig};
use arcspline::scan_synth::{generate_scan, parse_shape, pentagon, rectilinear_ten, ScanConfig, ShapeSpec};
use arcspline::smoothing::{smooth_curve, smooth_seam, SmoothingMethod, SmoothingParams};
use arcspline::spline_longest::GapPolicy;
use clap::{Args, Parser, Subcommand, ValueEnum};

const EXIT_PARSE: u8 = 2;
const EXIT_FIT: u8 = 3;
const EXIT_CORNER: u8 = 4;

#[derive(Parser)]
#[command(name = "arcspline", version, about = "Arc-spline approximation of scanned planar contours")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a synthetic scan of a shape and write it as CSV.
    Synth(SynthArgs),
    /// Detect corners and print the corner report as JSON.
    Corners(CornerArgs),
    /// Fit a curve without corner detection.
    Fit(FitArgs),
    /// Smooth the junctions of a previously fitted JSON curve.
    Smooth(SmoothArgs),
    /// Corners, sectioned fit and smoothing; writes the curve.
    Pipeline(PipelineArgs),
    /// Print the Tolerance / Arcs / Segments / Bad Points table.
    Report(PipelineArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// `pentagon`, `rect10`, or a shape file (L/A/V lines).
    #[arg(long, default_value = "pentagon")]
    shape: String,
    /// Side length of the built-in pentagon.
    #[arg(long, default_value_t = 50.0)]
    side: f64,
    /// Fillet radius of the built-in rect10 polygon.
    #[arg(long, default_value_t = 1.3)]
    fillet: f64,
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    #[arg(long, default_value_t = 1.0)]
    corner_exclusion: f64,
    #[arg(long, default_value_t = 0.05)]
    jitter_sigma: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Jitter in both coordinates instead of along the normal.
    #[arg(long)]
    isotropic: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct CornerFlags {
    /// The contour is closed: indices wrap and the seam is smoothed.
    #[arg(long)]
    closed: bool,
    #[arg(long, default_value_t = 0.9)]
    eps_turn: f64,
    #[arg(long, default_value_t = 20.0)]
    r_max: f64,
    /// Window-growth tolerance of the corner fits.
    #[arg(long = "corners-delta", default_value_t = 1.0)]
    corners_delta: f64,
    #[arg(long, default_value_t = 30)]
    m_limit: usize,
    #[arg(long)]
    flip_pairing: bool,
}

impl CornerFlags {
    fn params(&self) -> CornerParams {
        CornerParams {
            eps_turn: self.eps_turn,
            r_max: self.r_max,
            delta: self.corners_delta,
            m_limit: self.m_limit,
            flip_pairing: self.flip_pairing,
            closed: self.closed,
        }
    }
}

#[derive(Args)]
struct CornerArgs {
    input: PathBuf,
    #[command(flatten)]
    corners: CornerFlags,
    #[arg(long)]
    sequential: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Longest,
    C0,
}

#[derive(Clone, Copy, ValueEnum)]
enum GapArg {
    Recurse,
    Biarc,
}

#[derive(Clone, Copy, ValueEnum)]
enum SmoothArg {
    None,
    Biarc,
    Fillet,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Svg,
    Gcode,
}

impl From<FormatArg> for CurveFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => CurveFormat::Json,
            FormatArg::Svg => CurveFormat::Svg,
            FormatArg::Gcode => CurveFormat::Gcode,
        }
    }
}

impl From<SmoothArg> for SmoothingMethod {
    fn from(s: SmoothArg) -> Self {
        match s {
            SmoothArg::None => SmoothingMethod::None,
            SmoothArg::Biarc => SmoothingMethod::Biarc,
            SmoothArg::Fillet => SmoothingMethod::Fillet,
        }
    }
}

#[derive(Args, Clone)]
struct SmoothFlags {
    #[arg(long, value_enum, default_value = "none")]
    smoothing: SmoothArg,
    #[arg(long, default_value_t = arcspline::smoothing::DEFAULT_EPS_GOOD)]
    eps_good: f64,
    /// Biarc trim distance (derived from the point spacing by default).
    #[arg(long)]
    delta: Option<f64>,
    /// Fillet radius (largest admissible by default).
    #[arg(long)]
    rho: Option<f64>,
}

#[derive(Args, Clone)]
struct FitFlags {
    #[arg(long, default_value_t = 0.5)]
    tolerance: f64,
    #[arg(long, value_enum, default_value = "c0")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "recurse")]
    gap_policy: GapArg,
    /// Run every stage on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Args)]
struct FitArgs {
    input: PathBuf,
    #[command(flatten)]
    fit: FitFlags,
    #[command(flatten)]
    smooth: SmoothFlags,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SmoothArgs {
    /// Input points (CSV) the curve was fitted to.
    input: PathBuf,
    /// Fitted curve (JSON).
    #[arg(long)]
    curve: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    tolerance: f64,
    #[command(flatten)]
    smooth: SmoothFlags,
    /// Also smooth the junction between the last and first piece.
    #[arg(long)]
    closed: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    input: PathBuf,
    #[command(flatten)]
    fit: FitFlags,
    #[command(flatten)]
    smooth: SmoothFlags,
    #[command(flatten)]
    corners: CornerFlags,
    /// Tolerances of the summary rows, comma separated.
    #[arg(long, value_delimiter = ',')]
    report_tolerances: Vec<f64>,
    #[arg(long)]
    no_detect_corners: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl PipelineArgs {
    fn config(&self) -> PipelineConfig {
        let mut cfg = config_from(&self.fit, &self.smooth);
        cfg.report_tolerances = self.report_tolerances.clone();
        cfg.detect_corners = !self.no_detect_corners;
        cfg.corners = self.corners.params();
        cfg
    }
}

fn config_from(fit: &FitFlags, smooth: &SmoothFlags) -> PipelineConfig {
    PipelineConfig {
        tolerance: fit.tolerance,
        method: match fit.method {
            MethodArg::Longest => Method::Longest,
            MethodArg::C0 => Method::C0,
        },
        gap_policy: match fit.gap_policy {
            GapArg::Recurse => GapPolicy::Recurse,
            GapArg::Biarc => GapPolicy::Biarc,
        },
        smoothing: smooth.smoothing.into(),
        eps_good: smooth.eps_good,
        delta: smooth.delta,
        rho: smooth.rho,
        exec: if fit.sequential { Exec::Sequential } else { Exec::default() },
        ..Default::default()
    }
}

struct Failure {
    code: u8,
    err: anyhow::Error,
}

trait ExitWith<T> {
    fn exit_with(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn exit_with(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, err: e.into() })
    }
}

fn read_input(path: &Path) -> Result<Vec<Point2>, Failure> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("opening {}", path.display()))
        .exit_with(EXIT_PARSE)?;
    parse_points(std::io::BufReader::new(file))
        .with_context(|| format!("reading {}", path.display()))
        .exit_with(EXIT_PARSE)
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    let res = match output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => std::io::stdout().write_all(text.as_bytes()).context("writing stdout"),
    };
    res.exit_with(1)
}

fn load_shape(args: &SynthArgs) -> anyhow::Result<ShapeSpec> {
    Ok(match args.shape.as_str() {
        "pentagon" => pentagon(args.side),
        "rect10" => rectilinear_ten(args.fillet),
        path => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            parse_shape(&text)?
        }
    })
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let shape = load_shape(&args).exit_with(EXIT_PARSE)?;
    let cfg = ScanConfig {
        step: args.step,
        corner_exclusion: args.corner_exclusion,
        jitter_sigma: args.jitter_sigma,
        seed: args.seed,
        normal_only: !args.isotropic,
    };
    let (points, _) = generate_scan(&shape, &cfg).exit_with(EXIT_FIT)?;
    let mut buf = Vec::new();
    write_points(&points, &mut buf).exit_with(1)?;
    emit(args.output.as_deref(), &String::from_utf8_lossy(&buf))
}

fn corners(args: CornerArgs) -> Result<(), Failure> {
    let points = read_input(&args.input)?;
    let cfg = PipelineConfig {
        corners: args.corners.params(),
        exec: if args.sequential { Exec::Sequential } else { Exec::default() },
        ..Default::default()
    };
    cfg.validate().exit_with(EXIT_CORNER)?;
    let report = find_corners(&points, &cfg).exit_with(EXIT_CORNER)?;
    let mut text = serde_json::to_string_pretty(&report).exit_with(1)?;
    text.push('\n');
    emit(args.output.as_deref(), &text)
}

fn fit(args: FitArgs) -> Result<(), Failure> {
    let points = read_input(&args.input)?;
    let cfg = PipelineConfig {
        detect_corners: false,
        ..config_from(&args.fit, &args.smooth)
    };
    cfg.validate().exit_with(EXIT_FIT)?;
    let report = find_corners(&points, &cfg).exit_with(EXIT_CORNER)?;
    let fitted = fit_sections(&points, &report, cfg.tolerance, &cfg).exit_with(EXIT_FIT)?;
    let text = format_curve(&fitted.curve, args.format.into(), &points, &[]).exit_with(EXIT_FIT)?;
    emit(args.output.as_deref(), &text)
}

fn smooth(args: SmoothArgs) -> Result<(), Failure> {
    let points = read_input(&args.input)?;
    let text = std::fs::read_to_string(&args.curve)
        .with_context(|| format!("reading {}", args.curve.display()))
        .exit_with(EXIT_PARSE)?;
    let curve = curve_from_json(&text).exit_with(EXIT_PARSE)?;
    let params = SmoothingParams {
        method: args.smooth.smoothing.into(),
        eps_good: args.smooth.eps_good,
        epsilon: args.tolerance,
        delta: args.smooth.delta,
        rho: args.smooth.rho,
    };
    let (mut curve, mut junctions) = smooth_curve(&curve, &points, &params);
    if args.closed && curve.len() > 1 {
        let (c, seam) = smooth_seam(&curve, &points, &params);
        curve = c;
        junctions.insert(0, seam);
    }
    for j in &junctions {
        eprintln!("junction {}: cos {:.6} {:?} {:?}", j.index, j.cos_angle, j.verdict, j.fix);
    }
    let text = format_curve(&curve, args.format.into(), &points, &[]).exit_with(EXIT_FIT)?;
    emit(args.output.as_deref(), &text)
}

fn pipeline(args: PipelineArgs, table_only: bool) -> Result<(), Failure> {
    let points = read_input(&args.input)?;
    let cfg = args.config();
    cfg.corners.validate().exit_with(EXIT_CORNER)?;
    cfg.validate().exit_with(EXIT_FIT)?;
    // run corner detection first so that its failures get their own code
    find_corners(&points, &cfg).exit_with(EXIT_CORNER)?;
    let out = run_pipeline(&points, &cfg).exit_with(EXIT_FIT)?;
    if table_only {
        return emit(args.output.as_deref(), &format_rows(&out.rows));
    }
    eprint!("{}", format_rows(&out.rows));
    let text = format_curve(&out.curve, args.format.into(), &points, &out.corners.corners).exit_with(EXIT_FIT)?;
    emit(args.output.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Corners(a) => corners(a),
        Command::Fit(a) => fit(a),
        Command::Smooth(a) => smooth(a),
        Command::Pipeline(a) => pipeline(a, false),
        Command::Report(a) => pipeline(a, true),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, err }) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
