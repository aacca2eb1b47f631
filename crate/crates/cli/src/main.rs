//! `stereopipe` command line: run the matcher, evaluate predictions,
//! benchmark throughput, and sweep aggregation windows.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use stereopipe_core::bench::bench_pipeline;
use stereopipe_core::eval::eval_bad;
use stereopipe_core::io::{
    read_image, read_middlebury_calib, read_pfm, write_pfm, write_visualization,
};
use stereopipe_core::oracle::oracle_pipeline;
use stereopipe_core::params::{parse_census_offsets, parse_config_lines};
use stereopipe_core::{run_pipeline, FillStrategy, Params, PipelineConfig};

#[derive(Parser)]
#[command(name = "stereopipe", version, about = "Deterministic stereo matching engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a disparity map for a rectified pair
    Run(RunArgs),
    /// Compare a predicted disparity map against ground truth
    Eval(EvalArgs),
    /// Measure per-stage throughput
    Bench(BenchArgs),
    /// Grid-sweep the aggregation windows against ground truth
    Sweep(SweepArgs),
    /// Run the naive reference pipeline (differential debugging)
    #[command(hide = true, name = "oracle-run")]
    OracleRun(RunArgs),
}

/// Parameter flags shared by every pipeline-running subcommand.
#[derive(Args, Clone)]
struct ParamArgs {
    /// Maximum disparity at original resolution
    #[arg(long)]
    max_disp: Option<usize>,
    /// Middlebury calib.txt supplying ndisp as the disparity default
    #[arg(long)]
    calib: Option<PathBuf>,
    /// key=value config file mirroring these flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scale-down factor K
    #[arg(long)]
    scale: Option<usize>,
    /// Mean-pool radius m
    #[arg(long)]
    mpool: Option<usize>,
    /// Maximum horizontal aggregation arm
    #[arg(long)]
    wx: Option<usize>,
    /// Maximum vertical aggregation arm
    #[arg(long)]
    wy: Option<usize>,
    /// Brightness similarity threshold (0-255)
    #[arg(long)]
    delta: Option<u32>,
    /// Disparity continuity threshold T for filling
    #[arg(long)]
    tfill: Option<f64>,
    #[arg(long)]
    lambda_ad: Option<f64>,
    #[arg(long)]
    lambda_mc: Option<f64>,
    /// Six census offsets, e.g. "0,-2;-1,-1;1,-1;-1,1;1,1;0,2"
    #[arg(long)]
    census_offsets: Option<String>,
    /// Fill strategy: bilateral | nearest | smaller | paper-eq11
    #[arg(long)]
    fill: Option<String>,
    /// Worker threads (default: STEREOPIPE_THREADS or hardware parallelism)
    #[arg(long)]
    threads: Option<usize>,
    /// Match at full resolution, skipping scale-down and scale-up
    #[arg(long)]
    no_downscale: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    /// Output disparity map (PFM)
    #[arg(long)]
    out: PathBuf,
    /// Also write an 8-bit grayscale visualization (PNG)
    #[arg(long)]
    vis: Option<PathBuf>,
    /// Print the run summary as JSON
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Predicted disparity (PFM)
    #[arg(long)]
    pred: PathBuf,
    /// Ground-truth disparity (PFM)
    #[arg(long)]
    gt: PathBuf,
    /// Bad-pixel threshold in pixels
    #[arg(long, default_value_t = 2.0)]
    bad: f64,
    /// Non-occlusion mask (PNG, 255 = non-occluded)
    #[arg(long)]
    occ: Option<PathBuf>,
    /// Print the report as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    /// Repetitions; stage times report the median
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Print the report as JSON
    #[arg(long)]
    json: bool,
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    right: PathBuf,
    /// Ground-truth disparity (PFM)
    #[arg(long)]
    gt: PathBuf,
    /// Comma-separated horizontal window maxima
    #[arg(long, value_delimiter = ',', default_value = "5,9,21,41,61,141")]
    wx_list: Vec<usize>,
    /// Comma-separated vertical window maxima
    #[arg(long, value_delimiter = ',', default_value = "9,11,15,21,27,31")]
    wy_list: Vec<usize>,
    /// Bad-pixel threshold in pixels
    #[arg(long, default_value_t = 2.0)]
    bad: f64,
    /// Also write the grid as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    params: ParamArgs,
}

/// Errors that should exit with the usage code rather than the runtime one.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for UsageError {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(&args, false),
        Command::OracleRun(args) => cmd_run(&args, true),
        Command::Eval(args) => cmd_eval(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Sweep(args) => cmd_sweep(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.is::<UsageError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Resolve Params and engine settings from defaults, config file, calib,
/// environment, and explicit flags (later sources win).
fn resolve_config(args: &ParamArgs) -> Result<PipelineConfig> {
    let mut params = Params::default();
    let mut d_max: Option<usize> = None;
    let mut fill = FillStrategy::Bilateral;
    let mut threads = std::env::var("STEREOPIPE_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0);
    let mut downscale = true;

    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        for (key, value) in parse_config_lines(&text)? {
            match key.replace('-', "_").as_str() {
                "fill" => fill = parse_fill(&value)?,
                "threads" => {
                    threads = value.parse().map_err(|_| UsageError(format!(
                        "config: invalid threads value {value:?}"
                    )))?
                }
                "no_downscale" => {
                    downscale = !value.parse::<bool>().map_err(|_| UsageError(format!(
                        "config: invalid no_downscale value {value:?}"
                    )))?
                }
                "max_disp" | "d_max_org" => {
                    let n = value.parse().map_err(|_| UsageError(format!(
                        "config: invalid max_disp value {value:?}"
                    )))?;
                    params.d_max_org = n;
                    d_max = Some(n);
                }
                _ => params.set(&key, &value)?,
            }
        }
    }

    if let Some(path) = &args.calib {
        let calib = read_middlebury_calib(path)?;
        d_max = Some(calib.ndisp);
    }
    if let Some(n) = args.max_disp {
        d_max = Some(n);
    }
    let Some(d_max) = d_max else {
        bail!(UsageError("one of --max-disp, --calib, or a config max_disp is required".into()));
    };
    params.d_max_org = d_max;

    if let Some(v) = args.scale {
        params.k_scale = v;
    }
    if let Some(v) = args.mpool {
        params.m_pool = v;
    }
    if let Some(v) = args.wx {
        params.w_x = v;
    }
    if let Some(v) = args.wy {
        params.w_y = v;
    }
    if let Some(v) = args.delta {
        params.delta_arm = v;
    }
    if let Some(v) = args.tfill {
        params.t_fill = v;
    }
    if let Some(v) = args.lambda_ad {
        params.lambda_ad = v;
    }
    if let Some(v) = args.lambda_mc {
        params.lambda_mc = v;
    }
    if let Some(spec) = &args.census_offsets {
        params.census_offsets = parse_census_offsets(spec)?;
    }
    if let Some(name) = &args.fill {
        fill = parse_fill(name)?;
    }
    if let Some(n) = args.threads {
        threads = n;
    }
    if args.no_downscale {
        downscale = false;
    }

    params.validate().map_err(|e| UsageError(e.to_string()))?;
    Ok(PipelineConfig { params, fill, downscale, threads })
}

fn parse_fill(name: &str) -> Result<FillStrategy> {
    FillStrategy::parse(name).ok_or_else(|| {
        UsageError(format!(
            "unknown fill strategy {name:?} (want bilateral, nearest, smaller, or paper-eq11)"
        ))
        .into()
    })
}

fn load_pair(left: &Path, right: &Path) -> Result<(stereopipe_core::GrayImage, stereopipe_core::GrayImage)> {
    Ok((read_image(left)?, read_image(right)?))
}

fn cmd_run(args: &RunArgs, use_oracle: bool) -> Result<()> {
    let cfg = resolve_config(&args.params)?;
    let (left, right) = load_pair(&args.left, &args.right)?;
    let out = if use_oracle {
        oracle_pipeline(&left, &right, &cfg)?
    } else {
        run_pipeline(&left, &right, &cfg)?
    };
    write_pfm(&out.disparity, &args.out)?;
    if let Some(vis) = &args.vis {
        write_visualization(&out.disparity, cfg.params.d_max_org, vis)?;
    }
    if args.json {
        println!(
            "{}",
            serde_json::json!({
                "out": args.out.display().to_string(),
                "width": out.disparity.width(),
                "height": out.disparity.height(),
                "d_max": cfg.params.d_max_org,
                "valid_fraction": out.disparity.valid_count() as f64
                    / (out.disparity.width() * out.disparity.height()) as f64,
                "timings_ms": out.timings,
            })
        );
    } else {
        println!(
            "wrote {} ({}x{}, Dmax {}, {:.1} ms)",
            args.out.display(),
            out.disparity.width(),
            out.disparity.height(),
            cfg.params.d_max_org,
            out.timings.overall_ms
        );
    }
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let pred = read_pfm(&args.pred)?;
    let gt = read_pfm(&args.gt)?;
    let occ = match &args.occ {
        Some(path) => Some(read_image(path)?),
        None => None,
    };
    let report = eval_bad(&pred, &gt, args.bad, occ.as_ref())?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    if args.reps < 1 {
        bail!(UsageError("--reps must be at least 1".into()));
    }
    let cfg = resolve_config(&args.params)?;
    let (left, right) = load_pair(&args.left, &args.right)?;
    let report = bench_pipeline(&left, &right, &cfg, args.reps)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    if args.wx_list.is_empty() || args.wy_list.is_empty() {
        bail!(UsageError("--wx-list and --wy-list must be non-empty".into()));
    }
    let base_cfg = resolve_config(&args.params)?;
    let (left, right) = load_pair(&args.left, &args.right)?;
    let gt = read_pfm(&args.gt)?;

    let mut rows = Vec::new();
    for &wx in &args.wx_list {
        let mut row = Vec::new();
        for &wy in &args.wy_list {
            let mut cfg = base_cfg.clone();
            cfg.params.w_x = wx;
            cfg.params.w_y = wy;
            let out = run_pipeline(&left, &right, &cfg)?;
            let report = eval_bad(&out.disparity, &gt, args.bad, None)?;
            row.push(report.bad_rate_all);
        }
        rows.push(row);
    }

    // text grid, wx down the side and wy across the top
    print!("{:>8}", "Wx\\Wy");
    for wy in &args.wy_list {
        print!("{wy:>8}");
    }
    println!();
    for (i, &wx) in args.wx_list.iter().enumerate() {
        print!("{wx:>8}");
        for v in &rows[i] {
            print!("{v:>8.2}");
        }
        println!();
    }

    if let Some(path) = &args.csv {
        let mut csv = String::from("wx");
        for wy in &args.wy_list {
            csv.push_str(&format!(",wy={wy}"));
        }
        csv.push('\n');
        for (i, &wx) in args.wx_list.iter().enumerate() {
            csv.push_str(&wx.to_string());
            for v in &rows[i] {
                csv.push_str(&format!(",{v:.4}"));
            }
            csv.push('\n');
        }
        std::fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}
