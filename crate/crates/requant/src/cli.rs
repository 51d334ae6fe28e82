//! Command-line definitions and dispatch.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use requant_core::codec::{Truncation, DEFAULT_K, MAX_K};
use requant_core::corpus::{CorpusConfig, Texture};
use requant_core::features::DEFAULT_T;
use serde::Serialize;

use crate::analysis::{self, AnalyzeOptions};
use crate::corpus::{self, MANIFEST_NAME};
use crate::error::{AppError, AppResult};
use crate::evaluate::{self, Predictions};
use crate::io::write_atomic;

/// Environment variable that overrides `--jobs`.
pub const JOBS_ENV: &str = "RECOMPRESS_JOBS";

#[derive(Debug, Parser)]
#[command(name = "requant", version, about = "JPEG recompression-instability forensics")]
pub struct Cli {
    /// Worker threads for batch work (default: logical CPUs).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print dimensions, sampling, luma table and estimated quality as JSON.
    Inspect { path: PathBuf },
    /// Recompression analysis: heatmap, mask and JSON report.
    Analyze(AnalyzeArgs),
    /// Signed coefficient histogram at one frequency, as CSV.
    Histogram(HistogramArgs),
    /// Generate a simulated spliced/authentic corpus with a manifest.
    Simulate(SimulateArgs),
    /// Score heatmaps against a manifest's ground truth.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Baseline JPEG files or `.coef` dumps.
    #[arg(required = true)]
    pub paths: Vec<PathBuf>,
    #[command(flatten)]
    pub analysis: AnalysisFlags,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct AnalysisFlags {
    /// Recompression steps.
    #[arg(long, default_value_t = DEFAULT_K, value_parser = parse_k)]
    pub k: usize,
    /// Clip threshold for coefficient magnitudes.
    #[arg(long, default_value_t = DEFAULT_T, value_parser = clap::value_parser!(u32).range(1..))]
    pub t: u32,
    /// Round decoded pixels without clamping to 0..=255.
    #[arg(long)]
    pub round_only: bool,
    /// Fuse the instability heatmap with the residual heatmap.
    #[arg(long)]
    pub fuse_residual: bool,
    /// Report timing_ms as 0 for byte-reproducible output.
    #[arg(long)]
    pub no_timing: bool,
}

impl AnalysisFlags {
    fn options(&self) -> AnalyzeOptions {
        AnalyzeOptions {
            k: self.k,
            t: self.t,
            truncation: if self.round_only {
                Truncation::RoundOnly
            } else {
                Truncation::Clamp
            },
            fuse_residual: self.fuse_residual,
            no_timing: self.no_timing,
        }
    }
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    pub path: PathBuf,
    /// Frequency position as `row,col` within the block.
    #[arg(long, default_value = "0,1", value_parser = analysis::parse_position)]
    pub pos: (usize, usize),
    #[arg(long, default_value_t = DEFAULT_T, value_parser = clap::value_parser!(u32).range(1..))]
    pub t: u32,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TextureArg {
    Noise,
    Gradient,
    Mixed,
    Smooth,
}

impl From<TextureArg> for Texture {
    fn from(t: TextureArg) -> Self {
        match t {
            TextureArg::Noise => Texture::Noise,
            TextureArg::Gradient => Texture::Gradient,
            TextureArg::Mixed => Texture::Mixed,
            TextureArg::Smooth => Texture::Smooth,
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Tampered samples; as many authentic ones are written alongside.
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub qf_min: i32,
    #[arg(long, default_value_t = 99)]
    pub qf_max: i32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 256)]
    pub width: usize,
    #[arg(long, default_value_t = 256)]
    pub height: usize,
    /// Largest splice area as a fraction of the frame.
    #[arg(long, default_value_t = 0.015)]
    pub max_splice: f64,
    #[arg(long, value_enum, default_value_t = TextureArg::Mixed)]
    pub texture: TextureArg,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory of `<id>.heatmap.png` predictions.
    #[arg(long, conflicts_with = "self_run", required_unless_present = "self_run")]
    pub pred_dir: Option<PathBuf>,
    /// Run the built-in analyzer on every manifest entry.
    #[arg(long)]
    pub self_run: bool,
    #[command(flatten)]
    pub analysis: AnalysisFlags,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_k(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(k) if (1..=MAX_K).contains(&k) => Ok(k),
        _ => Err(format!("expected an integer in 1..={MAX_K}")),
    }
}

/// Worker count: the environment wins over the flag.
pub fn resolve_jobs(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>, String> {
    if let Some(v) = env.filter(|v| !v.trim().is_empty()) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(format!("{JOBS_ENV} must be a positive integer, got {v:?}")),
        };
    }
    match flag {
        Some(0) => Err("--jobs must be at least 1".into()),
        other => Ok(other),
    }
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

fn dispatch(command: Command, out: &mut Vec<u8>, err: &mut Vec<u8>) -> AppResult<()> {
    let stdout_err = |e| AppError::io("<stdout>", e);
    match command {
        Command::Inspect { path } => {
            out.write_all(&to_json(&analysis::inspect(&path)?)).map_err(stdout_err)?;
        }
        Command::Analyze(a) => {
            let opts = a.analysis.options();
            let reports = a
                .paths
                .par_iter()
                .map(|p| analysis::analyze(p, &opts, a.out_dir.as_deref()))
                .collect::<AppResult<Vec<_>>>()?;
            let json = if reports.len() == 1 {
                to_json(&reports[0])
            } else {
                to_json(&reports)
            };
            out.write_all(&json).map_err(stdout_err)?;
        }
        Command::Histogram(h) => {
            let hist = analysis::histogram(&h.path, h.pos, h.t)?;
            let csv = analysis::histogram_csv(&hist);
            match h.out {
                Some(path) => write_atomic(&path, &csv)?,
                None => out.write_all(&csv).map_err(stdout_err)?,
            }
            if hist.out_of_range > 0 {
                let _ = writeln!(err, "note: {} blocks outside [-{}, {}]", hist.out_of_range, h.t, h.t);
            }
        }
        Command::Simulate(s) => {
            let config = CorpusConfig {
                n: s.n,
                qf_min: s.qf_min,
                qf_max: s.qf_max,
                seed: s.seed,
                width: s.width,
                height: s.height,
                max_splice_fraction: s.max_splice,
                texture: s.texture.into(),
            };
            config.validate().map_err(|e| AppError::Usage(e.to_string()))?;
            let rows = corpus::simulate(&config, &s.out_dir)?;
            let _ = writeln!(err, "wrote {} entries", rows.len());
            writeln!(out, "{}", s.out_dir.join(MANIFEST_NAME).display()).map_err(stdout_err)?;
        }
        Command::Evaluate(e) => {
            let preds = match e.pred_dir {
                Some(dir) => Predictions::Dir(dir),
                None => Predictions::SelfRun(e.analysis.options()),
            };
            let result = evaluate::evaluate(&e.manifest, &preds)?;
            for s in &result.skipped {
                let _ = writeln!(err, "warning: skipped {}: {}", s.id, s.reason);
            }
            if !result.skipped.is_empty() {
                let total = result.skipped.len() + result.report.n_images;
                let _ = writeln!(err, "skipped {} of {} entries", result.skipped.len(), total);
            }
            let json = to_json(&result);
            if let Some(path) = &e.out {
                write_atomic(path, &json)?;
            }
            out.write_all(&json).map_err(stdout_err)?;
        }
    }
    Ok(())
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                1
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let env = std::env::var(JOBS_ENV).ok();
    let jobs = match resolve_jobs(cli.jobs, env.as_deref()) {
        Ok(j) => j,
        Err(m) => {
            let _ = writeln!(err, "error: {m}");
            return 1;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker pool: {e}");
            return 1;
        }
    };
    let (mut buf_out, mut buf_err) = (Vec::new(), Vec::new());
    let result = pool.install(|| dispatch(cli.command, &mut buf_out, &mut buf_err));
    let _ = out.write_all(&buf_out);
    let _ = err.write_all(&buf_err);
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Convenience for tests and embedding: captures stdout and stderr.
pub fn run_captured<I, T>(args: I) -> (i32, Vec<u8>, Vec<u8>)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(args, &mut out, &mut err);
    (code, out, err)
}
