//! Command-line front end: single-image enhancement, batch benchmarking,
//! tile-size and metric sweeps, and clip-factor search traces.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gclahe::bench::{self, Algorithm, RunConfig, SuiteOutcome};
use gclahe::clahe::{ClaheParams, ClipLimit};
use gclahe::metrics::Metric;
use gclahe::search::{explain_trace, SearchParams};
use gclahe::{ghe, pgm};

const EXIT_USAGE: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_TOTAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "gclahe",
    about = "Grayscale image enhancement: GHE, CLAHE, and an iterative clip-factor search, \
             with quality benchmarking over image sets",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enhance one image with one algorithm and write the result as PGM
    Enhance {
        /// Input image (PGM P5 or PNG)
        input: PathBuf,
        /// Algorithm: ghe, clahe, or gclahe
        #[arg(long, default_value = "gclahe")]
        algorithm: String,
        #[command(flatten)]
        params: SharedParams,
        /// Output directory for the enhanced image
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Enhance a sampled image set, evaluate quality, and write a CSV report
    Bench {
        /// Input images and/or directories containing .pgm / .png files
        inputs: Vec<PathBuf>,
        /// Algorithm: ghe, clahe, gclahe, or all
        #[arg(long, default_value = "all")]
        algorithm: String,
        #[command(flatten)]
        params: SharedParams,
        #[command(flatten)]
        sampling: SamplingArgs,
        /// Output directory for enhanced images and the report
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report file name
        #[arg(long, default_value = "report.csv")]
        report: String,
    },
    /// Run the clip-factor search at several tile sizes and aggregate per size
    SweepTiles {
        inputs: Vec<PathBuf>,
        /// Comma-separated tile grid sizes, e.g. 4,8,16,32
        #[arg(long, value_delimiter = ',', default_value = "4,8,16,32")]
        sizes: Vec<u32>,
        #[command(flatten)]
        params: SharedParams,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "sweep_tiles.csv")]
        report: String,
    },
    /// Run the clip-factor search under several similarity metrics
    SweepMetrics {
        inputs: Vec<PathBuf>,
        /// Comma-separated metric ids, e.g. ssim,psnr,mse,sci,rmse,mae
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "ssim,psnr,mse,sci,rmse,mae"
        )]
        metrics: Vec<String>,
        #[command(flatten)]
        params: SharedParams,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "sweep_metrics.csv")]
        report: String,
    },
    /// Print the per-iteration record of the clip-factor search on one image
    Trace {
        input: PathBuf,
        #[command(flatten)]
        params: SharedParams,
    },
}

#[derive(Args)]
struct SharedParams {
    /// Tiles per axis for CLAHE and the clip-factor search
    #[arg(long, default_value_t = 8)]
    ts: u32,
    /// CLAHE clip factor (multiplier of the average per-tile bin height)
    #[arg(long, default_value_t = 2.0)]
    clip: f64,
    /// Starting clip factor for the iterative search
    #[arg(long, default_value_t = 3)]
    initial_clip: u32,
    /// Similarity metric: ssim, psnr, mse, sci, rmse, or mae
    #[arg(long, default_value = "ssim")]
    metric: String,
    /// Canny hysteresis low threshold
    #[arg(long, default_value_t = 50.0)]
    canny_low: f64,
    /// Canny hysteresis high threshold
    #[arg(long, default_value_t = 150.0)]
    canny_high: f64,
}

#[derive(Args)]
struct SamplingArgs {
    /// Deterministic sampling seed (recorded in the report)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of images to sample from the input set
    #[arg(long, default_value_t = 100)]
    sample: usize,
}

impl SharedParams {
    fn metric(&self) -> Result<Metric> {
        Metric::from_str(&self.metric).map_err(|e| anyhow::anyhow!(e.to_string()))
    }

    fn clahe(&self) -> ClaheParams {
        ClaheParams::new(self.ts, ClipLimit::Factor(self.clip))
    }

    fn gclahe(&self) -> Result<SearchParams> {
        Ok(SearchParams {
            grid_size: self.ts,
            initial_clip_factor: self.initial_clip,
            metric: self.metric()?,
        })
    }
}

fn build_config(
    inputs: Vec<PathBuf>,
    params: &SharedParams,
    sampling: &SamplingArgs,
    out: Option<PathBuf>,
    report: String,
) -> Result<RunConfig> {
    if sampling.sample < 1 {
        bail!("--sample must be at least 1");
    }
    Ok(RunConfig {
        inputs,
        output_dir: out,
        algorithms: Algorithm::ALL.to_vec(),
        clahe: params.clahe(),
        gclahe: params.gclahe()?,
        canny_low: params.canny_low,
        canny_high: params.canny_high,
        sample_size: sampling.sample,
        seed: sampling.seed,
        report_name: report,
    })
}

/// Partial skips exit 2; an empty result set exits 3.
fn report_outcome(outcome: &SuiteOutcome) -> ExitCode {
    for skip in &outcome.skipped {
        eprintln!("skipped {}: {}", skip.what, skip.reason);
    }
    let data_rows = outcome.rows.iter().filter(|r| r.image != "mean").count();
    println!(
        "wrote {} ({} data rows, {} skipped)",
        outcome.csv_path.display(),
        data_rows,
        outcome.skipped.len()
    );
    if data_rows == 0 {
        ExitCode::from(EXIT_TOTAL)
    } else if outcome.skipped.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PARTIAL)
    }
}

fn run_enhance(
    input: PathBuf,
    algorithm: String,
    params: SharedParams,
    out: PathBuf,
) -> Result<ExitCode> {
    let image = bench::ingest(&input).context("reading input")?;
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".to_string());

    let (label, enhanced) = match algorithm.as_str() {
        "ghe" => ("ghe", ghe::equalize(&image)),
        "clahe" => ("clahe", gclahe::clahe::enhance(&image, &params.clahe())?),
        "gclahe" => {
            let outcome = gclahe::search::run(&image, &params.gclahe()?)?;
            println!(
                "chosen clip factor {} ({} score {:.6})",
                outcome.chosen_clip_factor, outcome.trace.metric, outcome.trace.final_score
            );
            ("gclahe", outcome.image)
        }
        other => bail!("unknown algorithm {other:?} (valid: ghe, clahe, gclahe)"),
    };

    std::fs::create_dir_all(&out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    let path = out.join(format!("{stem}__{label}.pgm"));
    pgm::write(&enhanced, &path).context("writing output")?;
    println!("wrote {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn run_command(command: Command) -> Result<ExitCode> {
    match command {
        Command::Enhance {
            input,
            algorithm,
            params,
            out,
        } => run_enhance(input, algorithm, params, out),
        Command::Bench {
            inputs,
            algorithm,
            params,
            sampling,
            out,
            report,
        } => {
            let mut config = build_config(inputs, &params, &sampling, out, report)?;
            config.algorithms = match algorithm.as_str() {
                "all" => Algorithm::ALL.to_vec(),
                other => vec![Algorithm::from_str(other).map_err(|e| anyhow::anyhow!(e))?],
            };
            let outcome = bench::run_suite(&config)?;
            Ok(report_outcome(&outcome))
        }
        Command::SweepTiles {
            inputs,
            sizes,
            params,
            sampling,
            out,
            report,
        } => {
            if sizes.is_empty() {
                bail!("--sizes needs at least one tile size");
            }
            let config = build_config(inputs, &params, &sampling, out, report)?;
            let outcome = bench::sweep_tile_size(&config, &sizes)?;
            Ok(report_outcome(&outcome))
        }
        Command::SweepMetrics {
            inputs,
            metrics,
            params,
            sampling,
            out,
            report,
        } => {
            let parsed: Result<Vec<Metric>> = metrics
                .iter()
                .map(|m| Metric::from_str(m).map_err(|e| anyhow::anyhow!(e.to_string())))
                .collect();
            let config = build_config(inputs, &params, &sampling, out, report)?;
            let outcome = bench::sweep_metric(&config, &parsed?)?;
            Ok(report_outcome(&outcome))
        }
        Command::Trace { input, params } => {
            let image = bench::ingest(&input).context("reading input")?;
            let outcome = gclahe::search::run(&image, &params.gclahe()?)?;
            print!("{}", explain_trace(&outcome.trace));
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not usage errors.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(EXIT_USAGE);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run_command(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let total = e.downcast_ref::<bench::BenchError>().is_some_and(|b| {
                matches!(
                    b,
                    bench::BenchError::NoInputs | bench::BenchError::Io { .. }
                )
            });
            if total {
                ExitCode::from(EXIT_TOTAL)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}
