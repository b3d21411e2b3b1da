mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use pcdm_core::baselines::ssim;
use pcdm_core::eval::{decompose_distortion, evaluate, load_manifest, score_pair, EvalOptions, LogisticForm, Metric};
use pcdm_core::imageio::{load_image, save_grayscale_map, save_image};
use pcdm_core::pcdm::{pcdm_map, pcdm_score};

use config::PipelineArgs;

#[derive(Parser, Debug)]
#[command(name = "pcdm", version, about = "Full-reference image quality metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum MetricArg {
    Pcdm,
    Psnr,
    Ssim,
    De2000,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Pcdm => Metric::Pcdm,
            MetricArg::Psnr => Metric::Psnr,
            MetricArg::Ssim => Metric::Ssim,
            MetricArg::De2000 => Metric::De2000,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MapMetric {
    Pcdm,
    Ssim,
}

#[derive(ValueEnum, Clone, Copy, Debug, Default)]
enum FormArg {
    #[default]
    Standard,
    AsPrinted,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Score a distorted image against its reference.
    Score {
        #[arg(long = "ref", value_name = "PATH")]
        reference: PathBuf,
        #[arg(long = "dist", value_name = "PATH")]
        distorted: PathBuf,
        #[arg(long, value_enum, default_value = "pcdm")]
        metric: MetricArg,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Write a per-pixel distortion map as a grayscale PNG.
    Map {
        #[arg(long = "ref", value_name = "PATH")]
        reference: PathBuf,
        #[arg(long = "dist", value_name = "PATH")]
        distorted: PathBuf,
        #[arg(long, value_enum, default_value = "pcdm")]
        metric: MapMetric,
        #[arg(long, value_name = "PNG")]
        out: PathBuf,
        /// Export 1 − value for PCDM, so brighter means more similar.
        #[arg(long)]
        residual: bool,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Evaluate a metric over a dataset manifest against DMOS.
    Eval {
        /// CSV with header ref,dist,dmos,class.
        #[arg(long, value_name = "CSV")]
        manifest: PathBuf,
        #[arg(long, value_enum)]
        metric: MetricArg,
        #[arg(long, value_name = "DIR")]
        out_dir: PathBuf,
        /// Logistic core used for the score-to-DMOS mapping.
        #[arg(long, value_enum, default_value = "standard")]
        form: FormArg,
        /// Worker threads for scoring (default: logical cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Split a distortion into intensity-only and chroma-only images.
    Decompose {
        #[arg(long = "ref", value_name = "PATH")]
        reference: PathBuf,
        #[arg(long = "dist", value_name = "PATH")]
        distorted: PathBuf,
        #[arg(long, value_name = "PNG")]
        out_intensity: PathBuf,
        #[arg(long, value_name = "PNG")]
        out_chroma: PathBuf,
    },
}

fn load_pair(reference: &PathBuf, distorted: &PathBuf) -> Result<(pcdm_core::RgbImage, pcdm_core::RgbImage)> {
    let r = load_image(reference).with_context(|| format!("loading {}", reference.display()))?;
    let d = load_image(distorted).with_context(|| format!("loading {}", distorted.display()))?;
    Ok((r, d))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Score { reference, distorted, metric, pipeline } => {
            let cfg = pipeline.resolve()?;
            let (r, d) = load_pair(&reference, &distorted)?;
            let metric = Metric::from(metric);
            if metric == Metric::Pcdm {
                let s = pcdm_score(&r, &d, &cfg)?;
                println!("metric={metric} score={:.6} residual={:.6}", s.score, s.residual);
            } else {
                let s = score_pair(metric, &r, &d, &cfg)?;
                println!("metric={metric} score={s:.6}");
            }
        }
        Command::Map { reference, distorted, metric, out, residual, pipeline } => {
            let cfg = pipeline.resolve()?;
            let (r, d) = load_pair(&reference, &distorted)?;
            let grid = match metric {
                MapMetric::Pcdm => {
                    let map = pcdm_map(&r, &d, &cfg)?;
                    if residual {
                        map.residual()
                    } else {
                        map.values().clone()
                    }
                }
                MapMetric::Ssim => {
                    if residual {
                        bail!("--residual applies to pcdm maps only");
                    }
                    ssim(&r, &d)?.export_map()
                }
            };
            save_grayscale_map(&grid, &out).with_context(|| format!("writing {}", out.display()))?;
            println!("map={} width={} height={}", out.display(), grid.width(), grid.height());
        }
        Command::Eval { manifest, metric, out_dir, form, jobs, pipeline } => {
            if let Some(n) = jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .context("configuring worker threads")?;
            }
            let opts = EvalOptions {
                pcdm: pipeline.resolve()?,
                form: match form {
                    FormArg::Standard => LogisticForm::Standard,
                    FormArg::AsPrinted => LogisticForm::AsPrinted,
                },
            };
            let manifest = load_manifest(&manifest)?;
            let metric = Metric::from(metric);
            let report = evaluate(&manifest, metric, &opts)?;
            std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            for (suffix, body) in [
                ("report.txt", report.to_text()),
                ("report.csv", report.to_csv()),
                ("scatter.csv", report.scatter_csv()),
            ] {
                let path = out_dir.join(format!("{metric}_{suffix}"));
                std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
            }
            if report.excluded > 0 {
                eprintln!("warning: {} pair(s) excluded (non-finite score)", report.excluded);
            }
            let all = report.overall();
            println!("metric={metric} n={} cc={:.6} rmse={:.6} srocc={:.6}", all.n, all.pearson_cc, all.rmse, all.spearman_rho);
        }
        Command::Decompose { reference, distorted, out_intensity, out_chroma } => {
            let (r, d) = load_pair(&reference, &distorted)?;
            let (intensity, chroma) = decompose_distortion(&r, &d)?;
            save_image(&intensity, &out_intensity).with_context(|| format!("writing {}", out_intensity.display()))?;
            save_image(&chroma, &out_chroma).with_context(|| format!("writing {}", out_chroma.display()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with status 2 on usage errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
