use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tryon_geom::cli::{cmd_compose, cmd_eval, cmd_score, Manifest, RunConfig};
use tryon_geom::demo::write_demo_dataset;
use tryon_geom::imaging::Raster;
use tryon_geom::tps::{warp_image, ControlGrid, WarpParams};
use tryon_geom::warpfit::fit_warp;

#[derive(Parser)]
#[command(name = "tryon", version, about = "Virtual try-on geometry pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (or report file for warp-fit).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    oracle_layout: bool,
    #[arg(long)]
    grid_k: Option<usize>,
    #[arg(long)]
    lambda_r: Option<f64>,
    #[arg(long)]
    lambda_s: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    parallel: Option<usize>,
}

impl Common {
    fn run_config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if self.oracle_layout {
            cfg.oracle_layout = true;
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = self.grid_k {
            cfg.grid_k = v;
        }
        if let Some(v) = self.lambda_r {
            cfg.constraint.lambda_r = v;
        }
        if let Some(v) = self.lambda_s {
            cfg.constraint.lambda_s = v;
        }
        if let Some(v) = self.delta {
            cfg.constraint.delta = v;
        }
        if let Some(v) = self.iters {
            cfg.fit.iterations = v;
        }
        if let Some(v) = self.lr {
            cfg.fit.learning_rate = v;
        }
        if let Some(v) = self.parallel {
            cfg.parallel = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Complexity score and difficulty of every entry.
    Score {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Difficulty counts only.
    Partition {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fit a single source raster onto a target raster.
    WarpFit {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Also write the warped source here.
        #[arg(long)]
        warped: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Compose try-on images for every entry.
    Compose {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// SSIM / L1 of composed outputs against the references.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        /// Directory holding `<id>.png` outputs.
        #[arg(long)]
        composed: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Write the synthetic demo dataset.
    Demo {
        #[arg(long, default_value_t = 5)]
        entries: usize,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        height: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
}

fn emit(out: Option<&Path>, name: &str, text: &str) -> anyhow::Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), text)?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    match cli.command {
        Command::Score { manifest, common } => {
            let cfg = common.run_config()?;
            let report = cmd_score(&Manifest::load(&manifest)?, &cfg)?;
            emit(cfg.out.as_deref(), "score_report.json", &serde_json::to_string_pretty(&report)?)?;
            eprintln!(
                "easy={} medium={} hard={} failed={}",
                report.counts.easy, report.counts.medium, report.counts.hard, report.failed
            );
            Ok(report.all_ok())
        }
        Command::Partition { manifest, common } => {
            let cfg = common.run_config()?;
            let report = cmd_score(&Manifest::load(&manifest)?, &cfg)?;
            let doc = serde_json::json!({ "counts": report.counts, "failed": report.failed });
            emit(cfg.out.as_deref(), "partition.json", &serde_json::to_string_pretty(&doc)?)?;
            Ok(report.all_ok())
        }
        Command::WarpFit {
            source,
            target,
            warped,
            common,
        } => {
            let cfg = common.run_config()?;
            let src = Raster::load_png(&source)?;
            let dst = Raster::load_png(&target)?;
            let init = WarpParams::identity(ControlGrid::regular(cfg.grid_k)?);
            let report = fit_warp(&src, &dst, &cfg.constraint, &cfg.fit, &init)?;
            let text = serde_json::to_string_pretty(&report)?;
            match &cfg.out {
                Some(p) => std::fs::write(p, text)?,
                None => println!("{text}"),
            }
            if let Some(p) = warped {
                warp_image(&src, &report.params)?.save_png(p)?;
            }
            let last = report.final_objective();
            eprintln!("total={:.6} l3={:.6} l4={:.6} converged={}", last.total, last.l3, last.l4, report.converged);
            Ok(true)
        }
        Command::Compose { manifest, common } => {
            let cfg = common.run_config()?;
            let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("composed"));
            let report = cmd_compose(&Manifest::load(&manifest)?, &cfg, &out)?;
            for e in &report.entries {
                if let Some(err) = &e.error {
                    eprintln!("{}: {err}", e.id);
                }
            }
            eprintln!("composed {} entries, {} failed -> {}", report.entries.len(), report.failed, out.display());
            Ok(report.all_ok())
        }
        Command::Eval {
            manifest,
            composed,
            common,
        } => {
            let cfg = common.run_config()?;
            let report = cmd_eval(&Manifest::load(&manifest)?, &composed, &cfg)?;
            emit(cfg.out.as_deref(), "eval_report.json", &serde_json::to_string_pretty(&report)?)?;
            eprint!("{}", report.table());
            Ok(report.all_ok())
        }
        Command::Demo {
            entries,
            width,
            height,
            common,
        } => {
            let cfg = common.run_config()?;
            let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("demo"));
            let path = write_demo_dataset(&out, entries, width.unwrap_or(cfg.width), height.unwrap_or(cfg.height))?;
            eprintln!("wrote {}", path.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
