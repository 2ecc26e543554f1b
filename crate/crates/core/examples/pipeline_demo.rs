//! End to end on the synthetic dataset: write scenes, score, compose, evaluate.
//!
//! cargo run --release --example pipeline_demo -- [work_dir]

use std::path::PathBuf;

use tryon_geom::cli::{cmd_compose, cmd_eval, cmd_score, Manifest, RunConfig};
use tryon_geom::demo::write_demo_dataset;

fn main() -> anyhow::Result<()> {
    let work = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "pipeline_demo".into()));
    let manifest = write_demo_dataset(&work.join("data"), 4, 96, 128)?;
    let manifest = Manifest::load(&manifest)?;
    let cfg = RunConfig {
        width: 96,
        height: 128,
        parallel: 2,
        ..RunConfig::default()
    };

    let scores = cmd_score(&manifest, &cfg)?;
    for e in &scores.entries {
        println!("{}: C = {:.2} {}", e.id, e.complexity.unwrap_or(f64::NAN), e.difficulty.map_or("-", |d| d.as_str()));
    }

    let out = work.join("composed");
    let composed = cmd_compose(&manifest, &cfg, &out)?;
    for e in &composed.entries {
        if let Some(s) = &e.stats {
            println!(
                "{}: fit L4 {:.4}, generated {} px, preserved exact {}",
                e.id, s.fit_l4, s.generated_pixels, s.preserved_exact
            );
        }
    }

    let report = cmd_eval(&manifest, &out, &cfg)?;
    print!("{}", report.table());
    println!("outputs in {}", out.display());
    Ok(())
}
