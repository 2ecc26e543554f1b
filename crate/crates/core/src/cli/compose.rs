use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ensure_dims, write_json, Manifest, ManifestEntry, RunConfig};
use crate::error::{io_err, Error, Result};
use crate::fuse::{assemble_tryon, FillStats};
use crate::imaging::{mask_apply, AlphaMap, BinaryMask, LabelMap, Raster};
use crate::layout::{alpha_composite, preserved_image, CompositeLayout, LayoutBundle};
use crate::score::PoseKeypoints;
use crate::tps::{warp_image, ControlGrid, WarpParams};
use crate::warpfit::{fit_warp, FitReport};

/// What the warp was fitted against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitTarget {
    /// Clothes image against the reference's own clothes pixels (paired mode).
    Rgb,
    /// Clothes mask against the synthesized clothes mask.
    Mask,
}

/// Everything produced for one entry.
#[derive(Debug, Clone)]
pub struct ComposedEntry {
    pub image: Raster,
    pub fit: FitReport,
    pub layout: CompositeLayout,
    pub fill: FillStats,
    pub stats: ComposeStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposeStats {
    pub fit_target: FitTarget,
    pub fit_total: f64,
    pub fit_l3: f64,
    pub fit_l4: f64,
    pub fit_converged: bool,
    pub preserved_pixels: usize,
    pub clothes_pixels: usize,
    pub generated_pixels: usize,
    pub residual_pixels: usize,
    pub fill_iterations: usize,
    /// Every preserve-mask pixel equals the reference byte-for-byte.
    pub preserved_exact: bool,
    /// Paired mode only: mean absolute error against the reference under the clothes mask.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clothes_l4: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clothes_l4_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposeEntry {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stats: Option<ComposeStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComposeReport {
    pub entries: Vec<ComposeEntry>,
    pub failed: usize,
}

impl ComposeReport {
    pub fn all_ok(&self) -> bool {
        self.failed == 0
    }
}

fn load_alpha(path: &Path) -> Result<AlphaMap> {
    let img = image::open(path)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?
        .to_luma8();
    let (w, h) = img.dimensions();
    AlphaMap::new(
        w as usize,
        h as usize,
        img.into_raw().into_iter().map(|v| f64::from(v) / 255.0).collect(),
    )
}

fn masked_mean_abs(a: &Raster, b: &Raster, m: &BinaryMask) -> Option<f64> {
    let n = m.count();
    if n == 0 {
        return None;
    }
    let mut sum = 0.0;
    for (p, &on) in m.bits().iter().enumerate() {
        if on {
            let (x, y) = (p % a.width(), p / a.width());
            let (pa, pb) = (a.pixel(x, y), b.pixel(x, y));
            for c in 0..3 {
                sum += (f64::from(pa[c]) - f64::from(pb[c])).abs() / 255.0;
            }
        }
    }
    Some(sum / (3 * n) as f64)
}

/// Runs the full pipeline on one entry without writing anything.
pub fn compose_entry(entry: &ManifestEntry, config: &RunConfig) -> Result<ComposedEntry> {
    let reference = Raster::load_png(&entry.reference)?;
    ensure_dims("reference", reference.dims(), config)?;
    let parse = LabelMap::load_png(&entry.parse)?;
    ensure_dims("parse", parse.dims(), config)?;
    let pose = PoseKeypoints::load(&entry.pose)?;
    let clothes = Raster::load_png(&entry.clothes)?;
    ensure_dims("clothes image", clothes.dims(), config)?;
    let clothes_mask = BinaryMask::load_png(&entry.clothes_mask)?;
    ensure_dims("clothes mask", clothes_mask.dims(), config)?;

    let bundle = if config.oracle_layout {
        LayoutBundle::oracle(parse, Some(pose))
    } else {
        let (Some(sb), Some(sc)) = (&entry.synth_body, &entry.synth_clothes) else {
            return Err(Error::Manifest(format!(
                "entry {:?} has no synthesized layout; pass --oracle-layout or add synth_body/synth_clothes",
                entry.id
            )));
        };
        let synth_body = LabelMap::load_png(sb)?;
        let synth_clothes = BinaryMask::load_png(sc)?;
        LayoutBundle::new(parse, synth_body, synth_clothes, Some(pose))?
    };
    let layout = bundle.compose()?;

    let product = mask_apply(&clothes, &clothes_mask)?;
    let (fit_target, fit_src, fit_dst) = if config.oracle_layout {
        (FitTarget::Rgb, product.clone(), mask_apply(&reference, &bundle.synth_clothes)?)
    } else {
        (FitTarget::Mask, clothes_mask.to_raster(), bundle.synth_clothes.to_raster())
    };
    let grid = ControlGrid::regular(config.grid_k)?;
    let fit = fit_warp(&fit_src, &fit_dst, &config.constraint, &config.fit, &WarpParams::identity(grid))?;
    let warped = warp_image(&product, &fit.params)?;

    let refined = match &entry.refined {
        Some(p) => {
            let r = Raster::load_png(p)?;
            ensure_dims("refined clothes", r.dims(), config)?;
            r
        }
        None => warped.clone(),
    };
    let alpha = match &entry.alpha {
        Some(p) => load_alpha(p)?,
        None => AlphaMap::constant(config.width, config.height, 0.0)?,
    };
    let refined = alpha_composite(&warped, &refined, &alpha)?;

    let reference_minus_clothes = mask_apply(&reference, &bundle.clothes.not())?;
    let preserved = preserved_image(&reference_minus_clothes, &bundle.synth_clothes)?;
    let assembled = assemble_tryon(&preserved, &refined, &layout, config.fill_tol, config.fill_max_iters)?;
    let image = assembled.image;

    let preserved_exact = layout
        .preserve
        .bits()
        .iter()
        .enumerate()
        .filter(|(_, &on)| on)
        .all(|(p, _)| {
            let (x, y) = (p % image.width(), p / image.width());
            image.pixel(x, y) == reference.pixel(x, y)
        });
    let clothes_l4 = if config.oracle_layout {
        masked_mean_abs(&image, &reference, &layout.clothes)
    } else {
        None
    };
    let last = fit.final_objective();
    let stats = ComposeStats {
        fit_target,
        fit_total: last.total,
        fit_l3: last.l3,
        fit_l4: last.l4,
        fit_converged: fit.converged,
        preserved_pixels: layout.preserve.count(),
        clothes_pixels: layout.clothes.count(),
        generated_pixels: layout.generate.count(),
        residual_pixels: layout.residual.count(),
        fill_iterations: assembled.fill.iterations,
        preserved_exact,
        clothes_l4_ok: clothes_l4.map(|v| v <= config.clothes_l4_threshold),
        clothes_l4,
    };
    Ok(ComposedEntry {
        image,
        fit,
        layout,
        fill: assembled.fill,
        stats,
    })
}

fn compose_and_write(entry: &ManifestEntry, config: &RunConfig, out_dir: &Path) -> ComposeEntry {
    let run = || -> Result<(String, ComposeStats)> {
        let done = compose_entry(entry, config)?;
        let name = format!("{}.png", entry.id);
        done.image.save_png(out_dir.join(&name))?;
        write_json(&out_dir.join(format!("{}.fit.json", entry.id)), &done.fit)?;
        Ok((name, done.stats))
    };
    match run() {
        Ok((name, stats)) => ComposeEntry {
            id: entry.id.clone(),
            output: Some(name),
            stats: Some(stats),
            error: None,
        },
        Err(e) => ComposeEntry {
            id: entry.id.clone(),
            output: None,
            stats: None,
            error: Some(e.to_string()),
        },
    }
}

/// Composes every entry into `out_dir` (`<id>.png`, `<id>.fit.json`, `compose_report.json`).
pub fn cmd_compose(manifest: &Manifest, config: &RunConfig, out_dir: &Path) -> Result<ComposeReport> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut entries = config.run_entries(&manifest.entries, |e| compose_and_write(e, config, out_dir))?;
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    let failed = entries.iter().filter(|e| e.error.is_some()).count();
    let report = ComposeReport { entries, failed };
    write_json(&out_dir.join("compose_report.json"), &report)?;
    Ok(report)
}
