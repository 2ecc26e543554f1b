//! Fits a striped garment onto a plain silhouette with and without the
//! second-order lattice penalty and compares how much each fit bends.
//!
//! cargo run --release --example constraint_fit

use tryon_geom::imaging::Raster;
use tryon_geom::tps::{pixel_to_norm, ControlGrid, WarpParams};
use tryon_geom::warpfit::{constraint_l3, fit_warp, ConstraintConfig, FitConfig};

fn paint(w: usize, h: usize, f: impl Fn(f64, f64) -> [u8; 3]) -> Raster {
    Raster::from_fn(w, h, |x, y| f(pixel_to_norm(x as f64, w), pixel_to_norm(y as f64, h))).unwrap()
}

fn main() -> anyhow::Result<()> {
    let (w, h) = (96, 128);
    let inside = |x: f64, y: f64| x.abs() < 0.72 && y.abs() < 0.74;
    let garment = paint(w, h, |x, y| {
        if !inside(x, y) {
            [0; 3]
        } else if ((x + 1.0) * 12.0).floor() as i64 % 2 == 0 {
            [255; 3]
        } else {
            [40; 3]
        }
    });
    let silhouette = paint(w, h, |x, y| if inside(x / 1.1, y / 0.95) { [255; 3] } else { [0; 3] });

    let init = WarpParams::identity(ControlGrid::regular(5)?);
    let fit = FitConfig {
        learning_rate: 2e-3,
        ..FitConfig::default()
    };
    let measure = ConstraintConfig::default();
    for (name, ccfg) in [("constrained", measure), ("unconstrained", ConstraintConfig::unconstrained())] {
        let report = fit_warp(&garment, &silhouette, &ccfg, &fit, &init)?;
        let last = report.final_objective();
        println!(
            "{name:>13}: L4 {:.4} -> {:.4}, lattice penalty {:.4e}",
            report.trajectory[0].l4,
            last.l4,
            constraint_l3(&report.params, &measure)?
        );
    }
    Ok(())
}
