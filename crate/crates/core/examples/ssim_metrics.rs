//! SSIM and mean L1 between two PNGs, or between a synthetic image and
//! progressively degraded copies of it.
//!
//! cargo run --example ssim_metrics -- [a.png b.png]

use tryon_geom::imaging::Raster;
use tryon_geom::metrics::{mean_l1, ssim};

fn main() -> anyhow::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if let [a, b] = args.as_slice() {
        let (a, b) = (Raster::load_png(a)?, Raster::load_png(b)?);
        println!("ssim {:.6}  l1 {:.6}", ssim(&a, &b)?, mean_l1(&a, &b)?);
        return Ok(());
    }
    let base = Raster::from_fn(64, 64, |x, y| {
        let v = (128.0 + 90.0 * ((x as f64) / 5.0).sin() * ((y as f64) / 7.0).cos()) as u8;
        [v, v / 2, 255 - v]
    })?;
    for amount in [0u8, 8, 32, 96] {
        let noisy = Raster::from_fn(64, 64, |x, y| {
            let n = ((x * 7919 + y * 104_729) % 256) as u8;
            base.pixel(x, y).map(|c| c.saturating_add(n % (amount.max(1))))
        })?;
        println!("noise {amount:>3}: ssim {:.4}  l1 {:.4}", ssim(&base, &noisy)?, mean_l1(&base, &noisy)?);
    }
    Ok(())
}
