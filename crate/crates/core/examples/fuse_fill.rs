//! Harmonic fill of a hole in a gradient image.
//!
//! cargo run --example fuse_fill -- [out.png]

use tryon_geom::fuse::diffusion_fill_float;
use tryon_geom::imaging::{BinaryMask, Raster};

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "fuse_fill.png".into());
    let (w, h) = (64, 48);
    let img = Raster::from_fn(w, h, |x, y| [(x * 4) as u8, (y * 5) as u8, 128 + ((x + y) % 2 * 40) as u8])?;
    let hole = BinaryMask::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 - 32.0, y as f64 - 24.0);
        dx * dx / 300.0 + dy * dy / 120.0 < 1.0
    })?;
    let punched = tryon_geom::imaging::mask_apply(&img, &hole.not())?;

    let (filled, stats) = diffusion_fill_float(&punched.to_float(), &hole, 1e-4, 20_000)?;
    println!(
        "filled {} pixels in {} sweeps (last change {:.1e}, converged {})",
        hole.count(),
        stats.iterations,
        stats.last_change,
        stats.converged
    );
    filled.to_raster().save_png(&out)?;
    println!("wrote {out}");
    Ok(())
}
