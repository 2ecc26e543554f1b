//! Warps a checkerboard with a perturbed control lattice and writes the result.
//!
//! cargo run --example tps_warp -- [out.png]

use tryon_geom::imaging::Raster;
use tryon_geom::tps::{build_system, solve_coefficients, warp_image, ControlGrid, WarpParams};

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "tps_warp.png".into());
    let (w, h) = (192, 256);
    let board = Raster::from_fn(w, h, |x, y| if (x / 16 + y / 16) % 2 == 0 { [240, 240, 240] } else { [30, 60, 120] })?;

    let grid = ControlGrid::regular(5)?;
    let mut theta = grid.points().to_vec();
    // Pull the centre point up and to the left; its neighbours follow smoothly.
    theta[grid.index(2, 2)] = [-0.12, -0.1];
    let params = WarpParams::new(grid.clone(), theta.clone())?;

    let coef = solve_coefficients(&build_system(&grid)?, &theta)?;
    println!("side-condition residual {:.2e}", coef.side_condition_residual());
    println!("f(centre) = {:?}", coef.evaluate([0.0, 0.0]));

    let identity = warp_image(&board, &WarpParams::identity(grid))?;
    assert!(identity == board, "identity warp must be bit-exact");

    warp_image(&board, &params)?.save_png(&out)?;
    println!("wrote {out}");
    println!("{}", params.to_json());
    Ok(())
}
