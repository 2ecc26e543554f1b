use nalgebra::{DMatrix, DVector};

use tryon_geom::fuse::{diffusion_fill, diffusion_fill_float};
use tryon_geom::imaging::{BinaryMask, FloatRaster, Raster};

#[test]
fn hole_in_linear_gradient_matches_direct_solve() {
    let (w, h) = (12, 12);
    let plane = |x: usize, y: usize| 0.05 + 0.04 * x as f64 + 0.03 * y as f64;
    let mut img = FloatRaster::zeros(w, h).unwrap();
    for y in 0..h {
        for x in 0..w {
            img.set_pixel(x, y, [plane(x, y), 1.0 - plane(x, y), 0.5]);
        }
    }
    let region = BinaryMask::from_fn(w, h, |x, y| (3..9).contains(&x) && (3..9).contains(&y)).unwrap();
    let ids: Vec<(usize, usize)> = (0..h).flat_map(|y| (0..w).map(move |x| (x, y))).filter(|&(x, y)| region.get(x, y)).collect();
    let slot = |x: usize, y: usize| ids.iter().position(|&p| p == (x, y));

    let n = ids.len();
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for (i, &(x, y)) in ids.iter().enumerate() {
        for (nx, ny) in [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)] {
            a[(i, i)] += 1.0;
            match slot(nx, ny) {
                Some(j) => a[(i, j)] -= 1.0,
                None => b[i] += img.pixel(nx, ny)[0],
            }
        }
    }
    let exact = a.lu().solve(&b).unwrap();

    let tol = 1e-4;
    let (filled, stats) = diffusion_fill_float(&img, &region, tol, 100_000).unwrap();
    assert!(stats.converged);
    for (i, &(x, y)) in ids.iter().enumerate() {
        let got = filled.pixel(x, y)[0];
        assert!((got - exact[i]).abs() < tol, "({x},{y}): {got} vs {}", exact[i]);
        // The plane is harmonic, so the solve reproduces it.
        assert!((exact[i] - plane(x, y)).abs() < 1e-12);
        assert!((filled.pixel(x, y)[2] - 0.5).abs() < tol);
    }
}

#[test]
fn eight_bit_fill_keeps_known_pixels() {
    let img = Raster::from_fn(10, 8, |x, y| [(x * 25) as u8, (y * 30) as u8, 77]).unwrap();
    let region = BinaryMask::from_fn(10, 8, |x, y| x == 0 || (4..7).contains(&x) && (2..5).contains(&y)).unwrap();
    let out = diffusion_fill(&img, &region, 1e-4, 10_000).unwrap();
    for y in 0..8 {
        for x in 0..10 {
            if !region.get(x, y) {
                assert_eq!(out.pixel(x, y), img.pixel(x, y));
            } else {
                assert_eq!(out.pixel(x, y)[2], 77);
            }
        }
    }
    // Left column is filled from its right neighbours only.
    for y in 0..8 {
        assert!(out.pixel(0, y)[0] <= 25 + 1);
    }
}
