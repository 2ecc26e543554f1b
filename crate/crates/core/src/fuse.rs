//! Try-on assembly with a harmonic fill of the generation region.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::imaging::{ensure_same_dims, BinaryMask, FloatRaster, Raster, CHANNELS};
use crate::layout::CompositeLayout;

pub const DEFAULT_FILL_TOL: f64 = 1e-4;
pub const DEFAULT_FILL_MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FillStats {
    pub iterations: usize,
    /// Largest per-sample change of the last sweep.
    pub last_change: f64,
    pub converged: bool,
}

struct FillPlan {
    region: Vec<usize>,
    neighbours: Vec<[usize; 4]>,
    degree: Vec<usize>,
}

fn plan(width: usize, height: usize, region: &BinaryMask) -> Result<FillPlan> {
    let bits = region.bits();
    let mut seen = vec![false; bits.len()];
    let mut queue = VecDeque::new();
    let nbrs = |p: usize| {
        let (x, y) = (p % width, p / width);
        let mut out = [usize::MAX; 4];
        let mut n = 0;
        if x > 0 {
            out[n] = p - 1;
            n += 1;
        }
        if x + 1 < width {
            out[n] = p + 1;
            n += 1;
        }
        if y > 0 {
            out[n] = p - width;
            n += 1;
        }
        if y + 1 < height {
            out[n] = p + width;
            n += 1;
        }
        (out, n)
    };

    // Every 4-connected component needs at least one known neighbour.
    for start in 0..bits.len() {
        if !bits[start] || seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut anchored = false;
        while let Some(p) = queue.pop_front() {
            let (ns, n) = nbrs(p);
            for &q in &ns[..n] {
                if !bits[q] {
                    anchored = true;
                } else if !seen[q] {
                    seen[q] = true;
                    queue.push_back(q);
                }
            }
        }
        if !anchored {
            return Err(Error::NoKnownBoundary {
                x: start % width,
                y: start / width,
            });
        }
    }

    let region: Vec<usize> = (0..bits.len()).filter(|&p| bits[p]).collect();
    let (neighbours, degree) = region.iter().map(|&p| nbrs(p)).unzip();
    Ok(FillPlan {
        region,
        neighbours,
        degree,
    })
}

/// Solves the discrete Laplace equation inside `region` by Gauss-Seidel
/// sweeps, with the surrounding known pixels as Dirichlet data.
///
/// Iteration stops once the largest change of a sweep and the geometric
/// estimate of the remaining error (`change * rho / (1 - rho)`, with `rho`
/// the ratio of consecutive changes) both drop below `tol`, or after
/// `max_iters` sweeps. Pixels outside `region` are returned unchanged.
pub fn diffusion_fill_float(
    img: &FloatRaster,
    region: &BinaryMask,
    tol: f64,
    max_iters: usize,
) -> Result<(FloatRaster, FillStats)> {
    ensure_same_dims(img.dims(), region.dims())?;
    if !(tol > 0.0) {
        return Err(Error::Config(format!("fill tolerance must be positive (got {tol})")));
    }
    let (width, height) = img.dims();
    let plan = plan(width, height, region)?;
    let mut out = img.clone();
    if plan.region.is_empty() {
        return Ok((
            out,
            FillStats {
                iterations: 0,
                last_change: 0.0,
                converged: true,
            },
        ));
    }

    // Start from the mean of the known boundary values.
    let bits = region.bits();
    let mut seed = [0.0; CHANNELS];
    let mut seeds = 0usize;
    for (ns, &n) in plan.neighbours.iter().zip(&plan.degree) {
        for &q in &ns[..n] {
            if !bits[q] {
                for c in 0..CHANNELS {
                    seed[c] += img.data()[q * CHANNELS + c];
                }
                seeds += 1;
            }
        }
    }
    seed.iter_mut().for_each(|s| *s /= seeds as f64);
    let data = out.data_mut();
    for &p in &plan.region {
        data[p * CHANNELS..][..CHANNELS].copy_from_slice(&seed);
    }

    let mut prev_change = f64::INFINITY;
    let mut stats = FillStats {
        iterations: 0,
        last_change: f64::INFINITY,
        converged: false,
    };
    for it in 1..=max_iters {
        let mut change = 0.0f64;
        for ((&p, ns), &n) in plan.region.iter().zip(&plan.neighbours).zip(&plan.degree) {
            for c in 0..CHANNELS {
                let sum: f64 = ns[..n].iter().map(|&q| data[q * CHANNELS + c]).sum();
                let v = sum / n as f64;
                let slot = &mut data[p * CHANNELS + c];
                change = change.max((v - *slot).abs());
                *slot = v;
            }
        }
        stats.iterations = it;
        stats.last_change = change;
        let rho = if prev_change.is_finite() && prev_change > 0.0 {
            change / prev_change
        } else {
            0.0
        };
        let tail = if rho < 1.0 { change * rho / (1.0 - rho) } else { f64::INFINITY };
        if change < tol && tail < tol {
            stats.converged = true;
            break;
        }
        prev_change = change;
    }
    Ok((out, stats))
}

/// 8-bit wrapper around [`diffusion_fill_float`].
pub fn diffusion_fill(img: &Raster, region: &BinaryMask, tol: f64, max_iters: usize) -> Result<Raster> {
    let (filled, _) = diffusion_fill_float(&img.to_float(), region, tol, max_iters)?;
    let mut out = filled.to_raster();
    // Round-tripping through the float view is exact, but copy known pixels
    // explicitly so preservation never depends on it.
    for (p, &b) in region.bits().iter().enumerate() {
        if !b {
            out.set_pixel(p % img.width(), p / img.width(), img.pixel(p % img.width(), p / img.width()));
        }
    }
    Ok(out)
}

/// Output of [`assemble_tryon`].
#[derive(Debug, Clone)]
pub struct Assembled {
    pub image: Raster,
    pub fill: FillStats,
}

/// Pastes preserved and clothes pixels by role, then fills the generation
/// (and residual) region harmonically.
pub fn assemble_tryon(
    preserved: &Raster,
    refined_clothes: &Raster,
    comp: &CompositeLayout,
    tol: f64,
    max_iters: usize,
) -> Result<Assembled> {
    ensure_same_dims(preserved.dims(), refined_clothes.dims())?;
    ensure_same_dims(preserved.dims(), comp.preserve.dims())?;
    comp.validate()?;
    let (w, h) = preserved.dims();
    let mut out = Raster::filled(w, h, [0, 0, 0])?;
    for y in 0..h {
        for x in 0..w {
            if comp.preserve.get(x, y) {
                out.set_pixel(x, y, preserved.pixel(x, y));
            } else if comp.clothes.get(x, y) {
                out.set_pixel(x, y, refined_clothes.pixel(x, y));
            }
        }
    }
    let region = comp.fill_region();
    if region.is_empty() {
        return Ok(Assembled {
            image: out,
            fill: FillStats {
                iterations: 0,
                last_change: 0.0,
                converged: true,
            },
        });
    }
    let (filled, fill) = diffusion_fill_float(&out.to_float(), &region, tol, max_iters)?;
    let filled = filled.to_raster();
    for y in 0..h {
        for x in 0..w {
            if region.get(x, y) {
                out.set_pixel(x, y, filled.pixel(x, y));
            }
        }
    }
    Ok(Assembled { image: out, fill })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_boundary_fills_exactly() {
        let img = Raster::filled(7, 6, [90, 120, 30]).unwrap();
        let region = BinaryMask::from_fn(7, 6, |x, y| (2..5).contains(&x) && (1..4).contains(&y)).unwrap();
        let out = diffusion_fill(&img, &region, 1e-4, 1000).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn single_pixel_hole_averages_neighbours() {
        let mut img = FloatRaster::zeros(3, 3).unwrap();
        img.set_pixel(1, 0, [0.0; 3]);
        img.set_pixel(0, 1, [0.0; 3]);
        img.set_pixel(2, 1, [1.0; 3]);
        img.set_pixel(1, 2, [1.0; 3]);
        img.set_pixel(1, 1, [0.9; 3]);
        let region = BinaryMask::from_fn(3, 3, |x, y| x == 1 && y == 1).unwrap();
        let (out, _) = diffusion_fill_float(&img, &region, 1e-6, 100).unwrap();
        assert_eq!(out.pixel(1, 1), [0.5; 3]);
    }

    #[test]
    fn unanchored_region_is_error() {
        let img = Raster::filled(4, 4, [1, 2, 3]).unwrap();
        assert!(matches!(
            diffusion_fill(&img, &BinaryMask::ones(4, 4).unwrap(), 1e-4, 10),
            Err(Error::NoKnownBoundary { .. })
        ));
    }

    #[test]
    fn empty_region_is_identity() {
        let img = Raster::from_fn(5, 5, |x, y| [x as u8, y as u8, 0]).unwrap();
        assert_eq!(diffusion_fill(&img, &BinaryMask::zeros(5, 5).unwrap(), 1e-4, 10).unwrap(), img);
    }

    #[test]
    fn fill_outside_region_untouched() {
        let img = Raster::from_fn(9, 9, |x, y| [(x * 25) as u8, (y * 25) as u8, ((x + y) * 10) as u8]).unwrap();
        let region = BinaryMask::from_fn(9, 9, |x, y| (3..6).contains(&x) && (2..7).contains(&y)).unwrap();
        let out = diffusion_fill(&img, &region, 1e-5, 5000).unwrap();
        for y in 0..9 {
            for x in 0..9 {
                if !region.get(x, y) {
                    assert_eq!(out.pixel(x, y), img.pixel(x, y));
                }
            }
        }
    }
}
