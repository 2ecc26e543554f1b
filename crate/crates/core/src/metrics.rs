//! Image quality metrics: windowed SSIM on luma and mean L1.

use crate::error::{Error, Result};
use crate::imaging::{ensure_same_dims, FloatRaster, Raster, CHANNELS};

/// BT.601 luma weights.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsimParams {
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    pub dynamic_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            dynamic_range: 255.0,
        }
    }
}

impl SsimParams {
    pub fn c1(&self) -> f64 {
        (self.k1 * self.dynamic_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.dynamic_range).powi(2)
    }

    /// Normalized 1-D Gaussian taps; the 2-D window is their outer product.
    pub fn taps(&self) -> Vec<f64> {
        let r = (self.window / 2) as f64;
        let g: Vec<f64> = (0..self.window)
            .map(|i| (-((i as f64 - r).powi(2)) / (2.0 * self.sigma * self.sigma)).exp())
            .collect();
        let s: f64 = g.iter().sum();
        g.into_iter().map(|v| v / s).collect()
    }
}

/// Luma plane in `[0, 255]`, unrounded.
pub fn luma(img: &Raster) -> Vec<f64> {
    img.data()
        .chunks_exact(CHANNELS)
        .map(|p| {
            LUMA_WEIGHTS[0] * f64::from(p[0]) + LUMA_WEIGHTS[1] * f64::from(p[1]) + LUMA_WEIGHTS[2] * f64::from(p[2])
        })
        .collect()
}

/// Separable "valid" correlation of a `w x h` plane.
fn filter_valid(plane: &[f64], w: usize, h: usize, taps: &[f64]) -> (Vec<f64>, usize, usize) {
    let n = taps.len();
    let ow = w - n + 1;
    let oh = h - n + 1;
    let mut horiz = vec![0.0; ow * h];
    for y in 0..h {
        let row = &plane[y * w..][..w];
        for x in 0..ow {
            horiz[y * ow + x] = taps.iter().zip(&row[x..x + n]).map(|(t, v)| t * v).sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps.iter().enumerate().map(|(i, t)| t * horiz[(y + i) * ow + x]).sum();
        }
    }
    (out, ow, oh)
}

/// Per-window SSIM values (`(W - window + 1) x (H - window + 1)`, row-major).
pub fn ssim_map(a: &Raster, b: &Raster, params: &SsimParams) -> Result<Vec<f64>> {
    ensure_same_dims(a.dims(), b.dims())?;
    let (w, h) = a.dims();
    if w < params.window || h < params.window {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            window: params.window,
        });
    }
    let la = luma(a);
    let lb = luma(b);
    let taps = params.taps();
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<_>>();
    let ab: Vec<f64> = la.iter().zip(&lb).map(|(x, y)| x * y).collect();
    let (mu_a, _, _) = filter_valid(&la, w, h, &taps);
    let (mu_b, _, _) = filter_valid(&lb, w, h, &taps);
    let (e_aa, _, _) = filter_valid(&sq(&la), w, h, &taps);
    let (e_bb, _, _) = filter_valid(&sq(&lb), w, h, &taps);
    let (e_ab, _, _) = filter_valid(&ab, w, h, &taps);
    let (c1, c2) = (params.c1(), params.c2());
    Ok((0..mu_a.len())
        .map(|i| {
            let (ma, mb) = (mu_a[i], mu_b[i]);
            let va = e_aa[i] - ma * ma;
            let vb = e_bb[i] - mb * mb;
            let cov = e_ab[i] - ma * mb;
            ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2))
        })
        .collect())
}

pub fn ssim_with(a: &Raster, b: &Raster, params: &SsimParams) -> Result<f64> {
    let map = ssim_map(a, b, params)?;
    Ok(map.iter().sum::<f64>() / map.len() as f64)
}

/// Mean windowed SSIM over luma (11x11 Gaussian, sigma 1.5, K1 0.01, K2 0.03, L 255).
pub fn ssim(a: &Raster, b: &Raster) -> Result<f64> {
    ssim_with(a, b, &SsimParams::default())
}

/// Mean absolute difference of the `[0, 1]` float views.
pub fn mean_l1(a: &Raster, b: &Raster) -> Result<f64> {
    mean_l1_float(&a.to_float(), &b.to_float())
}

pub fn mean_l1_float(a: &FloatRaster, b: &FloatRaster) -> Result<f64> {
    ensure_same_dims(a.dims(), b.dims())?;
    let n = a.data().len() as f64;
    Ok(a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).sum::<f64>() / n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured(w: usize, h: usize, seed: u32) -> Raster {
        Raster::from_fn(w, h, |x, y| {
            let v = (x as u32 * 31 + y as u32 * 17 + seed * 101).wrapping_mul(2654435761) >> 24;
            [v as u8, (v as u8).wrapping_add(40), 255 - v as u8]
        })
        .unwrap()
    }

    #[test]
    fn self_similarity() {
        let a = textured(32, 24, 1);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric() {
        let a = textured(20, 20, 1);
        let b = textured(20, 20, 2);
        assert_eq!(ssim(&a, &b).unwrap(), ssim(&b, &a).unwrap());
        assert!(ssim(&a, &b).unwrap() < 1.0);
    }

    #[test]
    fn constant_pair_is_luminance_only() {
        // Flat images: variances vanish, SSIM is (2*64*128 + C1) / (64^2 + 128^2 + C1).
        let a = Raster::filled(32, 32, [64, 64, 64]).unwrap();
        let b = Raster::filled(32, 32, [128, 128, 128]).unwrap();
        let c1 = (0.01f64 * 255.0).powi(2);
        let want = (2.0 * 64.0 * 128.0 + c1) / (64.0f64.powi(2) + 128.0f64.powi(2) + c1);
        assert!((ssim(&a, &b).unwrap() - want).abs() < 1e-9);
    }

    #[test]
    fn too_small_and_mismatch() {
        let a = Raster::filled(10, 32, [0; 3]).unwrap();
        assert!(matches!(ssim(&a, &a), Err(Error::ImageTooSmall { .. })));
        let b = Raster::filled(12, 32, [0; 3]).unwrap();
        assert!(matches!(ssim(&a, &b), Err(Error::DimensionMismatch { .. })));
        assert!(mean_l1(&a, &b).is_err());
    }

    #[test]
    fn mean_l1_values() {
        let a = textured(8, 8, 3);
        assert_eq!(mean_l1(&a, &a).unwrap(), 0.0);
        let x = FloatRaster::new(4, 4, vec![0.25; 48]).unwrap();
        let y = FloatRaster::new(4, 4, vec![0.75; 48]).unwrap();
        assert_eq!(mean_l1_float(&x, &y).unwrap(), 0.5);
        let black = Raster::filled(4, 4, [0, 0, 0]).unwrap();
        let white = Raster::filled(4, 4, [255, 255, 255]).unwrap();
        assert_eq!(mean_l1(&black, &white).unwrap(), 1.0);
    }

    #[test]
    fn gaussian_taps_are_normalized() {
        let t = SsimParams::default().taps();
        assert_eq!(t.len(), 11);
        assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(t[0], t[10]);
    }
}
