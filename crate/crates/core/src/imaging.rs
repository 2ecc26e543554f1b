//! Raster, label and mask primitives.
//!
//! All buffers are row-major. [`Raster`] stores 8-bit RGB; [`FloatRaster`] is
//! the `[0, 1]` floating view every loss is computed on. Conversions back to
//! 8-bit round to nearest.

use std::path::Path;

use image::{GrayImage, RgbImage};

use crate::error::{Error, Result};

/// Default working height in pixels.
pub const DEFAULT_HEIGHT: usize = 256;
/// Default working width in pixels.
pub const DEFAULT_WIDTH: usize = 192;

pub const CHANNELS: usize = 3;

fn check_dims(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidDimensions {
            width,
            height,
            reason: "width and height must be at least 1",
        });
    }
    Ok(())
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::BufferLength { expected, actual });
    }
    Ok(())
}

/// Returns an error unless both shapes are equal.
pub fn ensure_same_dims(expected: (usize, usize), actual: (usize, usize)) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch { expected, actual });
    }
    Ok(())
}

/// H×W RGB image with 8-bit channels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        check_len(width * height * CHANNELS, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        check_dims(width, height)?;
        let data = rgb.iter().copied().cycle().take(width * height * CHANNELS).collect();
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        check_dims(width, height)?;
        let mut data = Vec::with_capacity(width * height * CHANNELS);
        for y in 0..height {
            for x in 0..width {
                data.extend_from_slice(&f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = (y * self.width + x) * CHANNELS;
        self.data[i..i + CHANNELS].copy_from_slice(&rgb);
    }

    /// Floating view with samples normalized to `[0, 1]`.
    pub fn to_float(&self) -> FloatRaster {
        FloatRaster {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f64::from(v) / 255.0).collect(),
        }
    }

    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = image::open(path)
            .map_err(|source| Error::Image {
                path: path.to_path_buf(),
                source,
            })?
            .to_rgb8();
        let (w, h) = img.dimensions();
        Self::new(w as usize, h as usize, img.into_raw())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let img = RgbImage::from_raw(self.width as u32, self.height as u32, self.data.clone())
            .expect("buffer length checked at construction");
        img.save(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Floating-point RGB image, samples nominally in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FloatRaster {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl FloatRaster {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        check_len(width * height * CHANNELS, data.len())?;
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        check_dims(width, height)?;
        Ok(Self {
            width,
            height,
            data: vec![0.0; width * height * CHANNELS],
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn pixel(&self, x: usize, y: usize) -> [f64; 3] {
        let i = (y * self.width + x) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn set_pixel(&mut self, x: usize, y: usize, v: [f64; 3]) {
        let i = (y * self.width + x) * CHANNELS;
        self.data[i..i + CHANNELS].copy_from_slice(&v);
    }

    /// Pixel value, or zero outside the frame.
    #[inline]
    fn get_or_zero(&self, x: i64, y: i64) -> [f64; 3] {
        if x < 0 || y < 0 || x >= self.width as i64 || y >= self.height as i64 {
            [0.0; 3]
        } else {
            self.pixel(x as usize, y as usize)
        }
    }

    /// Rounds to nearest and clamps into 8-bit.
    pub fn to_raster(&self) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            data: self
                .data
                .iter()
                .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
                .collect(),
        }
    }
}

/// Bilinearly interpolates `img` at pixel coordinates `(x, y)`.
///
/// Neighbours outside `[0, W-1] x [0, H-1]` contribute zero, so the function is
/// total and continuous everywhere.
pub fn bilinear_sample(img: &FloatRaster, x: f64, y: f64) -> [f64; 3] {
    bilinear_sample_with_grad(img, x, y).0
}

/// Bilinear sample together with its partial derivatives `d/dx`, `d/dy`.
///
/// Inside a cell the interpolant is bilinear; on cell edges the derivative of the
/// cell containing `floor(x), floor(y)` is reported.
pub fn bilinear_sample_with_grad(img: &FloatRaster, x: f64, y: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
    if !x.is_finite() || !y.is_finite() {
        return ([0.0; 3], [0.0; 3], [0.0; 3]);
    }
    let x0f = x.floor();
    let y0f = y.floor();
    let fx = x - x0f;
    let fy = y - y0f;
    let (x0, y0) = (x0f as i64, y0f as i64);
    let p00 = img.get_or_zero(x0, y0);
    let p10 = img.get_or_zero(x0 + 1, y0);
    let p01 = img.get_or_zero(x0, y0 + 1);
    let p11 = img.get_or_zero(x0 + 1, y0 + 1);
    let mut v = [0.0; 3];
    let mut dx = [0.0; 3];
    let mut dy = [0.0; 3];
    for c in 0..CHANNELS {
        let top = p00[c] + fx * (p10[c] - p00[c]);
        let bottom = p01[c] + fx * (p11[c] - p01[c]);
        v[c] = top + fy * (bottom - top);
        dx[c] = (1.0 - fy) * (p10[c] - p00[c]) + fy * (p11[c] - p01[c]);
        dy[c] = bottom - top;
    }
    (v, dx, dy)
}

/// Semantic labels of the reduced human-parsing scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[repr(u8)]
pub enum Label {
    Background = 0,
    Head = 1,
    Arms = 2,
    TorsoClothes = 3,
    Bottom = 4,
    Fused = 5,
}

impl Label {
    pub const ALL: [Label; 6] = [
        Label::Background,
        Label::Head,
        Label::Arms,
        Label::TorsoClothes,
        Label::Bottom,
        Label::Fused,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }
}

impl TryFrom<u8> for Label {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Label::ALL
            .get(v as usize)
            .copied()
            .ok_or(Error::UnknownLabel(v))
    }
}

/// Per-pixel semantic parse with ids from [`Label`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u8>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self> {
        check_dims(width, height)?;
        check_len(width * height, labels.len())?;
        if let Some(&bad) = labels.iter().find(|&&l| Label::try_from(l).is_err()) {
            return Err(Error::UnknownLabel(bad));
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn filled(width: usize, height: usize, label: Label) -> Result<Self> {
        Self::new(width, height, vec![label.id(); width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> Label) -> Result<Self> {
        check_dims(width, height)?;
        let mut labels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                labels.push(f(x, y).id());
            }
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> Label {
        Label::try_from(self.labels[y * self.width + x]).expect("validated at construction")
    }

    pub fn set(&mut self, x: usize, y: usize, label: Label) {
        self.labels[y * self.width + x] = label.id();
    }

    /// Mask of pixels whose label is one of `labels`.
    pub fn mask_of(&self, labels: &[Label]) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self
                .labels
                .iter()
                .map(|l| labels.iter().any(|m| m.id() == *l))
                .collect(),
        }
    }

    /// Loads an 8-bit single-channel PNG whose values are label ids.
    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = open_gray(path)?;
        let (w, h) = img.dimensions();
        Self::new(w as usize, h as usize, img.into_raw())
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        save_gray(path.as_ref(), self.width, self.height, self.labels.clone())
    }
}

/// Mask of pixels in `parse` whose id is listed in `labels`.
pub fn label_mask(parse: &LabelMap, labels: &[u8]) -> Result<BinaryMask> {
    let set = labels
        .iter()
        .map(|&l| Label::try_from(l))
        .collect::<Result<Vec<_>>>()?;
    Ok(parse.mask_of(&set))
}

/// H×W map of `{0, 1}` values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height)?;
        check_len(width * height, bits.len())?;
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn ones(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![true; width * height])
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        check_dims(width, height)?;
        let mut bits = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<BinaryMask> {
        ensure_same_dims(self.dims(), other.dims())?;
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Elementwise product.
    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a || b)
    }

    /// `self ⊙ (1 - other)`.
    pub fn and_not(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && !b)
    }

    /// `1 - self`.
    pub fn not(&self) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    /// Number of pixels set in both masks.
    pub fn overlap(&self, other: &BinaryMask) -> Result<usize> {
        Ok(self.and(other)?.count())
    }

    /// Mask as a white-on-black raster, used for shape-only fitting.
    pub fn to_raster(&self) -> Raster {
        Raster {
            width: self.width,
            height: self.height,
            data: self
                .bits
                .iter()
                .flat_map(|&b| [if b { 255 } else { 0 }; CHANNELS])
                .collect(),
        }
    }

    /// Loads a single-channel PNG; any nonzero value is set.
    pub fn load_png(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let img = open_gray(path)?;
        let (w, h) = img.dimensions();
        Self::new(w as usize, h as usize, img.into_raw().into_iter().map(|v| v != 0).collect())
    }

    /// Writes the mask as `{0, 255}`.
    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let data = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        save_gray(path.as_ref(), self.width, self.height, data)
    }
}

/// Per-pixel blending weights in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaMap {
    width: usize,
    height: usize,
    alpha: Vec<f64>,
}

impl AlphaMap {
    pub fn new(width: usize, height: usize, alpha: Vec<f64>) -> Result<Self> {
        check_dims(width, height)?;
        check_len(width * height, alpha.len())?;
        if let Some((index, &value)) = alpha
            .iter()
            .enumerate()
            .find(|(_, a)| !(0.0..=1.0).contains(*a))
        {
            return Err(Error::AlphaOutOfRange { index, value });
        }
        Ok(Self {
            width,
            height,
            alpha,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f64] {
        &self.alpha
    }
}

/// `img ⊙ m` per channel: pixels outside the mask become black.
pub fn mask_apply(img: &Raster, m: &BinaryMask) -> Result<Raster> {
    ensure_same_dims(img.dims(), m.dims())?;
    let mut out = img.clone();
    for (px, &keep) in out.data.chunks_exact_mut(CHANNELS).zip(&m.bits) {
        if !keep {
            px.fill(0);
        }
    }
    Ok(out)
}

fn open_gray(path: &Path) -> Result<GrayImage> {
    Ok(image::open(path)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?
        .to_luma8())
}

fn save_gray(path: &Path, width: usize, height: usize, data: Vec<u8>) -> Result<()> {
    let img = GrayImage::from_raw(width as u32, height as u32, data).expect("buffer length checked at construction");
    img.save(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn raster_and_mask() -> impl Strategy<Value = (Raster, BinaryMask)> {
        (1usize..10, 1usize..10).prop_flat_map(|(w, h)| {
            (
                prop::collection::vec(any::<u8>(), w * h * 3),
                prop::collection::vec(any::<bool>(), w * h),
            )
                .prop_map(move |(d, b)| (Raster::new(w, h, d).unwrap(), BinaryMask::new(w, h, b).unwrap()))
        })
    }

    proptest! {
        #[test]
        fn mask_apply_idempotent((img, m) in raster_and_mask()) {
            let once = mask_apply(&img, &m).unwrap();
            prop_assert_eq!(mask_apply(&once, &m).unwrap(), once);
        }

        #[test]
        fn disjoint_label_sets_give_disjoint_masks(
            ids in prop::collection::vec(0u8..6, 24),
            split in prop::collection::vec(any::<bool>(), 6),
        ) {
            let parse = LabelMap::new(6, 4, ids).unwrap();
            let a: Vec<u8> = (0..6).filter(|&l| split[l as usize]).collect();
            let b: Vec<u8> = (0..6).filter(|&l| !split[l as usize]).collect();
            let ma = label_mask(&parse, &a).unwrap();
            let mb = label_mask(&parse, &b).unwrap();
            prop_assert_eq!(ma.overlap(&mb).unwrap(), 0);
            prop_assert_eq!(ma.or(&mb).unwrap().count(), 24);
        }

        #[test]
        fn bilinear_is_lipschitz_in_interior(
            vals in prop::collection::vec(0.0f64..1.0, 4 * 4 * 3),
            x in 0.0f64..2.9, y in 0.0f64..2.9, eps in 0.0f64..0.1,
        ) {
            let img = FloatRaster::new(4, 4, vals.clone()).unwrap();
            let max_diff = vals.iter().cloned().fold(f64::MIN, f64::max)
                - vals.iter().cloned().fold(f64::MAX, f64::min);
            let a = bilinear_sample(&img, x, y);
            let b = bilinear_sample(&img, x + eps, y);
            for c in 0..3 {
                prop_assert!((a[c] - b[c]).abs() <= eps * max_diff + 1e-12);
            }
        }
    }
}
