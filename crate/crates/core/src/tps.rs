//! Thin-plate-spline warps over a fixed control lattice.
//!
//! A warp is parameterized by where each lattice point lands in *source*
//! space. The kernel matrix only depends on the lattice, so it is factorized
//! once and every fit iteration only touches the right-hand side. Because the
//! solve is linear, the source coordinate of every output pixel is a fixed
//! linear combination of the control targets; [`TpsWarper`] precomputes those
//! combination weights for a given output resolution.
//!
//! Coordinates are normalized to `[-1, 1]^2`, with `-1` at the centre of the
//! first pixel and `+1` at the centre of the last one.

use nalgebra::{DMatrix, LU};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{bilinear_sample, FloatRaster, Raster};

pub const DEFAULT_GRID_K: usize = 5;

/// `U(r) = r^2 ln r^2`, written in terms of the squared distance.
#[inline]
pub fn kernel(r2: f64) -> f64 {
    if r2 <= 0.0 {
        0.0
    } else {
        r2 * r2.ln()
    }
}

/// Regular `k x k` lattice of control points, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlGrid {
    k: usize,
    points: Vec<[f64; 2]>,
}

impl ControlGrid {
    pub fn regular(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::GridTooSmall(k, 2));
        }
        let step = 2.0 / (k - 1) as f64;
        let points = (0..k)
            .flat_map(|r| (0..k).map(move |c| [-1.0 + step * c as f64, -1.0 + step * r as f64]))
            .collect();
        Ok(Self { k, points })
    }

    /// Grid with explicit control positions. The positions are not required
    /// to be regular; [`build_system`] rejects degenerate layouts.
    pub fn with_points(k: usize, points: Vec<[f64; 2]>) -> Result<Self> {
        if k < 2 {
            return Err(Error::GridTooSmall(k, 2));
        }
        if points.len() != k * k {
            return Err(Error::ThetaLength {
                expected: k * k,
                actual: points.len(),
            });
        }
        Ok(Self { k, points })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Flat index of lattice cell `(row, col)`.
    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.k + col
    }
}

/// Control grid plus fitted source-space control positions.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpParams {
    pub grid: ControlGrid,
    pub theta: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct WarpParamsDoc {
    k: usize,
    theta: Vec<[f64; 2]>,
}

impl WarpParams {
    /// Identity warp: every control point maps to itself.
    pub fn identity(grid: ControlGrid) -> Self {
        let theta = grid.points.clone();
        Self { grid, theta }
    }

    pub fn new(grid: ControlGrid, theta: Vec<[f64; 2]>) -> Result<Self> {
        check_theta(&grid, &theta)?;
        Ok(Self { grid, theta })
    }

    pub fn k(&self) -> usize {
        self.grid.k
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&WarpParamsDoc {
            k: self.grid.k,
            theta: self.theta.clone(),
        })
        .expect("plain numeric document")
    }

    /// Parses `{k, theta: [[x, y], ...]}`; the grid is the regular lattice of side `k`.
    pub fn from_json(s: &str) -> std::result::Result<Self, String> {
        let doc: WarpParamsDoc = serde_json::from_str(s).map_err(|e| e.to_string())?;
        let grid = ControlGrid::regular(doc.k).map_err(|e| e.to_string())?;
        WarpParams::new(grid, doc.theta).map_err(|e| e.to_string())
    }
}

impl Serialize for WarpParams {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        WarpParamsDoc {
            k: self.grid.k,
            theta: self.theta.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WarpParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = WarpParamsDoc::deserialize(d)?;
        let grid = ControlGrid::regular(doc.k).map_err(serde::de::Error::custom)?;
        WarpParams::new(grid, doc.theta).map_err(serde::de::Error::custom)
    }
}

fn check_theta(grid: &ControlGrid, theta: &[[f64; 2]]) -> Result<()> {
    if theta.len() != grid.len() {
        return Err(Error::ThetaLength {
            expected: grid.len(),
            actual: theta.len(),
        });
    }
    if theta.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("control targets"));
    }
    Ok(())
}

/// Solved spline: `f(q) = A [qx, qy, 1]^T + sum_i w_i U(|q - c_i|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TpsCoefficients {
    /// Rows are the x and y outputs; columns multiply `qx`, `qy`, `1`.
    pub affine: [[f64; 3]; 2],
    pub weights: Vec<[f64; 2]>,
    centers: Vec<[f64; 2]>,
}

impl TpsCoefficients {
    pub fn evaluate(&self, q: [f64; 2]) -> [f64; 2] {
        let mut out = [
            self.affine[0][0] * q[0] + self.affine[0][1] * q[1] + self.affine[0][2],
            self.affine[1][0] * q[0] + self.affine[1][1] * q[1] + self.affine[1][2],
        ];
        for (c, w) in self.centers.iter().zip(&self.weights) {
            let u = kernel((q[0] - c[0]).powi(2) + (q[1] - c[1]).powi(2));
            out[0] += w[0] * u;
            out[1] += w[1] * u;
        }
        out
    }

    /// Largest violation of `sum w = 0`, `sum w x = 0`, `sum w y = 0`.
    pub fn side_condition_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for d in 0..2 {
            let s0: f64 = self.weights.iter().map(|w| w[d]).sum();
            let sx: f64 = self.weights.iter().zip(&self.centers).map(|(w, c)| w[d] * c[0]).sum();
            let sy: f64 = self.weights.iter().zip(&self.centers).map(|(w, c)| w[d] * c[1]).sum();
            worst = worst.max(s0.abs()).max(sx.abs()).max(sy.abs());
        }
        worst
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().flatten().fold(0.0, |m, w| m.max(w.abs()))
    }
}

/// Factorized `(n + 3) x (n + 3)` kernel system over a control lattice.
#[derive(Debug, Clone)]
pub struct TpsSystem {
    grid: ControlGrid,
    matrix: DMatrix<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

/// Assembles and factorizes the kernel system `[[K, P], [P^T, 0]]`.
pub fn build_system(grid: &ControlGrid) -> Result<TpsSystem> {
    let pts = &grid.points;
    if pts.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("control grid"));
    }
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            let d2 = (pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2);
            if d2 < 1e-24 {
                return Err(Error::SingularSystem(format!("control points {i} and {j} coincide")));
            }
        }
    }
    let m = n + 3;
    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..n {
        for j in 0..n {
            let d2 = (pts[i][0] - pts[j][0]).powi(2) + (pts[i][1] - pts[j][1]).powi(2);
            a[(i, j)] = kernel(d2);
        }
        let p = [1.0, pts[i][0], pts[i][1]];
        for (c, v) in p.into_iter().enumerate() {
            a[(i, n + c)] = v;
            a[(n + c, i)] = v;
        }
    }
    let lu = a.clone().lu();
    let diag = lu.u().diagonal();
    let max = diag.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let min = diag.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    if !(max > 0.0) || min / max < 1e-13 {
        return Err(Error::SingularSystem(format!(
            "pivot ratio {:.3e} below tolerance",
            if max > 0.0 { min / max } else { 0.0 }
        )));
    }
    Ok(TpsSystem {
        grid: grid.clone(),
        matrix: a,
        lu,
    })
}

impl TpsSystem {
    pub fn grid(&self) -> &ControlGrid {
        &self.grid
    }

    /// The assembled (unfactorized) system matrix.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Solves `A x = rhs` with the stored factorization.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.lu.solve(rhs).expect("factorization checked nonsingular")
    }
}

/// Solves for the spline mapping each lattice point exactly to its target.
pub fn solve_coefficients(system: &TpsSystem, theta: &[[f64; 2]]) -> Result<TpsCoefficients> {
    check_theta(&system.grid, theta)?;
    let n = theta.len();
    let mut rhs = DMatrix::<f64>::zeros(n + 3, 2);
    for (i, t) in theta.iter().enumerate() {
        rhs[(i, 0)] = t[0];
        rhs[(i, 1)] = t[1];
    }
    let sol = system.solve(&rhs);
    let weights = (0..n).map(|i| [sol[(i, 0)], sol[(i, 1)]]).collect();
    let affine = [
        [sol[(n + 1, 0)], sol[(n + 2, 0)], sol[(n, 0)]],
        [sol[(n + 1, 1)], sol[(n + 2, 1)], sol[(n, 1)]],
    ];
    Ok(TpsCoefficients {
        affine,
        weights,
        centers: system.grid.points.clone(),
    })
}

/// Normalized coordinate of pixel index `i` along an axis of `len` pixels.
#[inline]
pub fn pixel_to_norm(i: f64, len: usize) -> f64 {
    -1.0 + 2.0 * i / (len - 1) as f64
}

#[inline]
pub fn norm_to_pixel(v: f64, len: usize) -> f64 {
    (v + 1.0) * 0.5 * (len - 1) as f64
}

/// Backward warper for a fixed lattice and output resolution.
///
/// For every output pixel `q` it stores `b(q)`, with `f_theta(q) = sum_j b_j(q) theta_j`.
#[derive(Debug, Clone)]
pub struct TpsWarper {
    system: TpsSystem,
    width: usize,
    height: usize,
    basis: Vec<f64>,
}

impl TpsWarper {
    pub fn new(grid: &ControlGrid, width: usize, height: usize) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::InvalidDimensions {
                width,
                height,
                reason: "warping needs at least 2x2 pixels",
            });
        }
        let system = build_system(grid)?;
        let n = grid.len();
        let m = n + 3;
        // Columns 0..n of A^-1; A is symmetric so row j of the result is column j.
        let mut sel = DMatrix::<f64>::zeros(m, n);
        for j in 0..n {
            sel[(j, j)] = 1.0;
        }
        let inv_cols = system.solve(&sel);
        let pts = grid.points();
        let mut basis = vec![0.0; width * height * n];
        let mut phi = vec![0.0; m];
        for y in 0..height {
            let qy = pixel_to_norm(y as f64, height);
            for x in 0..width {
                let qx = pixel_to_norm(x as f64, width);
                for (p, c) in phi.iter_mut().zip(pts) {
                    *p = kernel((qx - c[0]).powi(2) + (qy - c[1]).powi(2));
                }
                phi[n] = 1.0;
                phi[n + 1] = qx;
                phi[n + 2] = qy;
                let row = &mut basis[(y * width + x) * n..][..n];
                for (j, b) in row.iter_mut().enumerate() {
                    *b = phi.iter().enumerate().map(|(r, p)| p * inv_cols[(r, j)]).sum();
                }
            }
        }
        Ok(Self {
            system,
            width,
            height,
            basis,
        })
    }

    pub fn system(&self) -> &TpsSystem {
        &self.system
    }

    pub fn grid(&self) -> &ControlGrid {
        &self.system.grid
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    /// Linear weights of the control targets for output pixel index `p`.
    #[inline]
    pub fn basis_row(&self, p: usize) -> &[f64] {
        let n = self.system.grid.len();
        &self.basis[p * n..][..n]
    }

    /// Source positions in normalized coordinates, one per output pixel.
    pub fn source_coords_norm(&self, theta: &[[f64; 2]]) -> Result<Vec<[f64; 2]>> {
        check_theta(&self.system.grid, theta)?;
        Ok((0..self.width * self.height)
            .map(|p| {
                let mut s = [0.0; 2];
                for (b, t) in self.basis_row(p).iter().zip(theta) {
                    s[0] += b * t[0];
                    s[1] += b * t[1];
                }
                s
            })
            .collect())
    }

    /// Source positions in pixel units of a `src_w x src_h` source image.
    pub fn source_coords(&self, theta: &[[f64; 2]], src_w: usize, src_h: usize) -> Result<Vec<[f64; 2]>> {
        Ok(self
            .source_coords_norm(theta)?
            .into_iter()
            .map(|[x, y]| [norm_to_pixel(x, src_w), norm_to_pixel(y, src_h)])
            .collect())
    }

    /// Backward warp of `src` into this warper's output resolution.
    pub fn warp_float(&self, src: &FloatRaster, theta: &[[f64; 2]]) -> Result<FloatRaster> {
        if src.width() < 2 || src.height() < 2 {
            return Err(Error::InvalidDimensions {
                width: src.width(),
                height: src.height(),
                reason: "warping needs at least 2x2 pixels",
            });
        }
        let coords = self.source_coords(theta, src.width(), src.height())?;
        let mut out = FloatRaster::zeros(self.width, self.height)?;
        for (p, [sx, sy]) in coords.into_iter().enumerate() {
            out.set_pixel(p % self.width, p / self.width, bilinear_sample(src, sx, sy));
        }
        Ok(out)
    }
}

/// Warps `src` by `params` at the resolution of `src`.
pub fn warp_image(src: &Raster, params: &WarpParams) -> Result<Raster> {
    let warper = TpsWarper::new(&params.grid, src.width(), src.height())?;
    Ok(warper.warp_float(&src.to_float(), &params.theta)?.to_raster())
}
