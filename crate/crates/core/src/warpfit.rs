//! Constrained fitting of TPS control targets.
//!
//! The objective is
//!
//! ```text
//! total = max(L3 - delta, 0) + pixel_weight * L4
//! ```
//!
//! where `L4` is the mean absolute difference between the warped source and
//! the target, and `L3` is the second-order difference penalty over the
//! fitted control lattice: for every interior control point `p` with
//! top/bottom/left/right neighbours `p0..p3`,
//!
//! ```text
//! lambda_r * (| |p p0| - |p p1| | + | |p p2| - |p p3| |)
//!   + lambda_s * (|cross(p, p0, p1)| + |cross(p, p2, p3)|)
//! cross(p, pi, pj) = (yi - y)(xj - x) - (yj - y)(xi - x)
//! ```
//!
//! The cross product is the division-free form of a slope difference. Both
//! terms vanish for any affine image of the lattice.
//!
//! Gradients are exact: the source coordinate of each pixel is linear in the
//! control targets (see [`TpsWarper`]), bilinear sampling is piecewise
//! bilinear, and the penalty is piecewise smooth. Kinks use subgradient 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{bilinear_sample_with_grad, ensure_same_dims, FloatRaster, Raster, CHANNELS};
use crate::tps::{norm_to_pixel, ControlGrid, TpsWarper, WarpParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstraintConfig {
    /// Weight of the neighbour-interval terms.
    pub lambda_r: f64,
    /// Weight of the collinearity (cross-product) terms.
    pub lambda_s: f64,
    /// Hinge margin; the penalty is `max(L3 - delta, 0)`.
    pub delta: f64,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        Self {
            lambda_r: 0.1,
            lambda_s: 0.1,
            delta: 0.0,
        }
    }
}

impl ConstraintConfig {
    /// No penalty at all.
    pub fn unconstrained() -> Self {
        Self {
            lambda_r: 0.0,
            lambda_s: 0.0,
            delta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_r >= 0.0 && self.lambda_r.is_finite()) || !(self.lambda_s >= 0.0 && self.lambda_s.is_finite()) {
            return Err(Error::Config(format!(
                "lambda_r and lambda_s must be finite and non-negative (got {}, {})",
                self.lambda_r, self.lambda_s
            )));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::Config(format!("delta must be non-negative (got {})", self.delta)));
        }
        Ok(())
    }

    fn hinge(&self, l3: f64) -> f64 {
        (l3 - self.delta).max(0.0)
    }
}

/// Adam-style optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub pixel_weight: f64,
    /// `converged` is reported when the final total is below this.
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            learning_rate: 0.0002,
            beta1: 0.5,
            beta2: 0.999,
            epsilon: 1e-8,
            pixel_weight: 1.0,
            tolerance: 1e-3,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.iterations == 0 {
            return bad("iterations must be at least 1".into());
        }
        // Zero is allowed: it is the "evaluate only" mode.
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be finite and >= 0 (got {})", self.learning_rate));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return bad(format!("betas must lie in [0, 1) (got {}, {})", self.beta1, self.beta2));
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive".into());
        }
        if !(self.pixel_weight >= 0.0 && self.pixel_weight.is_finite()) {
            return bad(format!("pixel_weight must be finite and >= 0 (got {})", self.pixel_weight));
        }
        Ok(())
    }
}

/// Signed penalty terms of one interior control point:
/// `[|pp0| - |pp1|, |pp2| - |pp3|, cross(p,p0,p1), cross(p,p2,p3)]`.
pub type PointTerms = [f64; 4];

fn interior_neighbours(k: usize, r: usize, c: usize) -> [usize; 5] {
    let idx = |r: usize, c: usize| r * k + c;
    [idx(r, c), idx(r - 1, c), idx(r + 1, c), idx(r, c - 1), idx(r, c + 1)]
}

fn check_k(k: usize, theta: &[[f64; 2]]) -> Result<()> {
    if k < 3 {
        return Err(Error::GridTooSmall(k, 3));
    }
    if theta.len() != k * k {
        return Err(Error::ThetaLength {
            expected: k * k,
            actual: theta.len(),
        });
    }
    Ok(())
}

#[inline]
fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[inline]
fn cross(p: [f64; 2], pi: [f64; 2], pj: [f64; 2]) -> f64 {
    (pi[1] - p[1]) * (pj[0] - p[0]) - (pj[1] - p[1]) * (pi[0] - p[0])
}

/// Raw signed terms for every interior lattice point, row-major.
pub fn constraint_terms(theta: &[[f64; 2]], k: usize) -> Result<Vec<PointTerms>> {
    check_k(k, theta)?;
    let mut out = Vec::with_capacity((k - 2) * (k - 2));
    for r in 1..k - 1 {
        for c in 1..k - 1 {
            let [p, p0, p1, p2, p3] = interior_neighbours(k, r, c).map(|i| theta[i]);
            out.push([
                dist(p, p0) - dist(p, p1),
                dist(p, p2) - dist(p, p3),
                cross(p, p0, p1),
                cross(p, p2, p3),
            ]);
        }
    }
    Ok(out)
}

/// The second-order difference penalty `L3` (before the hinge).
pub fn constraint_l3(params: &WarpParams, cfg: &ConstraintConfig) -> Result<f64> {
    constraint_l3_raw(&params.theta, params.k(), cfg)
}

fn constraint_l3_raw(theta: &[[f64; 2]], k: usize, cfg: &ConstraintConfig) -> Result<f64> {
    Ok(constraint_terms(theta, k)?
        .iter()
        .map(|t| cfg.lambda_r * (t[0].abs() + t[1].abs()) + cfg.lambda_s * (t[2].abs() + t[3].abs()))
        .sum())
}

/// Terms this small relative to their scale are treated as sitting on the kink.
const KINK_REL_TOL: f64 = 1e-12;

#[inline]
fn sgn_rel(v: f64, scale: f64) -> f64 {
    if v.abs() <= KINK_REL_TOL * scale {
        0.0
    } else {
        sgn(v)
    }
}

#[inline]
fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `L3` and its (sub)gradient with respect to every control target.
pub fn constraint_l3_grad(theta: &[[f64; 2]], k: usize, cfg: &ConstraintConfig) -> Result<(f64, Vec<[f64; 2]>)> {
    check_k(k, theta)?;
    let mut grad = vec![[0.0; 2]; theta.len()];
    let mut value = 0.0;
    // d|a - b|/da for the distance terms; zero when the points coincide.
    let unit = |a: [f64; 2], b: [f64; 2]| {
        let d = dist(a, b);
        if d > 0.0 {
            [(a[0] - b[0]) / d, (a[1] - b[1]) / d]
        } else {
            [0.0; 2]
        }
    };
    for r in 1..k - 1 {
        for c in 1..k - 1 {
            let ids = interior_neighbours(k, r, c);
            let p = theta[ids[0]];
            for (i, j) in [(1usize, 2usize), (3, 4)] {
                let (pi, pj) = (theta[ids[i]], theta[ids[j]]);

                let (di, dj) = (dist(p, pi), dist(p, pj));
                let d = di - dj;
                value += cfg.lambda_r * d.abs();
                let s = cfg.lambda_r * sgn_rel(d, di + dj);
                if s != 0.0 {
                    let ui = unit(p, pi);
                    let uj = unit(p, pj);
                    for a in 0..2 {
                        grad[ids[0]][a] += s * (ui[a] - uj[a]);
                        grad[ids[i]][a] -= s * ui[a];
                        grad[ids[j]][a] += s * uj[a];
                    }
                }

                let x = cross(p, pi, pj);
                value += cfg.lambda_s * x.abs();
                let s = cfg.lambda_s * sgn_rel(x, di * dj);
                if s != 0.0 {
                    grad[ids[0]][0] += s * (pj[1] - pi[1]);
                    grad[ids[0]][1] += s * (pi[0] - pj[0]);
                    grad[ids[i]][0] -= s * (pj[1] - p[1]);
                    grad[ids[i]][1] += s * (pj[0] - p[0]);
                    grad[ids[j]][0] += s * (pi[1] - p[1]);
                    grad[ids[j]][1] -= s * (pi[0] - p[0]);
                }
            }
        }
    }
    Ok((value, grad))
}

/// Mean absolute difference over all pixels and channels of the float views.
pub fn pixel_loss_l4(warped: &Raster, target: &Raster) -> Result<f64> {
    pixel_loss_l4_float(&warped.to_float(), &target.to_float())
}

pub fn pixel_loss_l4_float(warped: &FloatRaster, target: &FloatRaster) -> Result<f64> {
    ensure_same_dims(target.dims(), warped.dims())?;
    let n = warped.data().len() as f64;
    Ok(warped
        .data()
        .iter()
        .zip(target.data())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / n)
}

/// One evaluation of the warping objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub l3: f64,
    pub hinged_l3: f64,
    pub l4: f64,
    pub total: f64,
}

/// A source/target pair bound to a precomputed warper.
#[derive(Debug, Clone)]
pub struct WarpProblem {
    warper: TpsWarper,
    src: FloatRaster,
    target: FloatRaster,
    constraint: ConstraintConfig,
    pixel_weight: f64,
}

impl WarpProblem {
    pub fn new(
        grid: &ControlGrid,
        src: &Raster,
        target: &Raster,
        constraint: ConstraintConfig,
        pixel_weight: f64,
    ) -> Result<Self> {
        Self::from_float(grid, src.to_float(), target.to_float(), constraint, pixel_weight)
    }

    pub fn from_float(
        grid: &ControlGrid,
        src: FloatRaster,
        target: FloatRaster,
        constraint: ConstraintConfig,
        pixel_weight: f64,
    ) -> Result<Self> {
        ensure_same_dims(src.dims(), target.dims())?;
        constraint.validate()?;
        if grid.k() < 3 {
            return Err(Error::GridTooSmall(grid.k(), 3));
        }
        let warper = TpsWarper::new(grid, target.width(), target.height())?;
        Ok(Self {
            warper,
            src,
            target,
            constraint,
            pixel_weight,
        })
    }

    pub fn warper(&self) -> &TpsWarper {
        &self.warper
    }

    pub fn warped(&self, theta: &[[f64; 2]]) -> Result<FloatRaster> {
        self.warper.warp_float(&self.src, theta)
    }

    pub fn objective(&self, theta: &[[f64; 2]]) -> Result<Objective> {
        let l3 = constraint_l3_raw(theta, self.warper.grid().k(), &self.constraint)?;
        let l4 = pixel_loss_l4_float(&self.warped(theta)?, &self.target)?;
        Ok(self.combine(l3, l4))
    }

    fn combine(&self, l3: f64, l4: f64) -> Objective {
        let hinged_l3 = self.constraint.hinge(l3);
        Objective {
            l3,
            hinged_l3,
            l4,
            total: hinged_l3 + self.pixel_weight * l4,
        }
    }

    /// Objective value and its gradient with respect to `theta`.
    pub fn objective_with_gradient(&self, theta: &[[f64; 2]]) -> Result<(Objective, Vec<[f64; 2]>)> {
        let k = self.warper.grid().k();
        let (l3, mut grad) = constraint_l3_grad(theta, k, &self.constraint)?;
        if self.constraint.hinge(l3) <= 0.0 {
            grad.iter_mut().for_each(|g| *g = [0.0; 2]);
        }

        let (w, h) = self.warper.dims();
        let (sw, sh) = self.src.dims();
        let sx = 0.5 * (sw - 1) as f64;
        let sy = 0.5 * (sh - 1) as f64;
        let count = (w * h * CHANNELS) as f64;
        let scale = self.pixel_weight / count;
        let tdata = self.target.data();
        let mut l4 = 0.0;
        for p in 0..w * h {
            let row = self.warper.basis_row(p);
            let mut s = [0.0; 2];
            for (b, t) in row.iter().zip(theta) {
                s[0] += b * t[0];
                s[1] += b * t[1];
            }
            let (v, dx, dy) = bilinear_sample_with_grad(&self.src, norm_to_pixel(s[0], sw), norm_to_pixel(s[1], sh));
            let mut gx = 0.0;
            let mut gy = 0.0;
            for c in 0..CHANNELS {
                let d = v[c] - tdata[p * CHANNELS + c];
                l4 += d.abs();
                let sg = sgn_rel(d, 1.0);
                gx += sg * dx[c];
                gy += sg * dy[c];
            }
            if gx == 0.0 && gy == 0.0 {
                continue;
            }
            gx *= scale * sx;
            gy *= scale * sy;
            for (g, b) in grad.iter_mut().zip(row) {
                g[0] += gx * b;
                g[1] += gy * b;
            }
        }
        Ok((self.combine(l3, l4 / count), grad))
    }
}

/// `(total, L3, L4)` of the warping objective at `params`.
pub fn warp_objective(
    params: &WarpParams,
    src: &Raster,
    target: &Raster,
    ccfg: &ConstraintConfig,
    fcfg: &FitConfig,
) -> Result<Objective> {
    WarpProblem::new(&params.grid, src, target, *ccfg, fcfg.pixel_weight)?.objective(&params.theta)
}

/// Gradient of [`warp_objective`] with respect to the control targets.
pub fn objective_gradient(
    params: &WarpParams,
    src: &Raster,
    target: &Raster,
    ccfg: &ConstraintConfig,
    fcfg: &FitConfig,
) -> Result<Vec<[f64; 2]>> {
    let problem = WarpProblem::new(&params.grid, src, target, *ccfg, fcfg.pixel_weight)?;
    Ok(problem.objective_with_gradient(&params.theta)?.1)
}

/// Outcome of [`fit_warp`]. `trajectory[0]` is the initial point and
/// `trajectory[i]` the objective after `i` optimizer steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub trajectory: Vec<Objective>,
    pub params: WarpParams,
    pub converged: bool,
}

impl FitReport {
    pub fn final_objective(&self) -> Objective {
        *self.trajectory.last().expect("at least one evaluation")
    }

    /// Running minimum of `total`.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.trajectory
            .iter()
            .scan(f64::INFINITY, |best, o| {
                *best = best.min(o.total);
                Some(*best)
            })
            .collect()
    }
}

/// Fits control targets by Adam on the warping objective, starting at `init`.
pub fn fit_warp(
    src: &Raster,
    target: &Raster,
    ccfg: &ConstraintConfig,
    fcfg: &FitConfig,
    init: &WarpParams,
) -> Result<FitReport> {
    fcfg.validate()?;
    let problem = WarpProblem::new(&init.grid, src, target, *ccfg, fcfg.pixel_weight)?;
    fit_problem(&problem, fcfg, init)
}

/// [`fit_warp`] on a prepared problem.
pub fn fit_problem(problem: &WarpProblem, fcfg: &FitConfig, init: &WarpParams) -> Result<FitReport> {
    fcfg.validate()?;
    let mut theta = init.theta.clone();
    let n = theta.len();
    let mut m = vec![[0.0f64; 2]; n];
    let mut v = vec![[0.0f64; 2]; n];
    let mut trajectory = Vec::with_capacity(fcfg.iterations + 1);
    let mut b1t = 1.0;
    let mut b2t = 1.0;

    for it in 0..fcfg.iterations {
        let (obj, grad) = problem.objective_with_gradient(&theta)?;
        if !obj.total.is_finite() || grad.iter().flatten().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteLoss { iteration: it });
        }
        trajectory.push(obj);

        b1t *= fcfg.beta1;
        b2t *= fcfg.beta2;
        for i in 0..n {
            for a in 0..2 {
                let g = grad[i][a];
                m[i][a] = fcfg.beta1 * m[i][a] + (1.0 - fcfg.beta1) * g;
                v[i][a] = fcfg.beta2 * v[i][a] + (1.0 - fcfg.beta2) * g * g;
                let mhat = m[i][a] / (1.0 - b1t);
                let vhat = v[i][a] / (1.0 - b2t);
                theta[i][a] -= fcfg.learning_rate * mhat / (vhat.sqrt() + fcfg.epsilon);
            }
        }
    }
    let last = problem.objective(&theta)?;
    if !last.total.is_finite() {
        return Err(Error::NonFiniteLoss {
            iteration: fcfg.iterations,
        });
    }
    trajectory.push(last);
    Ok(FitReport {
        converged: last.total < fcfg.tolerance,
        trajectory,
        params: WarpParams::new(init.grid.clone(), theta)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tps::ControlGrid;

    fn lattice(k: usize) -> Vec<[f64; 2]> {
        ControlGrid::regular(k).unwrap().points().to_vec()
    }

    #[test]
    fn regular_lattice_has_zero_penalty() {
        let p = WarpParams::identity(ControlGrid::regular(5).unwrap());
        assert_eq!(constraint_l3(&p, &ConstraintConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn scaled_rotated_lattice_has_zero_penalty() {
        let (s, c) = (30f64.to_radians().sin(), 30f64.to_radians().cos());
        let theta: Vec<[f64; 2]> = lattice(5)
            .into_iter()
            .map(|[x, y]| [2.0 * (c * x - s * y), 2.0 * (s * x + c * y)])
            .collect();
        let v = constraint_l3_raw(&theta, 5, &ConstraintConfig::default()).unwrap();
        assert!(v.abs() < 1e-9, "{v}");
    }

    /// Term-by-term scalar transcription of the penalty for one 3x3 grid.
    fn scalar_3x3(t: &[[f64; 2]], lr: f64, ls: f64) -> f64 {
        let (x, y) = (t[4][0], t[4][1]);
        let (x0, y0) = (t[1][0], t[1][1]);
        let (x1, y1) = (t[7][0], t[7][1]);
        let (x2, y2) = (t[3][0], t[3][1]);
        let (x3, y3) = (t[5][0], t[5][1]);
        let n = |a: f64, b: f64| (a * a + b * b).sqrt();
        lr * ((n(x0 - x, y0 - y) - n(x1 - x, y1 - y)).abs() + (n(x2 - x, y2 - y) - n(x3 - x, y3 - y)).abs())
            + ls * (((y0 - y) * (x1 - x) - (y1 - y) * (x0 - x)).abs()
                + ((y2 - y) * (x3 - x) - (y3 - y) * (x2 - x)).abs())
    }

    #[test]
    fn shifted_centre_matches_scalar_oracle() {
        let mut t: Vec<[f64; 2]> = (0..3).flat_map(|r| (0..3).map(move |c| [c as f64, r as f64])).collect();
        t[4][0] += 0.2;
        let v = constraint_l3_raw(&t, 3, &ConstraintConfig::default()).unwrap();
        let want = scalar_3x3(&t, 0.1, 0.1);
        assert!((v - want).abs() < 1e-12);
        // |1.2 - 0.8| and |cross| = 0.4 each.
        assert!((want - 0.08).abs() < 1e-12);
    }

    #[test]
    fn k2_is_rejected() {
        let p = WarpParams::identity(ControlGrid::regular(2).unwrap());
        assert!(matches!(
            constraint_l3(&p, &ConstraintConfig::default()),
            Err(Error::GridTooSmall(2, 3))
        ));
    }

    #[test]
    fn penalty_gradient_matches_finite_differences() {
        let mut t = lattice(4);
        let offs = [0.03, -0.05, 0.07, 0.02, -0.04, 0.06, -0.01, 0.05];
        for (i, p) in t.iter_mut().enumerate() {
            p[0] += offs[i % 8] * (i as f64 * 0.37).sin();
            p[1] += offs[(i + 3) % 8] * (i as f64 * 0.91).cos();
        }
        let cfg = ConstraintConfig {
            lambda_r: 0.3,
            lambda_s: 0.7,
            delta: 0.0,
        };
        let (_, g) = constraint_l3_grad(&t, 4, &cfg).unwrap();
        let h = 1e-6;
        for i in 0..t.len() {
            for a in 0..2 {
                let mut tp = t.clone();
                tp[i][a] += h;
                let mut tm = t.clone();
                tm[i][a] -= h;
                let fd = (constraint_l3_raw(&tp, 4, &cfg).unwrap() - constraint_l3_raw(&tm, 4, &cfg).unwrap()) / (2.0 * h);
                assert!((fd - g[i][a]).abs() < 1e-6, "{i},{a}: {fd} vs {}", g[i][a]);
            }
        }
    }

    #[test]
    fn l4_basic_values() {
        let a = Raster::filled(4, 4, [0, 0, 0]).unwrap();
        let b = Raster::filled(4, 4, [255, 255, 255]).unwrap();
        assert_eq!(pixel_loss_l4(&a, &a).unwrap(), 0.0);
        assert_eq!(pixel_loss_l4(&a, &b).unwrap(), 1.0);
        let c = Raster::filled(3, 4, [0, 0, 0]).unwrap();
        assert!(matches!(pixel_loss_l4(&a, &c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn infinite_delta_leaves_l4_only() {
        let src = Raster::from_fn(12, 10, |x, y| [(x * 20) as u8, (y * 25) as u8, 100]).unwrap();
        let target = Raster::filled(12, 10, [30, 30, 30]).unwrap();
        let mut p = WarpParams::identity(ControlGrid::regular(3).unwrap());
        p.theta[4] = [0.3, -0.2];
        let ccfg = ConstraintConfig {
            delta: f64::INFINITY,
            ..Default::default()
        };
        let obj = warp_objective(&p, &src, &target, &ccfg, &FitConfig::default()).unwrap();
        assert!(obj.l3 > 0.0);
        assert_eq!(obj.hinged_l3, 0.0);
        assert_eq!(obj.total, obj.l4);
    }

    #[test]
    fn zero_learning_rate_keeps_theta() {
        let src = Raster::from_fn(12, 10, |x, _| [(x * 20) as u8, 0, 0]).unwrap();
        let target = Raster::filled(12, 10, [90, 0, 0]).unwrap();
        let init = WarpParams::identity(ControlGrid::regular(3).unwrap());
        let fcfg = FitConfig {
            iterations: 5,
            learning_rate: 0.0,
            ..Default::default()
        };
        let rep = fit_warp(&src, &target, &ConstraintConfig::default(), &fcfg, &init).unwrap();
        assert_eq!(rep.params, init);
        assert_eq!(rep.trajectory.len(), 6);
    }

    #[test]
    fn invalid_configs_rejected() {
        let cfg = ConstraintConfig {
            lambda_r: -1.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let f = FitConfig {
            iterations: 0,
            ..Default::default()
        };
        assert!(f.validate().is_err());
    }

    #[test]
    fn total_is_hinge_plus_weighted_l4() {
        let src = Raster::from_fn(16, 12, |x, y| [((x * y) % 256) as u8, (x * 9) as u8, (y * 13) as u8]).unwrap();
        let target = Raster::from_fn(16, 12, |x, _| [(x * 15) as u8, 40, 40]).unwrap();
        let init = WarpParams::identity(ControlGrid::regular(3).unwrap());
        let fcfg = FitConfig {
            iterations: 20,
            learning_rate: 0.01,
            pixel_weight: 2.5,
            ..Default::default()
        };
        let ccfg = ConstraintConfig {
            delta: 0.001,
            ..Default::default()
        };
        let rep = fit_warp(&src, &target, &ccfg, &fcfg, &init).unwrap();
        for o in &rep.trajectory {
            assert!((o.total - ((o.l3 - 0.001).max(0.0) + 2.5 * o.l4)).abs() < 1e-12);
        }
        let best = rep.best_so_far();
        assert!(best.windows(2).all(|w| w[1] <= w[0]));
    }
}
