use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tryon_geom::imaging::{FloatRaster, Raster};
use tryon_geom::tps::{pixel_to_norm, warp_image, ControlGrid, WarpParams};
use tryon_geom::warpfit::{
    constraint_l3, fit_warp, objective_gradient, warp_objective, ConstraintConfig, FitConfig, WarpProblem,
};
use tryon_geom::Error;

fn blob(w: usize, h: usize, cx: f64) -> Raster {
    Raster::from_fn(w, h, |x, y| {
        let (u, v) = (pixel_to_norm(x as f64, w) - cx, pixel_to_norm(y as f64, h));
        let g = (-(u * u + v * v) / 0.15).exp();
        let s = (0.5 + 0.5 * (6.0 * u).sin() * g) * 255.0;
        [(g * 255.0) as u8, s as u8, 128]
    })
    .unwrap()
}

#[test]
fn identity_fixed_point() {
    let src = blob(48, 64, 0.0);
    let init = WarpParams::identity(ControlGrid::regular(5).unwrap());
    let report = fit_warp(&src, &src, &ConstraintConfig::default(), &FitConfig::default(), &init).unwrap();
    let last = report.final_objective();
    assert!(last.l4 <= 1e-3, "l4 {}", last.l4);
    for (p, q) in report.params.theta.iter().zip(&init.theta) {
        assert!((p[0] - q[0]).abs() < 1e-2 && (p[1] - q[1]).abs() < 1e-2);
    }
    assert!(report.converged);
}

#[test]
fn perfect_fit_has_zero_objective_and_gradient() {
    let src = blob(40, 40, 0.1);
    let params = WarpParams::identity(ControlGrid::regular(4).unwrap());
    let target = warp_image(&src, &params).unwrap();
    let (c, f) = (ConstraintConfig::default(), FitConfig::default());
    let o = warp_objective(&params, &src, &target, &c, &f).unwrap();
    // The 2/3 lattice spacing is inexact, so L3 is rounding noise rather than 0.
    assert!(o.total < 1e-12, "total {}", o.total);
    let g = objective_gradient(&params, &src, &target, &c, &f).unwrap();
    assert!(g.iter().all(|v| v[0] == 0.0 && v[1] == 0.0));
}

#[test]
fn infinite_margin_leaves_pixel_loss_only() {
    let src = blob(32, 32, 0.0);
    let target = blob(32, 32, 0.2);
    let grid = ControlGrid::regular(4).unwrap();
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let theta = grid.points().iter().map(|p| [p[0] + r.gen_range(-0.1..0.1), p[1]]).collect();
    let params = WarpParams::new(grid, theta).unwrap();
    let c = ConstraintConfig {
        delta: f64::INFINITY,
        ..ConstraintConfig::default()
    };
    let o = warp_objective(&params, &src, &target, &c, &FitConfig::default()).unwrap();
    assert!(o.l3 > 0.0);
    assert_eq!(o.hinged_l3, 0.0);
    assert_eq!(o.total, o.l4);
}

#[test]
fn translation_gradient_points_toward_source_content() {
    // Target = source shifted right, so sampling must move left (theta_x decreases).
    let (w, h) = (64, 48);
    let src = blob(w, h, 0.0);
    let target = blob(w, h, 0.15);
    let params = WarpParams::identity(ControlGrid::regular(5).unwrap());
    let g = objective_gradient(&params, &src, &target, &ConstraintConfig::default(), &FitConfig::default()).unwrap();
    let mean_x = g.iter().map(|v| v[0]).sum::<f64>() / g.len() as f64;
    assert!(mean_x > 0.0, "mean x-gradient {mean_x}");

    // A small step against the gradient lowers the objective.
    let problem =
        WarpProblem::new(&params.grid, &src, &target, ConstraintConfig::default(), 1.0).unwrap();
    let stepped: Vec<[f64; 2]> = params.theta.iter().map(|t| [t[0] - 0.01, t[1]]).collect();
    assert!(problem.objective(&stepped).unwrap().total < problem.objective(&params.theta).unwrap().total);
}

#[test]
fn zero_learning_rate_keeps_theta() {
    let src = blob(24, 24, 0.0);
    let target = blob(24, 24, 0.3);
    let init = WarpParams::identity(ControlGrid::regular(4).unwrap());
    let f = FitConfig {
        learning_rate: 0.0,
        iterations: 25,
        ..FitConfig::default()
    };
    let report = fit_warp(&src, &target, &ConstraintConfig::default(), &f, &init).unwrap();
    assert_eq!(report.params, init);
    assert_eq!(report.trajectory.len(), 26);
    assert!(report.trajectory.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn running_best_never_increases() {
    let src = blob(40, 40, 0.0);
    let target = blob(40, 40, 0.2);
    let init = WarpParams::identity(ControlGrid::regular(5).unwrap());
    let f = FitConfig {
        learning_rate: 5e-3,
        iterations: 120,
        ..FitConfig::default()
    };
    let report = fit_warp(&src, &target, &ConstraintConfig::default(), &f, &init).unwrap();
    let best = report.best_so_far();
    assert!(best.windows(2).all(|w| w[1] <= w[0]));
    assert!(report.final_objective().l4 < report.trajectory[0].l4);
}

#[test]
fn penalty_is_translation_invariant() {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let grid = ControlGrid::regular(6).unwrap();
    let cfg = ConstraintConfig::default();
    for _ in 0..50 {
        let theta: Vec<[f64; 2]> = grid
            .points()
            .iter()
            .map(|p| [p[0] + r.gen_range(-0.2..0.2), p[1] + r.gen_range(-0.2..0.2)])
            .collect();
        let (dx, dy) = (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
        let moved = theta.iter().map(|p| [p[0] + dx, p[1] + dy]).collect();
        let a = constraint_l3(&WarpParams::new(grid.clone(), theta).unwrap(), &cfg).unwrap();
        let b = constraint_l3(&WarpParams::new(grid.clone(), moved).unwrap(), &cfg).unwrap();
        assert!((a - b).abs() < 1e-9 * a.max(1.0));
    }
}

#[test]
fn non_finite_input_reports_iteration() {
    let mut src = blob(16, 16, 0.0).to_float();
    src.set_pixel(3, 3, [f64::NAN, 0.0, 0.0]);
    let target = FloatRaster::zeros(16, 16).unwrap();
    let grid = ControlGrid::regular(3).unwrap();
    let problem = WarpProblem::from_float(&grid, src, target, ConstraintConfig::default(), 1.0).unwrap();
    let err = tryon_geom::warpfit::fit_problem(&problem, &FitConfig::default(), &WarpParams::identity(grid)).unwrap_err();
    assert!(matches!(err, Error::NonFiniteLoss { iteration: 0 }), "{err:?}");
}

#[test]
fn mismatched_sizes_are_rejected() {
    let a = blob(16, 16, 0.0);
    let b = blob(16, 17, 0.0);
    let init = WarpParams::identity(ControlGrid::regular(3).unwrap());
    let err = fit_warp(&a, &b, &ConstraintConfig::default(), &FitConfig::default(), &init).unwrap_err();
    assert!(matches!(err, Error::DimensionMismatch { .. }));
}
