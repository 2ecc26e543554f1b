//! Deterministic virtual try-on geometry.
//!
//! The crate fits thin-plate-spline warps of a clothing image onto a target
//! clothes region under a second-order difference penalty that keeps the
//! control lattice locally affine, derives the preserve/generate/clothes
//! roles of every output pixel from semantic layouts, assembles try-on
//! images that pass preserved content through byte-for-byte, and scores
//! inputs by pose complexity.
//!
//! Modules, bottom-up:
//!
//! - [`imaging`]: rasters, label maps, masks, bilinear sampling, PNG I/O
//! - [`tps`]: TPS system, coefficients and backward warping
//! - [`warpfit`]: penalty, pixel loss, analytic gradient and Adam fitting
//! - [`layout`]: fused map, generation region, composited body mask, alpha blend
//! - [`fuse`]: harmonic fill and try-on assembly
//! - [`score`]: pose reference points, complexity and difficulty
//! - [`metrics`]: SSIM and mean L1
//! - [`cli`]: manifest-driven batch commands used by the `tryon` binary
//! - [`demo`]: synthetic scenes
//!
//! The `examples/` directory has one runnable program per capability.

pub mod cli;
pub mod demo;
pub mod error;
pub mod fuse;
pub mod imaging;
pub mod layout;
pub mod metrics;
pub mod score;
pub mod tps;
pub mod warpfit;

pub use error::{Error, Result};
pub use imaging::{AlphaMap, BinaryMask, FloatRaster, Label, LabelMap, Raster};
pub use tps::{ControlGrid, TpsWarper, WarpParams};
pub use warpfit::{ConstraintConfig, FitConfig, FitReport};
