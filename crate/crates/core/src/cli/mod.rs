//! Manifest-driven batch commands behind the `tryon` binary.
//!
//! A manifest is JSON lines, one entry per line; relative paths resolve
//! against the manifest's directory. Every command processes entries
//! independently, records per-entry failures, and sorts its report by id so
//! the output does not depend on the parallelism degree.

mod compose;
mod eval;
mod score;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::fuse::{DEFAULT_FILL_MAX_ITERS, DEFAULT_FILL_TOL};
use crate::imaging::{DEFAULT_HEIGHT, DEFAULT_WIDTH};
use crate::tps::DEFAULT_GRID_K;
use crate::warpfit::{ConstraintConfig, FitConfig};

pub use compose::{cmd_compose, compose_entry, ComposeEntry, ComposeReport, ComposedEntry};
pub use eval::{cmd_eval, EvalEntry, EvalGroup, EvalReport};
pub use score::{cmd_score, Counts, ScoreEntry, ScoreReport};

/// One line of a manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub reference: PathBuf,
    pub parse: PathBuf,
    pub pose: PathBuf,
    pub clothes: PathBuf,
    pub clothes_mask: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth_body: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synth_clothes: Option<PathBuf>,
    /// Externally refined clothes raster blended in by alpha.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refined: Option<PathBuf>,
    /// Single-channel PNG, `alpha = value / 255`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<PathBuf>,
}

impl ManifestEntry {
    fn resolve_in(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.reference);
        fix(&mut self.parse);
        fix(&mut self.pose);
        fix(&mut self.clothes);
        fix(&mut self.clothes_mask);
        for p in [&mut self.synth_body, &mut self.synth_clothes, &mut self.refined, &mut self.alpha]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    /// Parses JSON lines; blank lines and `#` comments are skipped. Relative
    /// paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        let mut ids = BTreeSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut entry: ManifestEntry = serde_json::from_str(line)
                .map_err(|e| Error::Manifest(format!("line {}: {e}", lineno + 1)))?;
            if !ids.insert(entry.id.clone()) {
                return Err(Error::Manifest(format!("line {}: duplicate id {:?}", lineno + 1, entry.id)));
            }
            entry.resolve_in(base);
            entries.push(entry);
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, base)
    }
}

/// Settings shared by all commands. Loaded from JSON; absent keys take defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub width: usize,
    pub height: usize,
    pub grid_k: usize,
    pub constraint: ConstraintConfig,
    pub fit: FitConfig,
    pub oracle_layout: bool,
    pub out: Option<PathBuf>,
    pub parallel: usize,
    pub fill_tol: f64,
    pub fill_max_iters: usize,
    /// Upper bound on the paired-reconstruction clothes error.
    pub clothes_l4_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            width: DEFAULT_WIDTH,
            height: DEFAULT_HEIGHT,
            grid_k: DEFAULT_GRID_K,
            constraint: ConstraintConfig::default(),
            fit: FitConfig::default(),
            oracle_layout: false,
            out: None,
            parallel: 1,
            fill_tol: DEFAULT_FILL_TOL,
            fill_max_iters: DEFAULT_FILL_MAX_ITERS,
            clothes_l4_threshold: 0.05,
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(Error::Config(format!(
                "resolution {}x{} too small",
                self.width, self.height
            )));
        }
        if self.grid_k < 3 {
            return Err(Error::Config(format!("grid_k must be at least 3 (got {})", self.grid_k)));
        }
        if self.parallel == 0 {
            return Err(Error::Config("parallel must be at least 1".into()));
        }
        if !(self.fill_tol > 0.0) {
            return Err(Error::Config("fill_tol must be positive".into()));
        }
        self.constraint.validate()?;
        self.fit.validate()
    }

    /// Runs `f` on every entry with at most `parallel` threads; results keep entry order.
    pub(crate) fn run_entries<T: Send>(
        &self,
        entries: &[ManifestEntry],
        f: impl Fn(&ManifestEntry) -> T + Sync,
    ) -> Result<Vec<T>> {
        use rayon::prelude::*;
        if self.parallel <= 1 {
            return Ok(entries.iter().map(f).collect());
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.parallel)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        Ok(pool.install(|| entries.par_iter().map(&f).collect()))
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

pub(crate) fn ensure_dims(what: &str, got: (usize, usize), cfg: &RunConfig) -> Result<()> {
    if got != (cfg.width, cfg.height) {
        return Err(Error::Config(format!(
            "{what} is {}x{}, expected working resolution {}x{}",
            got.0, got.1, cfg.width, cfg.height
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_parsing() {
        let text = r#"
# comment
{"id":"a","reference":"r.png","parse":"p.png","pose":"k.json","clothes":"c.png","clothes_mask":"m.png"}

{"id":"b","reference":"/abs/r.png","parse":"p.png","pose":"k.json","clothes":"c.png","clothes_mask":"m.png","synth_body":"sb.png"}
"#;
        let m = Manifest::parse(text, Path::new("/data")).unwrap();
        assert_eq!(m.entries.len(), 2);
        assert_eq!(m.entries[0].reference, PathBuf::from("/data/r.png"));
        assert_eq!(m.entries[1].reference, PathBuf::from("/abs/r.png"));
        assert_eq!(m.entries[1].synth_body, Some(PathBuf::from("/data/sb.png")));
        assert_eq!(m.entries[0].synth_clothes, None);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let line = r#"{"id":"a","reference":"r","parse":"p","pose":"k","clothes":"c","clothes_mask":"m"}"#;
        let text = format!("{line}\n{line}\n");
        assert!(matches!(Manifest::parse(&text, Path::new(".")), Err(Error::Manifest(_))));
    }

    #[test]
    fn config_defaults_and_partial_json() {
        let cfg: RunConfig = serde_json::from_str(r#"{"grid_k": 4, "constraint": {"lambda_r": 0.5}}"#).unwrap();
        assert_eq!(cfg.grid_k, 4);
        assert_eq!(cfg.constraint.lambda_r, 0.5);
        assert_eq!(cfg.constraint.lambda_s, 0.1);
        assert_eq!(cfg.fit.learning_rate, 0.0002);
        assert_eq!((cfg.width, cfg.height), (192, 256));
        cfg.validate().unwrap();
        let bad = RunConfig {
            parallel: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
