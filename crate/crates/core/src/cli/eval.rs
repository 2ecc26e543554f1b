use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Manifest, ManifestEntry, RunConfig};
use crate::error::Result;
use crate::imaging::Raster;
use crate::metrics::{mean_l1, ssim};
use crate::score::{score_pose, Difficulty, PoseKeypoints};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalEntry {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<Difficulty>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complexity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ssim: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalGroup {
    /// `None` for the all-entries row.
    pub difficulty: Option<Difficulty>,
    pub count: usize,
    pub mean_ssim: Option<f64>,
    pub mean_l1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub entries: Vec<EvalEntry>,
    /// Easy, medium, hard, then all.
    pub groups: Vec<EvalGroup>,
    pub failed: usize,
}

impl EvalReport {
    pub fn all_ok(&self) -> bool {
        self.failed == 0
    }

    pub fn group(&self, d: Difficulty) -> &EvalGroup {
        self.groups
            .iter()
            .find(|g| g.difficulty == Some(d))
            .expect("one group per difficulty")
    }

    /// Aligned text table of the group means.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<8} {:>5} {:>8} {:>8}", "level", "n", "ssim", "l1");
        for g in &self.groups {
            let name = g.difficulty.map(|d| d.as_str()).unwrap_or("all");
            let f = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
            let _ = writeln!(s, "{:<8} {:>5} {:>8} {:>8}", name, g.count, f(g.mean_ssim), f(g.mean_l1));
        }
        s
    }
}

fn eval_entry(entry: &ManifestEntry, composed_dir: &Path) -> EvalEntry {
    let run = || -> Result<(f64, Difficulty, f64, f64)> {
        let (c, d) = score_pose(&PoseKeypoints::load(&entry.pose)?)?;
        let truth = Raster::load_png(&entry.reference)?;
        let composed = Raster::load_png(composed_dir.join(format!("{}.png", entry.id)))?;
        Ok((c, d, ssim(&composed, &truth)?, mean_l1(&composed, &truth)?))
    };
    match run() {
        Ok((c, d, s, l)) => EvalEntry {
            id: entry.id.clone(),
            difficulty: Some(d),
            complexity: Some(c),
            ssim: Some(s),
            l1: Some(l),
            error: None,
        },
        Err(e) => EvalEntry {
            id: entry.id.clone(),
            difficulty: None,
            complexity: None,
            ssim: None,
            l1: None,
            error: Some(e.to_string()),
        },
    }
}

fn group(entries: &[&EvalEntry], difficulty: Option<Difficulty>) -> EvalGroup {
    let n = entries.len();
    let mean = |f: fn(&EvalEntry) -> f64| {
        if n == 0 {
            None
        } else {
            Some(entries.iter().map(|e| f(e)).sum::<f64>() / n as f64)
        }
    };
    EvalGroup {
        difficulty,
        count: n,
        mean_ssim: mean(|e| e.ssim.unwrap_or(f64::NAN)),
        mean_l1: mean(|e| e.l1.unwrap_or(f64::NAN)),
    }
}

/// SSIM and L1 of `composed_dir/<id>.png` against each reference, grouped by difficulty.
pub fn cmd_eval(manifest: &Manifest, composed_dir: &Path, config: &RunConfig) -> Result<EvalReport> {
    let mut entries = config.run_entries(&manifest.entries, |e| eval_entry(e, composed_dir))?;
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    let ok: Vec<&EvalEntry> = entries.iter().filter(|e| e.error.is_none()).collect();
    let mut groups: Vec<EvalGroup> = Difficulty::ALL
        .iter()
        .map(|&d| {
            let members: Vec<&EvalEntry> = ok.iter().copied().filter(|e| e.difficulty == Some(d)).collect();
            group(&members, Some(d))
        })
        .collect();
    groups.push(group(&ok, None));
    let failed = entries.len() - ok.len();
    Ok(EvalReport {
        entries,
        groups,
        failed,
    })
}
