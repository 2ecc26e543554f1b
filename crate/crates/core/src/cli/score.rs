use serde::{Deserialize, Serialize};

use super::{Manifest, ManifestEntry, RunConfig};
use crate::error::Result;
use crate::score::{score_pose, Difficulty, PoseKeypoints};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complexity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difficulty: Option<Difficulty>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub easy: usize,
    pub medium: usize,
    pub hard: usize,
}

impl Counts {
    pub fn add(&mut self, d: Difficulty) {
        match d {
            Difficulty::Easy => self.easy += 1,
            Difficulty::Medium => self.medium += 1,
            Difficulty::Hard => self.hard += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub entries: Vec<ScoreEntry>,
    pub counts: Counts,
    pub failed: usize,
}

impl ScoreReport {
    pub fn all_ok(&self) -> bool {
        self.failed == 0
    }
}

fn score_entry(entry: &ManifestEntry) -> ScoreEntry {
    match PoseKeypoints::load(&entry.pose).and_then(|p| score_pose(&p)) {
        Ok((c, d)) => ScoreEntry {
            id: entry.id.clone(),
            complexity: Some(c),
            difficulty: Some(d),
            error: None,
        },
        Err(e) => ScoreEntry {
            id: entry.id.clone(),
            complexity: None,
            difficulty: None,
            error: Some(e.to_string()),
        },
    }
}

/// Complexity score and difficulty for every entry's pose.
pub fn cmd_score(manifest: &Manifest, config: &RunConfig) -> Result<ScoreReport> {
    let mut entries = config.run_entries(&manifest.entries, score_entry)?;
    entries.sort_by(|a, b| a.id.cmp(&b.id));
    let mut counts = Counts::default();
    let mut failed = 0;
    for e in &entries {
        match e.difficulty {
            Some(d) => counts.add(d),
            None => failed += 1,
        }
    }
    Ok(ScoreReport {
        entries,
        counts,
        failed,
    })
}
