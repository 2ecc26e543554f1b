//! Pose-complexity scoring and difficulty partition.
//!
//! The score is the mean L1 distance of seven pose reference points (both
//! shoulders, elbows and wrists, plus the torso) from their centroid. Spread
//! out, hands-down poses score high; crossed arms and twisted torsos score low.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

pub const NUM_KEYPOINTS: usize = 18;
pub const NUM_REFERENCE_POINTS: usize = 7;

/// Scores above this are [`Difficulty::Easy`].
pub const EASY_THRESHOLD: f64 = 80.0;
/// Scores below this are [`Difficulty::Hard`].
pub const HARD_THRESHOLD: f64 = 68.0;

/// COCO-18 keypoint names, in index order.
pub const KEYPOINT_NAMES: [&str; NUM_KEYPOINTS] = [
    "nose",
    "neck",
    "right_shoulder",
    "right_elbow",
    "right_wrist",
    "left_shoulder",
    "left_elbow",
    "left_wrist",
    "right_hip",
    "right_knee",
    "right_ankle",
    "left_hip",
    "left_knee",
    "left_ankle",
    "right_eye",
    "left_eye",
    "right_ear",
    "left_ear",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub visible: bool,
}

/// 18 keypoints in COCO-18 order. JSON form: `{"keypoints": [[x, y, v], ...]}`
/// with `v > 0` meaning visible.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseKeypoints {
    pub keypoints: [Keypoint; NUM_KEYPOINTS],
}

#[derive(Serialize, Deserialize)]
struct PoseDoc {
    keypoints: Vec<[f64; 3]>,
}

impl PoseKeypoints {
    pub fn new(keypoints: [Keypoint; NUM_KEYPOINTS]) -> Self {
        Self { keypoints }
    }

    /// Every keypoint visible at `(x, y)`.
    pub fn uniform(x: f64, y: f64) -> Self {
        Self {
            keypoints: [Keypoint { x, y, visible: true }; NUM_KEYPOINTS],
        }
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, String> {
        serde_json::from_str::<PoseKeypoints>(s).map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain numeric document")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(io_err(path))
    }

    /// Keypoints that are visible but fall outside a `width x height` frame.
    pub fn out_of_bounds(&self, width: usize, height: usize) -> Vec<usize> {
        self.keypoints
            .iter()
            .enumerate()
            .filter(|(_, k)| k.visible && !(k.x >= 0.0 && k.y >= 0.0 && k.x <= width as f64 && k.y <= height as f64))
            .map(|(i, _)| i)
            .collect()
    }
}

impl Serialize for PoseKeypoints {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PoseDoc {
            keypoints: self
                .keypoints
                .iter()
                .map(|k| [k.x, k.y, if k.visible { 1.0 } else { 0.0 }])
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PoseKeypoints {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let doc = PoseDoc::deserialize(d)?;
        if doc.keypoints.len() != NUM_KEYPOINTS {
            return Err(serde::de::Error::custom(format!(
                "expected {NUM_KEYPOINTS} keypoints, got {}",
                doc.keypoints.len()
            )));
        }
        let mut keypoints = [Keypoint {
            x: 0.0,
            y: 0.0,
            visible: false,
        }; NUM_KEYPOINTS];
        for (k, [x, y, v]) in keypoints.iter_mut().zip(doc.keypoints) {
            *k = Keypoint { x, y, visible: v > 0.0 };
        }
        Ok(Self { keypoints })
    }
}

/// Which keypoints feed the seven reference points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReferenceMapping {
    /// Shoulders, elbows and wrists, in reference-point order.
    pub limbs: [usize; 6],
    pub hips: [usize; 2],
    pub neck: usize,
}

impl Default for ReferenceMapping {
    fn default() -> Self {
        Self {
            limbs: [2, 5, 3, 6, 4, 7],
            hips: [8, 11],
            neck: 1,
        }
    }
}

/// Right/left shoulder, right/left elbow, right/left wrist, torso.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePoints(pub [[f64; 2]; NUM_REFERENCE_POINTS]);

pub fn reference_points(pose: &PoseKeypoints) -> Result<ReferencePoints> {
    reference_points_with(pose, &ReferenceMapping::default())
}

pub fn reference_points_with(pose: &PoseKeypoints, mapping: &ReferenceMapping) -> Result<ReferencePoints> {
    let kp = &pose.keypoints;
    let all = mapping.limbs.iter().chain(&mapping.hips).chain([&mapping.neck]);
    if let Some(&bad) = all.clone().find(|&&i| i >= NUM_KEYPOINTS) {
        return Err(Error::Config(format!("keypoint index {bad} out of range")));
    }
    let mut missing: Vec<&'static str> = mapping
        .limbs
        .iter()
        .filter(|&&i| !kp[i].visible)
        .map(|&i| KEYPOINT_NAMES[i])
        .collect();

    let [h0, h1] = mapping.hips.map(|i| kp[i]);
    let torso = if h0.visible && h1.visible {
        Some([(h0.x + h1.x) / 2.0, (h0.y + h1.y) / 2.0])
    } else if kp[mapping.neck].visible {
        Some([kp[mapping.neck].x, kp[mapping.neck].y])
    } else {
        missing.push("torso (both hips or neck)");
        None
    };
    if !missing.is_empty() {
        return Err(Error::MissingKeypoints(missing));
    }
    let mut pts = [[0.0; 2]; NUM_REFERENCE_POINTS];
    for (p, &i) in pts.iter_mut().zip(&mapping.limbs) {
        *p = [kp[i].x, kp[i].y];
    }
    pts[6] = torso.expect("checked above");
    Ok(ReferencePoints(pts))
}

/// Mean L1 distance of the reference points from their centroid.
pub fn complexity(refs: &ReferencePoints) -> f64 {
    let n = NUM_REFERENCE_POINTS as f64;
    let cx = refs.0.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = refs.0.iter().map(|p| p[1]).sum::<f64>() / n;
    refs.0.iter().map(|p| (p[0] - cx).abs() + (p[1] - cy).abs()).sum::<f64>() / n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Difficulty {
    Easy,
    Medium,
    Hard,
}

impl Difficulty {
    pub const ALL: [Difficulty; 3] = [Difficulty::Easy, Difficulty::Medium, Difficulty::Hard];

    pub fn as_str(self) -> &'static str {
        match self {
            Difficulty::Easy => "easy",
            Difficulty::Medium => "medium",
            Difficulty::Hard => "hard",
        }
    }
}

impl std::fmt::Display for Difficulty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `> 80` easy, `< 68` hard, medium otherwise (both boundaries included).
pub fn partition(c: f64) -> Difficulty {
    if c > EASY_THRESHOLD {
        Difficulty::Easy
    } else if c >= HARD_THRESHOLD {
        Difficulty::Medium
    } else {
        Difficulty::Hard
    }
}

/// Score and difficulty of a pose.
pub fn score_pose(pose: &PoseKeypoints) -> Result<(f64, Difficulty)> {
    let c = complexity(&reference_points(pose)?);
    Ok((c, partition(c)))
}


#[cfg(test)]
mod props {
    use super::*;
    use proptest::prelude::*;

    fn refs() -> impl Strategy<Value = ReferencePoints> {
        prop::array::uniform7(prop::array::uniform2(-200.0f64..200.0)).prop_map(ReferencePoints)
    }

    proptest! {
        #[test]
        fn scales_linearly(r in refs(), s in 0.01f64..10.0) {
            let scaled = ReferencePoints(r.0.map(|p| [p[0] * s, p[1] * s]));
            let (a, b) = (complexity(&r) * s, complexity(&scaled));
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }

        #[test]
        fn partition_is_monotone(a in 0.0f64..200.0, b in 0.0f64..200.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(partition(lo) >= partition(hi));
        }
    }
}
