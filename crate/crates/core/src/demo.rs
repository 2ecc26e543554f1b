//! Deterministic synthetic try-on scenes.
//!
//! A scene is a cartoon person (head disk, striped shirt, arms, trousers) on a
//! gradient background, together with its parse, pose, a flat "product" image
//! of the shirt, and a synthesized layout for a new garment. The product image
//! is an affine re-placement of the worn shirt, so a TPS fit can recover the
//! alignment exactly.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{io_err, Result};
use crate::imaging::{BinaryMask, Label, LabelMap, Raster};
use crate::score::{Keypoint, PoseKeypoints, NUM_KEYPOINTS};

/// How the synthesized layout differs from the reference parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GarmentStyle {
    /// Narrower shirt: the strips it uncovers next to the arms become arms.
    ShortSleeve,
    /// Sleeves cover the arms; nothing is generated.
    LongSleeve,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    /// Varies colours, arm placement and the product-image offset.
    pub variant: usize,
    pub style: GarmentStyle,
}

impl SceneSpec {
    pub fn new(width: usize, height: usize, variant: usize) -> Self {
        Self {
            width,
            height,
            variant,
            style: if variant % 2 == 0 {
                GarmentStyle::ShortSleeve
            } else {
                GarmentStyle::LongSleeve
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scene {
    pub reference: Raster,
    pub parse: LabelMap,
    pub pose: PoseKeypoints,
    pub clothes: Raster,
    pub clothes_mask: BinaryMask,
    pub synth_body: LabelMap,
    pub synth_clothes: BinaryMask,
}

#[derive(Clone, Copy)]
struct Rect {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl Rect {
    fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    fn local(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x0) / (self.x1 - self.x0), (y - self.y0) / (self.y1 - self.y0))
    }
}

fn shirt_texture(u: f64, v: f64, variant: usize) -> [u8; 3] {
    use std::f64::consts::TAU;
    let stripes = (TAU * 5.0 * v).sin();
    let weave = 0.3 * (TAU * 3.0 * u).cos();
    let base = [170.0, 60.0 + 20.0 * (variant % 3) as f64, 70.0];
    let mut out = [0u8; 3];
    for c in 0..3 {
        let amp = [60.0, 50.0, 80.0][c];
        out[c] = (base[c] + amp * (0.8 * stripes + weave)).round().clamp(0.0, 255.0) as u8;
    }
    out
}

pub fn generate_scene(spec: SceneSpec) -> Result<Scene> {
    let (w, h) = (spec.width, spec.height);
    let (wf, hf) = (w as f64, h as f64);
    let var = spec.variant;

    let head_c = (0.5 * wf, 0.17 * hf);
    let head_r = 0.11 * wf.min(hf);
    let torso = Rect {
        x0: 0.32 * wf,
        y0: 0.28 * hf,
        x1: 0.68 * wf,
        y1: 0.62 * hf,
    };
    let spread = 0.02 * wf * (var % 3) as f64;
    let arm_w = 0.09 * wf;
    let left_arm = Rect {
        x0: torso.x0 - arm_w - spread,
        y0: 0.29 * hf,
        x1: torso.x0 - spread,
        y1: 0.60 * hf,
    };
    let right_arm = Rect {
        x0: torso.x1 + spread,
        y0: 0.29 * hf,
        x1: torso.x1 + arm_w + spread,
        y1: 0.60 * hf,
    };
    let bottom = Rect {
        x0: 0.34 * wf,
        y0: 0.62 * hf,
        x1: 0.66 * wf,
        y1: 0.95 * hf,
    };

    let label_at = |x: f64, y: f64| {
        if (x - head_c.0).powi(2) + (y - head_c.1).powi(2) <= head_r * head_r {
            Label::Head
        } else if torso.contains(x, y) {
            Label::TorsoClothes
        } else if left_arm.contains(x, y) || right_arm.contains(x, y) {
            Label::Arms
        } else if bottom.contains(x, y) {
            Label::Bottom
        } else {
            Label::Background
        }
    };
    let parse = LabelMap::from_fn(w, h, |x, y| label_at(x as f64, y as f64))?;

    let bg_tint = (var * 23 % 60) as f64;
    let reference = Raster::from_fn(w, h, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        match parse.get(x, y) {
            Label::Head => [224, 180, 150],
            Label::Arms => [214, 170, 140],
            Label::Bottom => [40, 50, 110],
            Label::TorsoClothes => {
                let (u, v) = torso.local(xf, yf);
                shirt_texture(u, v, var)
            }
            _ => {
                let t = yf / hf;
                [
                    (200.0 - 40.0 * t) as u8,
                    (210.0 - bg_tint * t) as u8,
                    (225.0 - 20.0 * t) as u8,
                ]
            }
        }
    })?;

    // Product image: same shirt, slightly shifted and rescaled on black.
    let dx = (2 + var % 4) as f64;
    let dy = 1.0 + (var % 3) as f64;
    let scale = 0.96;
    let cx = 0.5 * (torso.x0 + torso.x1) + dx;
    let cy = 0.5 * (torso.y0 + torso.y1) + dy;
    let half_w = 0.5 * (torso.x1 - torso.x0) * scale;
    let half_h = 0.5 * (torso.y1 - torso.y0) * scale;
    let product = Rect {
        x0: cx - half_w,
        y0: cy - half_h,
        x1: cx + half_w,
        y1: cy + half_h,
    };
    let clothes_mask = BinaryMask::from_fn(w, h, |x, y| product.contains(x as f64, y as f64))?;
    let clothes = Raster::from_fn(w, h, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        if product.contains(xf, yf) {
            let (u, v) = product.local(xf, yf);
            shirt_texture(u, v, var)
        } else {
            [0, 0, 0]
        }
    })?;

    let (synth_body, synth_clothes) = match spec.style {
        GarmentStyle::ShortSleeve => {
            let inset = (0.04 * wf).max(1.0);
            let narrow = Rect {
                x0: torso.x0 + inset,
                x1: torso.x1 - inset,
                ..torso
            };
            let body = LabelMap::from_fn(w, h, |x, y| {
                let (xf, yf) = (x as f64, y as f64);
                match label_at(xf, yf) {
                    Label::TorsoClothes if !narrow.contains(xf, yf) && yf < left_arm.y1 => Label::Arms,
                    l => l,
                }
            })?;
            let clothes = body.mask_of(&[Label::TorsoClothes]);
            (body, clothes)
        }
        GarmentStyle::LongSleeve => {
            let body = LabelMap::from_fn(w, h, |x, y| match label_at(x as f64, y as f64) {
                Label::Arms => Label::TorsoClothes,
                l => l,
            })?;
            let clothes = body.mask_of(&[Label::TorsoClothes]);
            (body, clothes)
        }
    };

    let mut kp = [Keypoint {
        x: 0.0,
        y: 0.0,
        visible: true,
    }; NUM_KEYPOINTS];
    let mut put = |i: usize, x: f64, y: f64| kp[i] = Keypoint { x, y, visible: true };
    let mid = |r: &Rect| 0.5 * (r.x0 + r.x1);
    put(0, head_c.0, head_c.1);
    put(1, head_c.0, torso.y0);
    // Image-left arm is the person's right arm.
    put(2, mid(&left_arm), left_arm.y0 + 2.0);
    put(3, mid(&left_arm), 0.5 * (left_arm.y0 + left_arm.y1));
    put(4, mid(&left_arm), left_arm.y1 - 2.0);
    put(5, mid(&right_arm), right_arm.y0 + 2.0);
    put(6, mid(&right_arm), 0.5 * (right_arm.y0 + right_arm.y1));
    put(7, mid(&right_arm), right_arm.y1 - 2.0);
    put(8, 0.42 * wf, bottom.y0);
    put(9, 0.42 * wf, 0.78 * hf);
    put(10, 0.42 * wf, 0.93 * hf);
    put(11, 0.58 * wf, bottom.y0);
    put(12, 0.58 * wf, 0.78 * hf);
    put(13, 0.58 * wf, 0.93 * hf);
    put(14, head_c.0 - 0.3 * head_r, head_c.1 - 0.2 * head_r);
    put(15, head_c.0 + 0.3 * head_r, head_c.1 - 0.2 * head_r);
    put(16, head_c.0 - 0.9 * head_r, head_c.1);
    put(17, head_c.0 + 0.9 * head_r, head_c.1);

    Ok(Scene {
        reference,
        parse,
        pose: PoseKeypoints::new(kp),
        clothes,
        clothes_mask,
        synth_body,
        synth_clothes,
    })
}

/// Writes `entries` scenes under `dir` plus a `manifest.jsonl`; returns the manifest path.
pub fn write_demo_dataset(dir: &Path, entries: usize, width: usize, height: usize) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut manifest = String::new();
    for i in 0..entries {
        let scene = generate_scene(SceneSpec::new(width, height, i))?;
        let id = format!("scene_{i:03}");
        let name = |suffix: &str| format!("{id}_{suffix}");
        scene.reference.save_png(dir.join(name("reference.png")))?;
        scene.parse.save_png(dir.join(name("parse.png")))?;
        scene.pose.save(dir.join(name("pose.json")))?;
        scene.clothes.save_png(dir.join(name("clothes.png")))?;
        scene.clothes_mask.save_png(dir.join(name("clothes_mask.png")))?;
        scene.synth_body.save_png(dir.join(name("synth_body.png")))?;
        scene.synth_clothes.save_png(dir.join(name("synth_clothes.png")))?;
        let line = serde_json::json!({
            "id": id,
            "reference": name("reference.png"),
            "parse": name("parse.png"),
            "pose": name("pose.json"),
            "clothes": name("clothes.png"),
            "clothes_mask": name("clothes_mask.png"),
            "synth_body": name("synth_body.png"),
            "synth_clothes": name("synth_clothes.png"),
        });
        manifest.push_str(&line.to_string());
        manifest.push('\n');
    }
    let path = dir.join("manifest.jsonl");
    std::fs::write(&path, manifest).map_err(io_err(&path))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scene_is_consistent() {
        for variant in 0..4 {
            let s = generate_scene(SceneSpec::new(96, 128, variant)).unwrap();
            assert_eq!(s.reference.dims(), (96, 128));
            assert!(s.parse.mask_of(&[Label::TorsoClothes]).count() > 500);
            assert!(s.parse.mask_of(&[Label::Arms]).count() > 100);
            assert!(s.pose.out_of_bounds(96, 128).is_empty());
            assert!(s.clothes_mask.count() > 400);
        }
    }

    #[test]
    fn scenes_are_deterministic() {
        let a = generate_scene(SceneSpec::new(64, 80, 3)).unwrap();
        let b = generate_scene(SceneSpec::new(64, 80, 3)).unwrap();
        assert_eq!(a.reference, b.reference);
        assert_eq!(a.clothes, b.clothes);
    }
}
