//! Semantic-layout mask algebra.
//!
//! Notation follows the try-on pipeline: `M` is the reference parse, `M_c` its
//! torso-clothes mask, `M_w` its non-target body parts (head, arms, bottom),
//! `M^S_w` / `M^S_c` the synthesized body layout and clothes mask for the new
//! garment.

use crate::error::{Error, Result};
use crate::imaging::{ensure_same_dims, label_mask, AlphaMap, BinaryMask, Label, LabelMap, Raster, CHANNELS};
use crate::score::PoseKeypoints;

/// Arms and torso-clothes merged into [`Label::Fused`].
pub fn build_fused_map(parse: &LabelMap) -> LabelMap {
    let labels = parse
        .labels()
        .iter()
        .map(|&l| {
            if l == Label::Arms.id() || l == Label::TorsoClothes.id() {
                Label::Fused.id()
            } else {
                l
            }
        })
        .collect();
    LabelMap::new(parse.width(), parse.height(), labels).expect("relabeling keeps shape and label set")
}

/// Pixels that were clothes and become arms: `arms(M^S_w) ⊙ M_c`.
pub fn generation_region(synth_body: &LabelMap, clothes: &BinaryMask) -> Result<BinaryMask> {
    ensure_same_dims(synth_body.dims(), clothes.dims())?;
    synth_body.mask_of(&[Label::Arms]).and(clothes)
}

/// `(gen + body) ⊙ (1 - synth_clothes)` for disjoint `gen`, `body`.
pub fn composite_body_mask(gen: &BinaryMask, body: &BinaryMask, synth_clothes: &BinaryMask) -> Result<BinaryMask> {
    ensure_same_dims(gen.dims(), body.dims())?;
    ensure_same_dims(gen.dims(), synth_clothes.dims())?;
    let overlap = gen.overlap(body)?;
    if overlap > 0 {
        return Err(Error::NotDisjoint { overlap });
    }
    gen.or(body)?.and_not(synth_clothes)
}

/// `I_w' ⊙ (1 - M^S_c)`.
pub fn preserved_image(reference_minus_clothes: &Raster, synth_clothes: &BinaryMask) -> Result<Raster> {
    ensure_same_dims(reference_minus_clothes.dims(), synth_clothes.dims())?;
    crate::imaging::mask_apply(reference_minus_clothes, &synth_clothes.not())
}

/// `(1 - M_k ⊙ M_a) ⊙ I_w'`: removes arm pixels covered by an irregular mask.
pub fn occlude_arms(reference_minus_clothes: &Raster, arms: &BinaryMask, irregular: &BinaryMask) -> Result<Raster> {
    ensure_same_dims(reference_minus_clothes.dims(), arms.dims())?;
    ensure_same_dims(arms.dims(), irregular.dims())?;
    let removed = irregular.and(arms)?;
    crate::imaging::mask_apply(reference_minus_clothes, &removed.not())
}

/// `(1 - alpha) ⊙ warped + alpha ⊙ refined`, rounded to 8-bit.
pub fn alpha_composite(warped: &Raster, refined: &Raster, alpha: &AlphaMap) -> Result<Raster> {
    ensure_same_dims(warped.dims(), refined.dims())?;
    ensure_same_dims(warped.dims(), alpha.dims())?;
    let a = alpha.values();
    if let Some((index, &value)) = a.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
        return Err(Error::AlphaOutOfRange { index, value });
    }
    let data = warped
        .data()
        .iter()
        .zip(refined.data())
        .enumerate()
        .map(|(i, (&w, &r))| {
            let al = a[i / CHANNELS];
            let v = (1.0 - al) * f64::from(w) + al * f64::from(r);
            v.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    Raster::new(warped.width(), warped.height(), data)
}

/// Inputs to the composition step.
#[derive(Debug, Clone)]
pub struct LayoutBundle {
    pub parse: LabelMap,
    pub synth_body: LabelMap,
    pub synth_clothes: BinaryMask,
    pub clothes: BinaryMask,
    pub pose: Option<PoseKeypoints>,
}

impl LayoutBundle {
    pub fn new(
        parse: LabelMap,
        synth_body: LabelMap,
        synth_clothes: BinaryMask,
        pose: Option<PoseKeypoints>,
    ) -> Result<Self> {
        ensure_same_dims(parse.dims(), synth_body.dims())?;
        ensure_same_dims(parse.dims(), synth_clothes.dims())?;
        let clothes = parse.mask_of(&[Label::TorsoClothes]);
        Ok(Self {
            parse,
            synth_body,
            synth_clothes,
            clothes,
            pose,
        })
    }

    /// Uses the reference parse as its own synthesized layout, as in paired training.
    pub fn oracle(parse: LabelMap, pose: Option<PoseKeypoints>) -> Self {
        let synth_clothes = parse.mask_of(&[Label::TorsoClothes]);
        Self::new(parse.clone(), parse, synth_clothes, pose).expect("shapes agree by construction")
    }

    /// Non-target body parts of the reference: head, arms, bottom.
    pub fn body(&self) -> BinaryMask {
        label_mask(&self.parse, &[Label::Head.id(), Label::Arms.id(), Label::Bottom.id()]).expect("known labels")
    }

    pub fn compose(&self) -> Result<CompositeLayout> {
        let body = self.body();
        let gen = generation_region(&self.synth_body, &self.clothes)?;
        let composited_body = composite_body_mask(&gen, &body, &self.synth_clothes)?;
        let generate = gen.and_not(&self.synth_clothes)?;
        let preserve = self.clothes.not().and_not(&self.synth_clothes)?;
        let residual = self.clothes.and_not(&self.synth_clothes)?.and_not(&generate)?;
        Ok(CompositeLayout {
            preserve,
            generate,
            clothes: self.synth_clothes.clone(),
            composited_body,
            residual,
        })
    }
}

/// Disjoint per-pixel roles of the try-on output.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeLayout {
    /// Reference pixels that pass through unchanged.
    pub preserve: BinaryMask,
    /// Newly exposed arm region (after removing the new clothes).
    pub generate: BinaryMask,
    /// Target clothes region.
    pub clothes: BinaryMask,
    /// `M^C_w`.
    pub composited_body: BinaryMask,
    /// Old clothes pixels claimed by neither the new clothes nor the arms.
    pub residual: BinaryMask,
}

impl CompositeLayout {
    /// Checks pairwise disjointness of the roles and `M^C_w ⊙ M^S_c = 0`.
    pub fn validate(&self) -> Result<()> {
        let roles = [&self.preserve, &self.generate, &self.clothes, &self.residual];
        for i in 0..roles.len() {
            for j in i + 1..roles.len() {
                let overlap = roles[i].overlap(roles[j])?;
                if overlap > 0 {
                    return Err(Error::NotDisjoint { overlap });
                }
            }
        }
        let overlap = self.composited_body.overlap(&self.clothes)?;
        if overlap > 0 {
            return Err(Error::NotDisjoint { overlap });
        }
        Ok(())
    }

    /// Region handed to the fill step.
    pub fn fill_region(&self) -> BinaryMask {
        self.generate.or(&self.residual).expect("same dims")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse4() -> LabelMap {
        LabelMap::new(4, 4, vec![0, 1, 1, 0, 2, 3, 3, 2, 2, 3, 3, 2, 0, 4, 4, 0]).unwrap()
    }

    #[test]
    fn fused_map_cases() {
        let p = LabelMap::from_fn(3, 3, |x, _| [Label::Background, Label::Head, Label::Bottom][x]).unwrap();
        assert_eq!(build_fused_map(&p), p);
        let arms = LabelMap::filled(3, 2, Label::Arms).unwrap();
        assert_eq!(build_fused_map(&arms), LabelMap::filled(3, 2, Label::Fused).unwrap());
        let f = build_fused_map(&parse4());
        for (a, b) in parse4().labels().iter().zip(f.labels()) {
            let want = if *a == 2 || *a == 3 { 5 } else { *a };
            assert_eq!(*b, want);
        }
    }

    #[test]
    fn generation_region_cases() {
        let long_sleeve = LabelMap::filled(4, 4, Label::TorsoClothes).unwrap();
        let mc = parse4().mask_of(&[Label::TorsoClothes]);
        assert!(generation_region(&long_sleeve, &mc).unwrap().is_empty());
        let synth = LabelMap::filled(4, 4, Label::Arms).unwrap();
        assert!(generation_region(&synth, &BinaryMask::zeros(4, 4).unwrap()).unwrap().is_empty());

        let synth = LabelMap::new(4, 4, vec![0, 1, 1, 0, 2, 2, 3, 2, 2, 3, 2, 2, 0, 4, 4, 0]).unwrap();
        let g = generation_region(&synth, &mc).unwrap();
        for i in 0..16 {
            assert_eq!(g.bits()[i], synth.labels()[i] == 2 && parse4().labels()[i] == 3);
        }
    }

    #[test]
    fn composite_body_cases() {
        let gen = BinaryMask::from_fn(4, 4, |x, y| x == 1 && y == 1).unwrap();
        let body = BinaryMask::from_fn(4, 4, |x, _| x == 3).unwrap();
        let all = BinaryMask::ones(4, 4).unwrap();
        let none = BinaryMask::zeros(4, 4).unwrap();
        assert!(composite_body_mask(&gen, &body, &all).unwrap().is_empty());
        assert_eq!(composite_body_mask(&gen, &body, &none).unwrap(), gen.or(&body).unwrap());
        let bad = BinaryMask::from_fn(4, 4, |x, _| x == 1).unwrap();
        assert!(matches!(
            composite_body_mask(&gen, &bad, &none),
            Err(Error::NotDisjoint { overlap: 1 })
        ));
    }

    #[test]
    fn preserved_image_cases() {
        let img = Raster::from_fn(4, 4, |x, y| [x as u8 + 1, y as u8 + 1, 9]).unwrap();
        assert_eq!(preserved_image(&img, &BinaryMask::zeros(4, 4).unwrap()).unwrap(), img);
        let black = preserved_image(&img, &BinaryMask::ones(4, 4).unwrap()).unwrap();
        assert!(black.data().iter().all(|&v| v == 0));
        let m = BinaryMask::from_fn(4, 4, |x, y| x > y).unwrap();
        let out = preserved_image(&img, &m).unwrap();
        for y in 0..4 {
            for x in 0..4 {
                assert_eq!(out.pixel(x, y), if x > y { [0; 3] } else { img.pixel(x, y) });
            }
        }
    }

    #[test]
    fn occlusion_cases() {
        let img = Raster::filled(4, 4, [50, 60, 70]).unwrap();
        let arms = parse4().mask_of(&[Label::Arms]);
        assert_eq!(occlude_arms(&img, &arms, &BinaryMask::zeros(4, 4).unwrap()).unwrap(), img);
        let out = occlude_arms(&img, &arms, &BinaryMask::ones(4, 4).unwrap()).unwrap();
        for i in 0..16 {
            let want = if arms.bits()[i] { [0; 3] } else { [50, 60, 70] };
            assert_eq!(out.pixel(i % 4, i / 4), want);
        }
    }

    #[test]
    fn alpha_cases() {
        let w = Raster::filled(3, 3, [51, 51, 51]).unwrap(); // 0.2
        let r = Raster::filled(3, 3, [204, 204, 204]).unwrap(); // 0.8
        assert_eq!(alpha_composite(&w, &r, &AlphaMap::constant(3, 3, 0.0).unwrap()).unwrap(), w);
        assert_eq!(alpha_composite(&w, &r, &AlphaMap::constant(3, 3, 1.0).unwrap()).unwrap(), r);
        let half = alpha_composite(&w, &r, &AlphaMap::constant(3, 3, 0.5).unwrap()).unwrap();
        // 0.5 * 51 + 0.5 * 204 = 127.5 -> 128
        assert!(half.data().iter().all(|&v| v == 128));
    }

    #[test]
    fn oracle_layout_has_no_generation() {
        let comp = LayoutBundle::oracle(parse4(), None).compose().unwrap();
        comp.validate().unwrap();
        assert!(comp.generate.is_empty());
        assert!(comp.residual.is_empty());
        assert_eq!(comp.preserve, comp.clothes.not());
    }

    #[test]
    fn short_sleeve_layout_generates_arms() {
        // New garment only covers the right clothes column; left becomes arm.
        let synth_body = LabelMap::new(4, 4, vec![0, 1, 1, 0, 2, 2, 3, 2, 2, 2, 3, 2, 0, 4, 4, 0]).unwrap();
        let synth_clothes = synth_body.mask_of(&[Label::TorsoClothes]);
        let bundle = LayoutBundle::new(parse4(), synth_body, synth_clothes, None).unwrap();
        let comp = bundle.compose().unwrap();
        comp.validate().unwrap();
        assert_eq!(comp.generate.count(), 2);
        assert!(comp.generate.get(1, 1) && comp.generate.get(1, 2));
        assert!(comp.residual.is_empty());
    }
}
