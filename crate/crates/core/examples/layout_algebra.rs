//! Derives the per-pixel roles of a try-on output from a reference parse and a
//! short-sleeve target layout, and prints them as a character map.
//!
//! cargo run --example layout_algebra

use tryon_geom::demo::{generate_scene, SceneSpec};
use tryon_geom::layout::{build_fused_map, LayoutBundle};
use tryon_geom::Label;

fn main() -> anyhow::Result<()> {
    let scene = generate_scene(SceneSpec::new(48, 64, 0))?;
    let bundle = LayoutBundle::new(scene.parse.clone(), scene.synth_body, scene.synth_clothes, Some(scene.pose))?;
    let comp = bundle.compose()?;
    comp.validate()?;

    let fused = build_fused_map(&scene.parse);
    println!(
        "fused pixels {}, preserve {}, clothes {}, generate {}, residual {}",
        fused.mask_of(&[Label::Fused]).count(),
        comp.preserve.count(),
        comp.clothes.count(),
        comp.generate.count(),
        comp.residual.count()
    );
    // '.' preserved, '#' new clothes, '+' generated arm skin, '~' residual.
    for y in (0..64).step_by(2) {
        let row: String = (0..48)
            .map(|x| {
                if comp.generate.get(x, y) {
                    '+'
                } else if comp.residual.get(x, y) {
                    '~'
                } else if comp.clothes.get(x, y) {
                    '#'
                } else {
                    '.'
                }
            })
            .collect();
        println!("{row}");
    }
    Ok(())
}
