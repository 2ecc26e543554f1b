//! Scores pose files (or a built-in example) by complexity and difficulty.
//!
//! cargo run --example complexity_score -- [pose.json ...]

use tryon_geom::score::{complexity, partition, reference_points, score_pose, PoseKeypoints, ReferencePoints};

fn main() -> anyhow::Result<()> {
    let paths: Vec<String> = std::env::args().skip(1).collect();
    if paths.is_empty() {
        let refs = ReferencePoints([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0], [1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]);
        println!("square example: C = {:.6}", complexity(&refs));
        for c in [100.0, 70.0, 10.0] {
            println!("C = {c:>5} -> {}", partition(c));
        }
        let pose = tryon_geom::demo::generate_scene(tryon_geom::demo::SceneSpec::new(192, 256, 0))?.pose;
        let (c, d) = score_pose(&pose)?;
        println!("demo pose: C = {c:.2} ({d}), points {:?}", reference_points(&pose)?.0);
        return Ok(());
    }
    for p in paths {
        match PoseKeypoints::load(&p).and_then(|pose| score_pose(&pose)) {
            Ok((c, d)) => println!("{p}: {c:.3} {d}"),
            Err(e) => println!("{p}: error: {e}"),
        }
    }
    Ok(())
}
