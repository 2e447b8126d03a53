//! Build a scene from a description and look at the generated mesh.

use massfit::pipeline::{synth_generate, SceneSpec};

const SCENE: &str = "
name = corner
sigma = 0.03
dropout = 0.05
mass = rect 0 0 9 7 wall 3 gable 30
mass = rect 9 0 15 7 wall 6 mansard 70 20
";

fn main() -> massfit::Result<()> {
    let spec = SceneSpec::parse(SCENE)?;
    for seed in [1, 1, 2] {
        let t = synth_generate(&spec, seed)?;
        let (lo, hi) = t.mesh.bounds().unwrap();
        println!(
            "seed {seed}: {} vertices, {} triangles, z {:.3}..{:.3}, first vertex {:?}",
            t.mesh.vertices.len(),
            t.mesh.triangles.len(),
            lo.z,
            hi.z,
            t.mesh.vertices[0]
        );
    }
    for name in SceneSpec::PRESETS {
        let s = SceneSpec::preset(name).unwrap();
        println!("preset {name:8} {} masses, {} gis polygons", s.masses.len(), s.gis.len());
    }
    Ok(())
}
