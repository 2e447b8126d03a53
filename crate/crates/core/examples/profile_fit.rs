//! Fit a clean roof profile to every edge of a noisy gable house.

use massfit::pipeline::{synth_generate, SceneSpec};
use massfit::profile::{fit_footprint_profiles, ProfileParams, Quality};

fn main() -> massfit::Result<()> {
    let truth = synth_generate(&SceneSpec::house(), 3)?;
    let footprint = &truth.footprints[0];

    for quality in [Quality::High, Quality::Moderate, Quality::Simple] {
        let params = ProfileParams { quality, ..ProfileParams::default() };
        println!("{quality}:");
        for (e, p) in fit_footprint_profiles(&truth.mesh, footprint, &params).iter().enumerate() {
            let pts: Vec<String> = p.points().iter().map(|q| format!("({:.2},{:.2})", q.x, q.y)).collect();
            println!("  edge {e}: {}", pts.join(" "));
        }
    }
    let expect: Vec<String> = truth.profiles[0]
        .iter()
        .map(|p| format!("{:.2}", p.wall_height()))
        .collect();
    println!("true wall heights: {}", expect.join(", "));
    Ok(())
}
