//! Wall lines recovered from a noisy synthetic terrace.

use massfit::pipeline::{synth_generate, SceneSpec};
use massfit::sweep::{extract_sweep_edges, SweepParams};

fn main() -> massfit::Result<()> {
    let truth = synth_generate(&SceneSpec::terrace(), 7)?;
    let params = SweepParams::default();
    let (clusters, edges) = extract_sweep_edges(&truth.mesh, &truth.spec.gis, &params);

    println!("{} clusters, {} above gamma={} m²", clusters.len(), edges.len(), params.gamma);
    for e in &edges {
        let s = &e.segment;
        println!(
            "  ({:6.2}, {:6.2}) -> ({:6.2}, {:6.2})  {:6.1} m²",
            s.a.x, s.a.y, s.b.x, s.b.y, e.supported_area
        );
    }
    Ok(())
}
