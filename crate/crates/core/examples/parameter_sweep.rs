//! How the sweep threshold and the boundary weights change the result.

use massfit::pipeline::{run_pipeline, synth_generate, PipelineConfig, SceneSpec};

fn main() -> massfit::Result<()> {
    let truth = synth_generate(&SceneSpec::block(), 7)?;
    let (mesh, gis) = (&truth.mesh, &truth.spec.gis);

    println!("gamma  sweeps  vars  footprints  mse");
    for gamma in [50.0, 30.0, 10.0] {
        let cfg = PipelineConfig { gamma, ..PipelineConfig::default() };
        match run_pipeline(mesh, gis, &cfg) {
            Ok(o) => println!(
                "{gamma:5}  {:6}  {:4}  {:10}  {:.4}",
                o.stats.sweep_edges,
                o.stats.variables,
                o.footprints.len(),
                o.stats.error_m2
            ),
            Err(e) => println!("{gamma:5}  {e}"),
        }
    }

    println!("alpha  beta  footprints");
    for (alpha, beta) in [(90.0, 10.0), (40.0, 60.0), (10.0, 90.0)] {
        let cfg = PipelineConfig { alpha, beta, ..PipelineConfig::default() };
        let o = run_pipeline(mesh, gis, &cfg)?;
        println!("{alpha:5}  {beta:4}  {}", o.footprints.len());
    }
    Ok(())
}
