//! The whole pipeline on a three-house block, with outputs written to a
//! directory given on the command line (default `block_out`).

use std::path::PathBuf;

use massfit::metrics::segmentation_iou;
use massfit::pipeline::{export_outputs, run_pipeline, synth_generate, OutputLock, PipelineConfig, SceneSpec};

fn main() -> massfit::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "block_out".into()));
    let truth = synth_generate(&SceneSpec::block(), 7)?;
    let cfg = PipelineConfig { name: "block".into(), ..PipelineConfig::default() };

    let _lock = OutputLock::acquire(&dir)?;
    let out = run_pipeline(&truth.mesh, &truth.spec.gis, &cfg)?;
    let predicted: Vec<_> = out.footprints.iter().map(|f| f.polygon.clone()).collect();

    println!("{}", out.stats.csv_row());
    println!(
        "{} footprints (truth {}), IoU {:.3}, {:?}",
        out.footprints.len(),
        truth.footprints.len(),
        segmentation_iou(&predicted, &truth.footprints).mean_iou,
        out.elapsed
    );
    for p in export_outputs(&out, &dir)? {
        println!("  {}", p.display());
    }
    Ok(())
}
