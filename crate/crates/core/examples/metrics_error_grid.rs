//! Compare a reconstruction to its input as a height raster and write the
//! error image next to the working directory.

use std::fs::File;
use std::io::BufWriter;

use massfit::metrics::{error_grid, mse, segmentation_iou, DEFAULT_CELL};
use massfit::pipeline::{run_pipeline, synth_generate, PipelineConfig, SceneSpec};

fn main() -> massfit::Result<()> {
    let truth = synth_generate(&SceneSpec::hip(), 11)?;
    let out = run_pipeline(&truth.mesh, &truth.spec.gis, &PipelineConfig::default())?;

    let grid = error_grid(&truth.mesh, &out.block(), DEFAULT_CELL)?;
    println!(
        "{}x{} cells of {} m, {} valid, mse {:.4} m², worst {:.3} m²",
        grid.cols,
        grid.rows,
        grid.cell,
        grid.valid_count(),
        mse(&grid)?,
        grid.max_error()
    );
    // Against the clean truth instead of the noisy input.
    let clean = error_grid(&truth.clean.mesh, &out.block(), DEFAULT_CELL)?;
    println!("mse against clean model {:.4} m²", mse(&clean)?);

    let predicted: Vec<_> = out.footprints.iter().map(|f| f.polygon.clone()).collect();
    println!("footprint IoU {:.4}", segmentation_iou(&predicted, &truth.footprints).mean_iou);

    grid.write_pgm(&mut BufWriter::new(File::create("hip_error.pgm")?))?;
    println!("wrote hip_error.pgm");
    Ok(())
}
