//! Cut the ground plane along sweep lines and classify the cells.

use massfit::fracture::{classify_polygons, compute_height_diffs, fracture_plane, working_bbox, FractureParams};
use massfit::pipeline::{synth_generate, SceneSpec};
use massfit::sweep::{extract_sweep_edges, SweepParams};

fn main() -> massfit::Result<()> {
    let truth = synth_generate(&SceneSpec::terrace(), 7)?;
    let gis = &truth.spec.gis;
    let (_, sweeps) = extract_sweep_edges(&truth.mesh, gis, &SweepParams::default());

    let params = FractureParams::default();
    let bbox = working_bbox(gis, &truth.mesh, params.bbox_margin).expect("non-empty scene");
    let arr = fracture_plane(&sweeps, &bbox, &params);
    let arr = classify_polygons(arr, gis, &truth.mesh, &params)?;
    let arr = compute_height_diffs(arr, &truth.mesh, &params);

    println!("{} lines, {} cells, {} edges", arr.lines.len(), arr.cells.len(), arr.edges.len());
    for c in arr.kept_cells() {
        let p = arr.cell_polygon(c);
        let b = p.bbox();
        println!(
            "  kept cell {c}: {:.1} m², x {:.2}..{:.2}, y {:.2}..{:.2}",
            p.area(), b.min.x, b.max.x, b.min.y, b.max.y
        );
    }
    let steps: Vec<_> = arr.edges.iter().filter(|e| e.height_diff > 1.0).collect();
    println!("{} edges with a height step over 1 m", steps.len());
    Ok(())
}
