//! Footprint labeling as a binary program, solved exactly and by branch
//! and bound, and checked against direct energy evaluation.

use std::time::Duration;

use massfit::footprint::{build_bip, evaluate_energy, footprints_from_labeling, solve, EnergyModel, EnergyParams, SolveMode};
use massfit::fracture::{classify_polygons, compute_height_diffs, fracture_plane, working_bbox, FractureParams};
use massfit::pipeline::{synth_generate, SceneSpec};
use massfit::sweep::{extract_sweep_edges, SweepParams};

fn main() -> massfit::Result<()> {
    let truth = synth_generate(&SceneSpec::block(), 7)?;
    let (mesh, gis) = (&truth.mesh, &truth.spec.gis);
    let (_, sweeps) = extract_sweep_edges(mesh, gis, &SweepParams::default());
    let fp = FractureParams::default();
    let arr = fracture_plane(&sweeps, &working_bbox(gis, mesh, fp.bbox_margin).unwrap(), &fp);
    let arr = compute_height_diffs(classify_polygons(arr, gis, mesh, &fp)?, mesh, &fp);

    let ep = EnergyParams::default();
    let labels = ep.label_count(arr.kept_count(), gis.len());
    let bip = build_bip(EnergyModel::new(&arr, &ep, labels), 200_000)?;
    println!("{} kept cells, {labels} labels, {} binary variables", arr.kept_count(), bip.variable_count());

    for mode in [SolveMode::Exact, SolveMode::BranchAndBound] {
        let sol = solve(&bip, mode, Duration::from_secs(10))?;
        let lab = bip.model.to_labeling(&arr, &sol.labels);
        let direct = evaluate_energy(&arr, &lab, &ep, labels)?;
        let x = bip.encode(&sol.labels);
        println!(
            "{mode:?}: energy {:.4} (program {:.4}, direct {:.4}), {} nodes, {} footprints",
            sol.energy,
            bip.objective_value(&x),
            direct.total,
            sol.nodes,
            footprints_from_labeling(&arr, &lab).len()
        );
    }
    Ok(())
}
