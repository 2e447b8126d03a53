//! End-to-end reconstruction: configuration, file formats, the synthetic
//! scene generator and the stage runner.

mod config;
mod export;
pub mod io;
pub mod synth;

pub use config::PipelineConfig;
pub use export::{export_outputs, OutputLock, PROFILES_HEADER};
pub use synth::{synth_generate, MassSpec, Roof, SceneSpec, SceneTruth};

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result, Stage};
use crate::extrusion::{extrude_robust, height_cap_from_mesh, ExtrudeOutcome, MassModel};
use crate::footprint::{build_bip, footprints_from_labeling, solve, EnergyModel, Footprint, Solution};
use crate::fracture::{classify_polygons, compute_height_diffs, fracture_plane, working_bbox, Arrangement};
use crate::geometry::{Polygon2, TriMesh};
use crate::metrics::{error_grid, mse, ErrorGrid, RunStats};
use crate::profile::{fit_footprint_profiles, Profile};
use crate::sweep::{extract_sweep_edges, SweepEdge};

/// Everything a run produces, stage by stage.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub config: PipelineConfig,
    pub sweep_edges: Vec<SweepEdge>,
    pub arrangement: Arrangement,
    pub variables: usize,
    pub solution: Solution,
    pub footprints: Vec<Footprint>,
    /// Per footprint, per edge.
    pub profiles: Vec<Vec<Profile>>,
    pub models: Vec<MassModel>,
    pub outcomes: Vec<ExtrudeOutcome>,
    pub grid: ErrorGrid,
    pub stats: RunStats,
    /// Wall time of the whole run (measured even when `timing` is off).
    pub elapsed: Duration,
}

impl PipelineOutput {
    pub fn block(&self) -> MassModel {
        MassModel::merged(&self.models)
    }
}

/// Runs sweep extraction, fracturing, classification, the footprint
/// solve, profile fitting, extrusion and metrics in order.
pub fn run_pipeline(mesh: &TriMesh, gis: &[Polygon2], cfg: &PipelineConfig) -> Result<PipelineOutput> {
    let start = Instant::now();
    cfg.validate().map_err(|e| e.at(Stage::Load))?;
    if mesh.is_empty() {
        return Err(Error::EmptyMesh.at(Stage::Load));
    }

    let (_, sweep_edges) = extract_sweep_edges(mesh, gis, &cfg.sweep_params());
    if sweep_edges.is_empty() {
        return Err(Error::NoSweepEdges.at(Stage::Sweep));
    }

    let fp = cfg.fracture_params();
    let bbox = working_bbox(gis, mesh, fp.bbox_margin).ok_or(Error::EmptyMesh.at(Stage::Fracture))?;
    let arr = fracture_plane(&sweep_edges, &bbox, &fp);
    let arr = classify_polygons(arr, gis, mesh, &fp).map_err(|e| e.at(Stage::Classify))?;
    let arr = compute_height_diffs(arr, mesh, &fp);

    let ep = cfg.energy_params();
    let labels = ep.label_count(arr.kept_count(), gis.len());
    let model = EnergyModel::new(&arr, &ep, labels);
    let bip = build_bip(model, cfg.max_variables).map_err(|e| e.at(Stage::Solve))?;
    let solve_start = Instant::now();
    let solution = solve(&bip, cfg.solver, cfg.budget()).map_err(|e| e.at(Stage::Solve))?;
    let solve_time = solve_start.elapsed();

    let labeling = bip.model.to_labeling(&arr, &solution.labels);
    let footprints = footprints_from_labeling(&arr, &labeling);
    if footprints.is_empty() {
        return Err(Error::NoBuilding.at(Stage::Footprints));
    }

    let pp = cfg.profile_params();
    let profiles: Vec<Vec<Profile>> = footprints
        .par_iter()
        .map(|f| fit_footprint_profiles(mesh, &f.polygon, &pp))
        .collect();

    let h_cap = height_cap_from_mesh(mesh, cfg.cap_margin).map_err(|e| e.at(Stage::Extrude))?;
    let extruded = footprints
        .par_iter()
        .zip(&profiles)
        .enumerate()
        .map(|(i, (f, p))| extrude_robust(i, &f.polygon, p, h_cap))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at(Stage::Extrude))?;
    let (models, outcomes): (Vec<_>, Vec<_>) = extruded.into_iter().unzip();

    let block = MassModel::merged(&models);
    let grid = error_grid(mesh, &block, cfg.cell).map_err(|e| e.at(Stage::Metrics))?;
    let error_m2 = mse(&grid).map_err(|e| e.at(Stage::Metrics))?;
    let stats = RunStats {
        name: cfg.name.clone(),
        sweep_edges: sweep_edges.len(),
        variables: bip.variable_count(),
        time_sec: if cfg.timing { solve_time.as_secs_f64() } else { 0.0 },
        error_m2,
    };
    Ok(PipelineOutput {
        config: cfg.clone(),
        sweep_edges,
        arrangement: arr,
        variables: bip.variable_count(),
        solution,
        footprints,
        profiles,
        models,
        outcomes,
        grid,
        stats,
        elapsed: start.elapsed(),
    })
}
