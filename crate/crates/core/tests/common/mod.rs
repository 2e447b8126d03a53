#![allow(dead_code)]

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use massfit::footprint::{flagged_pairs, phi, EnergyParams};
use massfit::fracture::{fracture_plane, Arrangement, FractureParams, Side};
use massfit::geometry::{Aabb2, Point2, Polygon2, Segment2};
use massfit::pipeline::io::{footprints_geojson, write_mesh_obj};
use massfit::pipeline::SceneTruth;
use massfit::sweep::SweepEdge;

pub const MAX_KEPT: usize = 12;

/// Random lines through a 20 m box, a random subset of at most
/// `MAX_KEPT` cells kept, random sweep flags and height steps. Returns the
/// arrangement and a GIS footprint count to size the label set with.
pub fn random_arrangement(seed: u64) -> (Arrangement, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bbox = Aabb2 { min: Point2::new(0.0, 0.0), max: Point2::new(20.0, 20.0) };
    let pt = |rng: &mut ChaCha8Rng| Point2::new(rng.gen_range(2.0..18.0), rng.gen_range(2.0..18.0));
    let lines = rng.gen_range(2..=5);
    let sweeps: Vec<SweepEdge> = (0..lines)
        .map(|k| {
            let (a, b) = (pt(&mut rng), pt(&mut rng));
            SweepEdge { segment: Segment2::new(a, b), supported_area: 20.0, cluster: k }
        })
        .filter(|s| s.segment.length() > 1.0)
        .collect();
    let mut arr = fracture_plane(&sweeps, &bbox, &FractureParams::default());

    let keep_p = rng.gen_range(0.3..0.9);
    let mut kept = 0;
    for c in &mut arr.cells {
        c.kept = kept < MAX_KEPT && rng.gen_bool(keep_p);
        kept += c.kept as usize;
    }
    if kept == 0 {
        arr.cells[0].kept = true;
    }
    for e in &mut arr.edges {
        if e.line.is_some() && rng.gen_bool(0.3) {
            e.is_sweep = !e.is_sweep;
        }
        e.height_diff = if rng.gen_bool(0.5) { rng.gen_range(0.0..4.0) } else { 0.0 };
    }
    (arr, rng.gen_range(1..=3))
}

/// Minimum energy over every assignment of `0..labels` to the kept cells,
/// computed straight from the edge-selection rule.
pub fn exhaustive_minimum(arr: &Arrangement, p: &EnergyParams, labels: usize) -> f64 {
    let kept: Vec<usize> = (0..arr.cells.len()).filter(|&c| arr.cells[c].kept).collect();
    let var = |s: Side| match s {
        Side::Cell(c) if arr.cells[c].kept => kept.iter().position(|&k| k == c),
        _ => None,
    };
    // Per edge: None = excluded, Some((a, b)) with a/b variable or None for
    // the outside.
    let edges: Vec<Option<(Option<usize>, Option<usize>)>> = arr
        .edges
        .iter()
        .map(|e| {
            let (a, b) = (var(e.left), var(e.right));
            (a.is_some() || b.is_some()).then_some((a, b))
        })
        .collect();
    let pairs = flagged_pairs(arr, p);
    let phi = phi(arr);

    let n = kept.len();
    let mut labels_of = vec![0usize; n];
    let mut best = f64::INFINITY;
    let mut selected = vec![false; arr.edges.len()];
    loop {
        let mut en = 0.0;
        for (k, e) in arr.edges.iter().enumerate() {
            let Some((a, b)) = edges[k] else {
                selected[k] = false;
                continue;
            };
            let s = match (a, b) {
                (Some(i), Some(j)) => labels_of[i] != labels_of[j],
                _ => true,
            };
            selected[k] = s;
            let len = e.length();
            if s && !e.is_sweep {
                en += p.beta * len;
            }
            if !s && e.is_sweep {
                en += p.alpha * len;
            }
            if !s {
                en += len * e.height_diff;
            }
        }
        en += pairs.iter().filter(|&&(i, j)| selected[i] && selected[j]).count() as f64 * phi;
        best = best.min(en);

        // Odometer over labels^n.
        let mut d = 0;
        while d < n {
            labels_of[d] += 1;
            if labels_of[d] < labels {
                break;
            }
            labels_of[d] = 0;
            d += 1;
        }
        if d == n {
            return best;
        }
    }
}

pub fn write_scene(truth: &SceneTruth, dir: &Path) {
    fs::create_dir_all(dir).unwrap();
    let mut obj = Vec::new();
    write_mesh_obj(&mut obj, &truth.mesh).unwrap();
    fs::write(dir.join("mesh.obj"), obj).unwrap();
    fs::write(dir.join("gis.geojson"), footprints_geojson(&truth.spec.gis, |_| Default::default())).unwrap();
}

pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Polygon2 {
    Polygon2::rect(Point2::new(x0, y0), Point2::new(x1, y1))
}
