use std::collections::HashMap;

use super::Labeling;
use crate::fracture::Arrangement;
use crate::geometry::{cross2, perp, point_in_ring, ring_signed_area, Point2, Polygon2};

#[derive(Debug, Clone, PartialEq)]
pub struct Footprint {
    pub label: usize,
    pub polygon: Polygon2,
}

/// Merges same-label cells and traces their boundaries. One label can give
/// several footprints when its cells are not connected.
pub fn footprints_from_labeling(arr: &Arrangement, lab: &Labeling) -> Vec<Footprint> {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for c in arr.kept_cells() {
        let ring = &arr.cells[c].ring;
        for i in 0..ring.len() {
            directed.insert((ring[i], ring[(i + 1) % ring.len()]), c);
        }
    }
    let label_of = |c: usize| lab.labels[c];

    let mut by_label: HashMap<usize, Vec<(usize, usize)>> = HashMap::new();
    for c in arr.kept_cells() {
        let Some(l) = label_of(c) else { continue };
        let ring = &arr.cells[c].ring;
        for i in 0..ring.len() {
            let (u, v) = (ring[i], ring[(i + 1) % ring.len()]);
            let interior = directed
                .get(&(v, u))
                .is_some_and(|&o| label_of(o) == Some(l));
            if !interior {
                by_label.entry(l).or_default().push((u, v));
            }
        }
    }

    let mut labels: Vec<usize> = by_label.keys().copied().collect();
    labels.sort_unstable();
    let mut out = Vec::new();
    for l in labels {
        let mut edges = by_label.remove(&l).unwrap();
        edges.sort_unstable();
        for polygon in trace(arr, &edges) {
            out.push(Footprint { label: l, polygon });
        }
    }
    out
}

fn trace(arr: &Arrangement, edges: &[(usize, usize)]) -> Vec<Polygon2> {
    let pts = &arr.vertices;
    let mut outgoing: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &(u, _)) in edges.iter().enumerate() {
        outgoing.entry(u).or_default().push(i);
    }
    let mut used = vec![false; edges.len()];
    let mut rings: Vec<Vec<Point2>> = Vec::new();
    for start in 0..edges.len() {
        if used[start] {
            continue;
        }
        let mut ring = Vec::new();
        let mut cur = start;
        loop {
            used[cur] = true;
            let (u, v) = edges[cur];
            ring.push(pts[u]);
            let din = pts[v] - pts[u];
            // Leftmost turn keeps rings that touch at a vertex apart.
            let next = outgoing.get(&v).and_then(|cands| {
                cands
                    .iter()
                    .copied()
                    .filter(|&k| !used[k] || k == start)
                    .max_by(|&a, &b| {
                        let turn = |k: usize| {
                            let d = pts[edges[k].1] - pts[edges[k].0];
                            cross2(din, d).atan2(din.dot(&d))
                        };
                        turn(a).total_cmp(&turn(b)).then(b.cmp(&a))
                    })
            });
            match next {
                Some(k) if k == start => break,
                Some(k) => cur = k,
                None => break,
            }
        }
        if ring.len() >= 3 {
            rings.push(ring);
        }
    }

    let (mut outers, holes): (Vec<_>, Vec<_>) =
        rings.into_iter().partition(|r| ring_signed_area(r) > 0.0);
    let mut assigned: Vec<Vec<Vec<Point2>>> = vec![Vec::new(); outers.len()];
    for h in holes {
        // A point just inside the hole, to the right of its first edge.
        let d = h[1] - h[0];
        let probe = Point2::from((h[0].coords + h[1].coords) * 0.5) - perp(d.normalize()) * 1e-7;
        let host = (0..outers.len())
            .filter(|&o| point_in_ring(probe, &outers[o]))
            .min_by(|&a, &b| ring_signed_area(&outers[a]).total_cmp(&ring_signed_area(&outers[b])));
        if let Some(o) = host {
            assigned[o].push(h);
        }
    }
    let mut polys: Vec<Polygon2> = outers
        .drain(..)
        .zip(assigned)
        .map(|(outer, holes)| Polygon2 { outer, holes }.merge_collinear(0.5f64.to_radians()))
        .collect();
    polys.sort_by(|a, b| b.area().total_cmp(&a.area()));
    polys
}
