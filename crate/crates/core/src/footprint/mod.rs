//! Footprint selection: label the kept arrangement cells so that cells
//! sharing a label merge into one building footprint.
//!
//! An edge is *selected* when it separates two different labels or a kept
//! cell from the outside. The energy charges
//!
//! * `α·len` for an unselected sweep edge, `β·len` for a selected non-sweep
//!   edge,
//! * `len·height_diff` for an unselected edge,
//! * `φ` for each flagged pair of edges that are both selected, with
//!   `φ = ½ Σ len` over the edges of kept cells.
//!
//! Labels are `0..label_count`. [`bip`] holds the linearized integer
//! program, [`solver`] minimizes it and [`union`] turns a labeling into
//! polygons.

pub mod bip;
pub mod solver;
pub mod union;

pub use bip::{build_bip, BipInstance, Constraint, Sense, VarKind};
pub use solver::{solve, SolveMode, Solution};
pub use union::{footprints_from_labeling, Footprint};

use crate::error::{Error, Result};
use crate::fracture::{Arrangement, Side};
use crate::geometry::{angle_diff_mod_pi, line_angle, segment_segment_distance};

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyParams {
    pub alpha: f64,
    pub beta: f64,
    pub pair_dist: f64,
    /// Degrees.
    pub pair_angle: f64,
    /// Upper bound on the number of labels; `None` picks
    /// `min(kept cells, gis footprints + 2)`.
    pub max_labels: Option<usize>,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            alpha: 40.0,
            beta: 60.0,
            pair_dist: 2.0,
            pair_angle: 30.0,
            max_labels: None,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.beta > 0.0) {
            return Err(Error::InvalidInput("alpha and beta must be positive".into()));
        }
        if !(self.pair_dist > 0.0) {
            return Err(Error::InvalidInput("pair_dist must be positive".into()));
        }
        if !(self.pair_angle > 0.0 && self.pair_angle < 90.0) {
            return Err(Error::InvalidInput("pair_angle must be in (0, 90)".into()));
        }
        Ok(())
    }

    pub fn label_count(&self, kept: usize, gis: usize) -> usize {
        self.max_labels
            .unwrap_or_else(|| kept.min(gis + 2))
            .clamp(1, kept.max(1))
    }
}

/// Label per arrangement cell; `None` for removed cells.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labeling {
    pub labels: Vec<Option<usize>>,
}

impl Labeling {
    pub fn uniform(arr: &Arrangement) -> Labeling {
        Labeling {
            labels: arr.cells.iter().map(|c| c.kept.then_some(0)).collect(),
        }
    }

    pub fn distinct_labels(&self) -> usize {
        let mut l: Vec<usize> = self.labels.iter().flatten().copied().collect();
        l.sort_unstable();
        l.dedup();
        l.len()
    }

    fn validate(&self, arr: &Arrangement, count: usize) -> Result<()> {
        if self.labels.len() != arr.cells.len() {
            return Err(Error::InvalidInput("labeling size does not match arrangement".into()));
        }
        for (c, cell) in arr.cells.iter().enumerate() {
            match (cell.kept, self.labels[c]) {
                (true, Some(l)) if l < count => {}
                (true, Some(l)) => {
                    return Err(Error::LabelOutOfRange {
                        polygon: c,
                        label: l,
                        count,
                    })
                }
                (true, None) => {
                    return Err(Error::InvalidInput(format!("kept cell {c} has no label")))
                }
                (false, _) => {}
            }
        }
        Ok(())
    }
}

/// How an edge participates in the energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeRole {
    /// Both sides outside: never part of a footprint.
    Excluded,
    /// Exactly one side kept: always selected.
    Forced,
    /// Two kept cells: selected iff their labels differ.
    Candidate(usize, usize),
}

pub fn edge_role(arr: &Arrangement, e: usize) -> EdgeRole {
    let edge = &arr.edges[e];
    match (arr.side(edge.left), arr.side(edge.right)) {
        (Side::Cell(p), Side::Cell(q)) => EdgeRole::Candidate(p, q),
        (Side::Outside, Side::Outside) => EdgeRole::Excluded,
        _ => EdgeRole::Forced,
    }
}

pub fn phi(arr: &Arrangement) -> f64 {
    0.5 * (0..arr.edges.len())
        .filter(|&e| edge_role(arr, e) != EdgeRole::Excluded)
        .map(|e| arr.edges[e].length())
        .sum::<f64>()
}

/// Edge pairs whose joint selection is penalized. Pairs sharing a vertex
/// are flagged when they meet at less than `pair_angle`; other pairs when
/// closer than `pair_dist`, unless they lie on the same supporting line.
/// At least one edge of a pair must be a candidate, since the penalty of
/// two forced edges could not be avoided.
pub fn flagged_pairs(arr: &Arrangement, p: &EnergyParams) -> Vec<(usize, usize)> {
    let live: Vec<usize> = (0..arr.edges.len())
        .filter(|&e| edge_role(arr, e) != EdgeRole::Excluded)
        .collect();
    let cand = |e: usize| matches!(edge_role(arr, e), EdgeRole::Candidate(..));
    let max_angle = p.pair_angle.to_radians();
    let mut out = Vec::new();
    for (x, &i) in live.iter().enumerate() {
        for &j in &live[x + 1..] {
            if !cand(i) && !cand(j) {
                continue;
            }
            let (ei, ej) = (&arr.edges[i], &arr.edges[j]);
            let shared = ei.vertices.iter().find(|v| ej.vertices.contains(v));
            let flagged = match shared {
                Some(&v) => {
                    let o = arr.vertices[v];
                    let other = |e: &crate::fracture::ArrEdge| {
                        let w = if e.vertices[0] == v { e.vertices[1] } else { e.vertices[0] };
                        arr.vertices[w] - o
                    };
                    let (a, b) = (other(ei), other(ej));
                    let cos = (a.dot(&b) / (a.norm() * b.norm())).clamp(-1.0, 1.0);
                    cos.acos() < max_angle
                }
                None => {
                    let (a, b) = (ei.segment.b - ei.segment.a, ej.segment.b - ej.segment.a);
                    let same_line = match (ei.line, ej.line) {
                        (Some(l), Some(m)) => l == m,
                        _ => {
                            angle_diff_mod_pi(line_angle(a), line_angle(b)) < 1e-9
                                && crate::geometry::point_segment_distance(
                                    ej.segment.a,
                                    ei.segment.a - a * 1e6,
                                    ei.segment.a + a * 1e6,
                                ) < 1e-9
                        }
                    };
                    !same_line
                        && segment_segment_distance(
                            ei.segment.a,
                            ei.segment.b,
                            ej.segment.a,
                            ej.segment.b,
                        ) < p.pair_dist
                }
            };
            if flagged {
                out.push((i, j));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Energy {
    /// Sweep agreement: α and β terms.
    pub boundary: f64,
    /// Height steps hidden inside a footprint.
    pub height: f64,
    /// Penalties for flagged selected pairs.
    pub pairs: f64,
    pub total: f64,
}

/// Selection state of every edge under `lab`.
pub fn selected_edges(arr: &Arrangement, lab: &Labeling) -> Vec<bool> {
    (0..arr.edges.len())
        .map(|e| match edge_role(arr, e) {
            EdgeRole::Excluded => false,
            EdgeRole::Forced => true,
            EdgeRole::Candidate(p, q) => lab.labels[p] != lab.labels[q],
        })
        .collect()
}

/// Direct evaluation of the three energy terms for a labeling.
pub fn evaluate_energy(arr: &Arrangement, lab: &Labeling, p: &EnergyParams, label_count: usize) -> Result<Energy> {
    lab.validate(arr, label_count)?;
    let s = selected_edges(arr, lab);
    let mut en = Energy::default();
    for (k, e) in arr.edges.iter().enumerate() {
        if edge_role(arr, k) == EdgeRole::Excluded {
            continue;
        }
        let len = e.length();
        if !s[k] && e.is_sweep {
            en.boundary += p.alpha * len;
        }
        if s[k] && !e.is_sweep {
            en.boundary += p.beta * len;
        }
        if !s[k] {
            en.height += len * e.height_diff;
        }
    }
    let phi = phi(arr);
    en.pairs = flagged_pairs(arr, p)
        .into_iter()
        .filter(|&(i, j)| s[i] && s[j])
        .count() as f64
        * phi;
    en.total = en.boundary + en.height + en.pairs;
    Ok(en)
}

/// The energy reduced to kept-cell labels: a constant, one two-valued term
/// per candidate edge and a penalty per candidate pair. Forced edges fold
/// into the constant or, when paired with a candidate, into its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    /// Kept cell ids; a cell's variable index is its position here.
    pub cells: Vec<usize>,
    pub label_count: usize,
    pub constant: f64,
    pub edges: Vec<ModelEdge>,
    /// `(i, j, penalty)` over indices into `edges`.
    pub pairs: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelEdge {
    pub edge: usize,
    pub p: usize,
    pub q: usize,
    pub cost_selected: f64,
    pub cost_unselected: f64,
}

impl EnergyModel {
    pub fn new(arr: &Arrangement, p: &EnergyParams, label_count: usize) -> EnergyModel {
        let cells: Vec<usize> = arr.kept_cells().collect();
        let mut var = vec![usize::MAX; arr.cells.len()];
        for (i, &c) in cells.iter().enumerate() {
            var[c] = i;
        }
        let mut constant = 0.0;
        let mut edges = Vec::new();
        let mut slot = vec![usize::MAX; arr.edges.len()];
        for (k, e) in arr.edges.iter().enumerate() {
            let len = e.length();
            match edge_role(arr, k) {
                EdgeRole::Excluded => {}
                EdgeRole::Forced => {
                    if !e.is_sweep {
                        constant += p.beta * len;
                    }
                }
                EdgeRole::Candidate(a, b) => {
                    slot[k] = edges.len();
                    edges.push(ModelEdge {
                        edge: k,
                        p: var[a],
                        q: var[b],
                        cost_selected: if e.is_sweep { 0.0 } else { p.beta * len },
                        cost_unselected: if e.is_sweep { p.alpha * len } else { 0.0 }
                            + len * e.height_diff,
                    });
                }
            }
        }
        let phi = phi(arr);
        let mut pairs = Vec::new();
        for (i, j) in flagged_pairs(arr, p) {
            match (slot[i], slot[j]) {
                (usize::MAX, usize::MAX) => constant += phi,
                (usize::MAX, s) | (s, usize::MAX) => edges[s].cost_selected += phi,
                (a, b) => pairs.push((a, b, phi)),
            }
        }
        EnergyModel {
            cells,
            label_count,
            constant,
            edges,
            pairs,
        }
    }

    /// Energy of per-variable labels.
    pub fn energy(&self, labels: &[usize]) -> f64 {
        let sel: Vec<bool> = self.edges.iter().map(|e| labels[e.p] != labels[e.q]).collect();
        let mut t = self.constant;
        for (e, &s) in self.edges.iter().zip(&sel) {
            t += if s { e.cost_selected } else { e.cost_unselected };
        }
        for &(i, j, w) in &self.pairs {
            if sel[i] && sel[j] {
                t += w;
            }
        }
        t
    }

    pub fn to_labeling(&self, arr: &Arrangement, labels: &[usize]) -> Labeling {
        let mut out = vec![None; arr.cells.len()];
        for (i, &c) in self.cells.iter().enumerate() {
            out[c] = Some(labels[i]);
        }
        Labeling { labels: out }
    }

    pub fn from_labeling(&self, lab: &Labeling) -> Vec<usize> {
        self.cells.iter().map(|&c| lab.labels[c].unwrap_or(0)).collect()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::fracture::{ArrEdge, Cell, SweepLine};
    use crate::geometry::{Aabb2, Point2, Segment2};

    /// Hand-built arrangement from cell rings over a vertex list. Edges
    /// on the listed `sweep` vertex pairs are sweep edges.
    pub(crate) fn hand_arrangement(
        vertices: Vec<Point2>,
        rings: Vec<Vec<usize>>,
        sweep: &[(usize, usize)],
        height_diff: f64,
    ) -> Arrangement {
        let mut edges: Vec<ArrEdge> = Vec::new();
        for (c, ring) in rings.iter().enumerate() {
            for i in 0..ring.len() {
                let (u, v) = (ring[i], ring[(i + 1) % ring.len()]);
                let key = [u.min(v), u.max(v)];
                let k = match edges.iter().position(|e| e.vertices == key) {
                    Some(k) => k,
                    None => {
                        edges.push(ArrEdge {
                            segment: Segment2::new(vertices[key[0]], vertices[key[1]]),
                            vertices: key,
                            left: Side::Outside,
                            right: Side::Outside,
                            line: None,
                            is_sweep: sweep.contains(&(key[0], key[1])),
                            sweep_origin: None,
                            height_diff,
                        });
                        edges.len() - 1
                    }
                };
                if u == key[0] {
                    edges[k].left = Side::Cell(c);
                } else {
                    edges[k].right = Side::Cell(c);
                }
            }
        }
        Arrangement {
            bbox: Aabb2::from_points(&vertices).unwrap(),
            vertices,
            cells: rings.into_iter().map(|ring| Cell { ring, kept: true }).collect(),
            edges,
            lines: Vec::<SweepLine>::new(),
        }
    }

    fn square() -> Vec<Point2> {
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ]
    }

    #[test]
    fn square_all_sweep_is_free() {
        let arr = hand_arrangement(square(), vec![vec![0, 1, 2, 3]], &[(0, 1), (1, 2), (2, 3), (0, 3)], 0.0);
        let en = evaluate_energy(&arr, &Labeling::uniform(&arr), &EnergyParams::default(), 1).unwrap();
        assert_eq!(en, Energy::default());
    }

    #[test]
    fn square_one_non_sweep_costs_beta() {
        let arr = hand_arrangement(square(), vec![vec![0, 1, 2, 3]], &[(0, 1), (1, 2), (2, 3)], 0.0);
        let en = evaluate_energy(&arr, &Labeling::uniform(&arr), &EnergyParams::default(), 1).unwrap();
        assert_eq!(en.boundary, 60.0);
        assert_eq!(en.total, 60.0);
    }

    #[test]
    fn shared_sweep_edge_unselected() {
        // Two unit-wide cells sharing the edge x=1, y in [0,2].
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 2.0),
        ];
        let mut arr = hand_arrangement(v, vec![vec![0, 1, 4, 5], vec![1, 2, 3, 4]], &[(1, 4)], 0.0);
        for e in &mut arr.edges {
            e.is_sweep = true;
            if e.vertices == [1, 4] {
                e.height_diff = 3.0;
            }
        }
        let en = evaluate_energy(&arr, &Labeling::uniform(&arr), &EnergyParams::default(), 1).unwrap();
        assert_eq!(en.boundary, 80.0);
        assert_eq!(en.height, 6.0);
        assert_eq!(en.total, 86.0);
        let model = EnergyModel::new(&arr, &EnergyParams::default(), 2);
        assert_eq!(model.energy(&[0, 0]), 86.0);
    }

    #[test]
    fn out_of_range_label() {
        let arr = hand_arrangement(square(), vec![vec![0, 1, 2, 3]], &[], 0.0);
        let lab = Labeling { labels: vec![Some(3)] };
        assert!(matches!(
            evaluate_energy(&arr, &lab, &EnergyParams::default(), 2),
            Err(Error::LabelOutOfRange { label: 3, .. })
        ));
    }

    #[test]
    fn params_validate() {
        assert!(EnergyParams::default().validate().is_ok());
        let bad = EnergyParams {
            pair_angle: 95.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(EnergyParams::default().label_count(9, 1), 3);
        assert_eq!(EnergyParams::default().label_count(1, 4), 1);
    }
}
