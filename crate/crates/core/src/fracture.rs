//! Ground-plane arrangement from sweep-edge lines.
//!
//! Every sweep edge is extended to a full line across the working box and
//! inserted longest first. Because lines always span the box, each
//! insertion cuts convex cells into convex cells and both cells on either
//! side of a crossed edge receive the same new vertex, so the arrangement
//! never has T-junctions. Sweep extent endpoints are added as extra
//! vertices so every edge is either wholly inside or wholly outside the
//! sweep it came from.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{
    angle_diff_mod_pi, cross2, line_angle, perp, ring_centroid, ring_signed_area, Aabb2,
    HeightIndex, Point2, Polygon2, Segment2, TriMesh, Vec2,
};
use crate::sweep::SweepEdge;

/// Vertices closer than this to a line are treated as lying on it.
const ON_LINE: f64 = 1e-9;
/// Edges shorter than this are collapsed after construction.
pub const MIN_EDGE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FractureParams {
    pub bbox_margin: f64,
    pub dup_distance: f64,
    /// Radians.
    pub dup_angle: f64,
    pub continuations_count_as_sweep: bool,
    pub d_gis: f64,
    pub h_min: f64,
    pub height_grid: f64,
    pub hd_samples: usize,
    pub hd_offset: f64,
}

impl Default for FractureParams {
    fn default() -> Self {
        FractureParams {
            bbox_margin: 5.0,
            dup_distance: 0.05,
            dup_angle: 0.5f64.to_radians(),
            continuations_count_as_sweep: true,
            d_gis: 2.0,
            h_min: 1.0,
            height_grid: 0.5,
            hd_samples: 8,
            hd_offset: 0.4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Cell(usize),
    Outside,
}

impl Side {
    pub fn cell(self) -> Option<usize> {
        match self {
            Side::Cell(c) => Some(c),
            Side::Outside => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Counter-clockwise vertex ids into [`Arrangement::vertices`].
    pub ring: Vec<usize>,
    pub kept: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrEdge {
    pub segment: Segment2,
    pub vertices: [usize; 2],
    /// Cell to the left of `segment.a → segment.b`.
    pub left: Side,
    pub right: Side,
    /// Index into [`Arrangement::lines`], `None` on the working-box border.
    pub line: Option<usize>,
    pub is_sweep: bool,
    pub sweep_origin: Option<usize>,
    pub height_diff: f64,
}

impl ArrEdge {
    pub fn length(&self) -> f64 {
        self.segment.length()
    }

    pub fn sides(&self) -> [Side; 2] {
        [self.left, self.right]
    }

    pub fn touches_outside(&self) -> bool {
        self.left == Side::Outside || self.right == Side::Outside
    }
}

/// A full line through the box and the sweep extents it carries, as
/// parameter intervals along `direction` from `origin`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepLine {
    pub origin: Point2,
    pub direction: Vec2,
    pub extents: Vec<(usize, f64, f64)>,
}

impl SweepLine {
    fn side(&self, p: Point2) -> f64 {
        cross2(self.direction, p - self.origin)
    }

    fn param(&self, p: Point2) -> f64 {
        (p - self.origin).dot(&self.direction)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Arrangement {
    pub bbox: Aabb2,
    pub vertices: Vec<Point2>,
    pub cells: Vec<Cell>,
    pub edges: Vec<ArrEdge>,
    pub lines: Vec<SweepLine>,
}

impl Arrangement {
    pub fn cell_points(&self, c: usize) -> Vec<Point2> {
        self.cells[c].ring.iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_polygon(&self, c: usize) -> Polygon2 {
        Polygon2 {
            outer: self.cell_points(c),
            holes: Vec::new(),
        }
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        ring_signed_area(&self.cell_points(c))
    }

    pub fn kept_cells(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.cells.len()).filter(|&c| self.cells[c].kept)
    }

    pub fn kept_count(&self) -> usize {
        self.kept_cells().count()
    }

    /// Effective side after classification: removed cells read as outside.
    pub fn side(&self, s: Side) -> Side {
        match s {
            Side::Cell(c) if self.cells[c].kept => s,
            _ => Side::Outside,
        }
    }
}

/// Box used for fracturing: the union of the GIS bounds, or the mesh
/// bounds when no footprints are given, dilated by `margin`.
pub fn working_bbox(gis: &[Polygon2], mesh: &TriMesh, margin: f64) -> Option<Aabb2> {
    let gis_box = gis.iter().map(|p| p.bbox()).reduce(|a, b| a.union(&b));
    let bb = gis_box.or_else(|| {
        mesh.bounds().map(|(lo, hi)| Aabb2 {
            min: Point2::new(lo.x, lo.y),
            max: Point2::new(hi.x, hi.y),
        })
    })?;
    Some(bb.dilate(margin))
}

fn build_lines(sweeps: &[SweepEdge], params: &FractureParams) -> Vec<SweepLine> {
    let mut order: Vec<usize> = (0..sweeps.len()).collect();
    order.sort_by(|&a, &b| {
        sweeps[b]
            .segment
            .length()
            .total_cmp(&sweeps[a].segment.length())
            .then(a.cmp(&b))
    });
    let mut lines: Vec<SweepLine> = Vec::new();
    for id in order {
        let s = &sweeps[id].segment;
        if s.length() <= MIN_EDGE {
            continue;
        }
        let ang = line_angle(s.b - s.a);
        let dup = lines.iter_mut().find(|l| {
            angle_diff_mod_pi(ang, line_angle(l.direction)) <= params.dup_angle
                && l.side(s.midpoint()).abs() <= params.dup_distance
        });
        match dup {
            Some(l) => {
                let (t0, t1) = (l.param(s.a), l.param(s.b));
                l.extents.push((id, t0.min(t1), t0.max(t1)));
            }
            None => {
                let d = s.direction();
                lines.push(SweepLine {
                    origin: s.a,
                    direction: d,
                    extents: vec![(id, 0.0, s.length())],
                });
            }
        }
    }
    lines
}

struct Builder {
    vertices: Vec<Point2>,
    // Per cell: ring of vertex ids and the line id of each outgoing edge.
    cells: Vec<(Vec<usize>, Vec<Option<usize>>)>,
    splits: HashMap<(usize, usize), usize>,
}

impl Builder {
    /// Shared vertex on the undirected edge `{a, b}` at `p(a, b)`.
    fn edge_vertex(&mut self, a: usize, b: usize, at: impl FnOnce(Point2, Point2) -> Point2) -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&v) = self.splits.get(&key) {
            return v;
        }
        let p = at(self.vertices[key.0], self.vertices[key.1]);
        self.vertices.push(p);
        let v = self.vertices.len() - 1;
        self.splits.insert(key, v);
        v
    }

    fn insert_line(&mut self, id: usize, line: &SweepLine) {
        let mut out = Vec::with_capacity(self.cells.len() + 8);
        for (ring, lines) in std::mem::take(&mut self.cells) {
            let side: Vec<f64> = ring
                .iter()
                .map(|&v| {
                    let s = line.side(self.vertices[v]);
                    if s.abs() <= ON_LINE {
                        0.0
                    } else {
                        s
                    }
                })
                .collect();
            if !(side.iter().any(|&s| s > 0.0) && side.iter().any(|&s| s < 0.0)) {
                out.push((ring, lines));
                continue;
            }
            let n = ring.len();
            let mut left = (Vec::new(), Vec::new());
            let mut right = (Vec::new(), Vec::new());
            for i in 0..n {
                let j = (i + 1) % n;
                let (vi, vj, si, sj) = (ring[i], ring[j], side[i], side[j]);
                let li = lines[i];
                if si >= 0.0 {
                    left.0.push(vi);
                    left.1.push(if si == 0.0 && sj < 0.0 { Some(id) } else { li });
                }
                if si <= 0.0 {
                    right.0.push(vi);
                    right.1.push(if si == 0.0 && sj > 0.0 { Some(id) } else { li });
                }
                if si * sj < 0.0 {
                    let (a, b) = (vi.min(vj), vi.max(vj));
                    let origin = line.origin;
                    let dir = line.direction;
                    let x = self.edge_vertex(a, b, |pa, pb| {
                        let da = cross2(dir, pa - origin);
                        let db = cross2(dir, pb - origin);
                        pa + (pb - pa) * (da / (da - db))
                    });
                    // The edge continues past x on its own line; the cut
                    // runs along the new line from x to the next crossing.
                    if si > 0.0 {
                        left.0.push(x);
                        left.1.push(Some(id));
                        right.0.push(x);
                        right.1.push(li);
                    } else {
                        right.0.push(x);
                        right.1.push(Some(id));
                        left.0.push(x);
                        left.1.push(li);
                    }
                }
            }
            out.push(left);
            out.push(right);
        }
        self.cells = out;
    }

    fn insert_extent_vertex(&mut self, line_id: usize, line: &SweepLine, t: f64) {
        let p = line.origin + line.direction * t;
        for c in 0..self.cells.len() {
            let (ring, lines) = &self.cells[c];
            let n = ring.len();
            let hit = (0..n).find(|&i| {
                if lines[i] != Some(line_id) {
                    return false;
                }
                let ta = line.param(self.vertices[ring[i]]);
                let tb = line.param(self.vertices[ring[(i + 1) % n]]);
                t > ta.min(tb) + MIN_EDGE && t < ta.max(tb) - MIN_EDGE
            });
            if let Some(i) = hit {
                let v = self.edge_vertex(ring[i], ring[(i + 1) % n], |_, _| p);
                let (ring, lines) = &mut self.cells[c];
                ring.insert(i + 1, v);
                lines.insert(i + 1, Some(line_id));
            }
        }
    }

    /// Collapses edges shorter than [`MIN_EDGE`] onto their lower vertex.
    fn weld_short_edges(&mut self) {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (ring, _) in &self.cells {
            for i in 0..ring.len() {
                let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
                if (self.vertices[a] - self.vertices[b]).norm() < MIN_EDGE {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
        for (ring, lines) in &mut self.cells {
            let mapped: Vec<usize> = ring.iter().map(|&v| find(&mut parent, v)).collect();
            let m = mapped.len();
            let mut r = Vec::with_capacity(m);
            let mut l = Vec::with_capacity(m);
            for i in 0..m {
                if mapped[i] != mapped[(i + 1) % m] {
                    r.push(mapped[i]);
                    l.push(lines[i]);
                }
            }
            *ring = r;
            *lines = l;
        }
        self.cells.retain(|(r, _)| r.len() >= 3);
    }
}

/// Inserts the full line of every sweep edge into `bbox`, longest first,
/// merging near-duplicate lines. With no sweeps the result is the box.
pub fn fracture_plane(sweeps: &[SweepEdge], bbox: &Aabb2, params: &FractureParams) -> Arrangement {
    let lines = build_lines(sweeps, params);
    let corners = bbox.to_polygon().outer;
    let mut b = Builder {
        cells: vec![((0..corners.len()).collect(), vec![None; corners.len()])],
        vertices: corners,
        splits: HashMap::new(),
    };
    for (id, line) in lines.iter().enumerate() {
        b.insert_line(id, line);
    }
    for (id, line) in lines.iter().enumerate() {
        for &(_, t0, t1) in &line.extents {
            b.insert_extent_vertex(id, line, t0);
            b.insert_extent_vertex(id, line, t1);
        }
    }
    b.weld_short_edges();

    let mut edges: Vec<ArrEdge> = Vec::new();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    for (c, (ring, lns)) in b.cells.iter().enumerate() {
        let n = ring.len();
        for i in 0..n {
            let (u, v) = (ring[i], ring[(i + 1) % n]);
            let key = (u.min(v), u.max(v));
            let e = *index.entry(key).or_insert_with(|| {
                let (pa, pb) = (b.vertices[key.0], b.vertices[key.1]);
                edges.push(ArrEdge {
                    segment: Segment2::new(pa, pb),
                    vertices: [key.0, key.1],
                    left: Side::Outside,
                    right: Side::Outside,
                    line: lns[i],
                    is_sweep: false,
                    sweep_origin: None,
                    height_diff: 0.0,
                });
                edges.len() - 1
            });
            if u == key.0 {
                edges[e].left = Side::Cell(c);
            } else {
                edges[e].right = Side::Cell(c);
            }
        }
    }

    for e in &mut edges {
        let Some(l) = e.line else { continue };
        let line = &lines[l];
        let tm = line.param(e.segment.midpoint());
        e.sweep_origin = line
            .extents
            .iter()
            .find(|&&(_, t0, t1)| tm >= t0 - 1e-9 && tm <= t1 + 1e-9)
            .map(|&(id, _, _)| id);
        e.is_sweep = params.continuations_count_as_sweep || e.sweep_origin.is_some();
    }

    Arrangement {
        bbox: *bbox,
        vertices: b.vertices,
        cells: b
            .cells
            .into_iter()
            .map(|(ring, _)| Cell { ring, kept: true })
            .collect(),
        edges,
        lines,
    }
}

/// Mean mesh height over a cell, sampled on a `grid`-spaced lattice;
/// missing samples count as 0. Cells too small to hold a lattice point
/// are sampled at their centroid.
fn mean_cell_height(pts: &[Point2], index: &HeightIndex, grid: f64) -> f64 {
    let Some(bb) = Aabb2::from_points(pts) else {
        return 0.0;
    };
    let inside = |p: Point2| {
        (0..pts.len()).all(|i| cross2(pts[(i + 1) % pts.len()] - pts[i], p - pts[i]) >= 0.0)
    };
    let (x0, y0) = ((bb.min.x / grid).floor(), (bb.min.y / grid).floor());
    let (x1, y1) = ((bb.max.x / grid).ceil(), (bb.max.y / grid).ceil());
    let (mut sum, mut count) = (0.0, 0usize);
    let mut j = y0;
    while j < y1 {
        let mut i = x0;
        while i < x1 {
            let p = Point2::new((i + 0.5) * grid, (j + 0.5) * grid);
            if inside(p) {
                sum += index.query(p).unwrap_or(0.0);
                count += 1;
            }
            i += 1.0;
        }
        j += 1.0;
    }
    if count == 0 {
        return index.query(ring_centroid(pts)).unwrap_or(0.0);
    }
    sum / count as f64
}

/// Keeps a cell when its interior point lies within `d_gis` of a GIS
/// footprint, or its mean mesh height exceeds `h_min`.
pub fn classify_polygons(
    mut arr: Arrangement,
    gis: &[Polygon2],
    mesh: &TriMesh,
    params: &FractureParams,
) -> Result<Arrangement> {
    if params.h_min < 0.0 {
        return Err(Error::InvalidInput("h_min must be non-negative".into()));
    }
    let index = HeightIndex::new(mesh);
    let keep: Vec<bool> = (0..arr.cells.len())
        .map(|c| {
            let pts = arr.cell_points(c);
            let p = ring_centroid(&pts);
            gis.iter().any(|g| g.contains_dilated(p, params.d_gis))
                || mean_cell_height(&pts, &index, params.height_grid) > params.h_min
        })
        .collect();
    if !keep.iter().any(|&k| k) {
        return Err(Error::NoBuilding);
    }
    for (cell, k) in arr.cells.iter_mut().zip(keep) {
        cell.kept = k;
    }
    for e in &mut arr.edges {
        for s in [&mut e.left, &mut e.right] {
            if let Side::Cell(c) = *s {
                if !arr.cells[c].kept {
                    *s = Side::Outside;
                }
            }
        }
    }
    Ok(arr)
}

/// Mean absolute height step across each edge, sampled at `hd_samples`
/// stations with probes `hd_offset` to either side.
pub fn compute_height_diffs(mut arr: Arrangement, mesh: &TriMesh, params: &FractureParams) -> Arrangement {
    let index = HeightIndex::new(mesh);
    let k = params.hd_samples.max(1);
    for e in &mut arr.edges {
        let d = e.segment.b - e.segment.a;
        let len = d.norm();
        if len == 0.0 {
            continue;
        }
        let n = perp(d / len) * params.hd_offset;
        let total: f64 = (0..k)
            .map(|i| {
                let p = e.segment.a + d * ((i as f64 + 0.5) / k as f64);
                let hl = index.query(p + n).unwrap_or(0.0);
                let hr = index.query(p - n).unwrap_or(0.0);
                (hl - hr).abs()
            })
            .sum();
        e.height_diff = total / k as f64;
    }
    arr
}
