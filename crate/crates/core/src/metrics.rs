//! Comparing a reconstruction against its input: vertical error grids,
//! grid MSE, footprint IoU, the raindrop test and run statistics.

use std::collections::HashMap;
use std::io::{self, Write};

use geo::{Area, BooleanOps};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extrusion::{FaceLabel, MassModel};
use crate::geometry::{Aabb2, HeightIndex, Point2, Point3, Polygon2, TriMesh, Vec2, Vec3};

pub const DEFAULT_CELL: f64 = 0.25;

/// Squared vertical error per grid cell. Row 0 is the lowest y.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorGrid {
    pub origin: Point2,
    pub cell: f64,
    pub rows: usize,
    pub cols: usize,
    /// Row-major; `None` where either surface is missing.
    pub errors: Vec<Option<f64>>,
}

impl ErrorGrid {
    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.errors[row * self.cols + col]
    }

    pub fn center(&self, row: usize, col: usize) -> Point2 {
        Point2::new(
            self.origin.x + (col as f64 + 0.5) * self.cell,
            self.origin.y + (row as f64 + 0.5) * self.cell,
        )
    }

    pub fn valid_count(&self) -> usize {
        self.errors.iter().flatten().count()
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().flatten().copied().fold(0.0, f64::max)
    }

    /// Long-form CSV, one line per cell.
    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(
            w,
            "# origin_x={} origin_y={} cell={} rows={} cols={}",
            self.origin.x, self.origin.y, self.cell, self.rows, self.cols
        )?;
        writeln!(w, "row,col,x,y,valid,sq_error_m2")?;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let p = self.center(r, c);
                match self.get(r, c) {
                    Some(e) => writeln!(w, "{r},{c},{},{},1,{e}", p.x, p.y)?,
                    None => writeln!(w, "{r},{c},{},{},0,", p.x, p.y)?,
                }
            }
        }
        Ok(())
    }

    /// Binary 8-bit PGM, north up. Invalid cells are 0; valid cells map
    /// linearly from 1 (no error) to 255 (the grid maximum).
    pub fn write_pgm(&self, w: &mut impl Write) -> io::Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.cols, self.rows)?;
        let scale = self.max_error();
        let mut bytes = Vec::with_capacity(self.rows * self.cols);
        for r in (0..self.rows).rev() {
            for c in 0..self.cols {
                bytes.push(match self.get(r, c) {
                    None => 0,
                    Some(_) if scale <= 0.0 => 1,
                    Some(e) => 1 + (254.0 * (e / scale).min(1.0)).round() as u8,
                });
            }
        }
        w.write_all(&bytes)
    }
}

/// Samples both height fields at every cell center over the union of the
/// two footprints' bounding boxes, dilated by one cell.
pub fn error_grid(input: &TriMesh, model: &MassModel, cell: f64) -> Result<ErrorGrid> {
    if !(cell > 0.0 && cell.is_finite()) {
        return Err(Error::InvalidInput(format!("cell size must be positive, got {cell}")));
    }
    let bb = |m: &TriMesh| {
        m.bounds()
            .map(|(lo, hi)| Aabb2 { min: Point2::new(lo.x, lo.y), max: Point2::new(hi.x, hi.y) })
    };
    let bbox = match (bb(input), bb(&model.mesh)) {
        (Some(a), Some(b)) => a.union(&b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => return Err(Error::EmptyMesh),
    }
    .dilate(cell);
    let cols = (bbox.width() / cell).ceil().max(1.0) as usize;
    let rows = (bbox.height() / cell).ceil().max(1.0) as usize;
    let a = HeightIndex::new(input);
    let b = HeightIndex::new(&model.mesh);
    let mut grid = ErrorGrid { origin: bbox.min, cell, rows, cols, errors: Vec::new() };
    grid.errors = (0..rows * cols)
        .into_par_iter()
        .map(|i| {
            let p = grid.center(i / cols, i % cols);
            match (a.query(p), b.query(p)) {
                (Some(ha), Some(hb)) => Some((ha - hb) * (ha - hb)),
                _ => None,
            }
        })
        .collect();
    Ok(grid)
}

/// Mean of the valid cells, summed in row-major order.
pub fn mse(grid: &ErrorGrid) -> Result<f64> {
    let (sum, n) = grid
        .errors
        .iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), e| (s + e, n + 1));
    if n == 0 {
        return Err(Error::NoValidCells);
    }
    Ok(sum / n as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IouReport {
    /// Sum of matched IoUs over `max(predicted, truth)`: missing or extra
    /// footprints count as zero.
    pub mean_iou: f64,
    /// `(predicted, truth, iou)` in matching order.
    pub matches: Vec<(usize, usize, f64)>,
    pub unmatched_predicted: usize,
    pub unmatched_truth: usize,
}

fn to_geo(p: &Polygon2) -> geo::Polygon<f64> {
    let ring = |r: &Vec<Point2>| geo::LineString::from(r.iter().map(|q| (q.x, q.y)).collect::<Vec<_>>());
    geo::Polygon::new(ring(&p.outer), p.holes.iter().map(ring).collect())
}

pub fn polygon_iou(a: &Polygon2, b: &Polygon2) -> f64 {
    let (ga, gb) = (to_geo(a), to_geo(b));
    let inter = ga.intersection(&gb).unsigned_area();
    let union = ga.unsigned_area() + gb.unsigned_area() - inter;
    if union <= 0.0 {
        0.0
    } else {
        (inter / union).clamp(0.0, 1.0)
    }
}

/// Greedy matching: predicted footprints in decreasing area each take the
/// unmatched truth footprint they overlap best.
pub fn segmentation_iou(predicted: &[Polygon2], truth: &[Polygon2]) -> IouReport {
    let mut order: Vec<usize> = (0..predicted.len()).collect();
    order.sort_by(|&a, &b| predicted[b].area().total_cmp(&predicted[a].area()).then(a.cmp(&b)));
    let mut taken = vec![false; truth.len()];
    let mut matches = Vec::new();
    for p in order {
        let best = (0..truth.len())
            .filter(|&t| !taken[t])
            .map(|t| (t, polygon_iou(&predicted[p], &truth[t])))
            .filter(|&(_, iou)| iou > 0.0)
            .fold(None, |acc: Option<(usize, f64)>, x| match acc {
                Some(a) if a.1 >= x.1 => Some(a),
                _ => Some(x),
            });
        if let Some((t, iou)) = best {
            taken[t] = true;
            matches.push((p, t, iou));
        }
    }
    let denom = predicted.len().max(truth.len());
    let mean_iou = if denom == 0 {
        1.0
    } else {
        matches.iter().map(|m| m.2).sum::<f64>() / denom as f64
    };
    IouReport {
        mean_iou,
        unmatched_predicted: predicted.len() - matches.len(),
        unmatched_truth: truth.len() - matches.len(),
        matches,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaindropReport {
    pub samples: usize,
    /// Start point of the first drop that got stuck.
    pub failure: Option<Point3>,
}

impl RaindropReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Drops `n` seeded points on roof faces and follows steepest descent
/// across the mesh. A drop passes when it reaches the top of a wall (or the
/// floor rim of a wall-less roof) within ten footprint diameters of travel.
pub fn raindrop_check(model: &MassModel, n: usize, seed: u64) -> RaindropReport {
    let mesh = &model.mesh;
    let roofs: Vec<usize> = (0..mesh.triangles.len())
        .filter(|&t| model.labels[t] == FaceLabel::Roof && mesh.area(t) > 1e-12)
        .collect();
    if roofs.is_empty() {
        return RaindropReport { samples: 0, failure: None };
    }
    let mut cumulative = Vec::with_capacity(roofs.len());
    let mut acc = 0.0;
    for &t in &roofs {
        acc += mesh.area(t);
        cumulative.push(acc);
    }
    let walker = Walker::new(model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        let x = rng.gen::<f64>() * acc;
        let k = cumulative.partition_point(|&c| c < x).min(roofs.len() - 1);
        let t = roofs[k];
        let (mut u, mut v) = (rng.gen::<f64>(), rng.gen::<f64>());
        if u + v > 1.0 {
            (u, v) = (1.0 - u, 1.0 - v);
        }
        let [a, b, c] = mesh.triangle(t);
        let start = Point3::from(a.coords * (1.0 - u - v) + b.coords * u + c.coords * v);
        if !walker.drains(start, t) {
            return RaindropReport { samples: n, failure: Some(start) };
        }
    }
    RaindropReport { samples: n, failure: None }
}

const EPS: f64 = 1e-9;

enum At {
    Face(usize),
    Edge(u32, u32),
    Vertex(u32),
}

struct Walker<'a> {
    model: &'a MassModel,
    edge_faces: HashMap<(u32, u32), Vec<usize>>,
    vertex_faces: Vec<Vec<usize>>,
    max_path: f64,
}

fn key(a: u32, b: u32) -> (u32, u32) {
    (a.min(b), a.max(b))
}

fn xy(p: Point3) -> Point2 {
    Point2::new(p.x, p.y)
}

impl<'a> Walker<'a> {
    fn new(model: &'a MassModel) -> Self {
        let mesh = &model.mesh;
        let mut edge_faces: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
        let mut vertex_faces = vec![Vec::new(); mesh.vertices.len()];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            for i in 0..3 {
                edge_faces.entry(key(tri[i], tri[(i + 1) % 3])).or_default().push(t);
                vertex_faces[tri[i] as usize].push(t);
            }
        }
        let diameter = mesh
            .bounds()
            .map(|(lo, hi)| Vec2::new(hi.x - lo.x, hi.y - lo.y).norm())
            .unwrap_or(0.0);
        Walker { model, edge_faces, vertex_faces, max_path: 10.0 * diameter }
    }

    fn pos(&self, v: u32) -> Point3 {
        self.model.mesh.vertices[v as usize]
    }

    fn is_roof(&self, t: usize) -> bool {
        self.model.labels[t] == FaceLabel::Roof && self.model.mesh.face_normal(t).z > EPS
    }

    /// Downhill direction in plan view; its length is the slope.
    fn descent(&self, t: usize) -> Vec2 {
        let n = self.model.mesh.face_normal(t);
        Vec2::new(n.x / n.z, n.y / n.z)
    }

    /// Floor, or a wall hanging below height `z`.
    fn is_gutter_face(&self, t: usize, z: f64) -> bool {
        match self.model.labels[t] {
            FaceLabel::Floor => true,
            FaceLabel::Wall => self.model.mesh.triangle(t).iter().any(|p| p.z < z - 1e-6),
            _ => false,
        }
    }

    fn drains(&self, start: Point3, face: usize) -> bool {
        let mut p = start;
        let mut at = At::Face(face);
        let mut travelled = 0.0;
        for _ in 0..100_000 {
            let next = match at {
                At::Face(t) => self.leave_face(p, t),
                At::Edge(a, b) => self.leave_edge(p, a, b),
                At::Vertex(v) => self.leave_vertex(v),
            };
            let Some((q, where_)) = next else { return false };
            if let Some(w) = where_ {
                travelled += (q - p).norm();
                if travelled > self.max_path + 1e-9 {
                    return false;
                }
                p = q;
                at = w;
            } else {
                return true;
            }
        }
        false
    }

    /// `None` = stuck; `Some((_, None))` = reached a gutter.
    fn leave_face(&self, p: Point3, t: usize) -> Option<(Point3, Option<At>)> {
        let g = self.descent(t);
        if g.norm() < EPS {
            return None;
        }
        let tri = self.model.mesh.triangles[t];
        let pts = tri.map(|i| xy(self.pos(i)));
        let ccw = crate::geometry::cross2(pts[1] - pts[0], pts[2] - pts[0]) > 0.0;
        let mut best: Option<(f64, usize)> = None;
        for i in 0..3 {
            let (a, b) = (pts[i], pts[(i + 1) % 3]);
            let d = b - a;
            let outward = if ccw { Vec2::new(d.y, -d.x) } else { Vec2::new(-d.y, d.x) };
            let den = g.dot(&outward);
            if den <= EPS * g.norm() * outward.norm() {
                continue;
            }
            let s = ((a - xy(p)).dot(&outward) / den).max(0.0);
            if best.map_or(true, |(bs, _)| s < bs) {
                best = Some((s, i));
            }
        }
        let (s, i) = best?;
        let q2 = xy(p) + g * s;
        let (ia, ib) = (tri[i], tri[(i + 1) % 3]);
        let (a, b) = (self.pos(ia), self.pos(ib));
        let n: Vec3 = self.model.mesh.face_normal(t);
        let z = a.z - (n.x * (q2.x - a.x) + n.y * (q2.y - a.y)) / n.z;
        let q = Point3::new(q2.x, q2.y, z);
        let scale = (b - a).norm().max(1.0);
        let at = if (xy(a) - q2).norm() < 1e-9 * scale {
            At::Vertex(ia)
        } else if (xy(b) - q2).norm() < 1e-9 * scale {
            At::Vertex(ib)
        } else {
            At::Edge(ia, ib)
        };
        match at {
            At::Vertex(v) => Some((self.pos(v), Some(At::Vertex(v)))),
            other => Some((q, Some(other))),
        }
    }

    fn leave_edge(&self, p: Point3, a: u32, b: u32) -> Option<(Point3, Option<At>)> {
        let faces = self.edge_faces.get(&key(a, b))?;
        let (pa, pb) = (self.pos(a), self.pos(b));
        if faces.iter().any(|&t| self.is_gutter_face(t, pa.z.min(pb.z))) {
            return Some((p, None));
        }
        let d = xy(pb) - xy(pa);
        let mut best: Option<(f64, usize)> = None;
        for &t in faces {
            if !self.is_roof(t) {
                continue;
            }
            let tri = self.model.mesh.triangles[t];
            let c = *tri.iter().find(|&&v| v != a && v != b)?;
            let to_c = xy(self.pos(c)) - xy(pa);
            let inward = to_c - d * (to_c.dot(&d) / d.norm_squared().max(1e-300));
            let g = self.descent(t);
            if g.dot(&inward) > EPS * g.norm() * inward.norm() && best.map_or(true, |(s, _)| g.norm() > s) {
                best = Some((g.norm(), t));
            }
        }
        if let Some((_, t)) = best {
            return Some((p, Some(At::Face(t))));
        }
        // Valley (or wall junction): run along the edge to its lower end.
        let low = if pa.z < pb.z { a } else { b };
        if (pa.z - pb.z).abs() < 1e-12 || self.pos(low).z >= p.z - 1e-12 {
            return None;
        }
        Some((self.pos(low), Some(At::Vertex(low))))
    }

    fn leave_vertex(&self, v: u32) -> Option<(Point3, Option<At>)> {
        let pv = self.pos(v);
        let faces = &self.vertex_faces[v as usize];
        if faces.iter().any(|&t| self.is_gutter_face(t, pv.z)) {
            return Some((pv, None));
        }
        // Steepest option among faces whose descent enters their wedge and
        // edges that lead downhill.
        let mut best: Option<(f64, At)> = None;
        for &t in faces {
            let tri = self.model.mesh.triangles[t];
            let k = tri.iter().position(|&x| x == v)?;
            let (u, w) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            for o in [u, w] {
                let po = self.pos(o);
                let run = (xy(po) - xy(pv)).norm();
                let slope = if run > 0.0 { (pv.z - po.z) / run } else { f64::INFINITY };
                if po.z < pv.z - 1e-12 && best.as_ref().map_or(true, |(s, _)| slope > *s) {
                    best = Some((slope, At::Edge(v, o)));
                }
            }
            if !self.is_roof(t) {
                continue;
            }
            let g = self.descent(t);
            let (eu, ew) = (xy(self.pos(u)) - xy(pv), xy(self.pos(w)) - xy(pv));
            let cross = crate::geometry::cross2;
            let orient = cross(eu, ew).signum();
            let inside = orient * cross(eu, g) > EPS * g.norm() * eu.norm()
                && orient * cross(g, ew) > EPS * g.norm() * ew.norm();
            if inside && g.norm() > EPS && best.as_ref().map_or(true, |(s, _)| g.norm() > *s) {
                best = Some((g.norm(), At::Face(t)));
            }
        }
        match best? {
            (_, At::Edge(_, o)) => Some((self.pos(o), Some(At::Vertex(o)))),
            (_, at) => Some((pv, Some(at))),
        }
    }
}

/// One row of the run statistics table.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub name: String,
    pub sweep_edges: usize,
    pub variables: usize,
    pub time_sec: f64,
    pub error_m2: f64,
}

pub const STATS_HEADER: &str = "name,sweep_edges,variables,time_sec,error_m2";

impl RunStats {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6}",
            self.name, self.sweep_edges, self.variables, self.time_sec, self.error_m2
        )
    }
}

pub fn write_stats_csv(w: &mut impl Write, rows: &[RunStats]) -> io::Result<()> {
    writeln!(w, "{STATS_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrusion::{extrude, Provenance};
    use crate::profile::Profile;
    use crate::shapes::box_mesh;

    fn slab(h: f64) -> MassModel {
        let m = extrude(
            &Polygon2::rect(Point2::new(0.0, 0.0), Point2::new(4.0, 4.0)),
            &vec![Profile::vertical(h); 4],
            f64::INFINITY,
        )
        .unwrap();
        m
    }

    #[test]
    fn self_comparison_is_zero() {
        let m = slab(3.0);
        let g = error_grid(&m.mesh, &m, DEFAULT_CELL).unwrap();
        assert_eq!(mse(&g).unwrap(), 0.0);
        assert_eq!(g.valid_count(), 16 * 16);
    }

    #[test]
    fn constant_offset() {
        let g = error_grid(&slab(2.0).mesh, &slab(3.0), 0.5).unwrap();
        assert!(g.errors.iter().flatten().all(|&e| e == 1.0));
        assert_eq!(mse(&g).unwrap(), 1.0);
    }

    #[test]
    fn half_overlap_validity() {
        let a = box_mesh(Point3::new(0.0, 0.0, 0.0), Point3::new(2.0, 2.0, 1.0));
        let b = slab(1.0); // 0..4 square
        let g = error_grid(&a, &b, 0.5).unwrap();
        for r in 0..g.rows {
            for c in 0..g.cols {
                let p = g.center(r, c);
                let inside = p.x > 0.0 && p.x < 2.0 && p.y > 0.0 && p.y < 2.0;
                assert_eq!(g.get(r, c).is_some(), inside, "{p:?}");
            }
        }
    }

    #[test]
    fn mse_ignores_invalid_cells() {
        let g = ErrorGrid {
            origin: Point2::origin(),
            cell: 1.0,
            rows: 1,
            cols: 3,
            errors: vec![Some(0.0), Some(2.0), None],
        };
        assert_eq!(mse(&g).unwrap(), 1.0);
        let empty = ErrorGrid { errors: vec![None; 3], ..g };
        assert!(matches!(mse(&empty), Err(Error::NoValidCells)));
    }

    #[test]
    fn iou_cases() {
        let sq = |x: f64| Polygon2::rect(Point2::new(x, 0.0), Point2::new(x + 1.0, 1.0));
        assert_eq!(segmentation_iou(&[sq(0.0)], &[sq(0.0)]).mean_iou, 1.0);
        assert_eq!(segmentation_iou(&[sq(0.0)], &[sq(5.0)]).mean_iou, 0.0);
        let half = segmentation_iou(&[sq(0.0)], &[sq(0.5)]).mean_iou;
        assert!((half - 1.0 / 3.0).abs() < 1e-12);
        let r = segmentation_iou(&[sq(0.0), sq(3.0)], &[sq(0.0)]);
        assert_eq!((r.mean_iou, r.unmatched_predicted), (0.5, 1));
    }

    #[test]
    fn pgm_and_csv_shapes() {
        let g = error_grid(&slab(2.0).mesh, &slab(3.0), 1.0).unwrap();
        let mut pgm = Vec::new();
        g.write_pgm(&mut pgm).unwrap();
        let header = format!("P5\n{} {}\n255\n", g.cols, g.rows);
        assert!(pgm.starts_with(header.as_bytes()));
        assert_eq!(pgm.len(), header.len() + g.rows * g.cols);
        let mut csv = Vec::new();
        g.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 2 + g.rows * g.cols);
    }

    #[test]
    fn raindrops_on_pyramid_and_prism() {
        let pyramid = extrude(
            &Polygon2::rect(Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)),
            &vec![Profile::pitched(45.0, 10.0); 4],
            f64::INFINITY,
        )
        .unwrap();
        assert!(raindrop_check(&pyramid, 100, 7).passed());
        let prism = slab(3.0);
        let r = raindrop_check(&prism, 100, 7);
        assert!(r.passed() && r.samples == 0);
    }

    #[test]
    fn raindrop_finds_a_pit() {
        // Square rim at z = 1 around a centre sunk to z = 0.5, walls below.
        let v = vec![
            Point3::new(0.0, 0.0, 1.0),
            Point3::new(2.0, 0.0, 1.0),
            Point3::new(2.0, 2.0, 1.0),
            Point3::new(0.0, 2.0, 1.0),
            Point3::new(1.0, 1.0, 0.5),
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(2.0, 2.0, 0.0),
            Point3::new(0.0, 2.0, 0.0),
        ];
        let mut tris = vec![[0, 1, 4], [1, 2, 4], [2, 3, 4], [3, 0, 4]];
        let mut labels = vec![FaceLabel::Roof; 4];
        for i in 0..4u32 {
            let j = (i + 1) % 4;
            tris.push([i + 5, j + 5, j]);
            tris.push([i + 5, j, i]);
            labels.extend([FaceLabel::Wall; 2]);
        }
        tris.push([5, 7, 6]);
        tris.push([5, 8, 7]);
        labels.extend([FaceLabel::Floor; 2]);
        let n = tris.len();
        let model = MassModel {
            mesh: TriMesh { vertices: v, triangles: tris },
            labels,
            provenance: vec![Provenance { footprint: 0, edge: Some(0) }; n],
        };
        let r = raindrop_check(&model, 10, 1);
        assert!(!r.passed());
        assert!(r.failure.unwrap().z <= 1.0);
    }

    #[test]
    fn stats_header() {
        let mut out = Vec::new();
        write_stats_csv(&mut out, &[]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "name,sweep_edges,variables,time_sec,error_m2\n");
    }
}
