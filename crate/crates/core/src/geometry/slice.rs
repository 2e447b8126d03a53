use std::collections::HashMap;

use super::{Point2, Point3, TriMesh, Vec2, Vec3};

/// Segments shorter than this (m) are discarded.
pub const MIN_SEGMENT_LENGTH: f64 = 1e-6;
/// Endpoint snap distance used when joining slice segments into chains.
pub const SNAP_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentSource {
    pub triangle: usize,
    /// Slice height for horizontal slices.
    pub level: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment2 {
    pub a: Point2,
    pub b: Point2,
    pub source: Option<SegmentSource>,
}

impl Segment2 {
    pub fn new(a: Point2, b: Point2) -> Self {
        Segment2 { a, b, source: None }
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn direction(&self) -> Vec2 {
        (self.b - self.a).normalize()
    }

    pub fn midpoint(&self) -> Point2 {
        nalgebra::center(&self.a, &self.b)
    }
}

/// Intersects every triangle with the plane `dist(p) = 0`. Returns the two
/// crossing points per properly cut triangle, in 3D.
fn cut_triangles<'a>(
    mesh: &'a TriMesh,
    dist: impl Fn(&Point3) -> f64 + 'a,
) -> impl Iterator<Item = (usize, Point3, Point3)> + 'a {
    mesh.triangles.iter().enumerate().filter_map(move |(ti, tri)| {
        let d = tri.map(|i| dist(&mesh.vertices[i as usize]));
        if d.iter().all(|&x| x > 0.0) || d.iter().all(|&x| x < 0.0) {
            return None;
        }
        let zeros = d.iter().filter(|&&x| x == 0.0).count();
        // coplanar, edge-on and single-vertex touches are not cuts
        if zeros >= 2 {
            return None;
        }
        let mut pts: [Point3; 2] = [Point3::origin(); 2];
        let mut n = 0;
        for k in 0..3 {
            if d[k] == 0.0 {
                pts[n] = mesh.vertices[tri[k] as usize];
                n += 1;
            }
        }
        for k in 0..3 {
            let (i, j) = (k, (k + 1) % 3);
            if (d[i] > 0.0 && d[j] < 0.0) || (d[i] < 0.0 && d[j] > 0.0) {
                if n == 2 {
                    return None;
                }
                // interpolate from the lower vertex index so shared edges agree bitwise
                let (vi, vj, di, dj) = if tri[i] < tri[j] {
                    (tri[i], tri[j], d[i], d[j])
                } else {
                    (tri[j], tri[i], d[j], d[i])
                };
                let pa = mesh.vertices[vi as usize];
                let pb = mesh.vertices[vj as usize];
                let t = di / (di - dj);
                pts[n] = pa + (pb - pa) * t;
                n += 1;
            }
        }
        (n == 2).then_some((ti, pts[0], pts[1]))
    })
}

/// Horizontal section at height `z`, projected to the ground plane. Each
/// segment is oriented with the mesh outside on its right, so closed
/// watertight sections come out counter-clockwise around solid material.
pub fn slice_mesh_horizontal(mesh: &TriMesh, z: f64) -> Vec<Segment2> {
    cut_triangles(mesh, move |p| p.z - z)
        .filter_map(|(ti, p, q)| {
            let mut a = Point2::new(p.x, p.y);
            let mut b = Point2::new(q.x, q.y);
            if (b - a).norm() <= MIN_SEGMENT_LENGTH {
                return None;
            }
            let n = mesh.face_normal(ti);
            if (b - a).dot(&Vec2::new(-n.y, n.x)) < 0.0 {
                std::mem::swap(&mut a, &mut b);
            }
            Some(Segment2 {
                a,
                b,
                source: Some(SegmentSource {
                    triangle: ti,
                    level: Some(z),
                }),
            })
        })
        .collect()
}

/// Vertical section through `origin` along the unit vector `direction`.
/// Output coordinates are `(signed distance along direction, height)`.
pub fn slice_mesh_vertical(mesh: &TriMesh, origin: Point2, direction: Vec2) -> Vec<Segment2> {
    let normal = Vec2::new(-direction.y, direction.x);
    cut_triangles(mesh, move |p| (Point2::new(p.x, p.y) - origin).dot(&normal))
        .filter_map(|(ti, p, q)| {
            let to_frame =
                |v: Point3| Point2::new((Point2::new(v.x, v.y) - origin).dot(&direction), v.z);
            let (mut a, mut b) = (to_frame(p), to_frame(q));
            if (b - a).norm() <= MIN_SEGMENT_LENGTH {
                return None;
            }
            if (a.x, a.y) > (b.x, b.y) {
                std::mem::swap(&mut a, &mut b);
            }
            Some(Segment2 {
                a,
                b,
                source: Some(SegmentSource {
                    triangle: ti,
                    level: None,
                }),
            })
        })
        .collect()
}

/// A chained polyline; `closed` loops do not repeat their first point.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub points: Vec<Point2>,
    pub closed: bool,
}

/// Joins segments whose endpoints lie within `snap` into polylines. The
/// result depends only on the segment set, not its order.
pub fn chain_segments(segments: &[Segment2], snap: f64) -> Vec<Chain> {
    let mut segs: Vec<(Point2, Point2)> = segments.iter().map(|s| (s.a, s.b)).collect();
    segs.sort_by(|x, y| {
        (x.0.x, x.0.y, x.1.x, x.1.y)
            .partial_cmp(&(y.0.x, y.0.y, y.1.x, y.1.y))
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut nodes: Vec<Point2> = Vec::new();
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut node_of = |p: Point2| -> usize {
        let kx = (p.x / snap).floor() as i64;
        let ky = (p.y / snap).floor() as i64;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = grid.get(&(kx + dx, ky + dy)) {
                    if let Some(&id) = ids.iter().find(|&&id| (nodes[id] - p).norm() <= snap) {
                        return id;
                    }
                }
            }
        }
        let id = nodes.len();
        nodes.push(p);
        grid.entry((kx, ky)).or_default().push(id);
        id
    };
    let ends: Vec<(usize, usize)> = segs.iter().map(|&(a, b)| (node_of(a), node_of(b))).collect();

    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (si, &(u, v)) in ends.iter().enumerate() {
        if u == v {
            continue;
        }
        incident[u].push(si);
        incident[v].push(si);
    }
    let mut used = vec![false; segs.len()];
    for (si, &(u, v)) in ends.iter().enumerate() {
        if u == v {
            used[si] = true;
        }
    }

    let walk = |start: usize, used: &mut Vec<bool>| -> (Vec<usize>, usize) {
        let mut path = vec![start];
        let mut cur = start;
        while let Some(&si) = incident[cur].iter().find(|&&si| !used[si]) {
            used[si] = true;
            let (u, v) = ends[si];
            cur = if u == cur { v } else { u };
            path.push(cur);
        }
        (path, cur)
    };

    let mut chains = Vec::new();
    // open chains first, from odd-degree nodes
    for n in 0..nodes.len() {
        while incident[n].len() % 2 == 1 && incident[n].iter().any(|&s| !used[s]) {
            let (path, _) = walk(n, &mut used);
            if path.len() >= 2 {
                chains.push(Chain {
                    points: path.iter().map(|&i| nodes[i]).collect(),
                    closed: false,
                });
            }
            if incident[n].iter().all(|&s| used[s]) {
                break;
            }
        }
    }
    for si in 0..segs.len() {
        if used[si] {
            continue;
        }
        let (start, _) = ends[si];
        let (path, end) = walk(start, &mut used);
        let closed = end == start && path.len() > 3;
        let mut pts: Vec<Point2> = path.iter().map(|&i| nodes[i]).collect();
        if closed {
            pts.pop();
        }
        chains.push(Chain {
            points: pts,
            closed,
        });
    }
    chains
}

/// Unit normal of a mesh triangle (zero for degenerate input).
pub(crate) fn unit_normal(mesh: &TriMesh, t: usize) -> Vec3 {
    let n = mesh.face_normal(t);
    let l = n.norm();
    if l > 0.0 {
        n / l
    } else {
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shapes::{gable_prism, unit_cube};

    fn total_len(s: &[Segment2]) -> f64 {
        s.iter().map(|s| s.length()).sum()
    }

    #[test]
    fn cube_mid_section_is_unit_square() {
        let segs = slice_mesh_horizontal(&unit_cube(), 0.5);
        assert!((total_len(&segs) - 4.0).abs() < 1e-6);
        let chains = chain_segments(&segs, SNAP_TOLERANCE);
        assert_eq!(chains.len(), 1);
        assert!(chains[0].closed);
        assert!(super::super::ring_signed_area(&chains[0].points) > 0.0);
    }

    #[test]
    fn above_mesh_is_empty() {
        assert!(slice_mesh_horizontal(&unit_cube(), 1.5).is_empty());
    }

    #[test]
    fn single_triangle_section() {
        let m = TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
            ],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let segs = slice_mesh_horizontal(&m, 0.5);
        assert_eq!(segs.len(), 1);
        let s = segs[0];
        let (lo, hi) = if s.a.x < s.b.x { (s.a, s.b) } else { (s.b, s.a) };
        assert!((lo - Point2::new(0.0, 0.0)).norm() < 1e-12);
        assert!((hi - Point2::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn vertical_section_of_cube() {
        let segs = slice_mesh_vertical(&unit_cube(), Point2::new(0.5, 0.0), Vec2::new(0.0, 1.0));
        assert!((total_len(&segs) - 4.0).abs() < 1e-9);
        for s in &segs {
            for p in [s.a, s.b] {
                assert!(p.x > -1e-9 && p.x < 1.0 + 1e-9 && p.y > -1e-9 && p.y < 1.0 + 1e-9);
                let on_side = [p.x, 1.0 - p.x, p.y, 1.0 - p.y].iter().any(|v| v.abs() < 1e-9);
                assert!(on_side);
            }
        }
        assert!(slice_mesh_vertical(&unit_cube(), Point2::new(5.0, 0.0), Vec2::new(0.0, 1.0))
            .is_empty());
    }

    #[test]
    fn vertical_section_of_gable() {
        // ridge along x at y=1, width 2 along y, eaves 1, ridge 2
        let m = gable_prism(4.0, 2.0, 1.0, 2.0);
        let segs = slice_mesh_vertical(&m, Point2::new(2.0, 0.0), Vec2::new(0.0, 1.0));
        let pts: Vec<Point2> = segs.iter().flat_map(|s| [s.a, s.b]).collect();
        let apex = pts
            .iter()
            .copied()
            .max_by(|a, b| a.y.total_cmp(&b.y))
            .unwrap();
        assert!((apex.y - 2.0).abs() < 1e-9 && (apex.x - 1.0).abs() < 1e-9);
        assert!(pts.iter().any(|p| (p.y - 1.0).abs() < 1e-9));
    }

    #[test]
    fn closed_sections_form_loops() {
        // every endpoint shared by exactly two segments at non-vertex heights
        let m = gable_prism(4.0, 2.0, 1.0, 2.0);
        for z in [0.3, 0.77, 1.31, 1.9] {
            let segs = slice_mesh_horizontal(&m, z);
            let mut pts: Vec<Point2> = segs.iter().flat_map(|s| [s.a, s.b]).collect();
            for p in pts.clone() {
                let count = pts.iter().filter(|q| (**q - p).norm() < 1e-6).count();
                assert_eq!(count, 2, "z={z} p={p:?}");
            }
            pts.clear();
        }
    }

    #[test]
    fn slice_length_is_continuous_on_cube() {
        let m = unit_cube();
        for z in [0.13, 0.27, 0.31, 0.44, 0.5, 0.61, 0.72, 0.83, 0.91, 0.97] {
            let a = total_len(&slice_mesh_horizontal(&m, z));
            let b = total_len(&slice_mesh_horizontal(&m, z + 1e-7));
            assert!((a - b).abs() < 1e-6);
        }
    }
}
