use super::{Point2, TriMesh};

/// Barycentric height of triangle `t` at `p`, if its ground projection
/// contains `p`. Vertical triangles never contain anything.
fn triangle_height(mesh: &TriMesh, t: usize, p: Point2) -> Option<f64> {
    let [a, b, c] = mesh.triangle(t);
    let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    if det.abs() < 1e-14 {
        return None;
    }
    let l1 = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
    let l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
    let l0 = 1.0 - l1 - l2;
    const EPS: f64 = -1e-12;
    if l0 < EPS || l1 < EPS || l2 < EPS {
        return None;
    }
    Some(l0 * a.z + l1 * b.z + l2 * c.z)
}

/// Highest surface point above `p`, or `None` when no triangle covers it.
pub fn height_field_query(mesh: &TriMesh, p: Point2) -> Option<f64> {
    (0..mesh.triangles.len())
        .filter_map(|t| triangle_height(mesh, t, p))
        .reduce(f64::max)
}

/// Uniform-grid acceleration for repeated heightfield queries on one mesh.
/// Answers are identical to [`height_field_query`].
#[derive(Debug, Clone)]
pub struct HeightIndex<'a> {
    mesh: &'a TriMesh,
    origin: Point2,
    cell: f64,
    cols: usize,
    rows: usize,
    buckets: Vec<Vec<u32>>,
}

impl<'a> HeightIndex<'a> {
    pub fn new(mesh: &'a TriMesh) -> Self {
        let Some((lo, hi)) = mesh.bounds() else {
            return HeightIndex {
                mesh,
                origin: Point2::origin(),
                cell: 1.0,
                cols: 0,
                rows: 0,
                buckets: Vec::new(),
            };
        };
        let w = (hi.x - lo.x).max(1e-6);
        let h = (hi.y - lo.y).max(1e-6);
        let target = (mesh.triangles.len() as f64).sqrt().max(1.0);
        let cell = (w.max(h) / target).max(0.05);
        let cols = (w / cell).ceil() as usize + 1;
        let rows = (h / cell).ceil() as usize + 1;
        let origin = Point2::new(lo.x, lo.y);
        let mut buckets = vec![Vec::new(); cols * rows];
        for (ti, tri) in mesh.triangles.iter().enumerate() {
            let pts = tri.map(|i| mesh.vertices[i as usize]);
            let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
            for q in pts {
                x0 = x0.min(q.x);
                y0 = y0.min(q.y);
                x1 = x1.max(q.x);
                y1 = y1.max(q.y);
            }
            let c0 = (((x0 - origin.x) / cell).floor().max(0.0) as usize).min(cols - 1);
            let c1 = (((x1 - origin.x) / cell).floor().max(0.0) as usize).min(cols - 1);
            let r0 = (((y0 - origin.y) / cell).floor().max(0.0) as usize).min(rows - 1);
            let r1 = (((y1 - origin.y) / cell).floor().max(0.0) as usize).min(rows - 1);
            for r in r0..=r1 {
                for c in c0..=c1 {
                    buckets[r * cols + c].push(ti as u32);
                }
            }
        }
        HeightIndex {
            mesh,
            origin,
            cell,
            cols,
            rows,
            buckets,
        }
    }

    pub fn mesh(&self) -> &TriMesh {
        self.mesh
    }

    fn bucket(&self, p: Point2) -> Option<&[u32]> {
        if self.cols == 0 {
            return None;
        }
        let fx = (p.x - self.origin.x) / self.cell;
        let fy = (p.y - self.origin.y) / self.cell;
        // allow points on the far boundary of the last cell
        if fx < -1e-9 || fy < -1e-9 || fx > self.cols as f64 || fy > self.rows as f64 {
            return None;
        }
        let c = (fx.max(0.0) as usize).min(self.cols - 1);
        let r = (fy.max(0.0) as usize).min(self.rows - 1);
        Some(&self.buckets[r * self.cols + c])
    }

    pub fn query(&self, p: Point2) -> Option<f64> {
        let bucket = self.bucket(p)?;
        let mut best: Option<f64> = None;
        for &t in bucket {
            if let Some(h) = triangle_height(self.mesh, t as usize, p) {
                best = Some(best.map_or(h, |b: f64| b.max(h)));
            }
        }
        best
    }
}
