use std::collections::HashMap;

use super::{Point3, Vec3};
use crate::error::{Error, Result};

/// Triangles with area at or below this (m²) are dropped at load time.
pub const DEGENERATE_AREA: f64 = 1e-9;
/// Vertices closer than this (m) are merged at load time.
pub const WELD_TOLERANCE: f64 = 1e-6;

/// Indexed triangle mesh, meters, Z up.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriMesh {
    /// Builds a mesh, welding near-duplicate vertices and removing degenerate
    /// triangles. Fails on out-of-range indices or non-finite coordinates.
    pub fn new(vertices: Vec<Point3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        if let Some(p) = vertices.iter().find(|p| !p.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidInput(format!("non-finite vertex {p:?}")));
        }
        let n = vertices.len();
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i as usize >= n)) {
            return Err(Error::InvalidInput(format!(
                "triangle {t:?} references a vertex beyond {n}"
            )));
        }
        let (vertices, remap) = weld(&vertices, WELD_TOLERANCE);
        let triangles = triangles
            .into_iter()
            .map(|t| t.map(|i| remap[i as usize]))
            .filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
            .filter(|t| triangle_area(&vertices, t) > DEGENERATE_AREA)
            .collect();
        let mut mesh = TriMesh {
            vertices,
            triangles,
        };
        mesh.drop_unused_vertices();
        Ok(mesh)
    }

    /// Builds a mesh without welding or cleanup. Indices are still checked.
    pub fn from_raw(vertices: Vec<Point3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let n = vertices.len();
        if triangles.iter().any(|t| t.iter().any(|&i| i as usize >= n)) {
            return Err(Error::InvalidInput("triangle index out of range".into()));
        }
        Ok(TriMesh {
            vertices,
            triangles,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, t: usize) -> [Point3; 3] {
        self.triangles[t].map(|i| self.vertices[i as usize])
    }

    /// Unnormalized face normal (length = 2 × area).
    pub fn face_normal(&self, t: usize) -> Vec3 {
        let [a, b, c] = self.triangle(t);
        (b - a).cross(&(c - a))
    }

    pub fn area(&self, t: usize) -> f64 {
        0.5 * self.face_normal(t).norm()
    }

    /// Axis-aligned bounds `(min, max)`, or `None` when there are no vertices.
    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(lo, hi), p| {
            (lo.inf(p), hi.sup(p))
        }))
    }

    pub fn max_height(&self) -> Option<f64> {
        self.bounds().map(|(_, hi)| hi.z)
    }

    /// Signed enclosed volume (positive for outward-oriented closed meshes).
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize].coords);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    /// Concatenates meshes without welding.
    pub fn merged<'a>(meshes: impl IntoIterator<Item = &'a TriMesh>) -> TriMesh {
        let mut out = TriMesh::default();
        for m in meshes {
            let base = out.vertices.len() as u32;
            out.vertices.extend_from_slice(&m.vertices);
            out.triangles
                .extend(m.triangles.iter().map(|t| t.map(|i| i + base)));
        }
        out
    }

    fn drop_unused_vertices(&mut self) {
        let mut used = vec![false; self.vertices.len()];
        for t in &self.triangles {
            for &i in t {
                used[i as usize] = true;
            }
        }
        if used.iter().all(|&u| u) {
            return;
        }
        let mut remap = vec![u32::MAX; self.vertices.len()];
        let mut kept = Vec::with_capacity(self.vertices.len());
        for (i, p) in self.vertices.iter().enumerate() {
            if used[i] {
                remap[i] = kept.len() as u32;
                kept.push(*p);
            }
        }
        self.vertices = kept;
        for t in &mut self.triangles {
            *t = t.map(|i| remap[i as usize]);
        }
    }
}

fn triangle_area(vertices: &[Point3], t: &[u32; 3]) -> f64 {
    let [a, b, c] = t.map(|i| vertices[i as usize]);
    0.5 * (b - a).cross(&(c - a)).norm()
}

/// Merges vertices within `tol` of each other; the first occurrence wins.
fn weld(vertices: &[Point3], tol: f64) -> (Vec<Point3>, Vec<u32>) {
    let key = |p: &Point3| {
        (
            (p.x / tol).floor() as i64,
            (p.y / tol).floor() as i64,
            (p.z / tol).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<u32>> = HashMap::new();
    let mut out: Vec<Point3> = Vec::with_capacity(vertices.len());
    let mut remap = Vec::with_capacity(vertices.len());
    for p in vertices {
        let (kx, ky, kz) = key(p);
        let mut found = None;
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(ids) = grid.get(&(kx + dx, ky + dy, kz + dz)) {
                        if let Some(&id) = ids
                            .iter()
                            .find(|&&id| (out[id as usize] - p).norm() <= tol)
                        {
                            found = Some(id);
                            break 'search;
                        }
                    }
                }
            }
        }
        let id = match found {
            Some(id) => id,
            None => {
                let id = out.len() as u32;
                out.push(*p);
                grid.entry((kx, ky, kz)).or_default().push(id);
                id
            }
        };
        remap.push(id);
    }
    (out, remap)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welds_duplicates_and_drops_degenerate() {
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(1.0 + 1e-8, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
        ];
        // second triangle is collinear after welding
        let m = TriMesh::new(v, vec![[0, 1, 2], [0, 3, 4]]).unwrap();
        assert_eq!(m.triangles.len(), 1);
        assert_eq!(m.vertices.len(), 3);
    }

    #[test]
    fn rejects_bad_index_and_nan() {
        let v = vec![Point3::origin(); 3];
        assert!(TriMesh::new(v.clone(), vec![[0, 1, 3]]).is_err());
        let mut bad = v;
        bad[0].x = f64::NAN;
        assert!(TriMesh::new(bad, vec![[0, 1, 2]]).is_err());
    }
}
