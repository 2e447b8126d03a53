//! Mass models: footprints swept upward along their edge profiles.
//!
//! Each footprint edge moves inward at the slope of its profile (zero for
//! walls) while rising; the wavefront is closed at the top by a flat cap.
//! Outputs are closed, outward-oriented triangle meshes with a label and a
//! source edge per triangle.

mod skeleton;
mod validate;

pub use skeleton::WELD;
pub use validate::{check_closed_manifold, connected_components, euler_characteristic};

use crate::error::{Error, Result};
use crate::geometry::{perp, point_in_ring, ring_signed_area, Point2, Point3, Polygon2, TriMesh};
use crate::profile::Profile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FaceLabel {
    Wall,
    Roof,
    Floor,
    Cap,
}

impl FaceLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            FaceLabel::Wall => "wall",
            FaceLabel::Roof => "roof",
            FaceLabel::Floor => "floor",
            FaceLabel::Cap => "cap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Provenance {
    pub footprint: usize,
    /// Source footprint edge; `None` for floor and cap.
    pub edge: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MassModel {
    pub mesh: TriMesh,
    pub labels: Vec<FaceLabel>,
    pub provenance: Vec<Provenance>,
}

impl MassModel {
    /// Distinct `(label, source)` groups: one per planar-ish face family.
    pub fn face_count(&self, label: FaceLabel) -> usize {
        let mut g: Vec<Provenance> = self
            .labels
            .iter()
            .zip(&self.provenance)
            .filter(|(l, _)| **l == label)
            .map(|(_, p)| *p)
            .collect();
        g.sort_unstable();
        g.dedup();
        g.len()
    }

    pub fn volume(&self) -> f64 {
        self.mesh.signed_volume()
    }

    /// Concatenates models, keeping each one's vertices separate.
    pub fn merged<'a>(models: impl IntoIterator<Item = &'a MassModel>) -> MassModel {
        let mut out = MassModel::default();
        for m in models {
            let base = out.mesh.vertices.len() as u32;
            out.mesh.vertices.extend_from_slice(&m.mesh.vertices);
            out.mesh
                .triangles
                .extend(m.mesh.triangles.iter().map(|t| t.map(|i| i + base)));
            out.labels.extend_from_slice(&m.labels);
            out.provenance.extend_from_slice(&m.provenance);
        }
        out
    }
}

/// Collects triangles while sweeping.
pub(crate) struct Emitter {
    footprint: usize,
    verts: Vec<Point3>,
    tris: Vec<[u32; 3]>,
    labels: Vec<FaceLabel>,
    prov: Vec<Provenance>,
}

impl Emitter {
    fn new(footprint: usize) -> Emitter {
        Emitter {
            footprint,
            verts: Vec::new(),
            tris: Vec::new(),
            labels: Vec::new(),
            prov: Vec::new(),
        }
    }

    pub(crate) fn vertex(&mut self, p: Point2, z: f64) -> u32 {
        self.verts.push(Point3::new(p.x, p.y, z));
        (self.verts.len() - 1) as u32
    }

    pub(crate) fn triangle(&mut self, t: [u32; 3], label: FaceLabel, edge: Option<usize>) {
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return;
        }
        self.tris.push(t);
        self.labels.push(label);
        self.prov.push(Provenance {
            footprint: self.footprint,
            edge,
        });
    }

    /// Triangulates horizontal rings (counter-clockwise outers, clockwise
    /// holes) at height `z`, facing down when `downward`.
    pub(crate) fn polygon(
        &mut self,
        rings: &[Vec<(Point2, u32)>],
        z: f64,
        downward: bool,
        label: FaceLabel,
        edge: Option<usize>,
    ) -> Result<()> {
        let pts = |r: &Vec<(Point2, u32)>| r.iter().map(|v| v.0).collect::<Vec<_>>();
        let (outers, holes): (Vec<&Vec<(Point2, u32)>>, Vec<&Vec<(Point2, u32)>>) =
            rings.iter().partition(|r| ring_signed_area(&pts(r)) > 0.0);
        let mut groups: Vec<Vec<&Vec<(Point2, u32)>>> = outers.iter().map(|o| vec![*o]).collect();
        for h in holes {
            let d = h[1].0 - h[0].0;
            let probe = Point2::from((h[0].0.coords + h[1].0.coords) * 0.5) - perp(d.normalize()) * 1e-7;
            let host = (0..outers.len())
                .filter(|&o| point_in_ring(probe, &pts(outers[o])))
                .min_by(|&a, &b| {
                    ring_signed_area(&pts(outers[a])).total_cmp(&ring_signed_area(&pts(outers[b])))
                });
            match host {
                Some(o) => groups[o].push(h),
                None => {
                    return Err(Error::Extrusion {
                        location: h[0].0,
                        height: z,
                        reason: "hole outside every outer ring".into(),
                    })
                }
            }
        }
        for g in groups {
            let mut flat = Vec::new();
            let mut ids = Vec::new();
            let mut hole_idx = Vec::new();
            for (k, r) in g.iter().enumerate() {
                if k > 0 {
                    hole_idx.push(ids.len());
                }
                for &(p, id) in r.iter() {
                    flat.push(p.x);
                    flat.push(p.y);
                    ids.push(id);
                }
            }
            let tri = earcutr::earcut(&flat, &hole_idx, 2).map_err(|e| Error::Extrusion {
                location: g[0][0].0,
                height: z,
                reason: format!("triangulation failed: {e:?}"),
            })?;
            for t in tri.chunks_exact(3) {
                let p = |i: usize| Point2::new(flat[2 * t[i]], flat[2 * t[i] + 1]);
                let ccw = ring_signed_area(&[p(0), p(1), p(2)]) >= 0.0;
                let (a, b, c) = (ids[t[0]], ids[t[1]], ids[t[2]]);
                if ccw != downward {
                    self.triangle([a, b, c], label, edge);
                } else {
                    self.triangle([a, c, b], label, edge);
                }
            }
        }
        Ok(())
    }

    fn finish(self) -> MassModel {
        // Drop vertices no triangle uses.
        let mut remap = vec![u32::MAX; self.verts.len()];
        let mut verts = Vec::new();
        let mut tris = self.tris;
        for t in tris.iter_mut() {
            for i in t.iter_mut() {
                if remap[*i as usize] == u32::MAX {
                    remap[*i as usize] = verts.len() as u32;
                    verts.push(self.verts[*i as usize]);
                }
                *i = remap[*i as usize];
            }
        }
        MassModel {
            mesh: TriMesh {
                vertices: verts,
                triangles: tris,
            },
            labels: self.labels,
            provenance: self.prov,
        }
    }
}

/// Highest mesh vertex plus `margin`.
pub fn height_cap_from_mesh(mesh: &TriMesh, margin: f64) -> Result<f64> {
    mesh.max_height()
        .map(|h| h + margin)
        .ok_or(Error::EmptyMesh)
}

/// Recomputes labels: floor and cap from provenance and height, wall when
/// the face is vertical, roof otherwise.
pub fn label_faces(mut model: MassModel) -> MassModel {
    for (t, label) in model.labels.iter_mut().enumerate() {
        let tri = model.mesh.triangle(t);
        *label = match model.provenance[t].edge {
            None if tri.iter().all(|p| p.z == 0.0) => FaceLabel::Floor,
            None => FaceLabel::Cap,
            Some(_) => {
                let n = model.mesh.face_normal(t);
                if n.z.abs() <= 1e-9 * n.norm() {
                    FaceLabel::Wall
                } else {
                    FaceLabel::Roof
                }
            }
        };
    }
    model
}

/// Top of the sweep: the highest profile, limited by `h_cap`. Edges whose
/// profile ends lower keep their last slope up to there.
pub fn sweep_top(profiles: &[Profile], h_cap: f64) -> f64 {
    profiles
        .iter()
        .map(|p| p.height())
        .fold(0.0, f64::max)
        .min(h_cap)
}

/// Extrudes one footprint; `profiles` follow [`Polygon2::edges`] order.
pub fn extrude(footprint: &Polygon2, profiles: &[Profile], h_cap: f64) -> Result<MassModel> {
    extrude_footprint(0, footprint, profiles, h_cap)
}

pub fn extrude_footprint(id: usize, footprint: &Polygon2, profiles: &[Profile], h_cap: f64) -> Result<MassModel> {
    if !(h_cap > 0.0) {
        return Err(Error::InvalidInput("h_cap must be positive".into()));
    }
    let top = sweep_top(profiles, h_cap);
    if !(top > 0.0) {
        return Err(Error::InvalidInput("profiles have no height".into()));
    }
    let mut em = Emitter::new(id);
    skeleton::sweep(footprint, profiles, top, &mut em)?;
    let model = label_faces(em.finish());
    check_closed_manifold(&model.mesh).map_err(|reason| Error::Extrusion {
        location: footprint.outer[0],
        height: top,
        reason,
    })?;
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtrudeOutcome {
    Clean,
    Perturbed,
    Prism,
}

/// Extrudes with one retry on a footprint nudged by 1e-4 m, then falls
/// back to a vertical prism at the sweep top.
pub fn extrude_robust(id: usize, footprint: &Polygon2, profiles: &[Profile], h_cap: f64) -> Result<(MassModel, ExtrudeOutcome)> {
    match extrude_footprint(id, footprint, profiles, h_cap) {
        Ok(m) => return Ok((m, ExtrudeOutcome::Clean)),
        Err(Error::InvalidInput(s)) => return Err(Error::InvalidInput(s)),
        Err(_) => {}
    }
    let nudged = footprint.map_points(|p| {
        let s = ((p.x * 7.31 + p.y * 3.17).sin() * 1e4).fract();
        Point2::new(p.x + 1e-4 * s, p.y + 1e-4 * (1.0 - s.abs()))
    });
    if let Ok(m) = extrude_footprint(id, &nudged, profiles, h_cap) {
        return Ok((m, ExtrudeOutcome::Perturbed));
    }
    let top = sweep_top(profiles, h_cap);
    let walls: Vec<Profile> = profiles.iter().map(|_| Profile::vertical(top)).collect();
    extrude_footprint(id, footprint, &walls, h_cap).map(|m| (m, ExtrudeOutcome::Prism))
}
