//! OBJ meshes in and out, GeoJSON footprints in and out.

use std::fs;
use std::io::{BufReader, Write};
use std::path::Path;

use geojson::{Feature, FeatureCollection, GeoJson, Geometry, JsonObject, Value};

use crate::error::{Error, Result};
use crate::extrusion::{FaceLabel, MassModel};
use crate::geometry::{Point2, Point3, Polygon2, TriMesh, Vec2};

pub const MATERIAL_ORDER: [FaceLabel; 4] = [FaceLabel::Wall, FaceLabel::Roof, FaceLabel::Floor, FaceLabel::Cap];

/// Reads every object of an OBJ file into one mesh. Polygonal faces are
/// fan-triangulated; normals, texture coordinates and materials are ignored.
pub fn read_obj(text: &str) -> Result<TriMesh> {
    let opts = tobj::LoadOptions {
        triangulate: true,
        ignore_points: true,
        ignore_lines: true,
        ..Default::default()
    };
    let (models, _) = tobj::load_obj_buf(&mut BufReader::new(text.as_bytes()), &opts, |_| {
        Err(tobj::LoadError::OpenFileFailed)
    })
    .map_err(|e| Error::Parse(format!("OBJ: {e}")))?;
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for m in models {
        let base = vertices.len() as u32;
        let p = &m.mesh.positions;
        vertices.extend(p.chunks_exact(3).map(|c| Point3::new(c[0] as f64, c[1] as f64, c[2] as f64)));
        triangles.extend(m.mesh.indices.chunks_exact(3).map(|t| [t[0] + base, t[1] + base, t[2] + base]));
    }
    let mesh = TriMesh::new(vertices, triangles)?;
    if mesh.is_empty() {
        return Err(Error::EmptyMesh);
    }
    Ok(mesh)
}

pub fn load_obj(path: &Path) -> Result<TriMesh> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    read_obj(&text)
}

/// Plain OBJ: vertices then faces, one group.
pub fn write_mesh_obj(w: &mut impl Write, mesh: &TriMesh) -> std::io::Result<()> {
    for v in &mesh.vertices {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for t in &mesh.triangles {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

/// OBJ with one `g`/`usemtl` group per face label, always in the order
/// wall, roof, floor, cap (empty groups included).
pub fn write_model_obj(w: &mut impl Write, model: &MassModel, mtllib: Option<&str>) -> std::io::Result<()> {
    if let Some(lib) = mtllib {
        writeln!(w, "mtllib {lib}")?;
    }
    for v in &model.mesh.vertices {
        writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for label in MATERIAL_ORDER {
        writeln!(w, "g {0}\nusemtl {0}", label.as_str())?;
        for (t, tri) in model.mesh.triangles.iter().enumerate() {
            if model.labels[t] == label {
                writeln!(w, "f {} {} {}", tri[0] + 1, tri[1] + 1, tri[2] + 1)?;
            }
        }
    }
    Ok(())
}

pub const MATERIALS_MTL: &str = "\
newmtl wall\nKd 0.85 0.82 0.75\n\n\
newmtl roof\nKd 0.60 0.25 0.20\n\n\
newmtl floor\nKd 0.40 0.40 0.40\n\n\
newmtl cap\nKd 0.70 0.70 0.72\n";

/// Where geographic footprints were projected from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoFrame {
    pub lat: f64,
    pub lon: f64,
}

/// Footprints in meters plus the projection frame, if the input was in
/// degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct Footprints {
    pub polygons: Vec<Polygon2>,
    pub frame: Option<GeoFrame>,
}

fn ring_points(ring: &[Vec<f64>]) -> Result<Vec<Point2>> {
    let mut pts = ring
        .iter()
        .map(|c| match c.as_slice() {
            [x, y, ..] => Ok(Point2::new(*x, *y)),
            _ => Err(Error::Parse("GeoJSON position with fewer than two coordinates".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    if pts.len() > 1 && pts.first() == pts.last() {
        pts.pop();
    }
    Ok(pts)
}

fn collect_polygons(g: &Geometry, out: &mut Vec<Vec<Vec<Point2>>>) -> Result<()> {
    match &g.value {
        Value::Polygon(rings) => out.push(rings.iter().map(|r| ring_points(r)).collect::<Result<_>>()?),
        Value::MultiPolygon(polys) => {
            for rings in polys {
                out.push(rings.iter().map(|r| ring_points(r)).collect::<Result<_>>()?);
            }
        }
        Value::GeometryCollection(gs) => {
            for g in gs {
                collect_polygons(g, out)?;
            }
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "non-polygonal GeoJSON geometry: {}",
                other.type_name()
            )))
        }
    }
    Ok(())
}

/// Coordinates look like degrees when every x is a longitude, every y a
/// latitude and the whole set spans less than a degree. A metric footprint
/// that small would be under a meter across.
fn looks_geographic(rings: &[Vec<Vec<Point2>>]) -> bool {
    let pts: Vec<&Point2> = rings.iter().flatten().flatten().collect();
    let in_range = pts.iter().all(|p| p.x.abs() <= 180.0 && p.y.abs() <= 90.0);
    let (mut lo, mut hi) = (Vec2::repeat(f64::INFINITY), Vec2::repeat(f64::NEG_INFINITY));
    for p in &pts {
        lo = lo.inf(&p.coords);
        hi = hi.sup(&p.coords);
    }
    in_range && !pts.is_empty() && (hi - lo).max() < 1.0
}

const WGS84_A: f64 = 6_378_137.0;
const WGS84_E2: f64 = 6.694_379_990_14e-3;

fn ecef(lat: f64, lon: f64) -> [f64; 3] {
    let (sl, cl) = lat.to_radians().sin_cos();
    let (so, co) = lon.to_radians().sin_cos();
    let n = WGS84_A / (1.0 - WGS84_E2 * sl * sl).sqrt();
    [n * cl * co, n * cl * so, n * (1.0 - WGS84_E2) * sl]
}

/// East/north meters of `(lon, lat)` in the tangent plane at `frame`.
pub fn project_enu(frame: GeoFrame, lon: f64, lat: f64) -> Point2 {
    let o = ecef(frame.lat, frame.lon);
    let p = ecef(lat, lon);
    let d = [p[0] - o[0], p[1] - o[1], p[2] - o[2]];
    let (sl, cl) = frame.lat.to_radians().sin_cos();
    let (so, co) = frame.lon.to_radians().sin_cos();
    let east = -so * d[0] + co * d[1];
    let north = -sl * co * d[0] - sl * so * d[1] + cl * d[2];
    Point2::new(east, north)
}

fn area_centroid(polys: &[Polygon2]) -> Point2 {
    let (mut sum, mut area) = (Vec2::zeros(), 0.0);
    for p in polys {
        let a = p.area();
        sum += p.centroid().coords * a;
        area += a;
    }
    if area > 0.0 {
        Point2::from(sum / area)
    } else {
        Point2::origin()
    }
}

/// Parses Polygon/MultiPolygon footprints. Geographic input is projected
/// to a tangent plane at its centroid and shifted so the projected area
/// centroid is the origin.
pub fn parse_footprints(text: &str) -> Result<Footprints> {
    let gj: GeoJson = text.parse().map_err(|e| Error::Parse(format!("GeoJSON: {e}")))?;
    let mut rings = Vec::new();
    match &gj {
        GeoJson::FeatureCollection(fc) => {
            for f in &fc.features {
                let g = f.geometry.as_ref().ok_or_else(|| Error::InvalidInput("feature without geometry".into()))?;
                collect_polygons(g, &mut rings)?;
            }
        }
        GeoJson::Feature(f) => {
            let g = f.geometry.as_ref().ok_or_else(|| Error::InvalidInput("feature without geometry".into()))?;
            collect_polygons(g, &mut rings)?;
        }
        GeoJson::Geometry(g) => collect_polygons(g, &mut rings)?,
    }
    if rings.is_empty() {
        return Err(Error::InvalidInput("GeoJSON holds no polygons".into()));
    }
    let build = |rs: &Vec<Vec<Point2>>, f: &dyn Fn(Point2) -> Point2| {
        let mut it = rs.iter().map(|r| r.iter().map(|&p| f(p)).collect::<Vec<_>>());
        let outer = it.next().unwrap_or_default();
        Polygon2::new(outer, it.collect())
    };
    if !looks_geographic(&rings) {
        let polygons = rings.iter().map(|r| build(r, &|p| p)).collect::<Result<Vec<_>>>()?;
        return Ok(Footprints { polygons, frame: None });
    }
    let degrees = rings.iter().map(|r| build(r, &|p| p)).collect::<Result<Vec<_>>>()?;
    let c = area_centroid(&degrees);
    let frame = GeoFrame { lat: c.y, lon: c.x };
    let projected = rings
        .iter()
        .map(|r| build(r, &|p| project_enu(frame, p.x, p.y)))
        .collect::<Result<Vec<_>>>()?;
    let shift = area_centroid(&projected).coords;
    let polygons = projected.iter().map(|p| p.translated(-shift)).collect();
    Ok(Footprints { polygons, frame: Some(frame) })
}

pub fn load_footprints(path: &Path) -> Result<Footprints> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    parse_footprints(&text)
}

pub fn load_inputs(mesh: &Path, gis: &Path) -> Result<(TriMesh, Vec<Polygon2>)> {
    Ok((load_obj(mesh)?, load_footprints(gis)?.polygons))
}

/// Footprints as a metric GeoJSON FeatureCollection; `props` adds
/// per-feature properties.
pub fn footprints_geojson(polys: &[Polygon2], props: impl Fn(usize) -> JsonObject) -> String {
    let ring = |r: &Vec<Point2>| {
        let mut v: Vec<Vec<f64>> = r.iter().map(|p| vec![p.x, p.y]).collect();
        if let Some(first) = v.first().cloned() {
            v.push(first);
        }
        v
    };
    let features = polys
        .iter()
        .enumerate()
        .map(|(i, p)| Feature {
            bbox: None,
            geometry: Some(Geometry::new(Value::Polygon(
                std::iter::once(&p.outer).chain(&p.holes).map(ring).collect(),
            ))),
            id: None,
            properties: Some(props(i)),
            foreign_members: None,
        })
        .collect();
    GeoJson::from(FeatureCollection { bbox: None, features, foreign_members: None }).to_string()
}
