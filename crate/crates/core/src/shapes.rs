//! Closed primitive meshes used by tests, examples and the scene generator.

use crate::geometry::{Point3, TriMesh};

fn from_faces(vertices: Vec<Point3>, faces: &[&[u32]]) -> TriMesh {
    let mut tris = Vec::new();
    for f in faces {
        for k in 1..f.len() - 1 {
            tris.push([f[0], f[k], f[k + 1]]);
        }
    }
    TriMesh::new(vertices, tris).expect("primitive mesh is valid")
}

/// Axis-aligned box, outward-oriented, 12 triangles.
pub fn box_mesh(min: Point3, max: Point3) -> TriMesh {
    let v = |x: bool, y: bool, z: bool| {
        Point3::new(
            if x { max.x } else { min.x },
            if y { max.y } else { min.y },
            if z { max.z } else { min.z },
        )
    };
    let verts = vec![
        v(false, false, false),
        v(true, false, false),
        v(true, true, false),
        v(false, true, false),
        v(false, false, true),
        v(true, false, true),
        v(true, true, true),
        v(false, true, true),
    ];
    from_faces(
        verts,
        &[
            &[0, 3, 2, 1],
            &[4, 5, 6, 7],
            &[0, 1, 5, 4],
            &[1, 2, 6, 5],
            &[2, 3, 7, 6],
            &[3, 0, 4, 7],
        ],
    )
}

pub fn unit_cube() -> TriMesh {
    box_mesh(Point3::origin(), Point3::new(1.0, 1.0, 1.0))
}

/// Gable-roofed prism over `[0, length] × [0, width]` with the ridge along
/// x at `y = width / 2`.
pub fn gable_prism(length: f64, width: f64, eave: f64, ridge: f64) -> TriMesh {
    let (l, w, m) = (length, width, width / 2.0);
    let verts = vec![
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(l, 0.0, 0.0),
        Point3::new(l, w, 0.0),
        Point3::new(0.0, w, 0.0),
        Point3::new(0.0, 0.0, eave),
        Point3::new(l, 0.0, eave),
        Point3::new(l, w, eave),
        Point3::new(0.0, w, eave),
        Point3::new(0.0, m, ridge),
        Point3::new(l, m, ridge),
    ];
    from_faces(
        verts,
        &[
            &[0, 3, 2, 1],
            &[0, 1, 5, 4],
            &[2, 3, 7, 6],
            &[1, 2, 6, 9, 5],
            &[3, 0, 4, 8, 7],
            &[4, 5, 9, 8],
            &[6, 7, 8, 9],
        ],
    )
}
