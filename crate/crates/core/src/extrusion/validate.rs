use std::collections::HashMap;

use crate::geometry::TriMesh;

/// Every undirected edge must border exactly two triangles that traverse
/// it in opposite directions, and the enclosed volume must be positive.
pub fn check_closed_manifold(mesh: &TriMesh) -> Result<(), String> {
    if mesh.triangles.is_empty() {
        return Err("no triangles".into());
    }
    let mut uses: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
    for t in &mesh.triangles {
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(format!("degenerate triangle {t:?}"));
        }
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            let e = uses.entry((a.min(b), a.max(b))).or_default();
            if a < b {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    for (&(a, b), &(fwd, back)) in &uses {
        if fwd != 1 || back != 1 {
            let p = mesh.vertices[a as usize];
            let q = mesh.vertices[b as usize];
            return Err(format!(
                "edge ({:.3},{:.3},{:.3})-({:.3},{:.3},{:.3}) used {fwd}+{back} times",
                p.x, p.y, p.z, q.x, q.y, q.z
            ));
        }
    }
    let v = mesh.signed_volume();
    if !(v > 0.0) {
        return Err(format!("non-positive volume {v}"));
    }
    Ok(())
}

/// `V − E + F` over referenced vertices.
pub fn euler_characteristic(mesh: &TriMesh) -> i64 {
    let mut verts: Vec<u32> = mesh.triangles.iter().flatten().copied().collect();
    verts.sort_unstable();
    verts.dedup();
    let mut edges: Vec<(u32, u32)> = mesh
        .triangles
        .iter()
        .flat_map(|t| (0..3).map(move |k| (t[k].min(t[(k + 1) % 3]), t[k].max(t[(k + 1) % 3]))))
        .collect();
    edges.sort_unstable();
    edges.dedup();
    verts.len() as i64 - edges.len() as i64 + mesh.triangles.len() as i64
}

/// Number of edge-connected triangle groups.
pub fn connected_components(mesh: &TriMesh) -> usize {
    let n = mesh.vertices.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for t in &mesh.triangles {
        for k in 1..3 {
            let (a, b) = (find(&mut parent, t[0] as usize), find(&mut parent, t[k] as usize));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut roots: Vec<usize> = mesh
        .triangles
        .iter()
        .map(|t| find(&mut parent, t[0] as usize))
        .collect();
    roots.sort_unstable();
    roots.dedup();
    roots.len()
}
