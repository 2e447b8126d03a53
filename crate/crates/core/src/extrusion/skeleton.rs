//! Wavefront simulation for per-edge weighted extrusion.
//!
//! The footprint boundary is advanced upward in steps. Within a step every
//! edge moves inward at a constant speed, so vertices move linearly; a step
//! ends at the next edge collapse, vertex-on-edge contact, profile
//! breakpoint or the top height. After each step coincident tops are
//! welded and the ring topology is repaired: consecutive duplicates
//! collapse, a vertex touching another part of its own ring splits it, and
//! a vertex touching another ring merges the two.
//!
//! When a collapse leaves two parallel edges adjacent while they move at
//! different speeds, their shared vertex is split and joined by a
//! zero-speed connector, so each side keeps its own plane and the step
//! between them becomes a vertical face.

use std::collections::HashSet;

use super::{Emitter, FaceLabel};
use crate::error::{Error, Result};
use crate::geometry::{cross2, perp, ring_signed_area, Point2, Polygon2, Vec2};
use crate::profile::Profile;

/// Positions closer than this are one vertex.
pub const WELD: f64 = 1e-6;
const MAX_STEPS: usize = 100_000;

#[derive(Debug, Clone, Copy)]
struct WVert {
    p: Point2,
    /// Source edge of the wavefront edge leaving this vertex.
    edge: usize,
    id: u32,
}

struct Lines {
    u: Vec<Vec2>,
    n: Vec<Vec2>,
    /// Profile driving the line; `None` for connectors, which never move.
    profile: Vec<Option<usize>>,
    /// Footprint edge reported as the provenance of faces on the line.
    source: Vec<usize>,
}

impl Lines {
    fn speeds(&self, profiles: &[Profile], h: f64) -> Vec<f64> {
        self.profile
            .iter()
            .map(|p| p.map_or(0.0, |k| profiles[k].speed_at(h)))
            .collect()
    }
}

fn parallel(lines: &Lines, i: usize, j: usize) -> bool {
    cross2(lines.n[i], lines.n[j]).abs() < 1e-9 && lines.n[i].dot(&lines.n[j]) > 0.0
}

/// Splits every vertex between parallel edges of different speed into two
/// coincident vertices joined by a connector line.
fn split_parallel(rings: &mut [Vec<WVert>], lines: &mut Lines, speed: &mut Vec<f64>) {
    for ring in rings.iter_mut() {
        let m = ring.len();
        let mut out = Vec::with_capacity(m + 2);
        for i in 0..m {
            let (a, b) = (ring[(i + m - 1) % m].edge, ring[i].edge);
            let gap = speed[b] - speed[a];
            if parallel(lines, a, b) && gap.abs() > 1e-12 {
                let u = lines.n[a] * gap.signum();
                lines.u.push(u);
                lines.n.push(perp(u));
                lines.profile.push(None);
                lines.source.push(lines.source[a]);
                speed.push(0.0);
                out.push(WVert {
                    edge: lines.u.len() - 1,
                    ..ring[i]
                });
            }
            out.push(ring[i]);
        }
        *ring = out;
    }
}

fn velocity(lines: &Lines, speed: &[f64], i: usize, j: usize) -> Vec2 {
    let (ni, nj) = (lines.n[i], lines.n[j]);
    let det = cross2(ni, nj);
    if det.abs() < 1e-9 {
        if ni.dot(&nj) > 0.0 {
            return ni * (0.5 * (speed[i] + speed[j]));
        }
        return Vec2::zeros();
    }
    // Solve ni·v = wi, nj·v = wj.
    let (wi, wj) = (speed[i], speed[j]);
    Vec2::new((wi * nj.y - wj * ni.y) / det, (ni.x * wj - nj.x * wi) / det)
}

fn point_seg_param(p: Point2, a: Point2, b: Point2) -> (f64, f64) {
    let d = b - a;
    let l2 = d.norm_squared();
    if l2 == 0.0 {
        return ((p - a).norm(), 0.0);
    }
    let t = (p - a).dot(&d) / l2;
    let q = a + d * t.clamp(0.0, 1.0);
    ((p - q).norm(), t)
}

/// Sweeps `footprint` up to `top`, emitting wall/roof faces and the floor,
/// plus a cap over whatever wavefront remains at `top`.
pub(crate) fn sweep(footprint: &Polygon2, profiles: &[Profile], top: f64, em: &mut Emitter) -> Result<()> {
    let src: Vec<(Point2, Point2)> = footprint.edges().map(|(_, _, a, b)| (a, b)).collect();
    if profiles.len() != src.len() {
        return Err(Error::InvalidInput(format!(
            "{} profiles for {} footprint edges",
            profiles.len(),
            src.len()
        )));
    }
    let mut lines = Lines {
        u: src.iter().map(|(a, b)| (b - a).normalize()).collect(),
        n: src.iter().map(|(a, b)| perp((b - a).normalize())).collect(),
        profile: (0..src.len()).map(Some).collect(),
        source: (0..src.len()).collect(),
    };

    let mut rings: Vec<Vec<WVert>> = Vec::new();
    let mut k = 0;
    for ring in footprint.rings() {
        let r: Vec<WVert> = ring
            .iter()
            .map(|&p| {
                let v = WVert {
                    p,
                    edge: k,
                    id: em.vertex(p, 0.0),
                };
                k += 1;
                v
            })
            .collect();
        rings.push(r);
    }
    let floor: Vec<Vec<(Point2, u32)>> = rings
        .iter()
        .map(|r| r.iter().map(|v| (v.p, v.id)).collect())
        .collect();
    em.polygon(&floor, 0.0, true, FaceLabel::Floor, None)?;

    let mut h = 0.0f64;
    for _ in 0..MAX_STEPS {
        if rings.is_empty() {
            return Ok(());
        }
        if h >= top - 1e-12 {
            let cap: Vec<Vec<(Point2, u32)>> = rings
                .iter()
                .map(|r| r.iter().map(|v| (v.p, v.id)).collect())
                .collect();
            return em.polygon(&cap, h, false, FaceLabel::Cap, None);
        }

        let mut speed = lines.speeds(profiles, h);
        split_parallel(&mut rings, &mut lines, &mut speed);
        let vel: Vec<Vec<Vec2>> = rings
            .iter()
            .map(|r| {
                let m = r.len();
                (0..m)
                    .map(|i| velocity(&lines, &speed, r[(i + m - 1) % m].edge, r[i].edge))
                    .collect()
            })
            .collect();

        let mut h1 = top;
        let mut present: Vec<usize> = rings.iter().flatten().filter_map(|v| lines.profile[v.edge]).collect();
        present.sort_unstable();
        present.dedup();
        for &e in &present {
            for bp in profiles[e].breakpoints() {
                if bp > h + 1e-12 {
                    h1 = h1.min(bp);
                }
            }
        }
        for (r, ring) in rings.iter().enumerate() {
            let m = ring.len();
            for i in 0..m {
                let j = (i + 1) % m;
                let u = lines.u[ring[i].edge];
                let len = u.dot(&(ring[j].p - ring[i].p));
                let rate = u.dot(&(vel[r][j] - vel[r][i]));
                if rate < -1e-15 {
                    h1 = h1.min(h + (len / -rate).max(0.0));
                }
            }
        }
        for (r, ring) in rings.iter().enumerate() {
            for (i, v) in ring.iter().enumerate() {
                let vr = vel[r][i];
                for (s, other) in rings.iter().enumerate() {
                    let m = other.len();
                    for j in 0..m {
                        let jn = (j + 1) % m;
                        if s == r && (j == i || jn == i) || other[j].id == v.id || other[jn].id == v.id {
                            continue;
                        }
                        let e = other[j].edge;
                        let (n, u) = (lines.n[e], lines.u[e]);
                        let d0 = n.dot(&(v.p - other[j].p));
                        let rate = n.dot(&vr) - speed[e];
                        if d0 < -WELD || rate >= -1e-15 {
                            continue;
                        }
                        let t = (d0 / -rate).max(0.0);
                        let pa = other[j].p + vel[s][j] * t;
                        let pb = other[jn].p + vel[s][jn] * t;
                        let pr = v.p + vr * t;
                        let sp = u.dot(&(pr - pa));
                        let len = u.dot(&(pb - pa));
                        if sp > -WELD && sp < len + WELD {
                            h1 = h1.min(h + t);
                        }
                    }
                }
            }
        }
        let h1 = h1.max(h + 1e-9).min(top.max(h + 1e-9));
        let dt = h1 - h;

        // Advance and weld tops.
        let mut tops: Vec<Vec<WVert>> = Vec::with_capacity(rings.len());
        let mut placed: Vec<(Point2, u32)> = Vec::new();
        for (r, ring) in rings.iter().enumerate() {
            let mut out = Vec::with_capacity(ring.len());
            for (i, v) in ring.iter().enumerate() {
                let p = v.p + vel[r][i] * dt;
                if !p.x.is_finite() || !p.y.is_finite() {
                    return Err(Error::Extrusion {
                        location: v.p,
                        height: h,
                        reason: "vertex velocity diverged".into(),
                    });
                }
                let (p, id) = match placed.iter().find(|(q, _)| (q - p).norm() < WELD) {
                    Some(&hit) => hit,
                    None => {
                        let id = em.vertex(p, h1);
                        placed.push((p, id));
                        (p, id)
                    }
                };
                out.push(WVert { p, edge: v.edge, id });
            }
            tops.push(out);
        }

        // Faces for this step.
        let all_tops: Vec<WVert> = tops.iter().flatten().copied().collect();
        for (r, ring) in rings.iter().enumerate() {
            let m = ring.len();
            for i in 0..m {
                let j = (i + 1) % m;
                let (a0, b0) = (ring[i], ring[j]);
                let (a1, b1) = (tops[r][i], tops[r][j]);
                let mut extras: Vec<(f64, u32)> = Vec::new();
                for w in &all_tops {
                    if w.id == a1.id || w.id == b1.id || extras.iter().any(|x| x.1 == w.id) {
                        continue;
                    }
                    let (d, t) = point_seg_param(w.p, a1.p, b1.p);
                    if d < WELD && t > 0.0 && t < 1.0 {
                        extras.push((t, w.id));
                    }
                }
                extras.sort_by(|x, y| x.0.total_cmp(&y.0));
                let label = if speed[a0.edge] == 0.0 {
                    FaceLabel::Wall
                } else {
                    FaceLabel::Roof
                };
                // Fan from a0 over b0, b1, extras (descending), a1.
                let mut rim = vec![b0.id, b1.id];
                rim.extend(extras.iter().rev().map(|x| x.1));
                rim.push(a1.id);
                for w in rim.windows(2) {
                    em.triangle([a0.id, w[0], w[1]], label, Some(lines.source[a0.edge]));
                }
            }
        }

        rings = repair(tops);
        h = h1;
    }
    Err(Error::Extrusion {
        location: rings
            .first()
            .and_then(|r| r.first())
            .map_or(Point2::origin(), |v| v.p),
        height: h,
        reason: "step limit reached".into(),
    })
}

fn dedup_ring(ring: &mut Vec<WVert>) {
    let mut out: Vec<WVert> = Vec::with_capacity(ring.len());
    for v in ring.iter() {
        match out.last_mut() {
            Some(last) if last.id == v.id => last.edge = v.edge,
            _ => out.push(*v),
        }
    }
    // A run wrapping past the end merges into out[0], which already
    // carries the run's outgoing edge.
    while out.len() > 1 && out[0].id == out[out.len() - 1].id {
        out.pop();
    }
    *ring = out;
}

enum Contact {
    /// Vertex `(r, i)` touches the edge leaving `(s, j)` (or its start).
    At { r: usize, i: usize, s: usize, j: usize },
}

fn find_contact(rings: &[Vec<WVert>], handled: &HashSet<u32>) -> Option<Contact> {
    for (r, ring) in rings.iter().enumerate() {
        for (i, v) in ring.iter().enumerate() {
            if handled.contains(&v.id) {
                continue;
            }
            for (s, other) in rings.iter().enumerate() {
                let m = other.len();
                for j in 0..m {
                    let jn = (j + 1) % m;
                    if s == r && (j == i || jn == i) {
                        continue;
                    }
                    if other[j].id == v.id {
                        return Some(Contact::At { r, i, s, j });
                    }
                    if other[jn].id == v.id {
                        continue;
                    }
                    let (d, t) = point_seg_param(v.p, other[j].p, other[jn].p);
                    if d < WELD && t > 0.0 && t < 1.0 {
                        return Some(Contact::At { r, i, s, j });
                    }
                }
            }
        }
    }
    None
}

fn repair(mut rings: Vec<Vec<WVert>>) -> Vec<Vec<WVert>> {
    let mut handled: HashSet<u32> = HashSet::new();
    for ring in rings.iter_mut() {
        dedup_ring(ring);
    }
    rings.retain(|r| r.len() >= 3);
    while let Some(Contact::At { r, i, s, j }) = find_contact(&rings, &handled) {
        let v = rings[r][i];
        handled.insert(v.id);
        let p1 = WVert {
            p: v.p,
            edge: rings[s][j].edge,
            id: v.id,
        };
        let p2 = WVert {
            p: v.p,
            edge: v.edge,
            id: v.id,
        };
        if r == s {
            let ring = std::mem::take(&mut rings[r]);
            let m = ring.len();
            let mut a = vec![p1];
            let mut k = (j + 1) % m;
            while k != i {
                a.push(ring[k]);
                k = (k + 1) % m;
            }
            let mut b = vec![p2];
            let mut k = (i + 1) % m;
            loop {
                b.push(ring[k]);
                if k == j {
                    break;
                }
                k = (k + 1) % m;
            }
            rings[r] = a;
            rings.push(b);
        } else {
            let rr = std::mem::take(&mut rings[r]);
            let ss = std::mem::take(&mut rings[s]);
            let (mr, ms) = (rr.len(), ss.len());
            let mut merged = vec![p1];
            for k in 1..=ms {
                merged.push(ss[(j + k) % ms]);
            }
            merged.push(p2);
            for k in 1..mr {
                merged.push(rr[(i + k) % mr]);
            }
            rings[r] = merged;
        }
        for ring in rings.iter_mut() {
            dedup_ring(ring);
        }
        rings.retain(|r| r.len() >= 3);
    }
    rings.retain(|r| {
        let pts: Vec<Point2> = r.iter().map(|v| v.p).collect();
        ring_signed_area(&pts).abs() > 1e-12
    });
    rings
}
