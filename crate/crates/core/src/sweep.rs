//! Sweep-edge extraction.
//!
//! The mesh is cut by horizontal planes at a fixed interval. Each level's
//! cut is chained and simplified into straight contours, which are snapped
//! to nearby GIS edge directions and clustered by direction and offset. A
//! cluster that carries enough wall area (`length × interval`, summed over
//! members) becomes a sweep-edge: the ground-plane segment spanned by its
//! members along the cluster line.

use rayon::prelude::*;

use crate::geometry::{
    angle_diff_mod_pi, chain_segments, douglas_peucker, douglas_peucker_closed, line_angle, perp,
    point_segment_distance, slice_mesh_horizontal, unit_from_angle, Aabb2, Point2, Polygon2,
    Segment2, TriMesh, Vec2, MIN_SEGMENT_LENGTH, SNAP_TOLERANCE,
};

/// Tunables for contour extraction and clustering. Angles in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepParams {
    pub interval: f64,
    pub theta_snap: f64,
    pub d_snap: f64,
    pub theta_tol: f64,
    pub d_tol: f64,
    pub gamma: f64,
    /// Douglas-Peucker tolerance applied to each level's chained cut.
    pub contour_simplify: f64,
    /// Simplified contour pieces shorter than this are ignored.
    pub min_contour_length: f64,
    /// Sweep edges are clipped to the GIS bounds dilated by this much.
    pub clip_margin: f64,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            interval: 0.2,
            theta_snap: 10f64.to_radians(),
            d_snap: 1.0,
            theta_tol: 15f64.to_radians(),
            d_tol: 0.5,
            gamma: 10.0,
            contour_simplify: 0.15,
            min_contour_length: 0.3,
            clip_margin: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceContour {
    pub segment: Segment2,
    pub level: f64,
    pub length: f64,
}

impl SliceContour {
    fn new(a: Point2, b: Point2, level: f64) -> Self {
        SliceContour {
            segment: Segment2::new(a, b),
            level,
            length: (b - a).norm(),
        }
    }

    pub fn angle(&self) -> f64 {
        line_angle(self.segment.b - self.segment.a)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionCluster {
    /// Line angle in `[0, pi)`.
    pub direction: f64,
    /// Signed distance of the supporting line from the origin along its
    /// left normal.
    pub offset: f64,
    pub members: Vec<SliceContour>,
    pub supported_area: f64,
}

impl DirectionCluster {
    pub fn unit_direction(&self) -> Vec2 {
        unit_from_angle(self.direction)
    }

    pub fn normal(&self) -> Vec2 {
        perp(self.unit_direction())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEdge {
    pub segment: Segment2,
    pub supported_area: f64,
    pub cluster: usize,
}

/// Slices at `interval, 2·interval, …` up to the mesh top, chaining and
/// simplifying each level's cut into straight contour pieces.
pub fn extract_contours(mesh: &TriMesh, params: &SweepParams) -> Vec<SliceContour> {
    let Some(top) = mesh.max_height() else {
        return Vec::new();
    };
    assert!(params.interval > 0.0, "slice interval must be positive");
    let levels: Vec<f64> = (1..)
        .map(|k| k as f64 * params.interval)
        .take_while(|&z| z <= top)
        .collect();
    levels
        .par_iter()
        .map(|&z| contours_at_level(mesh, z, params))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn contours_at_level(mesh: &TriMesh, z: f64, params: &SweepParams) -> Vec<SliceContour> {
    let segs = slice_mesh_horizontal(mesh, z);
    let mut out = Vec::new();
    for chain in chain_segments(&segs, SNAP_TOLERANCE) {
        let pts = if chain.closed {
            let mut s = douglas_peucker_closed(&chain.points, params.contour_simplify);
            if let Some(&first) = s.first() {
                s.push(first);
            }
            s
        } else {
            douglas_peucker(&chain.points, params.contour_simplify)
        };
        for w in pts.windows(2) {
            let c = SliceContour::new(w[0], w[1], z);
            if c.length >= params.min_contour_length.max(MIN_SEGMENT_LENGTH) {
                out.push(c);
            }
        }
    }
    out
}

/// Rotates contours about their midpoints onto the direction of a nearby
/// GIS edge. Position is not snapped.
pub fn align_to_gis(
    contours: &[SliceContour],
    gis: &[Polygon2],
    theta_snap: f64,
    d_snap: f64,
) -> Vec<SliceContour> {
    let gis_edges: Vec<(Point2, Point2, f64)> = gis
        .iter()
        .flat_map(|p| p.edges().map(|(_, _, a, b)| (a, b, line_angle(b - a))))
        .filter(|(a, b, _)| (b - a).norm() > MIN_SEGMENT_LENGTH)
        .collect();
    contours
        .iter()
        .map(|c| {
            let ang = c.angle();
            let mid = c.segment.midpoint();
            let best = gis_edges
                .iter()
                .filter_map(|&(a, b, ga)| {
                    let da = angle_diff_mod_pi(ang, ga);
                    let dd = point_segment_distance(mid, a, b);
                    (da <= theta_snap && dd <= d_snap).then_some((dd, da, b - a))
                })
                .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
            match best {
                Some((_, _, dir)) => {
                    let own = c.segment.b - c.segment.a;
                    let mut u = dir.normalize();
                    if u.dot(&own) < 0.0 {
                        u = -u;
                    }
                    let h = 0.5 * c.length;
                    SliceContour {
                        segment: Segment2::new(mid - u * h, mid + u * h),
                        level: c.level,
                        length: c.length,
                    }
                }
                None => c.clone(),
            }
        })
        .collect()
}

struct Accum {
    doubled: Vec2,
    weighted_mid: Vec2,
    weight: f64,
    members: Vec<SliceContour>,
}

impl Accum {
    fn direction(&self) -> f64 {
        let a = 0.5 * self.doubled.y.atan2(self.doubled.x);
        line_angle(unit_from_angle(a))
    }

    fn offset(&self) -> f64 {
        perp(unit_from_angle(self.direction())).dot(&(self.weighted_mid / self.weight))
    }

    fn add(&mut self, c: &SliceContour) {
        let a = 2.0 * c.angle();
        self.doubled += Vec2::new(a.cos(), a.sin()) * c.length;
        self.weighted_mid += c.segment.midpoint().coords * c.length;
        self.weight += c.length;
        self.members.push(c.clone());
    }
}

/// Greedy clustering by direction (mod pi) and supporting-line offset.
/// Contours are ordered by `(level, length desc, midpoint)` first, so the
/// outcome is independent of input order.
pub fn cluster_contours(
    contours: &[SliceContour],
    theta_tol: f64,
    d_tol: f64,
    interval: f64,
) -> Vec<DirectionCluster> {
    let mut sorted: Vec<&SliceContour> = contours.iter().collect();
    sorted.sort_by(|a, b| {
        a.level
            .total_cmp(&b.level)
            .then(b.length.total_cmp(&a.length))
            .then(a.segment.midpoint().x.total_cmp(&b.segment.midpoint().x))
            .then(a.segment.midpoint().y.total_cmp(&b.segment.midpoint().y))
    });

    let mut clusters: Vec<Accum> = Vec::new();
    for c in sorted {
        let ang = c.angle();
        let mid = c.segment.midpoint();
        let hit = clusters.iter_mut().find(|k| {
            let dir = k.direction();
            angle_diff_mod_pi(ang, dir) <= theta_tol
                && (perp(unit_from_angle(dir)).dot(&mid.coords) - k.offset()).abs() <= d_tol
        });
        match hit {
            Some(k) => k.add(c),
            None => {
                let mut k = Accum {
                    doubled: Vec2::zeros(),
                    weighted_mid: Vec2::zeros(),
                    weight: 0.0,
                    members: Vec::new(),
                };
                k.add(c);
                clusters.push(k);
            }
        }
    }

    // Early members can tilt a young cluster away from its wall; fuse any
    // pair that agrees within tolerance once all contours are placed.
    loop {
        let mut fused = false;
        'outer: for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (a, b) = (&clusters[i], &clusters[j]);
                let (big, small) = if a.weight >= b.weight { (a, b) } else { (b, a) };
                let dir = big.direction();
                let n = perp(unit_from_angle(dir));
                let off_small = n.dot(&(small.weighted_mid / small.weight));
                if angle_diff_mod_pi(small.direction(), dir) <= theta_tol
                    && (off_small - big.offset()).abs() <= d_tol
                {
                    let b = clusters.remove(j);
                    let a = &mut clusters[i];
                    a.doubled += b.doubled;
                    a.weighted_mid += b.weighted_mid;
                    a.weight += b.weight;
                    a.members.extend(b.members);
                    fused = true;
                    break 'outer;
                }
            }
        }
        if !fused {
            break;
        }
    }

    clusters
        .into_iter()
        .map(|k| DirectionCluster {
            direction: k.direction(),
            offset: k.offset(),
            supported_area: k.members.iter().map(|m| m.length).sum::<f64>() * interval,
            members: k.members,
        })
        .collect()
}

/// Drops clusters below `gamma` m² and projects the rest onto the ground
/// plane as the hull of their members along the cluster line.
pub fn sweep_edges_from_clusters(clusters: &[DirectionCluster], gamma: f64) -> Vec<SweepEdge> {
    clusters
        .iter()
        .enumerate()
        .filter(|(_, c)| c.supported_area >= gamma)
        .filter_map(|(id, c)| {
            let u = c.unit_direction();
            let base = Point2::from(c.normal() * c.offset);
            let (lo, hi) = c
                .members
                .iter()
                .flat_map(|m| [m.segment.a, m.segment.b])
                .map(|p| p.coords.dot(&u))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
                    (lo.min(t), hi.max(t))
                });
            (hi - lo > MIN_SEGMENT_LENGTH).then(|| SweepEdge {
                segment: Segment2::new(base + u * lo, base + u * hi),
                supported_area: c.supported_area,
                cluster: id,
            })
        })
        .collect()
}

/// Clips each sweep edge to the union hull of the GIS bounding boxes
/// dilated by `margin`. Edges missing every box are dropped; with no GIS
/// input, edges pass through unchanged.
pub fn clip_sweep_edges(edges: Vec<SweepEdge>, gis: &[Polygon2], margin: f64) -> Vec<SweepEdge> {
    if gis.is_empty() {
        return edges;
    }
    let boxes: Vec<Aabb2> = gis.iter().map(|p| p.bbox().dilate(margin)).collect();
    edges
        .into_iter()
        .filter_map(|mut e| {
            let (a, b) = (e.segment.a, e.segment.b);
            let (lo, hi) = boxes
                .iter()
                .filter_map(|bx| clip_param(a, b, bx))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (t0, t1)| {
                    (lo.min(t0), hi.max(t1))
                });
            if hi <= lo {
                return None;
            }
            let d = b - a;
            e.segment = Segment2::new(a + d * lo, a + d * hi);
            (e.segment.length() > MIN_SEGMENT_LENGTH).then_some(e)
        })
        .collect()
}

/// Liang-Barsky parameter interval of segment `a→b` inside `bx`.
fn clip_param(a: Point2, b: Point2, bx: &Aabb2) -> Option<(f64, f64)> {
    let d = b - a;
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for (p, q) in [
        (-d.x, a.x - bx.min.x),
        (d.x, bx.max.x - a.x),
        (-d.y, a.y - bx.min.y),
        (d.y, bx.max.y - a.y),
    ] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                t0 = t0.max(r);
            } else {
                t1 = t1.min(r);
            }
        }
    }
    (t0 < t1).then_some((t0, t1))
}

/// Full extraction: contours, GIS alignment, clustering, γ filter, clip.
/// Returns the clusters alongside so callers can inspect or re-filter them.
pub fn extract_sweep_edges(
    mesh: &TriMesh,
    gis: &[Polygon2],
    params: &SweepParams,
) -> (Vec<DirectionCluster>, Vec<SweepEdge>) {
    let contours = extract_contours(mesh, params);
    let aligned = align_to_gis(&contours, gis, params.theta_snap, params.d_snap);
    let clusters = cluster_contours(&aligned, params.theta_tol, params.d_tol, params.interval);
    let edges = sweep_edges_from_clusters(&clusters, params.gamma);
    let edges = clip_sweep_edges(edges, gis, params.clip_margin);
    (clusters, edges)
}
