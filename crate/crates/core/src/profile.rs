//! Per-edge wall/roof profiles.
//!
//! For each footprint edge the mesh is cut by vertical planes perpendicular
//! to the edge at regular stations. From each cut a monotone skyline is
//! climbed inward; the skylines are resampled on a height grid, merged by
//! median, and fitted to a vertical wall followed by straight roof pitches.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{
    douglas_peucker, perp, slice_mesh_vertical, unit_normal, Point2, Polygon2, TriMesh, Vec2,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Quality {
    Simple,
    #[default]
    Moderate,
    High,
}

impl Quality {
    pub fn tolerance(self) -> Option<f64> {
        match self {
            Quality::Simple => None,
            Quality::Moderate => Some(0.5),
            Quality::High => Some(0.05),
        }
    }
}

impl std::str::FromStr for Quality {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "simple" => Ok(Quality::Simple),
            "moderate" => Ok(Quality::Moderate),
            "high" => Ok(Quality::High),
            _ => Err(Error::Parse(format!("unknown quality `{s}`"))),
        }
    }
}

impl std::fmt::Display for Quality {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Quality::Simple => "simple",
            Quality::Moderate => "moderate",
            Quality::High => "high",
        })
    }
}

/// Monotone polyline of `(inward offset, height)` points from `(0, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    points: Vec<Point2>,
    pub quality: Quality,
}

impl Profile {
    /// Checks: starts at the origin, at least two points, heights strictly
    /// increasing, offsets non-decreasing.
    pub fn new(points: Vec<Point2>, quality: Quality) -> Result<Profile> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("profile needs two points".into()));
        }
        if points[0] != Point2::origin() {
            return Err(Error::InvalidInput("profile must start at (0, 0)".into()));
        }
        for w in points.windows(2) {
            if !(w[1].y > w[0].y) || w[1].x < w[0].x || !w[1].x.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "profile not monotone at ({}, {})",
                    w[1].x, w[1].y
                )));
            }
        }
        Ok(Profile { points, quality })
    }

    pub fn vertical(height: f64) -> Profile {
        Profile::new(
            vec![Point2::origin(), Point2::new(0.0, height)],
            Quality::Simple,
        )
        .expect("positive height")
    }

    /// Straight pitch at `angle` from horizontal, from the ground.
    pub fn pitched(angle_deg: f64, height: f64) -> Profile {
        let run = height / angle_deg.to_radians().tan();
        Profile::new(
            vec![Point2::origin(), Point2::new(run, height)],
            Quality::High,
        )
        .expect("positive height")
    }

    /// Vertical to `wall`, then `angle` from horizontal for `run` meters.
    pub fn wall_then_pitch(wall: f64, angle_deg: f64, run: f64) -> Profile {
        let mut pts = vec![Point2::origin()];
        if wall > 0.0 {
            pts.push(Point2::new(0.0, wall));
        }
        pts.push(Point2::new(run, wall + run * angle_deg.to_radians().tan()));
        Profile::new(pts, Quality::High).expect("positive pitch and run")
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn height(&self) -> f64 {
        self.points.last().unwrap().y
    }

    /// Top of the leading vertical run.
    pub fn wall_height(&self) -> f64 {
        self.points
            .iter()
            .take_while(|p| p.x == 0.0)
            .last()
            .map_or(0.0, |p| p.y)
    }

    /// Inward speed (offset per unit height) of the segment active just
    /// above `h`; beyond the top the last segment's speed continues.
    pub fn speed_at(&self, h: f64) -> f64 {
        let seg = self
            .points
            .windows(2)
            .find(|w| h < w[1].y)
            .unwrap_or_else(|| &self.points[self.points.len() - 2..]);
        (seg[1].x - seg[0].x) / (seg[1].y - seg[0].y)
    }

    /// Interior vertex heights, where the speed changes.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.points[1..self.points.len() - 1].iter().map(|p| p.y)
    }

    /// Offset at height `h` (extrapolating the last segment past the top).
    pub fn offset_at(&self, h: f64) -> f64 {
        let seg = self
            .points
            .windows(2)
            .find(|w| h <= w[1].y)
            .unwrap_or_else(|| &self.points[self.points.len() - 2..]);
        seg[0].x + (h - seg[0].y) * (seg[1].x - seg[0].x) / (seg[1].y - seg[0].y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileParams {
    pub spacing: f64,
    /// Climb window: how far inward and how far back a next point may be.
    pub climb_reach: f64,
    pub climb_back: f64,
    /// Largest height jump accepted in one climb step.
    pub max_step: f64,
    /// Slice triangles whose normal points inward more than this (cosine)
    /// are the far side of something and are ignored.
    pub facing: f64,
    pub densify: f64,
    pub resample: f64,
    /// Fraction of stations that must reach a height for it to be kept.
    pub coverage: f64,
    pub wall_offset: f64,
    /// Degrees; roof segments flatter than this end the profile.
    pub flat_pitch: f64,
    pub min_roof_rise: f64,
    pub quality: Quality,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams {
            spacing: 1.0,
            climb_reach: 1.5,
            climb_back: 0.15,
            max_step: 1.0,
            facing: 0.05,
            densify: 0.1,
            resample: 0.1,
            coverage: 0.5,
            wall_offset: 0.15,
            flat_pitch: 10.0,
            min_roof_rise: 0.2,
            quality: Quality::Moderate,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyProfile {
    pub station: Point2,
    /// `(offset, height)`, heights strictly increasing; empty when the
    /// slice found nothing to climb.
    pub points: Vec<Point2>,
}

impl NoisyProfile {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn top(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.y)
    }

    fn offset_at(&self, h: f64) -> Option<f64> {
        let p = &self.points;
        if p.is_empty() || h > p[p.len() - 1].y || h < p[0].y {
            return None;
        }
        let i = p.partition_point(|q| q.y < h);
        if i == 0 {
            return Some(p[0].x);
        }
        let (a, b) = (p[i - 1], p[i]);
        Some(a.x + (h - a.y) / (b.y - a.y) * (b.x - a.x))
    }
}

pub fn station_count(length: f64, spacing: f64) -> usize {
    ((length / spacing).floor() as usize).max(1)
}

/// Skylines at stations along edge `a → b`; the footprint interior is on
/// the left of the edge.
pub fn extract_noisy_profiles(mesh: &TriMesh, a: Point2, b: Point2, params: &ProfileParams) -> Vec<NoisyProfile> {
    assert!(params.spacing > 0.0, "station spacing must be positive");
    let d = b - a;
    let len = d.norm();
    if len == 0.0 {
        return Vec::new();
    }
    let inward = perp(d / len);
    let n = station_count(len, params.spacing);
    (0..n)
        .map(|i| {
            let station = a + d * ((i as f64 + 0.5) / n as f64);
            NoisyProfile {
                station,
                points: climb(mesh, station, inward, params),
            }
        })
        .collect()
}

fn climb(mesh: &TriMesh, station: Point2, inward: Vec2, params: &ProfileParams) -> Vec<Point2> {
    let mut pts: Vec<Point2> = Vec::new();
    for s in slice_mesh_vertical(mesh, station, inward) {
        let t = s.source.expect("slice carries its triangle").triangle;
        let nrm = unit_normal(mesh, t);
        if nrm.x * inward.x + nrm.y * inward.y > params.facing {
            continue;
        }
        let k = ((s.length() / params.densify).ceil() as usize).max(1);
        for j in 0..=k {
            pts.push(s.a + (s.b - s.a) * (j as f64 / k as f64));
        }
    }
    pts.retain(|p| p.x >= -params.climb_back && p.y >= 0.0);
    pts.sort_by(|p, q| p.y.total_cmp(&q.y).then(p.x.total_cmp(&q.x)));

    let Some(start) = pts.iter().position(|p| p.x <= params.climb_reach) else {
        return Vec::new();
    };
    let mut out = vec![pts[start]];
    let mut i = start;
    loop {
        let cur = pts[i];
        let next = pts[i + 1..]
            .iter()
            .take_while(|p| p.y - cur.y <= params.max_step)
            .position(|p| {
                p.y > cur.y && p.x >= cur.x - params.climb_back && p.x <= cur.x + params.climb_reach
            });
        match next {
            Some(k) => {
                i += 1 + k;
                out.push(pts[i]);
            }
            None => break,
        }
    }
    if out[0].y > 0.0 {
        // Nothing visible below the first hit: assume a hidden wall on the
        // edge line (e.g. a party wall against a taller neighbor).
        out[0].x = out[0].x.min(0.0);
        out.insert(0, Point2::new(out[0].x, 0.0));
    }
    out
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median-merges station skylines and fits a wall-then-pitches profile at
/// high quality.
pub fn merge_clean_profile(noisy: &[NoisyProfile], params: &ProfileParams) -> Result<Profile> {
    let live: Vec<&NoisyProfile> = noisy.iter().filter(|n| !n.is_empty()).collect();
    if live.is_empty() {
        return Err(Error::NoProfileSamples);
    }
    let need = ((live.len() as f64) * params.coverage).ceil().max(1.0) as usize;

    let mut raw: Vec<Point2> = Vec::new();
    for k in 0.. {
        let h = k as f64 * params.resample;
        let mut offs: Vec<f64> = live
            .iter()
            .filter(|n| n.top() >= h - 1e-9)
            .filter_map(|n| n.offset_at(h.min(n.top())))
            .collect();
        if offs.len() < need {
            break;
        }
        raw.push(Point2::new(median(&mut offs), h));
    }
    if raw.len() < 2 {
        return Err(Error::NoProfileSamples);
    }
    let mut run = 0.0f64;
    for p in raw.iter_mut() {
        run = run.max(p.x.max(0.0));
        p.x = run;
    }

    let wall_idx = raw
        .iter()
        .position(|p| p.x >= params.wall_offset)
        .map_or(raw.len() - 1, |i| i.saturating_sub(1));
    let mut wall = raw[wall_idx].y;
    // The resampled wall top is quantized. Where the roof starts flat, the
    // median height of its first meter is a better eave.
    let mut near: Vec<f64> = live
        .iter()
        .flat_map(|n| n.points.iter())
        .filter(|p| p.x >= params.wall_offset && p.x <= params.wall_offset + 1.0)
        .map(|p| p.y)
        .collect();
    if !near.is_empty() {
        let est = median(&mut near);
        if est > 0.0 && (est - wall).abs() <= 2.0 * params.resample + 1e-9 {
            wall = est;
        }
    }
    let mut roof: Vec<Point2> = raw[wall_idx + 1..].to_vec();

    // Re-seat the wall top where the first roof pitch meets offset 0.
    if roof.len() >= 2 {
        let fit = douglas_peucker(&roof, Quality::High.tolerance().unwrap());
        let (q0, q1) = (fit[0], fit[1]);
        if q1.x > q0.x {
            let h0 = q0.y - q0.x * (q1.y - q0.y) / (q1.x - q0.x);
            if h0 > 0.0 && (h0 - wall).abs() <= 2.0 * params.resample + 1e-9 && h0 < q0.y {
                wall = h0;
            }
        }
    }
    if wall <= 0.0 {
        wall = roof.first().map_or(raw[raw.len() - 1].y, |p| p.y.min(params.resample));
        roof.retain(|p| p.y > wall);
    }
    roof.retain(|p| p.y > wall);

    let mut pts = vec![Point2::origin(), Point2::new(0.0, wall)];
    pts.extend(roof);
    let pts = truncate_flat(pts, wall, params);
    let p = Profile::new(pts, Quality::High)?;
    Ok(simplify_profile(&p, Quality::High))
}

/// Cuts at the first roof segment flatter than `flat_pitch`; drops the roof
/// when what remains rises less than `min_roof_rise`.
fn truncate_flat(pts: Vec<Point2>, wall: f64, params: &ProfileParams) -> Vec<Point2> {
    let first_roof = pts.iter().position(|p| p.y >= wall).unwrap_or(1);
    let simplified = {
        let mut s = vec![pts[first_roof]];
        s.extend(douglas_peucker(&pts[first_roof..], Quality::High.tolerance().unwrap()).into_iter().skip(1));
        s
    };
    let flat = params.flat_pitch.to_radians();
    let mut keep_to = simplified.len() - 1;
    for (i, w) in simplified.windows(2).enumerate() {
        let d = w[1] - w[0];
        if d.y.atan2(d.x) < flat {
            keep_to = i;
            break;
        }
    }
    let top = simplified[keep_to].y;
    let mut out: Vec<Point2> = pts[..=first_roof].to_vec();
    if top - wall < params.min_roof_rise {
        return out;
    }
    out.extend(pts[first_roof + 1..].iter().filter(|p| p.y <= top + 1e-12));
    out
}

/// Reduces a profile to the point budget of a quality level. The wall run
/// is kept; Douglas-Peucker applies above it.
pub fn simplify_profile(p: &Profile, quality: Quality) -> Profile {
    let Some(tol) = quality.tolerance() else {
        return Profile {
            points: vec![Point2::origin(), Point2::new(0.0, p.height())],
            quality,
        };
    };
    let pts = p.points();
    let w = pts.iter().take_while(|q| q.x == 0.0).count().max(1) - 1;
    let mut out: Vec<Point2> = pts[..w].to_vec();
    out.extend(douglas_peucker(&pts[w..], tol));
    if out.len() < 2 {
        out = pts.to_vec();
    }
    Profile { points: out, quality }
}

/// Profile for edge `a → b`, falling back to a vertical wall of
/// `fallback_height` when no station sees the mesh.
pub fn fit_edge_profile(mesh: &TriMesh, a: Point2, b: Point2, fallback_height: f64, params: &ProfileParams) -> Profile {
    let noisy = extract_noisy_profiles(mesh, a, b, params);
    match merge_clean_profile(&noisy, params) {
        Ok(p) => simplify_profile(&p, params.quality),
        Err(_) => simplify_profile(&Profile::vertical(fallback_height.max(1e-3)), params.quality),
    }
}

/// Profiles for every edge of `footprint`, in [`Polygon2::edges`] order.
pub fn fit_footprint_profiles(mesh: &TriMesh, footprint: &Polygon2, params: &ProfileParams) -> Vec<Profile> {
    let fallback = mesh.max_height().unwrap_or(1.0);
    let edges: Vec<(Point2, Point2)> = footprint.edges().map(|(_, _, a, b)| (a, b)).collect();
    edges
        .par_iter()
        .map(|&(a, b)| fit_edge_profile(mesh, a, b, fallback, params))
        .collect()
}
