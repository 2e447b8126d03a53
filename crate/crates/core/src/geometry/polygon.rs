use super::{cross2, Point2, Vec2};
use crate::error::{Error, Result};

/// Shoelace signed area; positive for counter-clockwise rings.
pub fn ring_signed_area(ring: &[Point2]) -> f64 {
    let n = ring.len();
    if n < 3 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        s += a.x * b.y - b.x * a.y;
    }
    0.5 * s
}

/// Area centroid of a ring; falls back to the vertex mean for degenerate rings.
pub fn ring_centroid(ring: &[Point2]) -> Point2 {
    let n = ring.len();
    let a = ring_signed_area(ring);
    if a.abs() < 1e-15 {
        let sum = ring.iter().fold(Vec2::zeros(), |s, p| s + p.coords);
        return Point2::from(sum / n.max(1) as f64);
    }
    // Shift to the first vertex to keep the products well conditioned.
    let o = ring[0];
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let p = ring[i] - o;
        let q = ring[(i + 1) % n] - o;
        let c = p.x * q.y - q.x * p.y;
        cx += (p.x + q.x) * c;
        cy += (p.y + q.y) * c;
    }
    Point2::new(o.x + cx / (6.0 * a), o.y + cy / (6.0 * a))
}

/// Crossing-number point-in-ring test. Boundary points are unspecified.
pub fn point_in_ring(p: Point2, ring: &[Point2]) -> bool {
    let n = ring.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let a = ring[i];
        let b = ring[j];
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

pub fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Distance between the closest points of two segments.
pub fn segment_segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> f64 {
    let ab = b - a;
    let cd = d - c;
    let o1 = cross2(ab, c - a);
    let o2 = cross2(ab, d - a);
    let o3 = cross2(cd, a - c);
    let o4 = cross2(cd, b - c);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0))
        && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0))
    {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Axis-aligned 2D box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb2 {
    pub min: Point2,
    pub max: Point2,
}

impl Aabb2 {
    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a Point2>) -> Option<Aabb2> {
        let mut it = pts.into_iter();
        let first = *it.next()?;
        Some(it.fold(
            Aabb2 {
                min: first,
                max: first,
            },
            |b, p| Aabb2 {
                min: b.min.inf(p),
                max: b.max.sup(p),
            },
        ))
    }

    pub fn union(&self, o: &Aabb2) -> Aabb2 {
        Aabb2 {
            min: self.min.inf(&o.min),
            max: self.max.sup(&o.max),
        }
    }

    pub fn dilate(&self, d: f64) -> Aabb2 {
        Aabb2 {
            min: self.min - Vec2::new(d, d),
            max: self.max + Vec2::new(d, d),
        }
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diameter(&self) -> f64 {
        (self.max - self.min).norm()
    }

    pub fn to_polygon(&self) -> Polygon2 {
        Polygon2 {
            outer: vec![
                self.min,
                Point2::new(self.max.x, self.min.y),
                self.max,
                Point2::new(self.min.x, self.max.y),
            ],
            holes: Vec::new(),
        }
    }
}

/// Planar polygon: counter-clockwise outer ring plus clockwise holes.
/// Rings are stored open (the closing edge is implicit).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2 {
    pub outer: Vec<Point2>,
    pub holes: Vec<Vec<Point2>>,
}

impl Polygon2 {
    /// Normalizes orientation and validates ring sizes and area.
    pub fn new(outer: Vec<Point2>, holes: Vec<Vec<Point2>>) -> Result<Self> {
        let outer = normalize_ring(outer, true)?;
        let holes = holes
            .into_iter()
            .map(|h| normalize_ring(h, false))
            .collect::<Result<Vec<_>>>()?;
        for h in &holes {
            if !h.iter().all(|p| point_in_ring(*p, &outer) || on_ring(*p, &outer)) {
                return Err(Error::InvalidInput("hole not inside outer ring".into()));
            }
        }
        Ok(Polygon2 { outer, holes })
    }

    pub fn rect(min: Point2, max: Point2) -> Self {
        Aabb2 { min, max }.to_polygon()
    }

    /// Outer ring followed by holes.
    pub fn rings(&self) -> impl Iterator<Item = &Vec<Point2>> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    /// Every directed edge `(ring, index, a, b)` with the interior on its left.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, Point2, Point2)> + '_ {
        self.rings().enumerate().flat_map(|(r, ring)| {
            let n = ring.len();
            (0..n).map(move |i| (r, i, ring[i], ring[(i + 1) % n]))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.rings().map(|r| r.len()).sum()
    }

    pub fn area(&self) -> f64 {
        ring_signed_area(&self.outer) + self.holes.iter().map(|h| ring_signed_area(h)).sum::<f64>()
    }

    pub fn contains(&self, p: Point2) -> bool {
        point_in_ring(p, &self.outer) && !self.holes.iter().any(|h| point_in_ring(p, h))
    }

    pub fn boundary_distance(&self, p: Point2) -> f64 {
        self.edges()
            .map(|(_, _, a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// True when `p` is inside or within `d` of the polygon.
    pub fn contains_dilated(&self, p: Point2, d: f64) -> bool {
        self.contains(p) || self.boundary_distance(p) <= d
    }

    pub fn bbox(&self) -> Aabb2 {
        Aabb2::from_points(&self.outer).expect("polygon has vertices")
    }

    /// Area-weighted centroid accounting for holes.
    pub fn centroid(&self) -> Point2 {
        let mut acc = Vec2::zeros();
        let mut total = 0.0;
        for r in self.rings() {
            let a = ring_signed_area(r);
            acc += ring_centroid(r).coords * a;
            total += a;
        }
        if total.abs() < 1e-15 {
            return ring_centroid(&self.outer);
        }
        Point2::from(acc / total)
    }

    /// A point strictly inside the polygon (centroid when it qualifies).
    pub fn interior_point(&self) -> Point2 {
        let c = self.centroid();
        if self.contains(c) {
            return c;
        }
        // Scanline through the bbox middle: midpoint of the widest inside span.
        let bb = self.bbox();
        for frac in [0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875] {
            let y = bb.min.y + frac * bb.height();
            let mut xs: Vec<f64> = Vec::new();
            for (_, _, a, b) in self.edges() {
                if (a.y > y) != (b.y > y) {
                    xs.push(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x));
                }
            }
            xs.sort_by(f64::total_cmp);
            let best = xs
                .chunks_exact(2)
                .max_by(|u, v| (u[1] - u[0]).total_cmp(&(v[1] - v[0])));
            if let Some(span) = best {
                let p = Point2::new(0.5 * (span[0] + span[1]), y);
                if self.contains(p) {
                    return p;
                }
            }
        }
        c
    }

    pub fn translated(&self, d: Vec2) -> Polygon2 {
        Polygon2 {
            outer: self.outer.iter().map(|p| p + d).collect(),
            holes: self
                .holes
                .iter()
                .map(|h| h.iter().map(|p| p + d).collect())
                .collect(),
        }
    }

    pub fn map_points(&self, f: impl Fn(Point2) -> Point2) -> Polygon2 {
        Polygon2 {
            outer: self.outer.iter().map(|&p| f(p)).collect(),
            holes: self
                .holes
                .iter()
                .map(|h| h.iter().map(|&p| f(p)).collect())
                .collect(),
        }
    }

    /// Removes vertices whose incident edges turn by less than `angle_tol`
    /// radians, and duplicate vertices.
    pub fn merge_collinear(&self, angle_tol: f64) -> Polygon2 {
        Polygon2 {
            outer: merge_collinear_ring(&self.outer, angle_tol),
            holes: self
                .holes
                .iter()
                .map(|h| merge_collinear_ring(h, angle_tol))
                .filter(|h| h.len() >= 3)
                .collect(),
        }
    }
}

fn on_ring(p: Point2, ring: &[Point2]) -> bool {
    let n = ring.len();
    (0..n).any(|i| point_segment_distance(p, ring[i], ring[(i + 1) % n]) < 1e-9)
}

fn normalize_ring(mut ring: Vec<Point2>, ccw: bool) -> Result<Vec<Point2>> {
    if ring.len() >= 2 && ring.first() == ring.last() {
        ring.pop();
    }
    ring.dedup_by(|a, b| (*a - *b).norm() < 1e-12);
    if ring.len() < 3 {
        return Err(Error::InvalidInput("ring needs at least 3 vertices".into()));
    }
    let a = ring_signed_area(&ring);
    if a.abs() < 1e-12 {
        return Err(Error::InvalidInput("ring has zero area".into()));
    }
    if (a > 0.0) != ccw {
        ring.reverse();
    }
    Ok(ring)
}

pub(crate) fn merge_collinear_ring(ring: &[Point2], angle_tol: f64) -> Vec<Point2> {
    let mut pts: Vec<Point2> = ring.to_vec();
    pts.dedup_by(|a, b| (*a - *b).norm() < 1e-9);
    while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() < 1e-9 {
        pts.pop();
    }
    let mut changed = true;
    while changed && pts.len() > 3 {
        changed = false;
        let n = pts.len();
        for i in 0..n {
            let prev = pts[(i + n - 1) % n];
            let cur = pts[i];
            let next = pts[(i + 1) % n];
            let u = cur - prev;
            let v = next - cur;
            let turn = cross2(u, v).atan2(u.dot(&v)).abs();
            if turn < angle_tol {
                pts.remove(i);
                changed = true;
                break;
            }
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq(x0: f64, y0: f64, s: f64) -> Vec<Point2> {
        vec![
            Point2::new(x0, y0),
            Point2::new(x0 + s, y0),
            Point2::new(x0 + s, y0 + s),
            Point2::new(x0, y0 + s),
        ]
    }

    #[test]
    fn orientation_is_normalized() {
        let mut cw = sq(0.0, 0.0, 4.0);
        cw.reverse();
        let p = Polygon2::new(cw, vec![sq(1.0, 1.0, 1.0)]).unwrap();
        assert!(ring_signed_area(&p.outer) > 0.0);
        assert!(ring_signed_area(&p.holes[0]) < 0.0);
        assert!((p.area() - 15.0).abs() < 1e-12);
        assert!(!p.contains(Point2::new(1.5, 1.5)));
        assert!(p.contains(Point2::new(3.0, 3.0)));
    }

    #[test]
    fn hole_outside_is_rejected() {
        assert!(Polygon2::new(sq(0.0, 0.0, 1.0), vec![sq(5.0, 5.0, 1.0)]).is_err());
    }

    #[test]
    fn interior_point_of_u_shape() {
        let u = vec![
            Point2::new(0.0, 0.0),
            Point2::new(3.0, 0.0),
            Point2::new(3.0, 3.0),
            Point2::new(2.0, 3.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 3.0),
            Point2::new(0.0, 3.0),
        ];
        let p = Polygon2::new(u, vec![]).unwrap();
        assert!(p.contains(p.interior_point()));
    }

    #[test]
    fn collinear_vertices_merge() {
        let ring = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
            Point2::new(0.0, 2.0),
            Point2::new(0.0, 1.0),
        ];
        assert_eq!(merge_collinear_ring(&ring, 0.5f64.to_radians()).len(), 4);
    }

    #[test]
    fn segment_distances() {
        let d = segment_segment_distance(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 2.0),
            Point2::new(1.0, 2.0),
        );
        assert!((d - 2.0).abs() < 1e-12);
        let x = segment_segment_distance(
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(1.0, 0.0),
        );
        assert_eq!(x, 0.0);
    }
}
