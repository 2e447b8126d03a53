use super::{point_segment_distance, Point2};

/// Douglas-Peucker simplification of an open polyline. Endpoints are always
/// kept; returns the indices of the retained points in order.
pub fn douglas_peucker_indices(points: &[Point2], tolerance: f64) -> Vec<usize> {
    let n = points.len();
    if n <= 2 {
        return (0..n).collect();
    }
    let mut keep = vec![false; n];
    keep[0] = true;
    keep[n - 1] = true;
    let mut stack = vec![(0usize, n - 1)];
    while let Some((first, last)) = stack.pop() {
        let mut max_d = -1.0;
        let mut idx = first;
        for i in first + 1..last {
            let d = point_segment_distance(points[i], points[first], points[last]);
            // first index wins ties so repeated runs split identically
            if d > max_d {
                max_d = d;
                idx = i;
            }
        }
        if idx != first && max_d > tolerance {
            keep[idx] = true;
            stack.push((first, idx));
            stack.push((idx, last));
        }
    }
    (0..n).filter(|&i| keep[i]).collect()
}

pub fn douglas_peucker(points: &[Point2], tolerance: f64) -> Vec<Point2> {
    douglas_peucker_indices(points, tolerance)
        .into_iter()
        .map(|i| points[i])
        .collect()
}

/// Simplifies a closed ring by splitting it at its first point and the
/// point farthest from it. The result is open (no repeated first point).
pub fn douglas_peucker_closed(ring: &[Point2], tolerance: f64) -> Vec<Point2> {
    let n = ring.len();
    if n <= 3 {
        return ring.to_vec();
    }
    let far = (1..n)
        .max_by(|&a, &b| {
            (ring[a] - ring[0])
                .norm()
                .total_cmp(&(ring[b] - ring[0]).norm())
                .then(b.cmp(&a))
        })
        .unwrap_or(n / 2);
    let first: Vec<Point2> = ring[..=far].to_vec();
    let mut second: Vec<Point2> = ring[far..].to_vec();
    second.push(ring[0]);
    let mut out = douglas_peucker(&first, tolerance);
    out.pop();
    let mut tail = douglas_peucker(&second, tolerance);
    tail.pop();
    out.extend(tail);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_line_collapses() {
        let pts: Vec<Point2> = (0..10).map(|i| Point2::new(i as f64, i as f64)).collect();
        assert_eq!(douglas_peucker_indices(&pts, 1e-9), vec![0, 9]);
    }

    #[test]
    fn corner_is_kept() {
        let pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.01),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 2.0),
        ];
        assert_eq!(douglas_peucker_indices(&pts, 0.1), vec![0, 2, 3]);
        assert_eq!(douglas_peucker_indices(&pts, 0.001), vec![0, 1, 2, 3]);
    }

    #[test]
    fn closed_square_keeps_corners() {
        let mut ring = Vec::new();
        for k in 0..4 {
            ring.push(Point2::new(k as f64, 0.0));
        }
        for k in 0..4 {
            ring.push(Point2::new(4.0, k as f64));
        }
        for k in 0..4 {
            ring.push(Point2::new(4.0 - k as f64, 4.0));
        }
        for k in 0..4 {
            ring.push(Point2::new(0.0, 4.0 - k as f64));
        }
        let s = douglas_peucker_closed(&ring, 0.01);
        assert_eq!(s.len(), 4);
    }
}
