//! Geometric primitives shared by every stage: the indexed triangle mesh,
//! planar polygons with holes, plane slicing and heightfield lookups.
//!
//! All coordinates are meters in a local Cartesian frame with Z up.

mod heightfield;
mod mesh;
mod polygon;
mod simplify;
mod slice;

pub use heightfield::{height_field_query, HeightIndex};
pub use mesh::{TriMesh, DEGENERATE_AREA, WELD_TOLERANCE};
pub use polygon::{
    point_in_ring, point_segment_distance, ring_centroid, ring_signed_area,
    segment_segment_distance, Aabb2, Polygon2,
};
pub(crate) use slice::unit_normal;
pub use simplify::{douglas_peucker, douglas_peucker_closed, douglas_peucker_indices};
pub use slice::{
    chain_segments, slice_mesh_horizontal, slice_mesh_vertical, Chain, Segment2, SegmentSource,
    MIN_SEGMENT_LENGTH, SNAP_TOLERANCE,
};

pub type Point2 = nalgebra::Point2<f64>;
pub type Vec2 = nalgebra::Vector2<f64>;
pub type Point3 = nalgebra::Point3<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;

/// Left-hand perpendicular of a 2D vector.
#[inline]
pub fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

#[inline]
pub fn cross2(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Undirected line angle folded into `[0, pi)`.
pub fn line_angle(dir: Vec2) -> f64 {
    let mut a = dir.y.atan2(dir.x);
    if a < 0.0 {
        a += std::f64::consts::PI;
    }
    if a >= std::f64::consts::PI {
        a -= std::f64::consts::PI;
    }
    a
}

/// Smallest difference between two undirected line angles (mod pi).
pub fn angle_diff_mod_pi(a: f64, b: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let d = (a - b).rem_euclid(pi);
    d.min(pi - d)
}

pub fn unit_from_angle(a: f64) -> Vec2 {
    Vec2::new(a.cos(), a.sin())
}
