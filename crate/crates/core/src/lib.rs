//! Building mass models from noisy photogrammetric meshes and GIS footprints.
//!
//! The pipeline slices the mesh into horizontal contours, clusters them into
//! sweep-edges (probable wall bases), fractures the ground plane along those
//! edges, labels the fragments with a binary integer program, fits a
//! wall-then-roof profile to every footprint edge and extrudes each footprint
//! with a weighted straight skeleton into a watertight, wall/roof-labeled
//! mesh.
//!
//! Each stage lives in its own module and can be used on its own; see the
//! crate's `examples/` directory for one runnable program per stage and
//! [`pipeline::run_pipeline`] for the whole thing.

pub mod error;
pub mod extrusion;
pub mod footprint;
pub mod fracture;
pub mod geometry;
pub mod metrics;
pub mod pipeline;
pub mod profile;
pub mod shapes;
pub mod sweep;

pub use error::{Error, Result, Stage};
pub use geometry::{Point2, Point3, Polygon2, TriMesh, Vec2, Vec3};
