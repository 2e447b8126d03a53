//! Horizontal and vertical cuts through a gable-roofed prism.

use massfit::geometry::{chain_segments, slice_mesh_horizontal, slice_mesh_vertical, Point2, Vec2};
use massfit::shapes::gable_prism;

fn main() {
    // 10 m long, 6 m deep, eaves at 3 m, ridge at 5 m.
    let mesh = gable_prism(10.0, 6.0, 3.0, 5.0);

    for z in [1.0, 3.5, 4.5] {
        let segs = slice_mesh_horizontal(&mesh, z);
        let chains = chain_segments(&segs, 1e-6);
        let len: f64 = segs.iter().map(|s| s.length()).sum();
        println!("z={z:.1}: {} segments, {} chains, perimeter {len:.3} m", segs.len(), chains.len());
    }

    // Cross-section across the ridge, in (offset, height) coordinates.
    let section = slice_mesh_vertical(&mesh, Point2::new(5.0, 0.0), Vec2::new(0.0, 1.0));
    for s in section {
        println!("  ({:.2}, {:.2}) -> ({:.2}, {:.2})", s.a.x, s.a.y, s.b.x, s.b.y);
    }
}
