use proptest::prelude::*;

use massfit::geometry::{
    chain_segments, douglas_peucker, height_field_query, point_segment_distance, slice_mesh_horizontal,
    slice_mesh_vertical, HeightIndex, Point2, Point3, Polygon2, Vec2,
};
use massfit::shapes::{box_mesh, gable_prism};

proptest! {
    // A horizontal cut through a box is its rectangle outline.
    #[test]
    fn box_slice_is_rectangle(w in 0.5f64..30.0, d in 0.5f64..30.0, h in 0.5f64..20.0, f in 0.01f64..0.99) {
        let mesh = box_mesh(Point3::new(0.0, 0.0, 0.0), Point3::new(w, d, h));
        let segs = slice_mesh_horizontal(&mesh, f * h);
        let perimeter: f64 = segs.iter().map(|s| s.length()).sum();
        prop_assert!((perimeter - 2.0 * (w + d)).abs() < 1e-9);
        let chains = chain_segments(&segs, 1e-6);
        prop_assert_eq!(chains.len(), 1);
        prop_assert!(chains[0].closed);
    }

    // The gable cross-section outline: two walls, two slopes, the base.
    #[test]
    fn gable_section_length(l in 2.0f64..20.0, w in 1.0f64..12.0, eave in 1.0f64..6.0, rise in 0.5f64..5.0, t in 0.1f64..0.9) {
        let mesh = gable_prism(l, w, eave, eave + rise);
        let section = slice_mesh_vertical(&mesh, Point2::new(t * l, 0.0), Vec2::new(0.0, 1.0));
        let total: f64 = section.iter().map(|s| s.length()).sum();
        let slope = ((w / 2.0).powi(2) + rise * rise).sqrt();
        prop_assert!((total - (w + 2.0 * eave + 2.0 * slope)).abs() < 1e-9, "{} vs {}", total, w + 2.0 * eave + 2.0 * slope);
    }

    #[test]
    fn gable_height_field(l in 2.0f64..20.0, w in 1.0f64..12.0, eave in 1.0f64..6.0, rise in 0.5f64..5.0,
                          fx in 0.01f64..0.99, fy in 0.01f64..0.99) {
        let mesh = gable_prism(l, w, eave, eave + rise);
        let p = Point2::new(fx * l, fy * w);
        let expect = eave + rise * (1.0 - (p.y - w / 2.0).abs() / (w / 2.0));
        let got = height_field_query(&mesh, p).unwrap();
        prop_assert!((got - expect).abs() < 1e-9);
        prop_assert!((HeightIndex::new(&mesh).query(p).unwrap() - got).abs() < 1e-12);
        prop_assert!(height_field_query(&mesh, Point2::new(l + 1.0, p.y)).is_none());
    }

    // Every dropped point stays within tolerance of the kept polyline piece
    // that spans it.
    #[test]
    fn douglas_peucker_within_tolerance(ys in prop::collection::vec(-2.0f64..2.0, 2..60), tol in 0.01f64..1.0) {
        let pts: Vec<Point2> = ys.iter().enumerate().map(|(i, &y)| Point2::new(i as f64 * 0.5, y)).collect();
        let kept = douglas_peucker(&pts, tol);
        prop_assert_eq!(kept[0], pts[0]);
        prop_assert_eq!(*kept.last().unwrap(), *pts.last().unwrap());
        for p in &pts {
            let d = kept
                .windows(2)
                .filter(|w| w[0].x <= p.x && p.x <= w[1].x)
                .map(|w| point_segment_distance(*p, w[0], w[1]))
                .fold(f64::INFINITY, f64::min);
            prop_assert!(d <= tol + 1e-12);
        }
    }

    #[test]
    fn polygon_area_translation_invariant(w in 0.1f64..50.0, h in 0.1f64..50.0, dx in -1e4f64..1e4, dy in -1e4f64..1e4) {
        let r = Polygon2::rect(Point2::new(0.0, 0.0), Point2::new(w, h));
        let t = r.translated(Vec2::new(dx, dy));
        prop_assert!((r.area() - w * h).abs() < 1e-9 * w * h);
        prop_assert!((t.area() - r.area()).abs() < 1e-6);
        prop_assert!(t.contains(Point2::new(dx + w / 2.0, dy + h / 2.0)));
        prop_assert!(!t.contains(Point2::new(dx - 1.0, dy)));
    }
}

#[test]
fn chaining_ignores_segment_order() {
    let mesh = gable_prism(10.0, 6.0, 3.0, 5.0);
    let mut segs = slice_mesh_horizontal(&mesh, 4.0);
    let a = chain_segments(&segs, 1e-6);
    segs.reverse();
    assert_eq!(a, chain_segments(&segs, 1e-6));
}
