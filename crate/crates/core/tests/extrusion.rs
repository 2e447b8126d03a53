use proptest::prelude::*;

use massfit::extrusion::{check_closed_manifold, euler_characteristic, extrude_footprint, FaceLabel, MassModel};
use massfit::geometry::{Point2, Polygon2};
use massfit::metrics::raindrop_check;
use massfit::profile::{Profile, Quality};

fn rect(w: f64, d: f64) -> Polygon2 {
    Polygon2::rect(Point2::new(0.0, 0.0), Point2::new(w, d))
}

fn l_shape(w: f64, h: f64, cx: f64, cy: f64) -> Polygon2 {
    let pts = [(0.0, 0.0), (w, 0.0), (w, cy), (cx, cy), (cx, h), (0.0, h)];
    Polygon2::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect(), vec![]).unwrap()
}

/// Roofs face up, walls are vertical, the solid is one closed sphere-like
/// surface with positive volume.
fn assert_sound(m: &MassModel) -> Result<(), TestCaseError> {
    prop_assert!(check_closed_manifold(&m.mesh).is_ok(), "{:?}", check_closed_manifold(&m.mesh));
    prop_assert_eq!(euler_characteristic(&m.mesh), 2);
    prop_assert!(m.volume() > 0.0);
    for t in 0..m.mesh.triangles.len() {
        let n = m.mesh.face_normal(t).normalize();
        match m.labels[t] {
            FaceLabel::Roof => prop_assert!(n.z > 0.0, "roof face {} normal {:?}", t, n),
            FaceLabel::Wall => prop_assert!(n.z.abs() < 1e-6, "wall face {} normal {:?}", t, n),
            FaceLabel::Cap => prop_assert!(n.z > 0.999),
            FaceLabel::Floor => prop_assert!(n.z < -0.999),
        }
    }
    Ok(())
}

fn profile_strategy() -> impl Strategy<Value = Profile> {
    prop_oneof![
        (1.0f64..8.0).prop_map(Profile::vertical),
        (15.0f64..70.0).prop_map(|a| Profile::pitched(a, 12.0)),
        (1.0f64..6.0, 10.0f64..60.0).prop_map(|(w, a)| Profile::wall_then_pitch(w, a, 12.0)),
        (1.0f64..5.0, 0.5f64..2.0).prop_map(|(w, l)| Profile::new(
            vec![Point2::origin(), Point2::new(0.0, w), Point2::new(0.4, w + l), Point2::new(9.0, w + l + 2.5)],
            Quality::High,
        )
        .unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hip_roof_volume(w in 1.0f64..20.0, d in 1.0f64..20.0, wall in 0.0f64..5.0, pitch in 10.0f64..70.0) {
        let (long, short) = (w.max(d), w.min(d));
        let p = Profile::wall_then_pitch(wall, pitch, short);
        let m = extrude_footprint(0, &rect(w, d), &vec![p; 4], f64::INFINITY).unwrap();
        let roof = pitch.to_radians().tan() * (short * short * long / 4.0 - short.powi(3) / 12.0);
        let expect = w * d * wall + roof;
        prop_assert!((m.volume() - expect).abs() < 1e-6 * expect, "{} vs {}", m.volume(), expect);
        let top = m.mesh.vertices.iter().map(|v| v.z).fold(0.0, f64::max);
        prop_assert!((top - (wall + short / 2.0 * pitch.to_radians().tan())).abs() < 1e-6);
        assert_sound(&m)?;
    }

    #[test]
    fn flat_prism_volume(w in 1.0f64..20.0, h in 1.0f64..20.0, fx in 0.2f64..0.8, fy in 0.2f64..0.8, z in 0.5f64..12.0) {
        let fp = l_shape(w, h, fx * w, fy * h);
        let m = extrude_footprint(0, &fp, &vec![Profile::vertical(z); 6], f64::INFINITY).unwrap();
        prop_assert!((m.volume() - fp.area() * z).abs() < 1e-6 * fp.area() * z);
        prop_assert_eq!(m.face_count(FaceLabel::Roof), 0);
        assert_sound(&m)?;
    }

    #[test]
    fn mixed_profiles_are_sound(
        w in 6.0f64..16.0, h in 6.0f64..16.0, fx in 0.25f64..0.75, fy in 0.25f64..0.75,
        profiles in prop::collection::vec(profile_strategy(), 6),
        cap in prop_oneof![Just(f64::INFINITY), 2.0f64..10.0],
        seed in 0u64..1000,
    ) {
        let fp = l_shape(w, h, fx * w, fy * h);
        let m = extrude_footprint(0, &fp, &profiles, cap).unwrap();
        assert_sound(&m)?;
        let top = m.mesh.vertices.iter().map(|v| v.z).fold(0.0, f64::max);
        prop_assert!(top <= cap + 1e-9);
        let r = raindrop_check(&m, 50, seed);
        prop_assert!(r.passed(), "stuck at {:?}", r.failure);
    }
}

// A collapse that leaves a vertical wall next to a sloped edge on the same
// line used to twist the wall face.
#[test]
fn parallel_neighbours_keep_their_planes() {
    let fp = l_shape(13.56, 6.71, 5.28, 4.6);
    let profiles = vec![
        Profile::vertical(6.4),
        Profile::pitched(42.0, 10.0),
        Profile::vertical(5.7),
        Profile::pitched(29.0, 10.0),
        Profile::pitched(36.0, 10.0),
        Profile::wall_then_pitch(3.3, 40.0, 8.0),
    ];
    let m = extrude_footprint(0, &fp, &profiles, f64::INFINITY).unwrap();
    for t in 0..m.mesh.triangles.len() {
        if m.labels[t] == FaceLabel::Roof {
            assert!(m.mesh.face_normal(t).z > 0.0, "face {t}");
        }
    }
    assert!(raindrop_check(&m, 200, 0).passed());
}
