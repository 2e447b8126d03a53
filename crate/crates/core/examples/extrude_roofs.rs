//! Hip, gable-ish and flat roofs from per-edge profiles, checked for
//! closure and drainage.

use massfit::extrusion::{check_closed_manifold, extrude_footprint, FaceLabel};
use massfit::geometry::{Point2, Polygon2};
use massfit::metrics::raindrop_check;
use massfit::profile::Profile;

fn main() -> massfit::Result<()> {
    let l_shape = Polygon2::new(
        vec![
            Point2::new(0.0, 0.0),
            Point2::new(12.0, 0.0),
            Point2::new(12.0, 5.0),
            Point2::new(5.0, 5.0),
            Point2::new(5.0, 10.0),
            Point2::new(0.0, 10.0),
        ],
        vec![],
    )?;
    let n = l_shape.edge_count();
    let cases = [
        ("hip 35°", vec![Profile::wall_then_pitch(3.0, 35.0, 10.0); n]),
        ("flat", vec![Profile::vertical(4.0); n]),
        (
            "mixed",
            (0..n)
                .map(|i| if i % 2 == 0 { Profile::wall_then_pitch(3.0, 45.0, 10.0) } else { Profile::vertical(5.0) })
                .collect(),
        ),
    ];
    for (name, profiles) in cases {
        let model = extrude_footprint(0, &l_shape, &profiles, 8.0)?;
        let closed = check_closed_manifold(&model.mesh).map_or_else(|e| e, |_| "closed".into());
        println!(
            "{name:8} volume {:7.2} m³, {} wall / {} roof / {} cap faces, {closed}, raindrop {}",
            model.volume(),
            model.face_count(FaceLabel::Wall),
            model.face_count(FaceLabel::Roof),
            model.face_count(FaceLabel::Cap),
            if raindrop_check(&model, 100, 1).passed() { "ok" } else { "stuck" }
        );
    }
    Ok(())
}
