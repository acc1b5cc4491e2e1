use arcspline::geom::{arc_from_start_tangent, tangent_at, ArcSeg, End, PccCurve, Point2, Vec2};
use arcspline::io::{curve_from_json, curve_to_gcode, curve_to_json, parse_points, write_points};
use proptest::prelude::*;

/// Chained curve from a start point, start heading and a list of
/// (turn, length, straight) steps; each piece leaves along the previous
/// end tangent.
fn chained(start: (f64, f64), heading: f64, steps: &[(f64, f64, bool)]) -> PccCurve {
    let mut at = Point2::new(start.0, start.1);
    let mut dir = Vec2::from_angle(heading);
    let mut curve = PccCurve::new();
    for &(turn, len, straight) in steps {
        let chord = dir.rotated(0.5 * turn) * len;
        let end = at + chord;
        let seg = if straight {
            ArcSeg::segment(at, end)
        } else {
            arc_from_start_tangent(at, dir, end)
        };
        dir = tangent_at(&seg, End::End);
        at = seg.end();
        curve.push(seg, None);
    }
    curve
}

fn curve_strategy() -> impl Strategy<Value = PccCurve> {
    (
        (-500.0..500.0f64, -500.0..500.0f64),
        0.0..std::f64::consts::TAU,
        prop::collection::vec((-2.5..2.5f64, 0.1..80.0f64, prop::bool::weighted(0.3)), 1..12),
    )
        .prop_map(|(s, h, steps)| chained(s, h, &steps))
}

/// Replays a G-code program, returning `(start, end, center)` per move
/// (`center` is `None` for G1).
fn replay(program: &str) -> Vec<(Point2, Point2, Option<Point2>)> {
    let mut at = Point2::new(0.0, 0.0);
    let mut moves = Vec::new();
    for line in program.lines() {
        let mut words = line.split_whitespace();
        let code = words.next().unwrap();
        let mut get = |w: &str| w[1..].parse::<f64>().unwrap();
        let vals: Vec<f64> = words.map(&mut get).collect();
        match code {
            "G21" | "G90" => {}
            "G0" => at = Point2::new(vals[0], vals[1]),
            "G1" => {
                let end = Point2::new(vals[0], vals[1]);
                moves.push((at, end, None));
                at = end;
            }
            "G2" | "G3" => {
                let end = Point2::new(vals[0], vals[1]);
                moves.push((at, end, Some(at + Vec2::new(vals[2], vals[3]))));
                at = end;
            }
            other => panic!("unexpected word {other}"),
        }
    }
    moves
}

proptest! {
    #[test]
    fn json_round_trip_is_bit_exact(curve in curve_strategy()) {
        let text = curve_to_json(&curve).unwrap();
        prop_assert_eq!(curve_from_json(&text).unwrap(), curve);
    }

    #[test]
    fn gcode_replay_matches_geometry(curve in curve_strategy()) {
        let moves = replay(&curve_to_gcode(&curve).unwrap());
        prop_assert_eq!(moves.len(), curve.len());
        for (seg, (start, end, center)) in curve.segs.iter().zip(moves) {
            prop_assert!(start.dist(seg.start()) <= 1e-3);
            prop_assert!(end.dist(seg.end()) <= 1e-3);
            match (seg, center) {
                (ArcSeg::Arc { center: c, radius, .. }, Some(o)) => {
                    prop_assert!(o.dist(*c) <= 1e-3);
                    prop_assert!((o.dist(end) - radius).abs() <= 1e-3);
                }
                (ArcSeg::Segment { .. }, None) => {}
                _ => prop_assert!(false, "move kind differs from piece kind"),
            }
        }
    }

    #[test]
    fn csv_round_trip_keeps_precision(
        pts in prop::collection::vec((-1e3..1e3f64, -1e3..1e3f64), 1..40)
    ) {
        let mut points: Vec<Point2> = pts.into_iter().map(|(x, y)| Point2::new(x, y)).collect();
        points.dedup();
        let mut buf = Vec::new();
        write_points(&points, &mut buf).unwrap();
        prop_assert_eq!(parse_points(buf.as_slice()).unwrap(), points);
    }
}

#[test]
fn gcode_arc_direction_words() {
    let ccw = chained((0.0, 0.0), 0.0, &[(1.0, 10.0, false)]);
    let cw = chained((0.0, 0.0), 0.0, &[(-1.0, 10.0, false)]);
    assert!(curve_to_gcode(&ccw).unwrap().lines().last().unwrap().starts_with("G3 "));
    assert!(curve_to_gcode(&cw).unwrap().lines().last().unwrap().starts_with("G2 "));
}
