use arcspline::corner::CornerParams;
use arcspline::geom::{ArcSeg, Orientation, PccCurve, Point2};
use arcspline::io::curve_to_json;
use arcspline::par::Exec;
use arcspline::pipeline::{bad_points, run_pipeline, Method, PipelineConfig};
use arcspline::scan_synth::{generate_scan, pentagon, rounded_polygon, ScanConfig, ShapeSpec};
use arcspline::smoothing::{Fix, SmoothingMethod, Verdict};
use proptest::prelude::*;

fn closed(method: Method) -> PipelineConfig {
    PipelineConfig {
        method,
        corners: CornerParams {
            closed: true,
            ..Default::default()
        },
        ..Default::default()
    }
}

fn rounded_rect() -> ShapeSpec {
    let v = [
        Point2::new(0.0, 0.0),
        Point2::new(80.0, 0.0),
        Point2::new(80.0, 45.0),
        Point2::new(0.0, 45.0),
    ];
    rounded_polygon(&v, 6.0).unwrap()
}

#[test]
fn sequential_and_parallel_are_bit_identical() {
    let (pts, _) = generate_scan(&pentagon(50.0), &ScanConfig::default()).unwrap();
    let mut outputs = Vec::new();
    for exec in [Exec::Sequential, Exec::Parallel, Exec::Parallel] {
        let cfg = PipelineConfig {
            exec,
            smoothing: SmoothingMethod::Biarc,
            ..closed(Method::C0)
        };
        let out = run_pipeline(&pts, &cfg).unwrap();
        outputs.push((curve_to_json(&out.curve).unwrap(), out.rows, out.corners.corners));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn straight_scan_is_one_piece() {
    let shape = ShapeSpec::new(vec![ArcSeg::segment(Point2::new(0.0, 0.0), Point2::new(60.0, 20.0))]).unwrap();
    let (pts, _) = generate_scan(&shape, &ScanConfig::default()).unwrap();
    for method in [Method::C0, Method::Longest] {
        let out = run_pipeline(&pts, &PipelineConfig { method, ..Default::default() }).unwrap();
        assert_eq!(out.curve.len(), 1, "{method:?}");
        assert_eq!(out.rows[0].bad_points, 0);
    }
}

#[test]
fn longest_method_uses_few_arcs() {
    // soft comparison between the two methods on the same scan
    let (pts, _) = generate_scan(&rounded_rect(), &ScanConfig::default()).unwrap();
    let longest = run_pipeline(&pts, &closed(Method::Longest)).unwrap();
    let c0 = run_pipeline(&pts, &closed(Method::C0)).unwrap();
    let (a, b) = (longest.curve.arc_count(), c0.curve.arc_count());
    println!("rounded rect arcs: longest {a}, c0 {b}");
    assert!(a <= b + 2);
}

#[test]
fn smoothing_reports_every_bad_junction() {
    let (pts, _) = generate_scan(&pentagon(50.0), &ScanConfig::default()).unwrap();
    for smoothing in [SmoothingMethod::Biarc, SmoothingMethod::Fillet] {
        let cfg = PipelineConfig {
            smoothing,
            ..closed(Method::C0)
        };
        let out = run_pipeline(&pts, &cfg).unwrap();
        // the five corners, seam included
        let bad: Vec<_> = out.junctions.iter().filter(|j| j.verdict == Verdict::Bad).collect();
        assert_eq!(bad.len(), 5, "{smoothing:?}");
        assert!(bad.iter().all(|j| j.fix != Fix::None));
        assert_eq!(out.rows[0].bad_points, 0);
        assert!(out.curve.is_chained());
    }
}

#[test]
fn residuals_match_bad_points() {
    let (pts, _) = generate_scan(&rounded_rect(), &ScanConfig { seed: 3, ..Default::default() }).unwrap();
    let out = run_pipeline(&pts, &closed(Method::C0)).unwrap();
    let far = out.residuals.iter().filter(|&&r| r > 0.5).count();
    assert_eq!(far, out.rows[0].bad_points);
}

proptest! {
    #[test]
    fn bad_points_never_increase_with_tolerance(
        offsets in prop::collection::vec(-3.0..3.0f64, 5..60),
        mut tols in prop::collection::vec(0.01..4.0f64, 2..8),
    ) {
        let curve = PccCurve::from_segs(vec![
            ArcSeg::segment(Point2::new(0.0, 0.0), Point2::new(30.0, 0.0)),
            ArcSeg::arc(Point2::new(30.0, 0.0), Point2::new(30.0, 20.0), Point2::new(30.0, 10.0), Orientation::Ccw),
        ]);
        let pts: Vec<Point2> = offsets
            .iter()
            .enumerate()
            .map(|(i, &o)| Point2::new(i as f64 * 0.5, o))
            .collect();
        tols.sort_by(f64::total_cmp);
        let counts: Vec<usize> = tols.iter().map(|&t| bad_points(&curve, &pts, t)).collect();
        prop_assert!(counts.windows(2).all(|w| w[1] <= w[0]));
    }
}
