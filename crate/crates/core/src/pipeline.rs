//! End-to-end processing of one scanned contour: corner recovery, a fit
//! per section between corners, junction smoothing and the per-tolerance
//! summary rows.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corner::{detect_corners_with, CornerParams, CornerReport, Section};
use crate::error::{Error, Result};
use crate::geom::{arc_through_three, ArcSeg, PccCurve, Point2};
use crate::lsq::FitOptions;
use crate::par::{for_each_mut, Exec};
use crate::smoothing::{smooth_curve, smooth_seam, JunctionReport, SmoothingMethod, SmoothingParams};
use crate::spline_c0::fit_c0_cached;
use crate::spline_longest::{build_spline, FitTables, GapPolicy, SplineOptions, WindowResiduals};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Longest,
    #[default]
    C0,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Tolerance of the output curve.
    pub tolerance: f64,
    /// Tolerances of the summary rows; the output tolerance alone if empty.
    pub report_tolerances: Vec<f64>,
    pub method: Method,
    pub gap_policy: GapPolicy,
    pub eps_good: f64,
    pub smoothing: SmoothingMethod,
    /// Biarc trim distance; derived from the data when `None`.
    pub delta: Option<f64>,
    /// Fillet radius; the largest admissible one when `None`.
    pub rho: Option<f64>,
    pub detect_corners: bool,
    pub corners: CornerParams,
    pub fit: FitOptions,
    pub exec: Exec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            tolerance: crate::spline_longest::DEFAULT_EPSILON,
            report_tolerances: Vec::new(),
            method: Method::C0,
            gap_policy: GapPolicy::Recurse,
            eps_good: crate::smoothing::DEFAULT_EPS_GOOD,
            smoothing: SmoothingMethod::None,
            delta: None,
            rho: None,
            detect_corners: true,
            corners: CornerParams::default(),
            fit: FitOptions::default(),
            exec: Exec::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let tols = std::iter::once(self.tolerance).chain(self.report_tolerances.iter().copied());
        if tols.into_iter().any(|t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::DegenerateInput("tolerances must be positive"));
        }
        if !(0.0..1.0).contains(&self.eps_good) {
            return Err(Error::DegenerateInput("eps_good must lie in [0, 1)"));
        }
        self.corners.validate()
    }

    fn smoothing_params(&self, epsilon: f64) -> SmoothingParams {
        SmoothingParams {
            method: self.smoothing,
            eps_good: self.eps_good,
            epsilon,
            delta: self.delta,
            rho: self.rho,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub tolerance: f64,
    pub arcs: usize,
    pub segments: usize,
    pub bad_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedCurve {
    pub curve: PccCurve,
    pub junctions: Vec<JunctionReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub curve: PccCurve,
    pub corners: CornerReport,
    pub junctions: Vec<JunctionReport>,
    pub rows: Vec<ResultRow>,
    /// Distance of every input point to the output curve.
    pub residuals: Vec<f64>,
}

/// Number of `points` farther than `tolerance` from `curve`.
pub fn bad_points(curve: &PccCurve, points: &[Point2], tolerance: f64) -> usize {
    points.iter().filter(|&&p| curve.distance(p) > tolerance).count()
}

pub fn result_row(curve: &PccCurve, points: &[Point2], tolerance: f64) -> ResultRow {
    ResultRow {
        tolerance,
        arcs: curve.arc_count(),
        segments: curve.segment_count(),
        bad_points: bad_points(curve, points, tolerance),
    }
}

/// Plain-text table in the layout `Tolerance  Arcs  Segments  Bad Points`.
pub fn format_rows(rows: &[ResultRow]) -> String {
    let mut out = String::from("Tolerance  Arcs  Segments  Bad Points\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:>9}  {:>4}  {:>8}  {:>10}",
            format!("{:?}", r.tolerance),
            r.arcs,
            r.segments,
            r.bad_points
        );
    }
    out
}

/// Corner report for the configuration, or a single section spanning all
/// points when detection is off.
pub fn find_corners(points: &[Point2], config: &PipelineConfig) -> Result<CornerReport> {
    if config.detect_corners {
        return detect_corners_with(points, &config.corners, config.exec);
    }
    Ok(CornerReport {
        anchors: Vec::new(),
        corners: Vec::new(),
        sections: vec![Section {
            start: 0,
            len: points.len(),
            lead: None,
            trail: None,
        }],
        diagnostics: Vec::new(),
    })
}

/// One fitting unit: its points and the global index of each.
struct Piece {
    points: Vec<Point2>,
    global: Vec<usize>,
    cache: Option<WindowResiduals>,
}

fn pieces(points: &[Point2], report: &CornerReport, closed: bool, fit: FitOptions) -> Result<Vec<Piece>> {
    let n = points.len();
    let mut sections = report.sections.clone();
    // a closed contour with at most one corner is a single loop; cut it in
    // two halves so that no fitting unit starts and ends on the same point
    if closed && sections.len() == 1 && sections[0].len == n {
        let s = sections[0];
        let half = n / 2;
        sections = vec![
            Section {
                start: s.start,
                len: half + 1,
                lead: s.lead,
                trail: None,
            },
            Section {
                start: (s.start + half) % n,
                len: n - half,
                lead: None,
                trail: Some(s.trail.unwrap_or(points[s.start])),
            },
        ];
    }
    let mut out = Vec::with_capacity(sections.len());
    for s in &sections {
        let idx: Vec<usize> = s.indices(n).collect();
        let mut pts = Vec::with_capacity(s.len + 2);
        let mut global = Vec::with_capacity(s.len + 2);
        let mut add = |p: Point2, g: usize| {
            if pts.last() != Some(&p) {
                pts.push(p);
                global.push(g);
            }
        };
        if let Some(c) = s.lead {
            add(c, idx[0]);
        }
        for &i in &idx {
            add(points[i], i);
        }
        if let Some(c) = s.trail {
            // a loop closed on its first sample maps back to that sample
            let wrap = (s.start + s.len) % n;
            let g = if c == points[wrap] { wrap } else { *idx.last().unwrap() };
            add(c, g);
        }
        let cache = if pts.len() >= 4 {
            Some(WindowResiduals::new(&pts, fit)?)
        } else {
            None
        };
        out.push(Piece {
            points: pts,
            global,
            cache,
        });
    }
    Ok(out)
}

fn fit_piece(piece: &mut Piece, epsilon: f64, config: &PipelineConfig) -> Result<PccCurve> {
    let pts = &piece.points;
    let local = match (&mut piece.cache, pts.len()) {
        (_, 0 | 1) => PccCurve::new(),
        (_, 2) => {
            let mut c = PccCurve::new();
            c.push(ArcSeg::segment(pts[0], pts[1]), Some((0, 1)));
            c
        }
        (_, 3) => {
            let mut c = PccCurve::new();
            c.push(arc_through_three(pts[0], pts[1], pts[2])?, Some((0, 2)));
            c
        }
        (Some(cache), _) => match config.method {
            Method::C0 => fit_c0_cached(cache, epsilon, config.exec)?.2.curve,
            Method::Longest => {
                let tables = FitTables::from_cache(cache, epsilon, config.exec);
                let opts = SplineOptions {
                    gap_policy: config.gap_policy,
                    fit: config.fit,
                    exec: config.exec,
                };
                build_spline(cache.points(), &tables, &opts)?.curve
            }
        },
        (None, _) => unreachable!("caches exist for four or more points"),
    };
    let mut curve = local;
    for s in curve.sources.iter_mut().flatten() {
        *s = (piece.global[s.0], piece.global[s.1]);
    }
    Ok(curve)
}

/// Fits every section at `epsilon`, concatenates and smooths.
fn fit_all(pieces: &mut [Piece], points: &[Point2], epsilon: f64, config: &PipelineConfig) -> Result<FittedCurve> {
    let mut results: Vec<(&mut Piece, Option<Result<PccCurve>>)> = pieces.iter_mut().map(|p| (p, None)).collect();
    for_each_mut(config.exec, &mut results, |_, (piece, out)| {
        *out = Some(fit_piece(piece, epsilon, config));
    });
    let mut curve = PccCurve::new();
    for (_, r) in results {
        curve.extend(r.expect("every section is fitted")?);
    }
    let params = config.smoothing_params(epsilon);
    let (mut curve, mut junctions) = smooth_curve(&curve, points, &params);
    if config.corners.closed && curve.len() > 1 {
        let (c, seam) = smooth_seam(&curve, points, &params);
        curve = c;
        junctions.insert(0, seam);
    }
    Ok(FittedCurve { curve, junctions })
}

/// Fits the sections of `report` at `epsilon`.
pub fn fit_sections(points: &[Point2], report: &CornerReport, epsilon: f64, config: &PipelineConfig) -> Result<FittedCurve> {
    let mut ps = pieces(points, report, config.corners.closed, config.fit)?;
    fit_all(&mut ps, points, epsilon, config)
}

/// Corner recovery, sectioned fitting and smoothing at the output
/// tolerance, plus one summary row per report tolerance (each a full fit
/// at that tolerance). Window residuals are shared between tolerances.
pub fn run_pipeline(points: &[Point2], config: &PipelineConfig) -> Result<PipelineOutput> {
    config.validate()?;
    let corners = find_corners(points, config)?;
    let mut ps = pieces(points, &corners, config.corners.closed, config.fit)?;
    let main = fit_all(&mut ps, points, config.tolerance, config)?;
    let tolerances = if config.report_tolerances.is_empty() {
        vec![config.tolerance]
    } else {
        config.report_tolerances.clone()
    };
    let mut rows = Vec::with_capacity(tolerances.len());
    for &t in &tolerances {
        if t == config.tolerance {
            rows.push(result_row(&main.curve, points, t));
        } else {
            let f = fit_all(&mut ps, points, t, config)?;
            rows.push(result_row(&f.curve, points, t));
        }
    }
    let residuals = points.iter().map(|&p| main.curve.distance(p)).collect();
    Ok(PipelineOutput {
        curve: main.curve,
        corners,
        junctions: main.junctions,
        rows,
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;

    #[test]
    fn straight_line_is_one_piece() {
        let pts: Vec<Point2> = (0..40).map(|i| Point2::new(i as f64, 0.5 * i as f64)).collect();
        for method in [Method::C0, Method::Longest] {
            let cfg = PipelineConfig { method, ..Default::default() };
            let out = run_pipeline(&pts, &cfg).unwrap();
            assert_eq!(out.curve.len(), 1);
            assert_eq!(out.rows[0].bad_points, 0);
            assert_eq!(out.curve.sources[0], Some((0, 39)));
        }
    }

    #[test]
    fn closed_circle_without_corners() {
        let pts: Vec<Point2> = (0..60).map(|i| Point2::new(0., 0.) + Vec2::from_angle(i as f64 * 0.1047) * 30.0).collect();
        let cfg = PipelineConfig {
            corners: CornerParams { closed: true, ..Default::default() },
            ..Default::default()
        };
        let out = run_pipeline(&pts, &cfg).unwrap();
        assert!(out.corners.corners.is_empty());
        assert_eq!(out.curve.len(), 2);
        assert!(out.curve.segs[1].end().dist(out.curve.segs[0].start()) < 1e-12);
        assert_eq!(out.rows[0].bad_points, 0);
    }

    #[test]
    fn bad_points_monotone_in_tolerance() {
        let c = PccCurve::from_segs(vec![ArcSeg::segment(Point2::new(0., 0.), Point2::new(10., 0.))]);
        let pts: Vec<Point2> = (0..20).map(|i| Point2::new(i as f64 * 0.5, (i as f64 * 0.37).sin())).collect();
        let counts: Vec<usize> = [0.1, 0.3, 0.5, 0.9, 1.1].iter().map(|&t| bad_points(&c, &pts, t)).collect();
        assert!(counts.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(counts[4], 0);
    }

    #[test]
    fn table_layout() {
        let rows = [ResultRow { tolerance: 1.5, arcs: 5, segments: 0, bad_points: 0 }];
        assert_eq!(format_rows(&rows), "Tolerance  Arcs  Segments  Bad Points\n      1.5     5         0           0\n");
    }
}
