//! Junction classification and local smoothing.
//!
//! A junction is bad when the cosine of the tangent turn falls below
//! `eps_good` (0.995 flags turns above about 5.7°). Bad junctions are
//! replaced either by a biarc between points trimmed at distance δ on both
//! neighbours, or by a fillet arc of radius ρ tangent to both.

use serde::{Deserialize, Serialize};

use crate::biarc::{connect, BiarcParam};
use crate::error::{Error, Result};
use crate::geom::{
    intersect, tangent_at, ArcSeg, Circle, CircleOrLine, End, Line, Orientation, PccCurve, Point2, Vec2,
};

/// Default junction threshold.
pub const DEFAULT_EPS_GOOD: f64 = 0.995;
/// Biarcs closer than this to the corner are pointless.
const MIN_CORNER_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Good,
    Bad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fix {
    None,
    Biarc,
    Fillet,
    Unfixable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothingMethod {
    #[default]
    None,
    Biarc,
    Fillet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionReport {
    /// Junction between pieces `index − 1` and `index` of the input curve.
    pub index: usize,
    pub point: Point2,
    pub cos_angle: f64,
    pub verdict: Verdict,
    pub fix: Fix,
}

/// Classifies the turn between the end tangent of one piece and the start
/// tangent of the next: bad iff their dot product is below `eps_good`.
pub fn classify_junction(t_prev_end: Vec2, t_next_start: Vec2, eps_good: f64) -> JunctionReport {
    let cos_angle = t_prev_end.dot(t_next_start);
    JunctionReport {
        index: 0,
        point: Point2::default(),
        cos_angle,
        verdict: if cos_angle < eps_good {
            Verdict::Bad
        } else {
            Verdict::Good
        },
        fix: Fix::None,
    }
}

/// Reports for every interior junction of `curve`.
pub fn junctions(curve: &PccCurve, eps_good: f64) -> Vec<JunctionReport> {
    (1..curve.len())
        .map(|k| {
            let mut r = classify_junction(
                tangent_at(&curve.segs[k - 1], End::End),
                tangent_at(&curve.segs[k], End::Start),
                eps_good,
            );
            r.index = k;
            r.point = curve.segs[k].start();
            r
        })
        .collect()
}

/// Point on `seg` at chord distance `delta` from its end (`which = End`) or
/// its start (`which = Start`).
fn point_at_chord(seg: &ArcSeg, which: End, delta: f64) -> Result<Point2> {
    match *seg {
        ArcSeg::Segment { start, end } => {
            let len = start.dist(end);
            if delta >= len {
                return Err(Error::NeighborTooShort);
            }
            Ok(match which {
                End::End => end.lerp(start, delta / len),
                End::Start => start.lerp(end, delta / len),
            })
        }
        ArcSeg::Arc {
            start,
            end,
            center,
            radius,
            orientation,
        } => {
            if delta >= 2.0 * radius {
                return Err(Error::NeighborTooShort);
            }
            let phi = 2.0 * (delta / (2.0 * radius)).asin();
            if phi >= seg.sweep() {
                return Err(Error::NeighborTooShort);
            }
            let s = orientation.sign();
            Ok(match which {
                End::End => center + (end - center).rotated(-s * phi),
                End::Start => center + (start - center).rotated(s * phi),
            })
        }
    }
}

fn check_junction(curve: &PccCurve, k: usize) -> Result<()> {
    if k == 0 || k >= curve.len() {
        return Err(Error::OutOfDomain {
            t: k as f64,
            n: curve.len(),
        });
    }
    Ok(())
}

/// Replaces the corner at junction `k` by a biarc from the point at
/// distance δ before it to the point at distance δ after it, with the
/// neighbours' tangents there. Fails when the biarc strays more than
/// `epsilon` from the corner or hugs it within 1e-6.
pub fn smooth_with_biarc(curve: &PccCurve, k: usize, delta: f64, epsilon: f64) -> Result<PccCurve> {
    check_junction(curve, k)?;
    let prev = curve.segs[k - 1];
    let next = curve.segs[k];
    let corner = next.start();
    let q0 = point_at_chord(&prev, End::End, delta)?;
    let q1 = point_at_chord(&next, End::Start, delta)?;
    let prev_t = prev.with_endpoints(prev.start(), q0);
    let next_t = next.with_endpoints(q1, next.end());
    let ts = tangent_at(&prev_t, End::End);
    let te = tangent_at(&next_t, End::Start);
    let bridge = connect(q0, ts, q1, te, BiarcParam::Ratio(1.0))?;
    let gap = bridge
        .iter()
        .map(|s| s.distance(corner))
        .fold(f64::INFINITY, f64::min);
    if gap > epsilon {
        return Err(Error::DeltaTooLarge);
    }
    if gap < MIN_CORNER_GAP {
        return Err(Error::DeltaTooSmall);
    }
    let mut out = PccCurve::new();
    for j in 0..k - 1 {
        out.push(curve.segs[j], curve.sources[j]);
    }
    out.push(prev_t, curve.sources[k - 1]);
    for s in bridge {
        out.push(s, None);
    }
    out.push(next_t, curve.sources[k]);
    for j in k + 1..curve.len() {
        out.push(curve.segs[j], curve.sources[j]);
    }
    Ok(out)
}

/// Support of `seg` pushed by `rho` towards `side`.
fn offset_support(seg: &ArcSeg, corner: Point2, side: Vec2, rho: f64) -> CircleOrLine {
    match seg.support() {
        CircleOrLine::Line(l) => {
            let n = l.dir.perp();
            let s = if n.dot(side) >= 0.0 { 1.0 } else { -1.0 };
            CircleOrLine::Line(Line {
                point: l.point + n * (s * rho),
                dir: l.dir,
            })
        }
        CircleOrLine::Circle(c) => {
            let inward = (c.center - corner).dot(side) > 0.0;
            let r = if inward { c.radius - rho } else { c.radius + rho };
            CircleOrLine::Circle(Circle::new(c.center, r.max(0.0)))
        }
    }
}

fn foot(seg: &ArcSeg, o: Point2) -> Option<Point2> {
    match seg.support() {
        CircleOrLine::Line(l) => Some(l.project(o)),
        CircleOrLine::Circle(c) => (o - c.center).normalized().map(|u| c.center + u * c.radius),
    }
}

/// Fillet of radius `rho` at junction `k`: the arc tangent to both
/// neighbours whose center lies on both offset supports, inside the wedge
/// of the two outgoing tangents. Returns the fillet and the two trimmed
/// neighbours.
fn fillet_pieces(curve: &PccCurve, k: usize, rho: f64) -> Result<(ArcSeg, ArcSeg, ArcSeg)> {
    check_junction(curve, k)?;
    let prev = curve.segs[k - 1];
    let next = curve.segs[k];
    let corner = next.start();
    let te = tangent_at(&prev, End::End);
    let ts = tangent_at(&next, End::Start);
    let side = (ts - te).normalized().ok_or(Error::NoFilletExists)?;
    let oa = offset_support(&prev, corner, side, rho);
    let ob = offset_support(&next, corner, side, rho);
    let mut best: Option<(f64, ArcSeg, ArcSeg, ArcSeg)> = None;
    for o in intersect(&oa, &ob) {
        if (o - corner).dot(side) <= 0.0 {
            continue;
        }
        let (Some(t1), Some(t2)) = (foot(&prev, o), foot(&next, o)) else {
            continue;
        };
        if !prev.contains_projection(t1, 1e-12) || !next.contains_projection(t2, 1e-12) {
            continue;
        }
        if t1.dist(prev.start()) < 1e-12 || t2.dist(next.end()) < 1e-12 {
            continue;
        }
        let orientation = if te.cross(ts) > 0.0 {
            Orientation::Ccw
        } else {
            Orientation::Cw
        };
        let fillet = ArcSeg::Arc {
            start: t1,
            end: t2,
            center: o,
            radius: rho,
            orientation,
        };
        if fillet.sweep() >= std::f64::consts::PI {
            continue;
        }
        let d = o.dist(corner);
        if best.as_ref().is_none_or(|b| d < b.0) {
            best = Some((
                d,
                prev.with_endpoints(prev.start(), t1),
                fillet,
                next.with_endpoints(t2, next.end()),
            ));
        }
    }
    best.map(|(_, a, f, b)| (a, f, b)).ok_or(Error::NoFilletExists)
}

/// Replaces the corner at junction `k` by a fillet arc of radius `rho`.
pub fn smooth_with_fillet(curve: &PccCurve, k: usize, rho: f64) -> Result<PccCurve> {
    let (a, f, b) = fillet_pieces(curve, k, rho)?;
    let mut out = PccCurve::new();
    for j in 0..k - 1 {
        out.push(curve.segs[j], curve.sources[j]);
    }
    out.push(a, curve.sources[k - 1]);
    out.push(f, None);
    out.push(b, curve.sources[k]);
    for j in k + 1..curve.len() {
        out.push(curve.segs[j], curve.sources[j]);
    }
    Ok(out)
}

/// Largest fillet radius at junction `k` whose arc passes within `epsilon`
/// of the corner, by bisection. `None` when no radius qualifies.
pub fn max_fillet_radius(curve: &PccCurve, k: usize, epsilon: f64) -> Option<f64> {
    check_junction(curve, k).ok()?;
    let corner = curve.segs[k].start();
    let ok = |rho: f64| {
        fillet_pieces(curve, k, rho)
            .map(|(_, f, _)| f.distance(corner) <= epsilon)
            .unwrap_or(false)
    };
    let mut hi = curve.segs[k - 1].length().max(curve.segs[k].length());
    if ok(hi) {
        return Some(hi);
    }
    let mut lo = 0.0;
    let mut found = false;
    // coarse scan for any feasible radius, then bisect upwards from it
    let mut r = hi;
    for _ in 0..60 {
        r *= 0.5;
        if ok(r) {
            lo = r;
            found = true;
            break;
        }
        hi = r;
    }
    if !found {
        return None;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParams {
    pub method: SmoothingMethod,
    pub eps_good: f64,
    pub epsilon: f64,
    /// Trim distance for biarc smoothing; derived from the data when `None`.
    pub delta: Option<f64>,
    /// Fillet radius; the largest admissible one when `None`.
    pub rho: Option<f64>,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        Self {
            method: SmoothingMethod::None,
            eps_good: DEFAULT_EPS_GOOD,
            epsilon: crate::spline_longest::DEFAULT_EPSILON,
            delta: None,
            rho: None,
        }
    }
}

/// Median distance between consecutive points.
pub fn median_spacing(points: &[Point2]) -> f64 {
    let mut d: Vec<f64> = points.windows(2).map(|w| w[0].dist(w[1])).collect();
    if d.is_empty() {
        return 0.0;
    }
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

/// Trim distance: twice the median spacing, at least `4 ε`, at most half
/// the shorter neighbour.
pub fn default_delta(points: &[Point2], epsilon: f64, prev: &ArcSeg, next: &ArcSeg) -> f64 {
    let half = 0.5 * prev.length().min(next.length());
    (2.0 * median_spacing(points)).max(4.0 * epsilon).min(half)
}

/// Tries to fix the junction at `k` of `curve` with the configured method.
fn fix_junction(curve: &PccCurve, k: usize, points: &[Point2], params: &SmoothingParams) -> Option<(PccCurve, Fix)> {
    match params.method {
        SmoothingMethod::Biarc => {
            let mut delta = params
                .delta
                .unwrap_or_else(|| default_delta(points, params.epsilon, &curve.segs[k - 1], &curve.segs[k]));
            for _ in 0..30 {
                match smooth_with_biarc(curve, k, delta, params.epsilon) {
                    Ok(c) => return Some((c, Fix::Biarc)),
                    Err(Error::DeltaTooLarge) | Err(Error::NeighborTooShort) => delta *= 0.5,
                    Err(_) => return None,
                }
            }
            None
        }
        SmoothingMethod::Fillet => params
            .rho
            .or_else(|| max_fillet_radius(curve, k, params.epsilon))
            .and_then(|rho| smooth_with_fillet(curve, k, rho).ok())
            .map(|c| (c, Fix::Fillet)),
        SmoothingMethod::None => None,
    }
}

/// Fixes bad junctions left to right. Returns the new curve and one report
/// per junction of the input curve.
pub fn smooth_curve(curve: &PccCurve, points: &[Point2], params: &SmoothingParams) -> (PccCurve, Vec<JunctionReport>) {
    let mut reports = junctions(curve, params.eps_good);
    if params.method == SmoothingMethod::None {
        return (curve.clone(), reports);
    }
    let mut out = curve.clone();
    // position of the junction in `out` for input junction k
    let mut shift = 0usize;
    for rep in reports.iter_mut() {
        if rep.verdict == Verdict::Good {
            continue;
        }
        match fix_junction(&out, rep.index + shift, points, params) {
            Some((c, fix)) => {
                shift += c.len() - out.len();
                out = c;
                rep.fix = fix;
            }
            None => rep.fix = Fix::Unfixable,
        }
    }
    (out, reports)
}

/// Classifies and, if bad, fixes the seam of a closed curve (the junction
/// from the last piece back to the first, reported with index 0). A fixed
/// curve starts at the old second piece.
pub fn smooth_seam(curve: &PccCurve, points: &[Point2], params: &SmoothingParams) -> (PccCurve, JunctionReport) {
    let n = curve.len();
    let mut rep = classify_junction(
        tangent_at(&curve.segs[n - 1], End::End),
        tangent_at(&curve.segs[0], End::Start),
        params.eps_good,
    );
    rep.point = curve.segs[0].start();
    if rep.verdict == Verdict::Good || params.method == SmoothingMethod::None || n < 2 {
        return (curve.clone(), rep);
    }
    let mut rotated = PccCurve::new();
    for j in (1..n).chain([0]) {
        rotated.push(curve.segs[j], curve.sources[j]);
    }
    match fix_junction(&rotated, n - 1, points, params) {
        Some((c, fix)) => {
            rep.fix = fix;
            (c, rep)
        }
        None => {
            rep.fix = Fix::Unfixable;
            (curve.clone(), rep)
        }
    }
}
