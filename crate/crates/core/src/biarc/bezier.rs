//! Rational quadratic Bézier form of circular arcs and evaluation of whole
//! piecewise-circular curves.
//!
//! An arc with control points `b0, b1, b2` (equal legs, tangent at both
//! ends) and half sweep θ has weights `{1, cos θ, 1}`.

use crate::error::{Error, Result};
use crate::geom::{tangent_at, ArcSeg, End, PccCurve, Point2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalArcBezier {
    pub p0: Point2,
    pub p1: Point2,
    pub p2: Point2,
    /// Middle weight `cos θ`; the end weights are 1.
    pub w1: f64,
    /// Half sweep angle in `[0, π/2)`.
    pub theta: f64,
    pub center: Point2,
    pub radius: f64,
}

impl RationalArcBezier {
    /// `D = ab·bc = cos 2θ`.
    pub fn d(&self) -> f64 {
        (2.0 * self.theta).cos()
    }

    pub fn eval(&self, t: f64) -> Point2 {
        let s = 1.0 - t;
        let b0 = s * s;
        let b1 = 2.0 * s * t * self.w1;
        let b2 = t * t;
        let w = b0 + b1 + b2;
        Point2::new(
            (b0 * self.p0.x + b1 * self.p1.x + b2 * self.p2.x) / w,
            (b0 * self.p0.y + b1 * self.p1.y + b2 * self.p2.y) / w,
        )
    }
}

/// Rational Bézier arc from its three control points.
///
/// `θ` is half the turn between the legs, `R = ‖b1 − b0‖ / tan θ`, and the
/// center lies at distance `R / cos θ` from `b1` along `bc − ab`.
pub fn arc_to_bezier(b0: Point2, b1: Point2, b2: Point2) -> Result<RationalArcBezier> {
    let leg0 = b1 - b0;
    let leg1 = b2 - b1;
    let (l0, l1) = (leg0.norm(), leg1.norm());
    let ab = leg0.normalized().ok_or(Error::CollinearControls)?;
    let bc = leg1.normalized().ok_or(Error::CollinearControls)?;
    let turn = ab.cross(bc).atan2(ab.dot(bc)).abs();
    if !(1e-12..std::f64::consts::PI).contains(&turn) {
        return Err(Error::CollinearControls);
    }
    if (l0 - l1).abs() > 1e-9 * l0.max(l1) {
        return Err(Error::UnequalLegs);
    }
    let theta = 0.5 * turn;
    let radius = l0 / theta.tan();
    let dir = (bc - ab).normalized().ok_or(Error::CollinearControls)?;
    let center = b1 + dir * (radius / theta.cos());
    let tol = 1e-9 * radius.max(1.0);
    if (center.dist(b0) - radius).abs() > tol || (center.dist(b2) - radius).abs() > tol {
        return Err(Error::CollinearControls);
    }
    Ok(RationalArcBezier {
        p0: b0,
        p1: b1,
        p2: b2,
        w1: theta.cos(),
        theta,
        center,
        radius,
    })
}

/// Bézier pieces of a curve piece. Arcs sweeping more than 0.9 of a half
/// turn are split at their midpoint, keeping `tan θ` well conditioned; segments become weight-1 quadratics.
fn piece_beziers(seg: &ArcSeg) -> Vec<RationalArcBezier> {
    match *seg {
        ArcSeg::Segment { start, end } => vec![RationalArcBezier {
            p0: start,
            p1: start.midpoint(end),
            p2: end,
            w1: 1.0,
            theta: 0.0,
            center: start.midpoint(end),
            radius: f64::INFINITY,
        }],
        ArcSeg::Arc { radius, center, .. } => {
            let sweep = seg.sweep();
            let halves: Vec<ArcSeg> = if sweep > 0.9 * std::f64::consts::PI {
                let m = seg.point_at(0.5);
                vec![seg.with_endpoints(seg.start(), m), seg.with_endpoints(m, seg.end())]
            } else {
                vec![*seg]
            };
            halves
                .iter()
                .map(|h| {
                    let half = 0.5 * h.sweep();
                    let t0 = tangent_at(h, End::Start);
                    let b1 = h.start() + t0 * (radius * half.tan());
                    RationalArcBezier {
                        p0: h.start(),
                        p1: b1,
                        p2: h.end(),
                        w1: half.cos(),
                        theta: half,
                        center,
                        radius,
                    }
                })
                .collect()
        }
    }
}

/// Bézier pieces for every piece of the curve, grouped per curve piece.
pub fn pcc_to_bezier(curve: &PccCurve) -> Vec<Vec<RationalArcBezier>> {
    curve.segs.iter().map(piece_beziers).collect()
}

/// Point of the curve at parameter `t ∈ [0, n]`: piece `i` covers
/// `[i, i + 1)` and `t = n` gives the final endpoint.
pub fn pcc_eval(curve: &PccCurve, t: f64) -> Result<Point2> {
    let n = curve.len();
    if n == 0 || !(0.0..=n as f64).contains(&t) {
        return Err(Error::OutOfDomain { t, n });
    }
    if t == n as f64 {
        return Ok(curve.segs[n - 1].end());
    }
    let i = (t.floor() as usize).min(n - 1);
    let local = t - i as f64;
    let parts = piece_beziers(&curve.segs[i]);
    Ok(if parts.len() == 1 {
        parts[0].eval(local)
    } else if local < 0.5 {
        parts[0].eval(2.0 * local)
    } else {
        parts[1].eval(2.0 * local - 1.0)
    })
}
