//! Constrained biarcs: two tangent-continuous arcs joining two points with
//! prescribed unit tangents.
//!
//! Control points follow the usual tangent-leg layout:
//! `P1 = Ps + α Ts`, `P3 = Pe − β Te`, and the junction
//! `P2 = (β P1 + α P3)/(α + β)` with `‖P3 − P1‖ = α + β`.

pub mod bezier;

use crate::error::{Error, Result};
use crate::geom::{arc_from_start_tangent, tangent_at, ArcSeg, End, Point2, Vec2};
use crate::optimize::golden_section;

pub use bezier::{arc_to_bezier, pcc_eval, pcc_to_bezier, RationalArcBezier};

/// `|Ts·Te − 1|` below this counts as parallel tangents.
const PARALLEL_TOL: f64 = 1e-12;
/// Relative tolerance on the second admissibility condition.
const COND_REL_TOL: f64 = 1e-10;
/// Sub-arcs sweeping less than this are emitted as segments.
const MIN_SWEEP: f64 = 1e-7;

/// How the free parameter of the biarc family is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum BiarcParam {
    /// Pick α by the case analysis of [`choose_alpha`].
    #[default]
    Auto,
    /// Explicit start leg length.
    Alpha(f64),
    /// Ratio `r = α/β`.
    Ratio(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biarc {
    /// `Ps, P1, P2, P3, Pe`.
    pub control: [Point2; 5],
    pub alpha: f64,
    pub beta: f64,
    pub arcs: [ArcSeg; 2],
}

impl Biarc {
    pub fn junction(&self) -> Point2 {
        self.control[2]
    }

    /// Distance from `p` to the nearer of the two arcs.
    pub fn distance(&self, p: Point2) -> f64 {
        self.arcs[0].distance(p).min(self.arcs[1].distance(p))
    }
}

fn same_within(lhs: f64, rhs: f64) -> bool {
    (lhs - rhs).abs() <= COND_REL_TOL * lhs.abs().max(rhs.abs())
}

/// Whether a single biarc joins `(ps, ts)` to `(pe, te)`: the tangents must
/// not be parallel and `V·V ≠ 2(V·Ts)(V·Te)/(Ts·Te − 1)`.
pub fn biarc_admissible(ps: Point2, ts: Vec2, pe: Point2, te: Vec2) -> bool {
    let v = pe - ps;
    let c = ts.dot(te);
    if (c - 1.0).abs() <= PARALLEL_TOL || v.norm_sq() == 0.0 {
        return false;
    }
    // multiplied through by (c − 1) to avoid the division
    let lhs = v.norm_sq() * (c - 1.0);
    let rhs = 2.0 * v.dot(ts) * v.dot(te);
    !same_within(lhs, rhs)
}

/// Angle form of the second condition: `cos θ3 ≠ 2 cos θ1 cos θ2 + 1`, where
/// θ1, θ2, θ3 are the angles of (V, Ts), (V, Te) and (Ts, Te).
pub fn biarc_admissible_angles(ps: Point2, ts: Vec2, pe: Point2, te: Vec2) -> bool {
    let v = pe - ps;
    let angle = |a: Vec2, b: Vec2| a.cross(b).atan2(a.dot(b));
    let c1 = angle(v, ts).cos();
    let c2 = angle(v, te).cos();
    let c3 = angle(ts, te).cos();
    if (c3 - 1.0).abs() <= PARALLEL_TOL || v.norm_sq() == 0.0 {
        return false;
    }
    !same_within(c3 - 1.0, 2.0 * c1 * c2)
}

/// `β = (2α V·Ts − V·V) / (2α(Ts·Te − 1) − 2 V·Te)`.
pub fn beta_of_alpha(alpha: f64, v: Vec2, ts: Vec2, te: Vec2) -> Result<f64> {
    let den = 2.0 * alpha * (ts.dot(te) - 1.0) - 2.0 * v.dot(te);
    if den.abs() < 1e-14 {
        return Err(Error::DenominatorZero);
    }
    Ok((2.0 * alpha * v.dot(ts) - v.norm_sq()) / den)
}

/// A start leg length α > 0 for which [`beta_of_alpha`] is positive.
///
/// With `α1 = V·V/(2 V·Ts)`, `α2 = V·Te/(Ts·Te − 1)` and
/// `K = V·Ts/(Ts·Te − 1)`, β equals `K (α − α1)/(α − α2)`:
/// for `K ≥ 0` any `α > max(α2, 0)` works and `max(α2, 0) + ‖V‖/2` is
/// returned; for `K < 0` the midpoint of the interval between
/// `max(min(α1, α2), 0)` and `max(α1, α2)` is returned.
pub fn choose_alpha(v: Vec2, ts: Vec2, te: Vec2) -> Result<f64> {
    let ps = Point2::new(0.0, 0.0);
    if !biarc_admissible(ps, ts, ps + v, te) {
        return Err(Error::Inadmissible);
    }
    let c = ts.dot(te) - 1.0;
    let d = v.norm();
    let vts = v.dot(ts);
    let alpha2 = v.dot(te) / c;
    let k = vts / c;
    let alpha = if vts.abs() <= 1e-14 * d || k > 0.0 {
        alpha2.max(0.0) + 0.5 * d
    } else {
        let alpha1 = v.norm_sq() / (2.0 * vts);
        let lo = alpha1.min(alpha2).max(0.0);
        let hi = alpha1.max(alpha2);
        0.5 * (lo + hi)
    };
    let beta = beta_of_alpha(alpha, v, ts, te)?;
    if !(beta > 0.0) {
        return Err(Error::NegativeBeta(beta));
    }
    Ok(alpha)
}

/// Leg lengths `(α, β)` with `α = r β`, from the closure condition
/// `2r(c − 1)β² − 2(r V·Ts + V·Te)β + V·V = 0`, `c = Ts·Te`.
///
/// The quadratic has a negative leading and a positive constant
/// coefficient, so it has exactly one positive root.
pub fn legs_for_ratio(r: f64, v: Vec2, ts: Vec2, te: Vec2) -> Result<(f64, f64)> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::NegativeBeta(r));
    }
    let c = ts.dot(te);
    if (c - 1.0).abs() <= PARALLEL_TOL {
        return Err(Error::Inadmissible);
    }
    let a = 2.0 * r * (c - 1.0);
    let b = -2.0 * (r * v.dot(ts) + v.dot(te));
    let cc = v.norm_sq();
    let disc = b * b - 4.0 * a * cc;
    let beta = 2.0 * cc / (-b + disc.sqrt());
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::NegativeBeta(beta));
    }
    Ok((r * beta, beta))
}

/// Arc leaving `start` along `dir`, ending at `end`; a segment when the
/// turn is negligible.
fn leg_arc(start: Point2, dir: Vec2, next_dir: Vec2, end: Point2) -> ArcSeg {
    let turn = dir.cross(next_dir).atan2(dir.dot(next_dir)).abs();
    if turn < MIN_SWEEP {
        ArcSeg::segment(start, end)
    } else {
        arc_from_start_tangent(start, dir, end)
    }
}

/// Builds the biarc joining `(ps, ts)` to `(pe, te)`.
pub fn build_biarc(ps: Point2, ts: Vec2, pe: Point2, te: Vec2, param: BiarcParam) -> Result<Biarc> {
    if !biarc_admissible(ps, ts, pe, te) {
        return Err(Error::Inadmissible);
    }
    let v = pe - ps;
    let (alpha, beta) = match param {
        BiarcParam::Auto => {
            let a = choose_alpha(v, ts, te)?;
            (a, beta_of_alpha(a, v, ts, te)?)
        }
        BiarcParam::Alpha(a) => {
            if !(a > 0.0) {
                return Err(Error::NegativeBeta(a));
            }
            (a, beta_of_alpha(a, v, ts, te)?)
        }
        BiarcParam::Ratio(r) => legs_for_ratio(r, v, ts, te)?,
    };
    if !(beta > 0.0) {
        return Err(Error::NegativeBeta(beta));
    }
    let p1 = ps + ts * alpha;
    let p3 = pe - te * beta;
    let p2 = Point2::new(
        (beta * p1.x + alpha * p3.x) / (alpha + beta),
        (beta * p1.y + alpha * p3.y) / (alpha + beta),
    );
    let mid_dir = (p3 - p1).normalized().ok_or(Error::Inadmissible)?;
    let a1 = leg_arc(ps, ts, mid_dir, p2);
    let a2 = leg_arc(p2, mid_dir, te, pe);
    Ok(Biarc {
        control: [ps, p1, p2, p3, pe],
        alpha,
        beta,
        arcs: [a1, a2],
    })
}

/// Joins `(ps, ts)` to `(pe, te)` with one biarc, or with two when the
/// configuration admits no single biarc. Parallel tangents along the chord
/// give a single segment.
pub fn connect(ps: Point2, ts: Vec2, pe: Point2, te: Vec2, param: BiarcParam) -> Result<Vec<ArcSeg>> {
    if let Ok(b) = build_biarc(ps, ts, pe, te, param) {
        return Ok(b.arcs.to_vec());
    }
    let v = pe - ps;
    let vhat = v.normalized().ok_or(Error::DuplicatePoints)?;
    if ts.dot(te) >= 1.0 - 1e-9 && vhat.dot(ts) >= 1.0 - 1e-9 {
        return Ok(vec![ArcSeg::segment(ps, pe)]);
    }
    let (m, tm) = split_point(ps, ts, pe, te).ok_or(Error::Inadmissible)?;
    let first = build_biarc(ps, ts, m, tm, param)?;
    let second = build_biarc(m, tm, pe, te, param)?;
    Ok(vec![first.arcs[0], first.arcs[1], second.arcs[0], second.arcs[1]])
}

/// Intermediate point and tangent for a two-biarc connection.
///
/// Candidates are placed on the chord's perpendicular bisector, shifted
/// along the bisector of `(ts, −te)`; tangents tried are the chord
/// direction, the normalized tangent average and the reflection of `ts`
/// across the chord. The first candidate admitting both halves wins.
fn split_point(ps: Point2, ts: Vec2, pe: Point2, te: Vec2) -> Option<(Point2, Vec2)> {
    let v = pe - ps;
    let d = v.norm();
    let vhat = v.normalized()?;
    let mid = ps.midpoint(pe);
    let bis = (ts - te).normalized().unwrap_or(vhat.perp());
    let reflect = vhat * (2.0 * vhat.dot(ts)) - ts;
    let tangents = [Some(vhat), (ts + te).normalized(), reflect.normalized()];
    for offset in [0.0, 0.25, -0.25, 0.5, -0.5] {
        let m = mid + bis * (offset * d);
        for tm in tangents.iter().flatten() {
            if biarc_admissible(ps, ts, m, *tm)
                && biarc_admissible(m, *tm, pe, te)
                && build_biarc(ps, ts, m, *tm, BiarcParam::Auto).is_ok()
                && build_biarc(m, *tm, pe, te, BiarcParam::Auto).is_ok()
            {
                return Some((m, *tm));
            }
        }
    }
    None
}

/// Biarc whose ratio minimizes the largest distance to `points`, searched
/// by golden section on `ln r` over `[ln 1/8, ln 8]`. Returns the biarc and
/// its deviation.
pub fn fit_biarc_optimal(
    ps: Point2,
    ts: Vec2,
    pe: Point2,
    te: Vec2,
    points: &[Point2],
) -> Result<(Biarc, f64)> {
    let deviation = |b: &Biarc| points.iter().map(|&p| b.distance(p)).fold(0.0, f64::max);
    let eval = |lr: f64| {
        build_biarc(ps, ts, pe, te, BiarcParam::Ratio(lr.exp()))
            .map(|b| deviation(&b))
            .unwrap_or(f64::INFINITY)
    };
    let bound = 8f64.ln();
    let (lr, _) = golden_section(eval, -bound, bound, 1e-6);
    let best = build_biarc(ps, ts, pe, te, BiarcParam::Ratio(lr.exp()));
    let unit = build_biarc(ps, ts, pe, te, BiarcParam::Ratio(1.0));
    let mut candidates: Vec<Biarc> = [best, unit].into_iter().flatten().collect();
    candidates.sort_by(|a, b| deviation(a).total_cmp(&deviation(b)));
    let b = candidates.into_iter().next().ok_or(Error::Inadmissible)?;
    Ok((b, deviation(&b)))
}

/// Unit tangents at both ends of the biarc junction, for G1 checks.
pub fn junction_tangents(b: &Biarc) -> (Vec2, Vec2) {
    (tangent_at(&b.arcs[0], End::End), tangent_at(&b.arcs[1], End::Start))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn fig2() -> (Point2, Vec2, Point2, Vec2) {
        let s = 0.5f64.sqrt();
        (p(0., 0.), Vec2::new(s, s), p(5., 1.), Vec2::new(0., -1.))
    }

    #[test]
    fn admissibility_examples() {
        let (ps, ts, pe, te) = fig2();
        assert!(biarc_admissible(ps, ts, pe, te));
        let t = Vec2::new(0.6, 0.8);
        assert!(!biarc_admissible(p(0., 0.), t, p(3., -1.), t));
        assert!(!biarc_admissible(p(0., 0.), Vec2::new(1., 0.), p(1., 0.), Vec2::new(-1., 0.)));
        assert!(!biarc_admissible_angles(p(0., 0.), Vec2::new(1., 0.), p(1., 0.), Vec2::new(-1., 0.)));
    }

    #[test]
    fn beta_examples() {
        let v = Vec2::new(2., 0.);
        let (ts, te) = (Vec2::new(0., 1.), Vec2::new(0., -1.));
        assert_abs_diff_eq!(beta_of_alpha(1.0, v, ts, te).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(beta_of_alpha(2.0, v, ts, te).unwrap(), 0.5, epsilon = 1e-15);
        assert_eq!(choose_alpha(v, ts, te).unwrap(), 1.0);

        let (ps, ts, pe, te) = fig2();
        let v = pe - ps;
        let beta = beta_of_alpha(1.0, v, ts, te).unwrap();
        let gap = (pe - te * beta) - (ps + ts * 1.0);
        assert_abs_diff_eq!(gap.norm(), 1.0 + beta, epsilon = 1e-12);
    }

    #[test]
    fn beta_denominator_zero() {
        // 2α(c − 1) = 2 V·Te with c = 0, V·Te = −1, α = 1
        let r = beta_of_alpha(1.0, Vec2::new(0., 1.), Vec2::new(1., 0.), Vec2::new(0., -1.));
        assert_eq!(r, Err(Error::DenominatorZero));
    }

    #[test]
    fn semicircle_biarc() {
        let b = build_biarc(p(-1., 0.), Vec2::new(0., 1.), p(1., 0.), Vec2::new(0., -1.), BiarcParam::Alpha(1.0)).unwrap();
        assert_eq!(b.control[1], p(-1., 1.));
        assert_eq!(b.control[3], p(1., 1.));
        assert_eq!(b.junction(), p(0., 1.));
        for a in &b.arcs {
            match *a {
                ArcSeg::Arc { center, radius, .. } => {
                    assert_abs_diff_eq!(center.x, 0.0, epsilon = 1e-12);
                    assert_abs_diff_eq!(center.y, 0.0, epsilon = 1e-12);
                    assert_abs_diff_eq!(radius, 1.0, epsilon = 1e-12);
                }
                _ => panic!("expected arc"),
            }
            assert_abs_diff_eq!(a.sweep(), PI / 2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn figure_two_configuration() {
        let (ps, ts, pe, te) = fig2();
        let b = build_biarc(ps, ts, pe, te, BiarcParam::Auto).unwrap();
        for a in &b.arcs {
            assert!(a.sweep() < PI);
        }
        let (t1, t2) = junction_tangents(&b);
        assert!(t1.dot(t2) >= 1.0 - 1e-12);
    }

    #[test]
    fn negative_alpha_is_rejected() {
        let (ps, ts, pe, te) = fig2();
        assert!(matches!(build_biarc(ps, ts, pe, te, BiarcParam::Alpha(-1.0)), Err(Error::NegativeBeta(_))));
    }

    #[test]
    fn inadmissible_configs_split_into_two_biarcs() {
        let t = Vec2::new(0., 1.);
        let pieces = connect(p(0., 0.), t, p(3., 0.), t, BiarcParam::Auto).unwrap();
        assert_eq!(pieces.len(), 4);
        assert_eq!(pieces[0].start(), p(0., 0.));
        assert_eq!(pieces[3].end(), p(3., 0.));
        for w in pieces.windows(2) {
            assert!(w[0].end().dist(w[1].start()) < 1e-12);
            assert!(tangent_at(&w[0], End::End).dot(tangent_at(&w[1], End::Start)) > 1.0 - 1e-12);
        }
        let straight = connect(p(0., 0.), Vec2::new(1., 0.), p(3., 0.), Vec2::new(1., 0.), BiarcParam::Auto).unwrap();
        assert_eq!(straight, vec![ArcSeg::segment(p(0., 0.), p(3., 0.))]);
    }

    #[test]
    fn optimal_ratio_tracks_a_circle() {
        // quarter circle samples, exact tangents: some ratio reproduces it
        let pts: Vec<Point2> = (0..=10).map(|k| {
            let a = k as f64 * PI / 20.0;
            p(a.cos(), a.sin())
        }).collect();
        let (b, dev) = fit_biarc_optimal(p(1., 0.), Vec2::new(0., 1.), p(0., 1.), Vec2::new(-1., 0.), &pts).unwrap();
        assert!(dev < 1e-6, "deviation {dev}");
        assert!(b.alpha > 0.0 && b.beta > 0.0);
    }

    fn unit() -> impl Strategy<Value = Vec2> {
        (0.0..2.0 * PI).prop_map(Vec2::from_angle)
    }

    proptest! {
        #[test]
        fn choose_alpha_gives_positive_beta(
            vx in -10.0..10.0f64, vy in -10.0..10.0f64, ts in unit(), te in unit()
        ) {
            let v = Vec2::new(vx, vy);
            prop_assume!(v.norm() > 1e-3);
            prop_assume!(biarc_admissible(Point2::new(0., 0.), ts, Point2::new(vx, vy), te));
            let a = choose_alpha(v, ts, te).unwrap();
            prop_assert!(a > 0.0);
            prop_assert!(beta_of_alpha(a, v, ts, te).unwrap() > 0.0);
        }

        #[test]
        fn ratio_legs_satisfy_closure(
            vx in -10.0..10.0f64, vy in -10.0..10.0f64, ts in unit(), te in unit(), lr in -2.0..2.0f64
        ) {
            let v = Vec2::new(vx, vy);
            prop_assume!(v.norm() > 1e-3 && ts.dot(te) < 1.0 - 1e-6);
            let (a, b) = legs_for_ratio(lr.exp(), v, ts, te).unwrap();
            let gap = (Point2::new(vx, vy) - te * b) - (Point2::new(0., 0.) + ts * a);
            prop_assert!((gap.norm() - (a + b)).abs() <= 1e-9 * (1.0 + a + b));
        }

        #[test]
        fn connect_is_g1(
            x in -20.0..20.0f64, y in -20.0..20.0f64, ts in unit(), te in unit()
        ) {
            prop_assume!(x.hypot(y) > 1e-2);
            let pe = Point2::new(x, y);
            let pieces = connect(Point2::new(0., 0.), ts, pe, te, BiarcParam::Auto).unwrap();
            prop_assert!(pieces[0].start() == Point2::new(0., 0.));
            prop_assert!(pieces.last().unwrap().end() == pe);
            for w in pieces.windows(2) {
                prop_assert!(w[0].end().dist(w[1].start()) < 1e-9);
                prop_assert!(tangent_at(&w[0], End::End).dot(tangent_at(&w[1], End::Start)) > 1.0 - 1e-9);
            }
        }
    }
}
