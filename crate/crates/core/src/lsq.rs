//! Least-squares circle fitting.
//!
//! [`minimize_f`] fits an arc that interpolates two fixed endpoints: the
//! center is restricted to the chord's perpendicular bisector, parametrized
//! by the signed offset `t`, and the summed squared radial residuals of the
//! interior points are minimized. [`taubin_fit`] is the unconstrained
//! algebraic fit used by corner detection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{ArcSeg, Circle, CircleOrLine, Line, Orientation, Point2, Vec2, R_DEGENERATE};
use crate::optimize::golden_section;

/// Distance below which a candidate center is considered to hit a data point.
const CENTER_HIT: f64 = 1e-12;

/// Chord between the two interpolated endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChordFrame {
    pub p0: Point2,
    pub p_n1: Point2,
    pub d: f64,
    pub u: Vec2,
    pub u_perp: Vec2,
}

impl ChordFrame {
    pub fn new(p0: Point2, p_n1: Point2) -> Result<Self> {
        let v = p_n1 - p0;
        let d = v.norm();
        let u = v.normalized().ok_or(Error::DuplicatePoints)?;
        Ok(Self {
            p0,
            p_n1,
            d,
            u,
            u_perp: u.perp(),
        })
    }

    pub fn midpoint(&self) -> Point2 {
        self.p0.midpoint(self.p_n1)
    }

    /// `C(t) = P0 + (d/2) u + t u'`.
    pub fn center(&self, t: f64) -> Point2 {
        self.p0 + self.u * (0.5 * self.d) + self.u_perp * t
    }

    /// `R(t) = sqrt(t² + d²/4)`.
    pub fn radius(&self, t: f64) -> f64 {
        t.hypot(0.5 * self.d)
    }

    /// Coordinates of `p` in the chord frame: `(u'·(p − M), u·(p − M))`.
    fn local(&self, p: Point2) -> (f64, f64) {
        let w = p - self.midpoint();
        (self.u_perp.dot(w), self.u.dot(w))
    }
}

/// Interior points pre-projected into a chord frame, for fast evaluation of
/// the objective.
#[derive(Debug, Clone)]
pub struct FramedPoints {
    half: f64,
    a: Vec<f64>,
    b2: Vec<f64>,
    /// `h² − a² − b²` per point.
    c: Vec<f64>,
}

impl FramedPoints {
    pub fn new(frame: &ChordFrame, interior: &[Point2]) -> Self {
        let half = 0.5 * frame.d;
        let (a, b): (Vec<f64>, Vec<f64>) = interior.iter().map(|&p| frame.local(p)).unzip();
        let b2: Vec<f64> = b.iter().map(|b| b * b).collect();
        let c = a.iter().zip(&b2).map(|(a, b2)| (half * half - b2) - a * a).collect();
        Self { half, a, b2, c }
    }

    /// Objective value at `t`. The residual `R − dist` is evaluated as
    /// `(R² − dist²)/(R + dist)` so that large `|t|` loses no precision.
    pub fn value(&self, t: f64) -> f64 {
        self.sum(t).0
    }

    /// Like [`FramedPoints::value`] but fails when the center hits a point.
    pub fn f(&self, t: f64) -> Result<f64> {
        match self.sum(t) {
            (_, true) => Err(Error::CenterHitsPoint),
            (v, false) => Ok(v),
        }
    }

    fn sum(&self, t: f64) -> (f64, bool) {
        // sqrt rather than hypot: coordinates are bounded far below overflow
        // and this loop dominates every fit
        let r = (t * t + self.half * self.half).sqrt();
        let mut sum = 0.0;
        let mut min_d2 = f64::INFINITY;
        for ((&a, &b2), &c) in self.a.iter().zip(&self.b2).zip(&self.c) {
            let e = a - t;
            let d2 = b2 + e * e;
            min_d2 = min_d2.min(d2);
            let res = (c + 2.0 * a * t) / (r + d2.sqrt());
            sum += res * res;
        }
        (sum, min_d2 < CENTER_HIT * CENTER_HIT)
    }

    fn f_or_inf(&self, t: f64) -> f64 {
        self.f(t).unwrap_or(f64::INFINITY)
    }

    pub fn limit(&self) -> f64 {
        self.a.iter().map(|a| a * a).sum()
    }

    /// Largest distance of any interior point from the chord midpoint.
    fn spread(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.b2)
            .map(|(a, b2)| (a * a + b2).sqrt())
            .fold(0.0, f64::max)
    }
}

/// `Σ (R(t) − ‖P_k − C(t)‖)²` over the interior points.
///
/// The objective itself is continuous where the center meets a data point;
/// only its derivative is not. Use [`objective_f_strict`] to reject those
/// parameters.
pub fn objective_f(t: f64, frame: &ChordFrame, interior: &[Point2]) -> f64 {
    FramedPoints::new(frame, interior).value(t)
}

/// [`objective_f`], failing with `CenterHitsPoint` when `C(t)` lies within
/// 1e-12 mm of a data point.
pub fn objective_f_strict(t: f64, frame: &ChordFrame, interior: &[Point2]) -> Result<f64> {
    FramedPoints::new(frame, interior).f(t)
}

/// Value of the objective as `|t| → ∞`: `Σ (u'·(P0 − P_i))²`.
pub fn limit_f(frame: &ChordFrame, interior: &[Point2]) -> f64 {
    interior
        .iter()
        .map(|&p| {
            let s = frame.u_perp.dot(frame.p0 - p);
            s * s
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Number of uniform samples on the initial bracket.
    pub grid: usize,
    /// Golden-section stopping width, relative to the chord length.
    pub refine_rel: f64,
    /// The bracket half-width is this factor times `max(d, spread)`.
    pub bracket_factor: f64,
    /// Radius beyond which the fit degenerates into a segment.
    pub r_degenerate: f64,
    /// How many grid local minima are refined.
    pub candidates: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            grid: 1024,
            refine_rel: 1e-10,
            bracket_factor: 10.0,
            r_degenerate: R_DEGENERATE,
            candidates: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedArcFit {
    pub t_star: f64,
    pub center: Point2,
    pub radius: f64,
    pub max_residual: f64,
    pub is_segment: bool,
    /// Objective value at `t_star` (the limit value for segments).
    pub f_star: f64,
    /// Half-width of the searched interval holding `t_star`: the initial
    /// bracket, or the reach of the edge walk that found the minimum.
    pub bracket: f64,
}

/// Minimizes the constrained objective over `t`.
///
/// A uniform grid over `[−T, T]` locates candidate basins, each of which is
/// refined by golden-section search. When the objective still decreases at
/// a bracket edge the edge is pushed outwards by doubling until it turns
/// or the radius cap is reached; in the latter case, and whenever the
/// limit value beats every finite minimum, the result is a segment.
pub fn minimize_f(
    frame: &ChordFrame,
    interior: &[Point2],
    opts: &FitOptions,
) -> Result<ConstrainedArcFit> {
    if interior.is_empty() {
        return Err(Error::TooFewPoints { needed: 3, got: 2 });
    }
    let fp = FramedPoints::new(frame, interior);
    let limit = fp.limit();
    let tol = opts.refine_rel * frame.d;
    let big_t = opts.bracket_factor * frame.d.max(fp.spread());
    let n = opts.grid.max(3);
    let step = 2.0 * big_t / (n - 1) as f64;
    let ts: Vec<f64> = (0..n).map(|i| -big_t + step * i as f64).collect();
    let fs: Vec<f64> = ts.iter().map(|&t| fp.f_or_inf(t)).collect();

    let mut minima: Vec<usize> = (1..n - 1)
        .filter(|&i| fs[i].is_finite() && fs[i] <= fs[i - 1] && fs[i] <= fs[i + 1])
        .collect();
    minima.sort_by(|&i, &j| fs[i].total_cmp(&fs[j]));
    minima.truncate(opts.candidates.max(1));

    let mut best_t = f64::NAN;
    let mut best_f = f64::INFINITY;
    let mut consider = |t: f64, v: f64| {
        if v < best_f {
            best_t = t;
            best_f = v;
        }
    };
    for &i in &minima {
        let (t, v) = golden_section(|t| fp.f_or_inf(t), ts[i - 1], ts[i + 1], tol);
        let (t, v) = if fs[i] < v { (ts[i], fs[i]) } else { (t, v) };
        consider(t, v);
    }

    // outer end of each edge walk, to report the bracket holding the winner
    let mut reach = [big_t, big_t];
    let mut unbounded = false;
    for sign in [-1.0, 1.0] {
        let (edge, inner) = if sign < 0.0 { (0, 1) } else { (n - 1, n - 2) };
        if !(fs[edge] < fs[inner]) {
            consider(ts[edge], fs[edge]);
            continue;
        }
        // Objective still falling at the edge: walk outwards.
        let mut prev2 = ts[inner];
        let mut prev = ts[edge];
        let mut f_prev = fs[edge];
        let mut turned = false;
        loop {
            let t = 2.0 * prev;
            if frame.radius(t) > opts.r_degenerate {
                break;
            }
            reach[(sign > 0.0) as usize] = t.abs();
            let v = fp.f_or_inf(t);
            if v >= f_prev {
                let (lo, hi) = if sign < 0.0 { (t, prev2) } else { (prev2, t) };
                let (tm, vm) = golden_section(|x| fp.f_or_inf(x), lo, hi, tol);
                let (tm, vm) = if f_prev < vm { (prev, f_prev) } else { (tm, vm) };
                consider(tm, vm);
                turned = true;
                break;
            }
            prev2 = prev;
            prev = t;
            f_prev = v;
        }
        if !turned {
            unbounded = true;
            consider(prev, f_prev);
        }
    }

    let bracket = if best_t.abs() <= big_t {
        big_t
    } else {
        reach[(best_t > 0.0) as usize]
    };
    let line_wins = !best_f.is_finite() || limit < best_f || (unbounded && limit <= best_f);
    if line_wins || frame.radius(best_t) > opts.r_degenerate {
        let max_residual = interior
            .iter()
            .map(|&p| frame.u_perp.dot(p - frame.p0).abs())
            .fold(0.0, f64::max);
        return Ok(ConstrainedArcFit {
            t_star: if best_t.is_finite() { best_t } else { 0.0 },
            center: frame.midpoint(),
            radius: f64::INFINITY,
            max_residual,
            is_segment: true,
            f_star: limit,
            bracket,
        });
    }

    let center = frame.center(best_t);
    let radius = frame.radius(best_t);
    let circle = Circle::new(center, radius);
    let max_residual = interior
        .iter()
        .map(|&p| crate::geom::radial_residual(p, &circle))
        .fold(0.0, f64::max);
    Ok(ConstrainedArcFit {
        t_star: best_t,
        center,
        radius,
        max_residual,
        is_segment: false,
        f_star: best_f,
        bracket,
    })
}

/// Fits the constrained arc through the first and last of `window`,
/// approximating everything in between.
pub fn fit_window(window: &[Point2], opts: &FitOptions) -> Result<ConstrainedArcFit> {
    if window.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: window.len(),
        });
    }
    let frame = ChordFrame::new(window[0], window[window.len() - 1])?;
    minimize_f(&frame, &window[1..window.len() - 1], opts)
}

/// Turns a fit into a curve piece from `frame.p0` to `frame.p_n1`.
///
/// Of the two arcs of the fitted circle joining the endpoints, the one with
/// the smaller summed squared distance to the interior points is chosen.
pub fn fit_to_piece(fit: &ConstrainedArcFit, frame: &ChordFrame, interior: &[Point2]) -> ArcSeg {
    if fit.is_segment {
        return ArcSeg::segment(frame.p0, frame.p_n1);
    }
    let make = |o: Orientation| ArcSeg::Arc {
        start: frame.p0,
        end: frame.p_n1,
        center: fit.center,
        radius: fit.radius,
        orientation: o,
    };
    let cw = make(Orientation::Cw);
    let ccw = make(Orientation::Ccw);
    let cost = |s: &ArcSeg| interior.iter().map(|&p| s.distance(p).powi(2)).sum::<f64>();
    let (c_cw, c_ccw) = (cost(&cw), cost(&ccw));
    if c_cw < c_ccw || (c_cw == c_ccw && ccw.sweep() > cw.sweep()) {
        cw
    } else {
        ccw
    }
}

/// Fits a window and returns the resulting piece together with the fit.
pub fn fit_window_piece(window: &[Point2], opts: &FitOptions) -> Result<(ArcSeg, ConstrainedArcFit)> {
    let fit = fit_window(window, opts)?;
    let frame = ChordFrame::new(window[0], window[window.len() - 1])?;
    let piece = fit_to_piece(&fit, &frame, &window[1..window.len() - 1]);
    Ok((piece, fit))
}

/// Taubin algebraic circle fit, solved by Newton iteration on the
/// characteristic polynomial.
///
/// Returns a line (principal axis of the points) when the fitted curvature
/// is below `1 / R_DEGENERATE`.
pub fn taubin_fit(points: &[Point2]) -> Result<CircleOrLine> {
    let mut distinct = 0;
    for (i, p) in points.iter().enumerate() {
        if points[..i].iter().all(|q| q != p) {
            distinct += 1;
            if distinct >= 3 {
                break;
            }
        }
    }
    if distinct < 3 {
        return Err(Error::DegenerateInput("Taubin fit needs three distinct points"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.x).sum::<f64>() / n;
    let my = points.iter().map(|p| p.y).sum::<f64>() / n;
    let (mut mxx, mut myy, mut mxy, mut mxz, mut myz, mut mzz) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let x = p.x - mx;
        let y = p.y - my;
        let z = x * x + y * y;
        mxx += x * x;
        myy += y * y;
        mxy += x * y;
        mxz += x * z;
        myz += y * z;
        mzz += z * z;
    }
    mxx /= n;
    myy /= n;
    mxy /= n;
    mxz /= n;
    myz /= n;
    mzz /= n;

    let mz = mxx + myy;
    let cov_xy = mxx * myy - mxy * mxy;
    let var_z = mzz - mz * mz;
    let a3 = 4.0 * mz;
    let a2 = -3.0 * mz * mz - mzz;
    let a1 = var_z * mz + 4.0 * cov_xy * mz - mxz * mxz - myz * myz;
    let a0 = mxz * (mxz * myy - myz * mxy) + myz * (myz * mxx - mxz * mxy) - var_z * cov_xy;
    let a22 = 2.0 * a2;
    let a33 = 3.0 * a3;

    let mut x = 0.0f64;
    let mut y = a0;
    for _ in 0..100 {
        let dy = a1 + x * (a22 + a33 * x);
        let x_new = x - y / dy;
        if x_new == x || !x_new.is_finite() {
            break;
        }
        let y_new = a0 + x_new * (a1 + x_new * (a2 + x_new * a3));
        if y_new.abs() >= y.abs() {
            break;
        }
        x = x_new;
        y = y_new;
    }

    let det = x * x - x * mz + cov_xy;
    let cx = (mxz * (myy - x) - myz * mxy) / det / 2.0;
    let cy = (myz * (mxx - x) - mxz * mxy) / det / 2.0;
    let radius = (cx * cx + cy * cy + mz).sqrt();
    if !radius.is_finite() || radius > R_DEGENERATE {
        return Ok(CircleOrLine::Line(principal_line(points, Point2::new(mx, my), mxx, myy, mxy)));
    }
    Ok(CircleOrLine::Circle(Circle::new(
        Point2::new(cx + mx, cy + my),
        radius,
    )))
}

fn principal_line(points: &[Point2], centroid: Point2, mxx: f64, myy: f64, mxy: f64) -> Line {
    let theta = 0.5 * (2.0 * mxy).atan2(mxx - myy);
    let mut dir = Vec2::from_angle(theta);
    // Orient along the point order so callers get a stable direction.
    if let (Some(first), Some(last)) = (points.first(), points.last()) {
        if dir.dot(*last - *first) < 0.0 {
            dir = -dir;
        }
    }
    Line {
        point: centroid,
        dir,
    }
}

/// Taubin objective `Σ (d_i² − R²)² / (4/n · Σ d_i²)` of a candidate circle.
pub fn taubin_objective(points: &[Point2], center: Point2, radius: f64) -> f64 {
    let n = points.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for p in points {
        let d2 = (*p - center).norm_sq();
        num += (d2 - radius * radius).powi(2);
        den += d2;
    }
    num / (4.0 / n * den)
}
