//! Planar primitives: points, vectors, circles, arcs and the elementary
//! constructions the fitting code is built from.
//!
//! All lengths are millimetres. Tolerances in this module are absolute.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Circumradius above which three points are treated as collinear.
pub const R_DEGENERATE: f64 = 1e7;

/// Distance under which two circles are considered tangent.
pub const TANGENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn midpoint(self, other: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    pub fn to_vec(self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    /// Affine combination `(1 - s) * self + s * other`.
    pub fn lerp(self, other: Point2, s: f64) -> Point2 {
        Point2::new(
            self.x + s * (other.x - self.x),
            self.y + s * (other.y - self.y),
        )
    }
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3-D cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn norm_sq(self) -> f64 {
        self.x * self.x + self.y * self.y
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| Vec2::new(self.x / n, self.y / n))
    }

    /// Counter-clockwise rotation by a right angle.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn rotated(self, theta: f64) -> Vec2 {
        let (s, c) = theta.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }
}

impl Sub for Point2 {
    type Output = Vec2;
    fn sub(self, o: Point2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Add<Vec2> for Point2 {
    type Output = Point2;
    fn add(self, v: Vec2) -> Point2 {
        Point2::new(self.x + v.x, self.y + v.y)
    }
}

impl Sub<Vec2> for Point2 {
    type Output = Point2;
    fn sub(self, v: Vec2) -> Point2 {
        Point2::new(self.x - v.x, self.y - v.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Point2,
    pub radius: f64,
}

impl Circle {
    pub fn new(center: Point2, radius: f64) -> Self {
        Self { center, radius }
    }
}

/// Infinite line through `point` with unit direction `dir`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub point: Point2,
    pub dir: Vec2,
}

impl Line {
    pub fn through(a: Point2, b: Point2) -> Option<Line> {
        (b - a).normalized().map(|dir| Line { point: a, dir })
    }

    pub fn distance(&self, p: Point2) -> f64 {
        self.dir.cross(p - self.point).abs()
    }

    pub fn project(&self, p: Point2) -> Point2 {
        self.point + self.dir * self.dir.dot(p - self.point)
    }
}

/// Result of a circle construction that may degenerate into a straight line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CircleOrLine {
    Circle(Circle),
    Line(Line),
}

impl CircleOrLine {
    /// Distance from `p` to the circle (radial residual) or to the line.
    pub fn distance(&self, p: Point2) -> f64 {
        match self {
            CircleOrLine::Circle(c) => radial_residual(p, c),
            CircleOrLine::Line(l) => l.distance(p),
        }
    }

    pub fn as_circle(&self) -> Option<&Circle> {
        match self {
            CircleOrLine::Circle(c) => Some(c),
            CircleOrLine::Line(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Ccw,
    Cw,
}

impl Orientation {
    /// `+1` for counter-clockwise, `-1` for clockwise.
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Ccw => 1.0,
            Orientation::Cw => -1.0,
        }
    }

    pub fn reversed(self) -> Orientation {
        match self {
            Orientation::Ccw => Orientation::Cw,
            Orientation::Cw => Orientation::Ccw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Start,
    End,
}

/// One piece of a piecewise-circular curve.
///
/// Arcs are stored by endpoints, center and orientation; the sweep angle is
/// derived. Arcs produced by fitting may sweep more than a half turn, arcs
/// produced by biarc construction never do.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ArcSeg {
    Segment {
        start: Point2,
        end: Point2,
    },
    Arc {
        start: Point2,
        end: Point2,
        center: Point2,
        radius: f64,
        orientation: Orientation,
    },
}

impl ArcSeg {
    pub fn segment(start: Point2, end: Point2) -> ArcSeg {
        ArcSeg::Segment { start, end }
    }

    /// Arc from `start` to `end` around `center`. The radius is taken as the
    /// mean of both endpoint distances.
    pub fn arc(start: Point2, end: Point2, center: Point2, orientation: Orientation) -> ArcSeg {
        let radius = 0.5 * (start.dist(center) + end.dist(center));
        ArcSeg::Arc {
            start,
            end,
            center,
            radius,
            orientation,
        }
    }

    pub fn start(&self) -> Point2 {
        match *self {
            ArcSeg::Segment { start, .. } | ArcSeg::Arc { start, .. } => start,
        }
    }

    pub fn end(&self) -> Point2 {
        match *self {
            ArcSeg::Segment { end, .. } | ArcSeg::Arc { end, .. } => end,
        }
    }

    pub fn is_arc(&self) -> bool {
        matches!(self, ArcSeg::Arc { .. })
    }

    /// Central angle swept from start to end, in `[0, 2π)`. Zero for segments.
    pub fn sweep(&self) -> f64 {
        match *self {
            ArcSeg::Segment { .. } => 0.0,
            ArcSeg::Arc {
                start,
                end,
                center,
                orientation,
                ..
            } => {
                let a0 = (start - center).angle();
                let a1 = (end - center).angle();
                wrap_angle(orientation.sign() * (a1 - a0))
            }
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            ArcSeg::Segment { start, end } => start.dist(end),
            ArcSeg::Arc { radius, .. } => radius * self.sweep(),
        }
    }

    /// Point at arclength fraction `s ∈ [0, 1]`.
    pub fn point_at(&self, s: f64) -> Point2 {
        match *self {
            ArcSeg::Segment { start, end } => start.lerp(end, s),
            ArcSeg::Arc {
                start,
                center,
                radius,
                orientation,
                ..
            } => {
                if s <= 0.0 {
                    return start;
                }
                if s >= 1.0 {
                    return self.end();
                }
                let a0 = (start - center).angle();
                let a = a0 + orientation.sign() * s * self.sweep();
                center + Vec2::from_angle(a) * radius
            }
        }
    }

    /// Piece traversed in the opposite direction.
    pub fn reversed(&self) -> ArcSeg {
        match *self {
            ArcSeg::Segment { start, end } => ArcSeg::Segment {
                start: end,
                end: start,
            },
            ArcSeg::Arc {
                start,
                end,
                center,
                radius,
                orientation,
            } => ArcSeg::Arc {
                start: end,
                end: start,
                center,
                radius,
                orientation: orientation.reversed(),
            },
        }
    }

    /// Copy with replaced endpoints; arcs keep center, radius and orientation.
    pub fn with_endpoints(&self, start: Point2, end: Point2) -> ArcSeg {
        match *self {
            ArcSeg::Segment { .. } => ArcSeg::Segment { start, end },
            ArcSeg::Arc {
                center,
                radius,
                orientation,
                ..
            } => ArcSeg::Arc {
                start,
                end,
                center,
                radius,
                orientation,
            },
        }
    }

    pub fn support(&self) -> CircleOrLine {
        match *self {
            ArcSeg::Segment { start, end } => CircleOrLine::Line(
                Line::through(start, end).unwrap_or(Line {
                    point: start,
                    dir: Vec2::new(1.0, 0.0),
                }),
            ),
            ArcSeg::Arc { center, radius, .. } => CircleOrLine::Circle(Circle::new(center, radius)),
        }
    }

    /// Whether the point `p` (assumed on the support) lies within the piece,
    /// with angular/parametric slack `slack`.
    pub fn contains_projection(&self, p: Point2, slack: f64) -> bool {
        match *self {
            ArcSeg::Segment { start, end } => {
                let v = end - start;
                let l2 = v.norm_sq();
                if l2 == 0.0 {
                    return false;
                }
                let s = v.dot(p - start) / l2;
                (-slack..=1.0 + slack).contains(&s)
            }
            ArcSeg::Arc {
                start,
                center,
                orientation,
                ..
            } => {
                let a0 = (start - center).angle();
                let ap = (p - center).angle();
                let rel = wrap_angle(orientation.sign() * (ap - a0));
                let sweep = self.sweep();
                rel <= sweep + slack || rel >= TAU - slack
            }
        }
    }

    /// Euclidean distance from `p` to the piece (not to its full support).
    pub fn distance(&self, p: Point2) -> f64 {
        match *self {
            ArcSeg::Segment { start, end } => {
                let v = end - start;
                let l2 = v.norm_sq();
                if l2 == 0.0 {
                    return p.dist(start);
                }
                let s = (v.dot(p - start) / l2).clamp(0.0, 1.0);
                p.dist(start + v * s)
            }
            ArcSeg::Arc {
                start,
                end,
                center,
                radius,
                ..
            } => {
                if p.dist(center) > 0.0 && self.contains_projection(p, 0.0) {
                    (radius - p.dist(center)).abs()
                } else {
                    p.dist(start).min(p.dist(end))
                }
            }
        }
    }
}

/// Angle reduced to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Ordered chain of arcs and segments.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PccCurve {
    pub segs: Vec<ArcSeg>,
    /// 0-based inclusive index range of the data points each piece approximates.
    pub sources: Vec<Option<(usize, usize)>>,
}

/// Endpoint mismatch tolerated between consecutive pieces.
pub const CHAIN_TOL: f64 = 1e-9;

impl PccCurve {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_segs(segs: Vec<ArcSeg>) -> Self {
        let sources = vec![None; segs.len()];
        Self { segs, sources }
    }

    pub fn push(&mut self, seg: ArcSeg, source: Option<(usize, usize)>) {
        self.segs.push(seg);
        self.sources.push(source);
    }

    pub fn extend(&mut self, other: PccCurve) {
        self.segs.extend(other.segs);
        self.sources.extend(other.sources);
    }

    pub fn len(&self) -> usize {
        self.segs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segs.is_empty()
    }

    pub fn arc_count(&self) -> usize {
        self.segs.iter().filter(|s| s.is_arc()).count()
    }

    pub fn segment_count(&self) -> usize {
        self.segs.len() - self.arc_count()
    }

    /// Index of the first junction whose endpoints do not meet, if any.
    pub fn first_gap(&self) -> Option<usize> {
        self.segs
            .windows(2)
            .position(|w| w[0].end().dist(w[1].start()) > CHAIN_TOL)
            .map(|i| i + 1)
    }

    pub fn is_chained(&self) -> bool {
        self.first_gap().is_none()
    }

    pub fn distance(&self, p: Point2) -> f64 {
        self.segs
            .iter()
            .map(|s| s.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Shift every source index by `offset`.
    pub fn offset_sources(&mut self, offset: usize) {
        for (a, b) in self.sources.iter_mut().flatten() {
            *a += offset;
            *b += offset;
        }
    }
}

/// Circle through three points, or the line through them when the
/// circumradius would exceed `R_DEGENERATE`.
pub fn circle_through_three(a: Point2, b: Point2, c: Point2) -> Result<CircleOrLine> {
    circle_through_three_capped(a, b, c, R_DEGENERATE)
}

pub fn circle_through_three_capped(
    a: Point2,
    b: Point2,
    c: Point2,
    r_cap: f64,
) -> Result<CircleOrLine> {
    if a == b || b == c || a == c {
        return Err(Error::DuplicatePoints);
    }
    let ab = b - a;
    let ac = c - a;
    let den = 2.0 * ab.cross(ac);
    let ab2 = ab.norm_sq();
    let ac2 = ac.norm_sq();
    // |center - a| = |ab||ac||bc| / |2 ab×ac|
    let bc = (c - b).norm();
    let r_est = ab2.sqrt() * ac2.sqrt() * bc / den.abs();
    if den == 0.0 || !r_est.is_finite() || r_est > r_cap {
        let far = if ab2 >= ac2 { b } else { c };
        return Ok(CircleOrLine::Line(Line::through(a, far).ok_or(Error::DuplicatePoints)?));
    }
    let ux = (ac.y * ab2 - ab.y * ac2) / den;
    let uy = (ab.x * ac2 - ac.x * ab2) / den;
    let center = Point2::new(a.x + ux, a.y + uy);
    let radius = (center.dist(a) + center.dist(b) + center.dist(c)) / 3.0;
    Ok(CircleOrLine::Circle(Circle::new(center, radius)))
}

/// Intersection points of two circles (0, 1 or 2 of them).
pub fn circle_circle_intersection(c1: &Circle, c2: &Circle) -> Vec<Point2> {
    let v = c2.center - c1.center;
    let d = v.norm();
    let (r1, r2) = (c1.radius, c2.radius);
    if d == 0.0 {
        return Vec::new();
    }
    let ext = d - (r1 + r2);
    let int = d - (r1 - r2).abs();
    let ex = v * (1.0 / d);
    if ext.abs() < TANGENCY_TOL {
        return vec![c1.center + ex * r1];
    }
    if int.abs() < TANGENCY_TOL {
        let dir = if r1 >= r2 { ex } else { -ex };
        return vec![c1.center + dir * r1];
    }
    if ext > 0.0 || int < 0.0 {
        return Vec::new();
    }
    let a = (d * d + r1 * r1 - r2 * r2) / (2.0 * d);
    let h = (r1 * r1 - a * a).max(0.0).sqrt();
    let base = c1.center + ex * a;
    let ey = ex.perp();
    vec![base + ey * h, base - ey * h]
}

/// Intersection points of a circle and a line.
pub fn circle_line_intersection(c: &Circle, l: &Line) -> Vec<Point2> {
    let foot = l.project(c.center);
    let dist = c.center.dist(foot);
    let gap = dist - c.radius;
    if gap.abs() < TANGENCY_TOL {
        return vec![foot];
    }
    if gap > 0.0 {
        return Vec::new();
    }
    let h = (c.radius * c.radius - dist * dist).max(0.0).sqrt();
    vec![foot + l.dir * h, foot - l.dir * h]
}

/// Intersection point of two lines; `None` when parallel.
pub fn line_line_intersection(l1: &Line, l2: &Line) -> Option<Point2> {
    let den = l1.dir.cross(l2.dir);
    if den.abs() < 1e-14 {
        return None;
    }
    let s = (l2.point - l1.point).cross(l2.dir) / den;
    Some(l1.point + l1.dir * s)
}

/// Intersections between any two circle-or-line objects.
pub fn intersect(a: &CircleOrLine, b: &CircleOrLine) -> Vec<Point2> {
    match (a, b) {
        (CircleOrLine::Circle(c1), CircleOrLine::Circle(c2)) => circle_circle_intersection(c1, c2),
        (CircleOrLine::Circle(c), CircleOrLine::Line(l))
        | (CircleOrLine::Line(l), CircleOrLine::Circle(c)) => circle_line_intersection(c, l),
        (CircleOrLine::Line(l1), CircleOrLine::Line(l2)) => {
            line_line_intersection(l1, l2).into_iter().collect()
        }
    }
}

/// `| R − ‖p − center‖ |`.
pub fn radial_residual(p: Point2, c: &Circle) -> f64 {
    (c.radius - p.dist(c.center)).abs()
}

/// Unit tangent at an endpoint, oriented along the direction of travel.
/// Segments return their chord direction at both ends.
pub fn tangent_at(seg: &ArcSeg, which: End) -> Vec2 {
    match *seg {
        ArcSeg::Segment { start, end } => (end - start).normalized().unwrap_or(Vec2::new(1.0, 0.0)),
        ArcSeg::Arc {
            start,
            end,
            center,
            orientation,
            ..
        } => {
            let p = match which {
                End::Start => start,
                End::End => end,
            };
            let radial = (p - center).normalized().unwrap_or(Vec2::new(1.0, 0.0));
            radial.perp() * orientation.sign()
        }
    }
}

/// Arc of the circle through `start` and `end` whose tangent at `start` is
/// `tangent`. Falls back to a segment when the tangent is along the chord.
pub fn arc_from_start_tangent(start: Point2, tangent: Vec2, end: Point2) -> ArcSeg {
    let chord = end - start;
    let cr = tangent.cross(chord);
    if cr.abs() <= 1e-12 * chord.norm() {
        return ArcSeg::segment(start, end);
    }
    // center = start + s * n, with |center - end| = s
    let n = tangent.perp();
    let s = chord.norm_sq() / (2.0 * n.dot(chord));
    let center = start + n * s;
    let orientation = if cr > 0.0 {
        Orientation::Ccw
    } else {
        Orientation::Cw
    };
    ArcSeg::arc(start, end, center, orientation)
}

/// Arc through three points, traversed from `a` via `b` to `c`; a segment
/// when they are (near) collinear.
pub fn arc_through_three(a: Point2, b: Point2, c: Point2) -> Result<ArcSeg> {
    match circle_through_three(a, b, c)? {
        CircleOrLine::Line(_) => Ok(ArcSeg::segment(a, c)),
        CircleOrLine::Circle(circ) => {
            let orientation = if (b - a).cross(c - b) > 0.0 {
                Orientation::Ccw
            } else {
                Orientation::Cw
            };
            Ok(ArcSeg::Arc {
                start: a,
                end: c,
                center: circ.center,
                radius: circ.radius,
                orientation,
            })
        }
    }
}

/// Half-turn constant re-exported for callers working with sweeps.
pub const HALF_TURN: f64 = PI;
