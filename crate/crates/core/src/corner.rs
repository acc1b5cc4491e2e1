//! Recovery of corners that fall between scan samples.
//!
//! A sample is an anchor when its turn cosine is at least `−ε_turn` and the
//! circle through it and its two neighbours is smaller than `R_max`.
//! Anchors come in pairs straddling the true corner; a Taubin circle is grown
//! outwards from each side of the pair and the corner is the intersection
//! of the two fits nearest the pair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{circle_through_three, intersect, CircleOrLine, Point2, Vec2};
use crate::lsq::taubin_fit;
use crate::par::{map_range, Exec};
use crate::smoothing::median_spacing;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerParams {
    /// Turn screening threshold: anchors need `cos α ≥ −eps_turn`.
    pub eps_turn: f64,
    /// Anchors need a three-point circumradius below this.
    pub r_max: f64,
    /// Tolerance for growing the Taubin windows.
    pub delta: f64,
    /// Largest window parameter `k` / `h`.
    pub m_limit: usize,
    /// Inverts the pairing comparison for isolated anchors.
    pub flip_pairing: bool,
    /// Treat the points as a closed contour (indices wrap).
    pub closed: bool,
}

impl Default for CornerParams {
    fn default() -> Self {
        Self {
            eps_turn: 0.9,
            r_max: 20.0,
            delta: 1.0,
            m_limit: 30,
            flip_pairing: false,
            closed: false,
        }
    }
}

impl CornerParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.eps_turn) {
            return Err(Error::DegenerateInput("eps_turn must lie in [0, 1)"));
        }
        if !(self.r_max > 0.0 && self.delta > 0.0) {
            return Err(Error::DegenerateInput("r_max and delta must be positive"));
        }
        if self.m_limit < 4 {
            return Err(Error::DegenerateInput("m_limit must be at least 4"));
        }
        Ok(())
    }
}

/// Outcome of processing one anchor pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorDiagnostic {
    pub pair: (usize, usize),
    pub k: usize,
    pub h: usize,
    pub left: Option<CircleOrLine>,
    pub right: Option<CircleOrLine>,
    pub corner: Option<Point2>,
    pub error: Option<String>,
}

/// A run of consecutive samples between two corners. Indices wrap on
/// closed contours; `lead`/`trail` are the recovered corners bounding it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub start: usize,
    pub len: usize,
    pub lead: Option<Point2>,
    pub trail: Option<Point2>,
}

impl Section {
    /// Sample indices of the section in order.
    pub fn indices(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        let start = self.start;
        (0..self.len).map(move |t| (start + t) % n)
    }

    /// Section points with the bounding corners attached.
    pub fn points(&self, all: &[Point2]) -> Vec<Point2> {
        let mut out = Vec::with_capacity(self.len + 2);
        out.extend(self.lead);
        out.extend(self.indices(all.len()).map(|i| all[i]));
        out.extend(self.trail);
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerReport {
    /// Anchor pairs that produced a corner, parallel to `corners`.
    pub anchors: Vec<(usize, usize)>,
    pub corners: Vec<Point2>,
    pub sections: Vec<Section>,
    pub diagnostics: Vec<AnchorDiagnostic>,
}

struct Ring<'a> {
    pts: &'a [Point2],
    closed: bool,
}

impl Ring<'_> {
    fn n(&self) -> usize {
        self.pts.len()
    }

    fn at(&self, i: isize) -> Option<usize> {
        let n = self.n() as isize;
        if self.closed {
            Some(i.rem_euclid(n) as usize)
        } else if (0..n).contains(&i) {
            Some(i as usize)
        } else {
            None
        }
    }

    fn neighbours(&self, i: usize) -> Option<(Point2, Point2, Point2)> {
        let a = self.at(i as isize - 1)?;
        let b = self.at(i as isize + 1)?;
        Some((self.pts[a], self.pts[i], self.pts[b]))
    }
}

fn cosine_at(prev: Point2, p: Point2, next: Point2) -> Result<f64> {
    let t1 = (prev - p).normalized().ok_or(Error::DuplicatePoints)?;
    let t2 = (next - p).normalized().ok_or(Error::DuplicatePoints)?;
    Ok(t1.dot(t2).clamp(-1.0, 1.0))
}

/// Cosine of the angle at `points[i]` between the directions to its two
/// neighbours: −1 on a straight run, 0 at a right angle, +1 on a spike.
pub fn turn_cosine(points: &[Point2], i: usize) -> Result<f64> {
    if i == 0 || i + 1 >= points.len() {
        return Err(Error::OutOfDomain {
            t: i as f64,
            n: points.len(),
        });
    }
    cosine_at(points[i - 1], points[i], points[i + 1])
}

/// Radius of the circle through three points; infinite when collinear.
pub fn circumradius(a: Point2, b: Point2, c: Point2) -> f64 {
    let area2 = (b - a).cross(c - a).abs();
    if area2 == 0.0 {
        return f64::INFINITY;
    }
    a.dist(b) * b.dist(c) * c.dist(a) / (2.0 * area2)
}

fn anchor_cosines(ring: &Ring, params: &CornerParams) -> Vec<Option<f64>> {
    (0..ring.n())
        .map(|i| {
            let (a, p, b) = ring.neighbours(i)?;
            let c = cosine_at(a, p, b).ok()?;
            (c >= -params.eps_turn && circumradius(a, p, b) < params.r_max).then_some(c)
        })
        .collect()
}

/// Anchor pairs `(i, i + 1)` (indices wrap on closed contours), one per
/// cluster of nearby anchors.
///
/// The pivot of a cluster is its sharpest anchor. It pairs with the
/// neighbouring anchor when exactly one neighbour is an anchor; otherwise
/// `(i, i + 1)` is chosen when `cos α_{i+1} ≤ cos α_{i−1}` and `(i − 1, i)`
/// when not, with the comparison inverted by `flip_pairing`.
pub fn find_anchor_pairs(points: &[Point2], params: &CornerParams) -> Vec<(usize, usize)> {
    let ring = Ring {
        pts: points,
        closed: params.closed,
    };
    let n = ring.n();
    if n < 5 {
        return Vec::new();
    }
    let cos = anchor_cosines(&ring, params);
    let clusters = clusters(&cos, params.closed);
    let turn = |i: usize| {
        ring.neighbours(i)
            .and_then(|(a, p, b)| cosine_at(a, p, b).ok())
            .unwrap_or(-1.0)
    };
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut used = vec![false; n];
    for cl in clusters {
        let pivot = *cl
            .iter()
            .max_by(|&&a, &&b| cos[a].unwrap().total_cmp(&cos[b].unwrap()))
            .unwrap();
        let prev = ring.at(pivot as isize - 1);
        let next = ring.at(pivot as isize + 1);
        let is_anchor = |j: Option<usize>| j.is_some_and(|j| cl.contains(&j));
        let forward = match (is_anchor(prev), is_anchor(next)) {
            (false, true) => true,
            (true, false) => false,
            _ => {
                let (cp, cn) = (prev.map_or(-1.0, turn), next.map_or(-1.0, turn));
                (cn <= cp) != params.flip_pairing
            }
        };
        let pair = if forward {
            next.map(|j| (pivot, j))
        } else {
            prev.map(|j| (j, pivot))
        };
        let Some(pair) = pair else { continue };
        if used[pair.0] || used[pair.1] {
            continue;
        }
        used[pair.0] = true;
        used[pair.1] = true;
        pairs.push(pair);
    }
    pairs.sort_unstable();
    pairs
}

/// Runs of `Some` entries, where a single `None` between two runs does not
/// break the run (one jittered sample can miss the turn screen in the
/// middle of a rounded corner). Runs are merged across the seam on closed
/// contours.
fn clusters(flags: &[Option<f64>], closed: bool) -> Vec<Vec<usize>> {
    let n = flags.len();
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, f) in flags.iter().enumerate() {
        if f.is_none() {
            continue;
        }
        match out.last_mut() {
            Some(cur) if i - cur.last().unwrap() <= 2 => cur.push(i),
            _ => out.push(vec![i]),
        }
    }
    if closed && out.len() > 1 {
        let first = out[0][0];
        let last = *out.last().unwrap().last().unwrap();
        if first + n - last <= 2 {
            let head = out.remove(0);
            out.last_mut().unwrap().extend(head);
        }
    }
    out
}

/// Result of growing the two Taubin windows around an anchor pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Growth {
    pub k: usize,
    pub h: usize,
    pub left: CircleOrLine,
    pub right: CircleOrLine,
}

fn max_distance(fit: &CircleOrLine, pts: &[Point2]) -> f64 {
    pts.iter().map(|&p| fit.distance(p)).fold(0.0, f64::max)
}

fn fit_set(pts: &[Point2]) -> Result<CircleOrLine> {
    if pts.len() == 3 {
        circle_through_three(pts[0], pts[1], pts[2])
    } else {
        taubin_fit(pts)
    }
}

/// Grows `Λ_{i,k} = {P_{i−j} : j = 0..=k}` from `k = 3` and
/// `Λ_{i+1,h} = {P_{i+j} : j = 1..=h}` from `h = 4` while the Taubin circle
/// stays within `delta` of every point, each side independently and at most
/// to `m_limit`. Returns the last accepted `k`, `h` (at least 2 and 3, the
/// three-point floor) with their fits.
pub fn grow_taubin_arcs(points: &[Point2], pair: (usize, usize), params: &CornerParams) -> Result<Growth> {
    grow_taubin_arcs_bounded(points, pair, params, usize::MAX, usize::MAX)
}

/// [`grow_taubin_arcs`] with the windows additionally capped at `k_max`
/// and `h_max`, so that they stay clear of neighbouring anchor pairs.
pub fn grow_taubin_arcs_bounded(
    points: &[Point2],
    pair: (usize, usize),
    params: &CornerParams,
    k_max: usize,
    h_max: usize,
) -> Result<Growth> {
    let ring = Ring {
        pts: points,
        closed: params.closed,
    };
    let n = points.len();
    let i = pair.0 as isize;
    let left = |k: usize| -> Option<Vec<Point2>> {
        (0..=k as isize).map(|j| ring.at(i - j).map(|t| points[t])).collect()
    };
    let right = |h: usize| -> Option<Vec<Point2>> {
        (1..=h as isize).map(|j| ring.at(i + j).map(|t| points[t])).collect()
    };
    // on a closed contour the two windows must not overlap
    let fits_ring = |k: usize, h: usize| !params.closed || k + 1 + h <= n;
    if left(2).is_none() || right(3).is_none() || !fits_ring(2, 3) {
        return Err(Error::InsufficientPoints);
    }
    let grow = |start: usize, floor: usize, window: &dyn Fn(usize) -> Option<Vec<Point2>>, other: usize, is_left: bool| {
        let cap = params.m_limit.min(if is_left { k_max } else { h_max });
        let mut v = start;
        while v <= cap {
            let ok_ring = if is_left { fits_ring(v, other) } else { fits_ring(other, v) };
            let Some(set) = window(v).filter(|_| ok_ring) else { break };
            match fit_set(&set) {
                Ok(fit) if max_distance(&fit, &set) < params.delta => v += 1,
                _ => break,
            }
        }
        (v - 1).max(floor)
    };
    let k = grow(3, 2, &left, 3, true);
    let h = grow(4, 3, &right, k, false);
    let lf = fit_set(&left(k).ok_or(Error::InsufficientPoints)?)?;
    let rf = fit_set(&right(h).ok_or(Error::InsufficientPoints)?)?;
    Ok(Growth {
        k,
        h,
        left: lf,
        right: rf,
    })
}

/// Intersection of the two fits nearest `near`.
pub fn locate_corner(left: &CircleOrLine, right: &CircleOrLine, near: Point2) -> Result<Point2> {
    intersect(left, right)
        .into_iter()
        .min_by(|a, b| a.dist(near).total_cmp(&b.dist(near)))
        .ok_or(Error::NoIntersection)
}

fn process_pair(
    points: &[Point2],
    pair: (usize, usize),
    caps: (usize, usize),
    params: &CornerParams,
    spacing: f64,
) -> AnchorDiagnostic {
    let mut diag = AnchorDiagnostic {
        pair,
        k: 0,
        h: 0,
        left: None,
        right: None,
        corner: None,
        error: None,
    };
    let g = match grow_taubin_arcs_bounded(points, pair, params, caps.0, caps.1) {
        Ok(g) => g,
        Err(e) => {
            diag.error = Some(e.to_string());
            return diag;
        }
    };
    diag.k = g.k;
    diag.h = g.h;
    diag.left = Some(g.left);
    diag.right = Some(g.right);
    let near = points[pair.0].midpoint(points[pair.1]);
    let c = match locate_corner(&g.left, &g.right, near) {
        Ok(c) => c,
        Err(e) => {
            diag.error = Some(e.to_string());
            return diag;
        }
    };
    let n = points.len() as isize;
    let far = |i: isize| points[i.rem_euclid(n) as usize];
    let left_far = far(pair.0 as isize - g.k as isize);
    let right_far = far(pair.0 as isize + g.h as isize);
    let turn = crossing_turn(&g.left, &g.right, c, left_far, right_far);
    if c.dist(near) > g.k.max(g.h) as f64 * spacing {
        diag.error = Some("corner implausibly far from its anchors".into());
    } else if turn < 0.5 * params.eps_turn.acos() {
        diag.error = Some(format!("fits cross at only {:.2} degrees", turn.to_degrees()));
    } else {
        diag.corner = Some(c);
    }
    diag
}

fn tangent_line(fit: &CircleOrLine, at: Point2) -> Vec2 {
    match fit {
        CircleOrLine::Line(l) => l.dir,
        CircleOrLine::Circle(c) => (at - c.center).normalized().unwrap_or(Vec2::new(1.0, 0.0)).perp(),
    }
}

/// Turn of the contour at the recovered corner `c`: the angle between the
/// left fit's tangent, oriented from `left_far` towards `c`, and the right
/// fit's tangent, oriented from `c` towards `right_far`.
fn crossing_turn(left: &CircleOrLine, right: &CircleOrLine, c: Point2, left_far: Point2, right_far: Point2) -> f64 {
    let mut t1 = tangent_line(left, c);
    if t1.dot(c - left_far) < 0.0 {
        t1 = -t1;
    }
    let mut t2 = tangent_line(right, c);
    if t2.dot(right_far - c) < 0.0 {
        t2 = -t2;
    }
    t1.cross(t2).atan2(t1.dot(t2)).abs()
}

/// Anchor pairing, window growth and corner location for every pair, plus
/// the split of the samples into sections between consecutive corners.
pub fn detect_corners(points: &[Point2], params: &CornerParams) -> Result<CornerReport> {
    detect_corners_with(points, params, Exec::default())
}

pub fn detect_corners_with(points: &[Point2], params: &CornerParams, exec: Exec) -> Result<CornerReport> {
    params.validate()?;
    if points.len() < 5 {
        return Err(Error::TooFewPoints {
            needed: 5,
            got: points.len(),
        });
    }
    let spacing = median_spacing(points);
    let pairs = find_anchor_pairs(points, params);
    let caps = window_caps(points.len(), &pairs, params.closed);
    let diagnostics = map_range(exec, pairs.len(), |j| process_pair(points, pairs[j], caps[j], params, spacing));
    let mut anchors = Vec::new();
    let mut corners = Vec::new();
    for d in &diagnostics {
        if let Some(c) = d.corner {
            anchors.push(d.pair);
            corners.push(c);
        }
    }
    let sections = sections(points.len(), &anchors, &corners, params.closed);
    Ok(CornerReport {
        anchors,
        corners,
        sections,
        diagnostics,
    })
}

/// Largest `(k, h)` per pair keeping its windows off the neighbouring
/// pairs; `Λ_{i,k}` holds `k + 1` samples and `Λ_{i+1,h}` holds `h`.
fn window_caps(n: usize, pairs: &[(usize, usize)], closed: bool) -> Vec<(usize, usize)> {
    let c = pairs.len();
    (0..c)
        .map(|j| {
            let (a, b) = pairs[j];
            let k = if j > 0 {
                (a - pairs[j - 1].1).saturating_sub(1)
            } else if closed && c > 1 {
                ((a + n - pairs[c - 1].1) % n).saturating_sub(1)
            } else {
                usize::MAX
            };
            let h = if j + 1 < c {
                pairs[j + 1].0 - b
            } else if closed && c > 1 {
                (pairs[0].0 + n - b) % n
            } else {
                usize::MAX
            };
            (k, h)
        })
        .collect()
}

/// Splits `0..n` at the anchor pairs. A closed contour without corners is
/// one section whose trailing point repeats the first sample.
fn sections(n: usize, anchors: &[(usize, usize)], corners: &[Point2], closed: bool) -> Vec<Section> {
    let c = anchors.len();
    if c == 0 {
        return vec![Section {
            start: 0,
            len: n,
            lead: None,
            trail: None,
        }];
    }
    let mut out = Vec::with_capacity(c + 1);
    if closed {
        for j in 0..c {
            let next = (j + 1) % c;
            let start = anchors[j].1;
            let end = anchors[next].0;
            let len = (end + n - start) % n + 1;
            out.push(Section {
                start,
                len,
                lead: Some(corners[j]),
                trail: Some(corners[next]),
            });
        }
        // a pair straddling the seam leaves its section starting at 0;
        // rotate so sections are ordered by start index
        out.sort_by_key(|s| s.start);
    } else {
        out.push(Section {
            start: 0,
            len: anchors[0].0 + 1,
            lead: None,
            trail: Some(corners[0]),
        });
        for j in 1..c {
            out.push(Section {
                start: anchors[j - 1].1,
                len: anchors[j].0 - anchors[j - 1].1 + 1,
                lead: Some(corners[j - 1]),
                trail: Some(corners[j]),
            });
        }
        out.push(Section {
            start: anchors[c - 1].1,
            len: n - anchors[c - 1].1,
            lead: Some(corners[c - 1]),
            trail: None,
        });
    }
    out
}

/// Fills wide gaps: wherever consecutive spacing exceeds `gap_factor`
/// times the median, inserts the intersection of the circles through the
/// three samples on either side that lies nearest the gap's midpoint, or
/// the midpoint itself when there is no usable intersection.
pub fn improve_dataset(points: &[Point2], gap_factor: f64) -> Vec<Point2> {
    let n = points.len();
    let spacing = median_spacing(points);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(points[i]);
        if i + 1 == n {
            break;
        }
        let (a, b) = (points[i], points[i + 1]);
        let gap = a.dist(b);
        if gap <= gap_factor * spacing {
            continue;
        }
        let mid = a.midpoint(b);
        let fill = (i >= 2 && i + 3 < n)
            .then(|| {
                let l = circle_through_three(points[i - 2], points[i - 1], a).ok()?;
                let r = circle_through_three(b, points[i + 2], points[i + 3]).ok()?;
                intersect(&l, &r)
                    .into_iter()
                    .filter(|q| q.dist(mid) <= gap)
                    .min_by(|p, q| p.dist(mid).total_cmp(&q.dist(mid)))
            })
            .flatten()
            .unwrap_or(mid);
        out.push(fill);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Circle, Line};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    /// Two legs of `m` samples at unit spacing meeting at a right angle at
    /// the origin, the vertex itself not sampled.
    fn right_corner(m: usize) -> Vec<Point2> {
        let mut v: Vec<Point2> = (1..=m).rev().map(|i| p(-(i as f64), 0.0)).collect();
        v.extend((1..=m).map(|i| p(0.0, i as f64)));
        v
    }

    #[test]
    fn turn_cosine_examples() {
        let line = [p(0., 0.), p(1., 0.), p(2., 0.)];
        assert_eq!(turn_cosine(&line, 1).unwrap(), -1.0);
        let right = [p(0., 0.), p(1., 0.), p(1., 1.)];
        assert_abs_diff_eq!(turn_cosine(&right, 1).unwrap(), 0.0);
        let spike = [p(0., 0.), p(1., 0.), p(0., 0.)];
        assert_eq!(turn_cosine(&spike, 1).unwrap(), 1.0);
        let dup = [p(0., 0.), p(0., 0.), p(1., 0.)];
        assert_eq!(turn_cosine(&dup, 1), Err(Error::DuplicatePoints));
    }

    #[test]
    fn no_anchors_on_line_or_gentle_arc() {
        let line: Vec<Point2> = (0..40).map(|i| p(i as f64, 0.0)).collect();
        assert!(find_anchor_pairs(&line, &CornerParams::default()).is_empty());
        let arc: Vec<Point2> = (0..40).map(|i| p(0., 0.) + Vec2::from_angle(i as f64 * 0.02) * 50.0).collect();
        assert!(find_anchor_pairs(&arc, &CornerParams::default()).is_empty());
    }

    #[test]
    fn right_corner_pair_straddles_vertex() {
        let pts = right_corner(10);
        assert_eq!(find_anchor_pairs(&pts, &CornerParams::default()), vec![(9, 10)]);
    }

    #[test]
    fn straight_legs_grow_to_limit() {
        let pts = right_corner(40);
        let params = CornerParams::default();
        let g = grow_taubin_arcs(&pts, (39, 40), &params).unwrap();
        assert_eq!((g.k, g.h), (30, 30));
        assert!(matches!(g.left, CircleOrLine::Line(_)));
        let c = locate_corner(&g.left, &g.right, p(-0.5, 0.5)).unwrap();
        assert!(c.dist(p(0., 0.)) < 1e-9);
    }

    #[test]
    fn growth_stops_at_curvature_break() {
        // five points on the left leg, then the data turns sharply upwards
        let mut pts: Vec<Point2> = (1..=8).rev().map(|j| p(-5.0, j as f64)).collect();
        pts.extend((0..5).map(|j| p(-5.0 + j as f64, 0.0)));
        let i = pts.len() - 1;
        pts.extend((1..=12).map(|j| p(0.0, j as f64)));
        let params = CornerParams { delta: 0.1, ..Default::default() };
        let g = grow_taubin_arcs(&pts, (i, i + 1), &params).unwrap();
        assert!(g.k <= 5 + 2, "k = {}", g.k);
        assert!(g.k >= 4);
    }

    #[test]
    fn insufficient_points() {
        let pts = right_corner(10);
        assert_eq!(
            grow_taubin_arcs(&pts, (1, 2), &CornerParams::default()),
            Err(Error::InsufficientPoints)
        );
    }

    #[test]
    fn locate_examples() {
        let unit = CircleOrLine::Circle(Circle::new(p(0., 0.), 1.0));
        let x_axis = CircleOrLine::Line(Line::through(p(0., 0.), p(1., 0.)).unwrap());
        let y_axis = CircleOrLine::Line(Line::through(p(0., 0.), p(0., 1.)).unwrap());
        assert_eq!(locate_corner(&x_axis, &y_axis, p(1., 1.)).unwrap(), p(0., 0.));
        let q = locate_corner(&unit, &x_axis, p(1.1, 0.)).unwrap();
        assert_abs_diff_eq!(q.x, 1.0, epsilon = 1e-15);
        let far = CircleOrLine::Circle(Circle::new(p(5., 0.), 1.0));
        assert_eq!(locate_corner(&unit, &far, p(0., 0.)), Err(Error::NoIntersection));
    }

    #[test]
    fn detect_right_corner_and_sections() {
        let pts = right_corner(20);
        let rep = detect_corners(&pts, &CornerParams::default()).unwrap();
        assert_eq!(rep.corners.len(), 1);
        assert!(rep.corners[0].dist(p(0., 0.)) < 1e-9);
        assert_eq!(rep.sections.len(), 2);
        assert_eq!(rep.sections[0].points(&pts).last(), Some(&rep.corners[0]));
        assert_eq!(rep.sections[1].points(&pts)[0], rep.corners[0]);
    }

    #[test]
    fn straight_polyline_one_section() {
        let pts: Vec<Point2> = (0..30).map(|i| p(i as f64, 0.5 * i as f64)).collect();
        let rep = detect_corners(&pts, &CornerParams::default()).unwrap();
        assert!(rep.corners.is_empty());
        assert_eq!(rep.sections, vec![Section { start: 0, len: 30, lead: None, trail: None }]);
    }

    #[test]
    fn closed_square_wraps_seam() {
        // square of side 40 sampled at unit step, vertices skipped
        let verts = [p(0., 0.), p(40., 0.), p(40., 40.), p(0., 40.)];
        let mut pts = Vec::new();
        for s in 0..4 {
            let (a, b) = (verts[s], verts[(s + 1) % 4]);
            pts.extend((1..40).map(|t| a.lerp(b, t as f64 / 40.0)));
        }
        let params = CornerParams { closed: true, ..Default::default() };
        let rep = detect_corners(&pts, &params).unwrap();
        assert_eq!(rep.corners.len(), 4);
        for v in verts {
            assert!(rep.corners.iter().any(|c| c.dist(v) < 1e-9));
        }
        let total: usize = rep.sections.iter().map(|s| s.len).sum();
        assert_eq!(total, pts.len());
    }

    #[test]
    fn improve_dataset_examples() {
        let uniform: Vec<Point2> = (0..10).map(|i| p(i as f64, 0.0)).collect();
        assert_eq!(improve_dataset(&uniform, 3.0), uniform);
        let mut gap: Vec<Point2> = (0..6).map(|i| p(i as f64, 0.0)).collect();
        gap.extend((0..6).map(|i| p(10.0 + i as f64, 0.0)));
        let out = improve_dataset(&gap, 3.0);
        assert_eq!(out.len(), gap.len() + 1);
        assert_eq!(out[6], p(7.5, 0.0));
    }

    fn scale_pts(pts: &[Point2], s: f64) -> Vec<Point2> {
        pts.iter().map(|q| p(q.x * s, q.y * s)).collect()
    }

    proptest! {
        #[test]
        fn anchors_pass_both_screens(seed in proptest::collection::vec(-0.3..0.3f64, 30)) {
            let pts: Vec<Point2> = right_corner(15)
                .into_iter()
                .zip(seed.iter().cycle())
                .map(|(q, &d)| p(q.x + d * 0.1, q.y - d * 0.1))
                .collect();
            let params = CornerParams::default();
            for (a, b) in find_anchor_pairs(&pts, &params) {
                for i in [a, b] {
                    if i == 0 || i + 1 == pts.len() { continue; }
                    let c = turn_cosine(&pts, i).unwrap();
                    let r = circumradius(pts[i - 1], pts[i], pts[i + 1]);
                    // the pivot passes both screens; its partner may be an isolated neighbour
                    if c >= -params.eps_turn && r < params.r_max { continue; }
                    prop_assert!(i == a || i == b);
                }
            }
        }

        #[test]
        fn corners_scale_with_data(s in 0.1..10.0f64, tilt in -0.2..0.2f64) {
            let base: Vec<Point2> = right_corner(20)
                .into_iter()
                .map(|q| p(q.x, q.y + tilt * q.x * q.x * 0.01))
                .collect();
            let params = CornerParams::default();
            let scaled = CornerParams { r_max: params.r_max * s, delta: params.delta * s, ..params };
            let a = detect_corners(&base, &params).unwrap();
            let b = detect_corners(&scale_pts(&base, s), &scaled).unwrap();
            prop_assert_eq!(a.corners.len(), b.corners.len());
            for (x, y) in a.corners.iter().zip(&b.corners) {
                prop_assert!((x.x * s - y.x).abs() <= 1e-9 * s.max(1.0) * 30.0);
                prop_assert!((x.y * s - y.y).abs() <= 1e-9 * s.max(1.0) * 30.0);
            }
        }
    }
}
