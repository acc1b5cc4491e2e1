//! Synthetic laser scans of known contours.
//!
//! Samples are taken at multiples of a fixed arclength step, skipping a
//! neighbourhood of every tangent break, and optionally jittered along the
//! contour normal. Jitter comes from `ChaCha8Rng::seed_from_u64(seed)` with
//! one standard normal draw per emitted sample (two when isotropic), so a
//! given shape, config and seed always produce the same points.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{tangent_at, ArcSeg, End, Orientation, Point2, Vec2, CHAIN_TOL};

/// Tangent dot product below which a junction counts as a break.
const BREAK_DOT: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub pieces: Vec<ArcSeg>,
    /// Ground-truth corners. Defaults to the tangent breaks of the contour;
    /// rounded shapes list the sharp corners their fillets replace.
    pub vertices: Vec<Point2>,
    pub closed: bool,
}

impl ShapeSpec {
    /// Shape from chained pieces; closed when the last piece ends where the
    /// first begins. Vertices are the tangent breaks.
    pub fn new(pieces: Vec<ArcSeg>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::DegenerateInput("shape has no pieces"));
        }
        for (k, w) in pieces.windows(2).enumerate() {
            if w[0].end().dist(w[1].start()) > CHAIN_TOL {
                return Err(Error::DisconnectedCurve(k + 1));
            }
        }
        let closed = pieces.len() > 1 && pieces[pieces.len() - 1].end().dist(pieces[0].start()) <= CHAIN_TOL;
        let mut shape = Self {
            pieces,
            vertices: Vec::new(),
            closed,
        };
        shape.vertices = shape.breaks().into_iter().map(|(_, p)| p).collect();
        Ok(shape)
    }

    pub fn with_vertices(mut self, vertices: Vec<Point2>) -> Self {
        self.vertices = vertices;
        self
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(ArcSeg::length).sum()
    }

    /// Arclength positions and locations of the tangent breaks, including
    /// the seam of a closed contour (at position 0).
    pub fn breaks(&self) -> Vec<(f64, Point2)> {
        let n = self.pieces.len();
        let mut out = Vec::new();
        if self.closed && is_break(&self.pieces[n - 1], &self.pieces[0]) {
            out.push((0.0, self.pieces[0].start()));
        }
        let mut s = 0.0;
        for k in 0..n - 1 {
            s += self.pieces[k].length();
            if is_break(&self.pieces[k], &self.pieces[k + 1]) {
                out.push((s, self.pieces[k + 1].start()));
            }
        }
        out
    }

    /// Point and unit tangent at arclength `s`.
    pub fn at(&self, s: f64) -> (Point2, Vec2) {
        let mut rest = s;
        for (k, seg) in self.pieces.iter().enumerate() {
            let len = seg.length();
            if rest <= len || k + 1 == self.pieces.len() {
                let q = seg.point_at((rest / len).clamp(0.0, 1.0));
                let t = match *seg {
                    ArcSeg::Segment { .. } => tangent_at(seg, End::Start),
                    ArcSeg::Arc { center, orientation, .. } => {
                        (q - center).normalized().unwrap_or(Vec2::new(1.0, 0.0)).perp() * orientation.sign()
                    }
                };
                return (q, t);
            }
            rest -= len;
        }
        unreachable!("shape has at least one piece")
    }

    /// Distance from `p` to the contour.
    pub fn distance(&self, p: Point2) -> f64 {
        self.pieces.iter().map(|s| s.distance(p)).fold(f64::INFINITY, f64::min)
    }
}

fn is_break(a: &ArcSeg, b: &ArcSeg) -> bool {
    tangent_at(a, End::End).dot(tangent_at(b, End::Start)) < BREAK_DOT
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub step: f64,
    /// No sample closer than this (in arclength) to a tangent break.
    pub corner_exclusion: f64,
    pub jitter_sigma: f64,
    pub seed: u64,
    /// Jitter along the contour normal only; isotropic when false.
    pub normal_only: bool,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            step: 1.0,
            corner_exclusion: 1.0,
            jitter_sigma: 0.05,
            seed: 1,
            normal_only: true,
        }
    }
}

/// Exact geometry behind a scan, for oracle comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanTruth {
    pub vertices: Vec<Point2>,
    pub pieces: Vec<ArcSeg>,
    /// Arclength position of every emitted sample.
    pub positions: Vec<f64>,
}

/// Samples `shape` at arclength multiples of `config.step`.
///
/// Fails with `StepTooLarge` when a piece is shorter than two steps, since
/// such a piece cannot be guaranteed three samples.
pub fn generate_scan(shape: &ShapeSpec, config: &ScanConfig) -> Result<(Vec<Point2>, ScanTruth)> {
    if !(config.step > 0.0) || config.corner_exclusion < 0.0 || config.jitter_sigma < 0.0 {
        return Err(Error::DegenerateInput("scan step must be positive, exclusion and jitter non-negative"));
    }
    if shape.pieces.iter().any(|p| p.length() < 2.0 * config.step) {
        return Err(Error::StepTooLarge(config.step));
    }
    let total = shape.length();
    let breaks: Vec<f64> = shape.breaks().into_iter().map(|(s, _)| s).collect();
    let near_break = |s: f64| {
        breaks.iter().any(|&b| {
            let mut d = (s - b).abs();
            if shape.closed {
                d = d.min(total - d);
            }
            d < config.corner_exclusion - 1e-9
        })
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let normal = Normal::new(0.0, config.jitter_sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
    let slack = 1e-9 * total.max(1.0);
    let mut points = Vec::new();
    let mut positions = Vec::new();
    for k in 0.. {
        let s = k as f64 * config.step;
        let past_end = if shape.closed { s >= total - slack } else { s > total + slack };
        if past_end {
            break;
        }
        if near_break(s) {
            continue;
        }
        let (q, t) = shape.at(s.min(total));
        let q = if config.jitter_sigma == 0.0 {
            q
        } else if config.normal_only {
            q + t.perp() * normal.sample(&mut rng)
        } else {
            let dx = normal.sample(&mut rng);
            let dy = normal.sample(&mut rng);
            q + Vec2::new(dx, dy)
        };
        points.push(q);
        positions.push(s);
    }
    Ok((
        points,
        ScanTruth {
            vertices: shape.vertices.clone(),
            pieces: shape.pieces.clone(),
            positions,
        },
    ))
}

/// Closed polygon through `vertices`.
pub fn polygon(vertices: &[Point2]) -> Result<ShapeSpec> {
    let n = vertices.len();
    let pieces = (0..n)
        .map(|i| ArcSeg::segment(vertices[i], vertices[(i + 1) % n]))
        .collect();
    ShapeSpec::new(pieces)
}

/// Regular `n`-gon with the given side, centred at the origin, first
/// vertex straight up, counter-clockwise.
pub fn regular_polygon(n: usize, side: f64) -> Result<ShapeSpec> {
    let r = side / (2.0 * (std::f64::consts::PI / n as f64).sin());
    let verts: Vec<Point2> = (0..n)
        .map(|i| {
            let a = std::f64::consts::FRAC_PI_2 + std::f64::consts::TAU * i as f64 / n as f64;
            Point2::new(0.0, 0.0) + Vec2::from_angle(a) * r
        })
        .collect();
    polygon(&verts)
}

pub fn pentagon(side: f64) -> ShapeSpec {
    regular_polygon(5, side).expect("regular pentagon is valid")
}

/// Closed polygon with every corner replaced by a fillet of radius `r`.
/// The sharp corners are kept as the ground-truth vertices.
pub fn rounded_polygon(vertices: &[Point2], r: f64) -> Result<ShapeSpec> {
    let n = vertices.len();
    let mut fillets = Vec::with_capacity(n);
    for i in 0..n {
        let v = vertices[i];
        let a = (v - vertices[(i + n - 1) % n]).normalized().ok_or(Error::DuplicatePoints)?;
        let b = (vertices[(i + 1) % n] - v).normalized().ok_or(Error::DuplicatePoints)?;
        let turn = a.cross(b).atan2(a.dot(b));
        let t = r * (0.5 * turn.abs()).tan();
        let (t1, t2) = (v - a * t, v + b * t);
        let o = if turn > 0.0 { Orientation::Ccw } else { Orientation::Cw };
        let center = t1 + a.perp() * (r * o.sign());
        fillets.push(ArcSeg::Arc {
            start: t1,
            end: t2,
            center,
            radius: r,
            orientation: o,
        });
    }
    let mut pieces = Vec::with_capacity(2 * n);
    for i in 0..n {
        pieces.push(fillets[i]);
        pieces.push(ArcSeg::segment(fillets[i].end(), fillets[(i + 1) % n].start()));
    }
    Ok(ShapeSpec::new(pieces)?.with_vertices(vertices.to_vec()))
}

/// Vertices of the ten-corner rectilinear test outline (millimetres).
pub const RECTILINEAR_TEN: [(f64, f64); 10] = [
    (0.0, 0.0),
    (90.0, 0.0),
    (90.0, 50.0),
    (70.0, 50.0),
    (70.0, 25.0),
    (45.0, 25.0),
    (45.0, 50.0),
    (20.0, 50.0),
    (20.0, 35.0),
    (0.0, 35.0),
];

/// [`RECTILINEAR_TEN`] with fillets of radius `r`.
pub fn rectilinear_ten(r: f64) -> ShapeSpec {
    let v: Vec<Point2> = RECTILINEAR_TEN.iter().map(|&(x, y)| Point2::new(x, y)).collect();
    rounded_polygon(&v, r).expect("outline is valid")
}

/// Parses the shape text format: one primitive per line,
/// `L x1 y1 x2 y2` or `A x1 y1 x2 y2 cx cy cw|ccw`, optional `V x y` lines
/// declaring ground-truth vertices, `#` starting a comment.
pub fn parse_shape(text: &str) -> Result<ShapeSpec> {
    let mut pieces = Vec::new();
    let mut vertices = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut words = body.split_whitespace();
        let tag = words.next().unwrap_or("");
        let rest: Vec<&str> = words.collect();
        let nums = |count: usize| -> Result<Vec<f64>> {
            let want = &rest[..count.min(rest.len())];
            if want.len() != count {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected {count} numbers after {tag}"),
                });
            }
            want.iter()
                .map(|w| {
                    w.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::Parse {
                        line,
                        msg: format!("bad number {w:?}"),
                    })
                })
                .collect()
        };
        let extra = |count: usize| -> Result<()> {
            if rest.len() > count {
                return Err(Error::Parse {
                    line,
                    msg: "trailing fields".into(),
                });
            }
            Ok(())
        };
        match tag {
            "L" => {
                let v = nums(4)?;
                extra(4)?;
                pieces.push(ArcSeg::segment(Point2::new(v[0], v[1]), Point2::new(v[2], v[3])));
            }
            "A" => {
                let v = nums(6)?;
                extra(7)?;
                let o = match rest.get(6).copied() {
                    Some("cw") => Orientation::Cw,
                    Some("ccw") => Orientation::Ccw,
                    other => {
                        return Err(Error::Parse {
                            line,
                            msg: format!("expected cw or ccw, got {other:?}"),
                        })
                    }
                };
                pieces.push(ArcSeg::arc(
                    Point2::new(v[0], v[1]),
                    Point2::new(v[2], v[3]),
                    Point2::new(v[4], v[5]),
                    o,
                ));
            }
            "V" => {
                let v = nums(2)?;
                extra(2)?;
                vertices.push(Point2::new(v[0], v[1]));
            }
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown primitive {other:?}"),
                })
            }
        }
    }
    let shape = ShapeSpec::new(pieces)?;
    Ok(if vertices.is_empty() {
        shape
    } else {
        shape.with_vertices(vertices)
    })
}

/// Writes a shape in the text format read by [`parse_shape`].
pub fn format_shape(shape: &ShapeSpec) -> String {
    let mut out = String::new();
    for p in &shape.pieces {
        match *p {
            ArcSeg::Segment { start, end } => {
                out += &format!("L {} {} {} {}\n", start.x, start.y, end.x, end.y);
            }
            ArcSeg::Arc {
                start,
                end,
                center,
                orientation,
                ..
            } => {
                let o = match orientation {
                    Orientation::Cw => "cw",
                    Orientation::Ccw => "ccw",
                };
                out += &format!(
                    "A {} {} {} {} {} {} {o}\n",
                    start.x, start.y, end.x, end.y, center.x, center.y
                );
            }
        }
    }
    for v in &shape.vertices {
        out += &format!("V {} {}\n", v.x, v.y);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    fn clean(step: f64, excl: f64) -> ScanConfig {
        ScanConfig {
            step,
            corner_exclusion: excl,
            jitter_sigma: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn unit_segment() {
        let shape = ShapeSpec::new(vec![ArcSeg::segment(p(0., 0.), p(1., 0.))]).unwrap();
        let (pts, _) = generate_scan(&shape, &clean(0.25, 0.0)).unwrap();
        let xs: Vec<f64> = pts.iter().map(|q| q.x).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn pentagon_excludes_vertices() {
        let shape = pentagon(50.0);
        assert!(shape.closed);
        assert_eq!(shape.vertices.len(), 5);
        let (pts, truth) = generate_scan(&shape, &clean(1.0, 1.0)).unwrap();
        assert_eq!(pts.len(), 5 * 49);
        let total = shape.length();
        for &s in &truth.positions {
            for k in 0..5 {
                let b = 50.0 * k as f64;
                let d = (s - b).abs().min(total - (s - b).abs());
                assert!(d >= 1.0 - 1e-9);
            }
        }
        for v in &truth.vertices {
            assert!(pts.iter().all(|q| q.dist(*v) > 0.5));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let shape = pentagon(50.0);
        let cfg = ScanConfig::default();
        let (a, _) = generate_scan(&shape, &cfg).unwrap();
        let (b, _) = generate_scan(&shape, &cfg).unwrap();
        assert_eq!(a, b);
        let (c, _) = generate_scan(&shape, &ScanConfig { seed: 2, ..cfg }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn normal_jitter_stays_on_normal() {
        let shape = ShapeSpec::new(vec![ArcSeg::segment(p(0., 0.), p(10., 0.))]).unwrap();
        let (pts, _) = generate_scan(&shape, &ScanConfig { corner_exclusion: 0.0, ..Default::default() }).unwrap();
        for (k, q) in pts.iter().enumerate() {
            assert!((q.x - k as f64).abs() < 1e-12);
        }
        assert!(pts.iter().any(|q| q.y != 0.0));
    }

    #[test]
    fn step_too_large() {
        let shape = ShapeSpec::new(vec![ArcSeg::segment(p(0., 0.), p(1., 0.))]).unwrap();
        assert_eq!(generate_scan(&shape, &clean(0.6, 0.0)), Err(Error::StepTooLarge(0.6)));
    }

    #[test]
    fn rounded_polygon_is_smooth() {
        let shape = rectilinear_ten(1.3);
        assert!(shape.closed);
        assert!(shape.breaks().is_empty());
        assert_eq!(shape.vertices.len(), 10);
        let (pts, _) = generate_scan(&shape, &clean(1.0, 0.0)).unwrap();
        assert!(pts.iter().all(|&q| shape.distance(q) < 1e-9));
    }

    #[test]
    fn text_round_trip() {
        let shape = rectilinear_ten(1.3);
        let back = parse_shape(&format_shape(&shape)).unwrap();
        assert_eq!(back.vertices, shape.vertices);
        assert_eq!(back.pieces.len(), shape.pieces.len());
        for (a, b) in back.pieces.iter().zip(&shape.pieces) {
            assert_eq!(a.start(), b.start());
            assert_eq!(a.end(), b.end());
        }
    }

    #[test]
    fn parse_errors() {
        let text = "# square\nL 0 0 1 0\nL 1 0 1 1 # side\nL 1 1 0 1\nL 0 1 0 0\n";
        let s = parse_shape(text).unwrap();
        assert!(s.closed);
        assert_eq!(s.vertices.len(), 4);
        assert!(matches!(parse_shape("L 0 0 1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_shape("L 0 0 1 0\nQ 1 2"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_shape("A 1 0 0 1 0 0 up"), Err(Error::Parse { line: 1, .. })));
        assert_eq!(parse_shape("L 0 0 1 0\nL 2 0 3 0"), Err(Error::DisconnectedCurve(1)));
    }

    proptest! {
        #[test]
        fn clean_samples_on_contour(step in 0.2..2.0f64, sides in 3usize..8, excl in 0.0..1.0f64) {
            let shape = regular_polygon(sides, 20.0).unwrap();
            let (pts, truth) = generate_scan(&shape, &clean(step, excl)).unwrap();
            for &q in &pts {
                prop_assert!(shape.distance(q) < 1e-12 * 20.0 + 1e-12);
            }
            for w in truth.positions.windows(2) {
                let gap = w[1] - w[0];
                prop_assert!((gap / step - (gap / step).round()).abs() < 1e-9);
            }
        }
    }
}
