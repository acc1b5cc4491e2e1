//! Longest-arc fitting: for every start index find the longest window that
//! one constrained arc approximates within tolerance (the `M` table), keep
//! the longest non-dominated windows (the `G` table) and join them, filling
//! the uncovered stretches in between.
//!
//! Arrays are 0-based here; index `i` corresponds to point `i + 1` in the
//! 1-based numbering used by serialized output.

use serde::{Deserialize, Serialize};

use crate::biarc::{fit_biarc_optimal, Biarc};
use crate::error::{Error, Result};
use crate::geom::{arc_through_three, tangent_at, ArcSeg, End, PccCurve, Point2, Vec2};
use crate::lsq::{fit_window, fit_window_piece, FitOptions};
use crate::par::{self, Exec};

/// Default fitting tolerance in mm.
pub const DEFAULT_EPSILON: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitTables {
    pub m: Vec<usize>,
    pub g: Vec<usize>,
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapPolicy {
    #[default]
    Recurse,
    Biarc,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplineBuild {
    pub curve: PccCurve,
    pub covered: Vec<bool>,
    pub residuals: Vec<f64>,
}

impl SplineBuild {
    pub fn new(curve: PccCurve, points: &[Point2], epsilon: f64) -> Self {
        let residuals: Vec<f64> = points.iter().map(|&p| curve.distance(p)).collect();
        let covered = residuals.iter().map(|&r| r <= epsilon).collect();
        Self {
            curve,
            covered,
            residuals,
        }
    }
}

/// Rejects coincident points anywhere in the sequence.
pub fn check_distinct(points: &[Point2]) -> Result<()> {
    let mut sorted: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DuplicatePoints);
    }
    Ok(())
}

/// Memoized maximum interior residuals of constrained fits, keyed by
/// window. The fit itself does not depend on the tolerance, so one cache
/// serves any number of tolerances over the same points.
#[derive(Debug, Clone)]
pub struct WindowResiduals {
    points: Vec<Point2>,
    opts: FitOptions,
    /// `rows[i][len]`: residual of the window `i ..= i + len`; NaN if unknown.
    rows: Vec<Vec<f64>>,
}

impl WindowResiduals {
    pub fn new(points: &[Point2], opts: FitOptions) -> Result<Self> {
        if points.len() < 4 {
            return Err(Error::TooFewPoints {
                needed: 4,
                got: points.len(),
            });
        }
        check_distinct(points)?;
        Ok(Self {
            points: points.to_vec(),
            opts,
            rows: vec![Vec::new(); points.len()],
        })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn opts(&self) -> &FitOptions {
        &self.opts
    }

    fn residual(points: &[Point2], opts: &FitOptions, row: &mut Vec<f64>, i: usize, j: usize) -> f64 {
        let len = j - i;
        if row.len() <= len {
            row.resize(len + 1, f64::NAN);
        }
        if row[len].is_nan() {
            row[len] = fit_window(&points[i..=j], opts)
                .map(|f| f.max_residual)
                .unwrap_or(f64::INFINITY);
        }
        row[len]
    }

    /// Largest interior residual of the constrained arc from `i` to `j`.
    pub fn max_residual(&mut self, i: usize, j: usize) -> f64 {
        Self::residual(&self.points, &self.opts, &mut self.rows[i], i, j)
    }

    /// The `M` table: `m[i]` counts the points of the longest window starting
    /// at `i` reached by growing one point at a time until a fit fails.
    /// Every row is independent, so rows are evaluated under `exec`.
    pub fn build_m(&mut self, epsilon: f64, exec: Exec) -> Vec<usize> {
        let n = self.points.len();
        let points = &self.points;
        let opts = &self.opts;
        let mut m = vec![0usize; n];
        let mut work: Vec<(&mut Vec<f64>, &mut usize)> =
            self.rows.iter_mut().zip(m.iter_mut()).take(n - 2).collect();
        par::for_each_mut(exec, &mut work, |i, (row, out)| {
            let mut k = if i == n - 3 { 2 } else { 3 };
            **out = loop {
                if Self::residual(points, opts, row, i, i + k) > epsilon {
                    break k;
                }
                k += 1;
                if i + k >= n {
                    break k;
                }
            };
        });
        m
    }
}

/// [`WindowResiduals::build_m`] with default fit options and executor.
pub fn build_m(points: &[Point2], epsilon: f64) -> Result<Vec<usize>> {
    Ok(WindowResiduals::new(points, FitOptions::default())?.build_m(epsilon, Exec::default()))
}

/// Selects arc start points from `m`.
///
/// At start `i` the indices `i+1 ..= i + ⌊m[i]/2⌋` are scanned; the first
/// one with a longer window becomes the new start and the indices skipped
/// are dropped. If there is none the window of `i` is kept, its interior is
/// dropped and the scan continues at its last point.
pub fn select_g(m: &[usize]) -> Vec<usize> {
    let n = m.len();
    let mut g = m.to_vec();
    if n < 3 {
        return vec![0; n];
    }
    let mut i = 0;
    while i + 1 < n {
        if m[i] == 0 {
            break;
        }
        let s = m[i] / 2;
        let upper = (i + s).min(n - 3);
        let better = (i + 1..=upper).find(|&j| m[j] > m[i]);
        match better {
            Some(j) => {
                g[i..j].iter_mut().for_each(|x| *x = 0);
                i = j;
            }
            None => {
                let e = i + m[i] - 1;
                g[i + 1..e.min(n)].iter_mut().for_each(|x| *x = 0);
                i = e;
            }
        }
    }
    g[n - 2] = 0;
    g[n - 1] = 0;
    g
}

impl FitTables {
    pub fn compute(points: &[Point2], epsilon: f64) -> Result<Self> {
        let mut cache = WindowResiduals::new(points, FitOptions::default())?;
        Ok(Self::from_cache(&mut cache, epsilon, Exec::default()))
    }

    pub fn from_cache(cache: &mut WindowResiduals, epsilon: f64, exec: Exec) -> Self {
        let m = cache.build_m(epsilon, exec);
        let g = select_g(&m);
        Self { m, g, epsilon }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SplineOptions {
    pub gap_policy: GapPolicy,
    pub fit: FitOptions,
    pub exec: Exec,
}

impl Default for SplineOptions {
    fn default() -> Self {
        Self {
            gap_policy: GapPolicy::Recurse,
            fit: FitOptions::default(),
            exec: Exec::default(),
        }
    }
}

/// Constrained arc over `points[a..=b]`, recorded with its source range.
fn window_piece(points: &[Point2], a: usize, b: usize, opts: &FitOptions) -> Result<ArcSeg> {
    if b - a == 1 {
        return Ok(ArcSeg::segment(points[a], points[b]));
    }
    Ok(fit_window_piece(&points[a..=b], opts)?.0)
}

/// Assembles the curve from the selected windows. Stretches not covered by
/// any window are bridged: one step by a segment, two steps by the circle
/// through the three points, longer stretches by re-running the whole
/// method on them or by a biarc, depending on the policy.
pub fn build_spline(points: &[Point2], tables: &FitTables, opts: &SplineOptions) -> Result<SplineBuild> {
    let curve = assemble(points, &tables.g, tables.epsilon, opts)?;
    Ok(SplineBuild::new(curve, points, tables.epsilon))
}

fn assemble(points: &[Point2], g: &[usize], epsilon: f64, opts: &SplineOptions) -> Result<PccCurve> {
    let n = points.len();
    let mut curve = PccCurve::new();
    // start of the uncovered stretch that ends at the current point
    let mut last_end = 0usize;
    let mut i = 0usize;
    while i < n {
        if g[i] == 0 {
            i += 1;
            if i >= n {
                let end = n - 1;
                if end > last_end {
                    fill_gap(points, last_end, end, None, &mut curve, epsilon, opts)?;
                }
                break;
            }
            continue;
        }
        let e = (i + g[i] - 1).min(n - 1);
        let piece = window_piece(points, i, e, &opts.fit)?;
        if i > last_end {
            fill_gap(points, last_end, i, Some(&piece), &mut curve, epsilon, opts)?;
        }
        curve.push(piece, Some((i, e)));
        last_end = e;
        i = e;
        if e == n - 1 {
            break;
        }
    }
    Ok(curve)
}

fn fill_gap(
    points: &[Point2],
    a: usize,
    b: usize,
    next: Option<&ArcSeg>,
    curve: &mut PccCurve,
    epsilon: f64,
    opts: &SplineOptions,
) -> Result<()> {
    match b - a {
        0 => {}
        1 => curve.push(ArcSeg::segment(points[a], points[b]), Some((a, b))),
        2 => curve.push(arc_through_three(points[a], points[a + 1], points[b])?, Some((a, b))),
        _ => {
            let filled = match opts.gap_policy {
                GapPolicy::Biarc => biarc_gap(points, a, b, curve.segs.last(), next, epsilon)
                    .or_else(|_| recurse_gap(points, a, b, epsilon, opts)),
                GapPolicy::Recurse => recurse_gap(points, a, b, epsilon, opts),
            };
            let filled = filled.unwrap_or_else(|_| chained_segments(points, a, b));
            curve.extend(filled);
        }
    }
    Ok(())
}

fn recurse_gap(points: &[Point2], a: usize, b: usize, epsilon: f64, opts: &SplineOptions) -> Result<PccCurve> {
    let sub = &points[a..=b];
    let mut cache = WindowResiduals::new(sub, opts.fit)?;
    let tables = FitTables::from_cache(&mut cache, epsilon, opts.exec);
    let mut c = assemble(sub, &tables.g, epsilon, opts)?;
    c.offset_sources(a);
    Ok(c)
}

fn biarc_gap(
    points: &[Point2],
    a: usize,
    b: usize,
    prev: Option<&ArcSeg>,
    next: Option<&ArcSeg>,
    epsilon: f64,
) -> Result<PccCurve> {
    let chord = |i: usize, j: usize| -> Result<Vec2> {
        (points[j] - points[i]).normalized().ok_or(Error::DuplicatePoints)
    };
    let ts = match prev {
        Some(s) => tangent_at(s, End::End),
        None => chord(a, a + 1)?,
    };
    let te = match next {
        Some(s) => tangent_at(s, End::Start),
        None => chord(b - 1, b)?,
    };
    let (biarc, dev): (Biarc, f64) = fit_biarc_optimal(points[a], ts, points[b], te, &points[a + 1..b])?;
    if dev > epsilon {
        return Err(Error::GapUnfillable);
    }
    let mut c = PccCurve::new();
    for s in biarc.arcs {
        c.push(s, Some((a, b)));
    }
    Ok(c)
}

fn chained_segments(points: &[Point2], a: usize, b: usize) -> PccCurve {
    let mut c = PccCurve::new();
    for k in a..b {
        c.push(ArcSeg::segment(points[k], points[k + 1]), Some((k, k + 1)));
    }
    c
}

/// Full longest-arc fit of one open point sequence.
pub fn fit_longest(points: &[Point2], epsilon: f64, opts: &SplineOptions) -> Result<(FitTables, SplineBuild)> {
    let mut cache = WindowResiduals::new(points, opts.fit)?;
    let tables = FitTables::from_cache(&mut cache, epsilon, opts.exec);
    let build = build_spline(points, &tables, opts)?;
    Ok((tables, build))
}
