//! Reduced-arc fitting with guaranteed C0 continuity: consecutive arcs
//! always share an endpoint, and each split point is chosen greedily to
//! maximize the number of points the next two arcs cover.

use crate::error::Result;
use crate::geom::{ArcSeg, PccCurve, Point2};
use crate::lsq::{fit_window_piece, FitOptions};
use crate::par::Exec;
use crate::spline_longest::{SplineBuild, WindowResiduals};

/// Selects a chain of windows from `m`.
///
/// At start `i` the default pair (the full window of `i`, then the window
/// starting at its end) covers `m[i] + m[i + m[i] − 1] − 1` points. Each
/// split `j ∈ [i + 2, i + m[i] − 2]` is scored `j − i + m[j]`; the best
/// score wins, `g[i]` becomes the first window's length and the scan jumps
/// to the end of the second window. When the default pair runs off the
/// table the default score is `m[i]`.
pub fn select_g_c0(m: &[usize]) -> Vec<usize> {
    let n = m.len();
    let mut g = m.to_vec();
    if n < 3 {
        return vec![0; n];
    }
    let mut i = 0;
    while i + 2 < n {
        if m[i] == 0 {
            break;
        }
        let s = m[i];
        let mut k = i;
        let tail = i + s - 1;
        let mut z = if tail < n && m[tail] > 0 { s + m[tail] - 1 } else { s };
        let mut j = i + 2;
        while j + 2 <= i + m[i] && j < n {
            let score = j - i + m[j];
            if score > z {
                k = j;
                z = score;
            }
            j += 1;
        }
        g[i + 1..k.max(i + 1)].iter_mut().for_each(|x| *x = 0);
        let end_k = (k + m[k]).saturating_sub(1).min(n);
        if k + 1 < end_k {
            g[k + 1..end_k].iter_mut().for_each(|x| *x = 0);
        }
        if i != k {
            g[i] = k - i + 1;
        }
        if m[k] == 0 {
            break;
        }
        i = k + m[k] - 1;
    }
    g[n - 2] = 0;
    g[n - 1] = 0;
    g
}

/// The chained windows `(start, end)` encoded in `g`, followed from index 0.
pub fn windows(g: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < g.len() && g[i] > 0 {
        let e = i + g[i] - 1;
        out.push((i, e));
        i = e;
    }
    out
}

/// Builds one constrained arc per window, re-validating each against
/// `epsilon` and halving any window that fails. Appends the closing segment
/// when the chain stops one point short of the end.
pub fn build_spline_c0(points: &[Point2], g: &[usize], epsilon: f64, fit: &FitOptions) -> Result<SplineBuild> {
    let mut curve = PccCurve::new();
    let ws = windows(g);
    for &(a, b) in &ws {
        push_window(points, a, b, epsilon, fit, &mut curve)?;
    }
    let last = ws.last().map(|w| w.1).unwrap_or(0);
    if last + 1 < points.len() {
        // only the final point can be left over; anything else is joined
        // point to point so the curve still reaches the end
        for k in last..points.len() - 1 {
            curve.push(ArcSeg::segment(points[k], points[k + 1]), Some((k, k + 1)));
        }
    }
    Ok(SplineBuild::new(curve, points, epsilon))
}

fn push_window(
    points: &[Point2],
    a: usize,
    b: usize,
    epsilon: f64,
    fit: &FitOptions,
    curve: &mut PccCurve,
) -> Result<()> {
    if b - a == 1 {
        curve.push(ArcSeg::segment(points[a], points[b]), Some((a, b)));
        return Ok(());
    }
    let (piece, f) = fit_window_piece(&points[a..=b], fit)?;
    let deviation = points[a + 1..b]
        .iter()
        .map(|&p| piece.distance(p))
        .fold(f.max_residual, f64::max);
    if deviation <= epsilon || b - a == 2 {
        curve.push(piece, Some((a, b)));
        return Ok(());
    }
    let mid = (a + b) / 2;
    push_window(points, a, mid, epsilon, fit, curve)?;
    push_window(points, mid, b, epsilon, fit, curve)
}

/// Full C0 fit of one open point sequence: tables, selection and curve.
pub fn fit_c0(points: &[Point2], epsilon: f64, fit: &FitOptions, exec: Exec) -> Result<(Vec<usize>, Vec<usize>, SplineBuild)> {
    let mut cache = WindowResiduals::new(points, *fit)?;
    fit_c0_cached(&mut cache, epsilon, exec)
}

/// [`fit_c0`] reusing window residuals from earlier runs on the same points.
pub fn fit_c0_cached(
    cache: &mut WindowResiduals,
    epsilon: f64,
    exec: Exec,
) -> Result<(Vec<usize>, Vec<usize>, SplineBuild)> {
    let m = cache.build_m(epsilon, exec);
    let g = select_g_c0(&m);
    let build = build_spline_c0(cache.points(), &g, epsilon, cache.opts())?;
    Ok((m, g, build))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;
    use proptest::prelude::*;

    #[test]
    fn worked_example_split() {
        let m = [5, 4, 3, 7, 4, 5, 4, 3, 4, 3, 0, 0];
        let g = select_g_c0(&m);
        assert_eq!(g[0], 4);
        assert_eq!(windows(&g), vec![(0, 3), (3, 9), (9, 11)]);
        let ws = windows(&g);
        // the first two windows cover ten points
        assert_eq!(ws[1].1 - ws[0].0 + 1, 10);
    }

    #[test]
    fn exact_circle_single_window() {
        let g = select_g_c0(&[8, 7, 6, 5, 4, 3, 0, 0]);
        assert_eq!(g, vec![8, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn exact_circle_fit_is_one_arc() {
        let pts: Vec<Point2> = (0..8).map(|i| Point2::new(1.0, 2.0) + Vec2::from_angle(0.25 * i as f64) * 7.0).collect();
        let (_, _, b) = fit_c0(&pts, 1e-6, &FitOptions::default(), Exec::Sequential).unwrap();
        assert_eq!(b.curve.len(), 1);
        assert_eq!(b.curve.arc_count(), 1);
        assert!(b.residuals.iter().all(|&r| r < 1e-6));
    }

    #[test]
    fn chain_ending_short_gets_tail_segment() {
        // windows 0..=2 and 2..=4 leave point 5 for the tail segment
        let pts: Vec<Point2> = (0..6).map(|i| Point2::new(i as f64, (i * i) as f64 * 0.1)).collect();
        let g = vec![3, 0, 3, 0, 0, 0];
        let b = build_spline_c0(&pts, &g, 1.0, &FitOptions::default()).unwrap();
        assert_eq!(b.curve.len(), 3);
        assert!(matches!(b.curve.segs[2], ArcSeg::Segment { .. }));
        assert_eq!(b.curve.segs[2].end(), pts[5]);
        assert!(b.curve.is_chained());
    }

    fn valid_m() -> impl Strategy<Value = Vec<usize>> {
        (4usize..40).prop_flat_map(|n| {
            let rows: Vec<_> = (0..n - 2).map(|i| 3usize..=(n - i)).collect();
            rows.prop_map(|mut v| {
                v.push(0);
                v.push(0);
                v
            })
        })
    }

    proptest! {
        #[test]
        fn windows_chain(m in valid_m()) {
            let g = select_g_c0(&m);
            let ws = windows(&g);
            prop_assert!(!ws.is_empty());
            prop_assert_eq!(ws[0].0, 0);
            for w in ws.windows(2) {
                prop_assert_eq!(w[0].1, w[1].0);
            }
            let end = ws.last().unwrap().1;
            prop_assert!(end + 2 >= m.len());
            for &(a, b) in &ws {
                prop_assert!(b - a < m[a]);
            }
        }
    }
}
