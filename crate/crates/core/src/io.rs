//! Point and curve file formats: CSV input, JSON/SVG/G-code output.

use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{ArcSeg, Orientation, PccCurve, Point2};

/// Parses `x,y` lines. A first line that does not parse as two numbers is
/// taken as a header; blank lines are skipped.
pub fn parse_points<R: Read>(input: R) -> Result<Vec<Point2>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out: Vec<Point2> = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(k + 1, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let parsed = (rec.len() == 2)
            .then(|| Some((rec[0].parse::<f64>().ok()?, rec[1].parse::<f64>().ok()?)))
            .flatten()
            .filter(|(x, y)| x.is_finite() && y.is_finite());
        let Some((x, y)) = parsed else {
            if out.is_empty() && k == 0 {
                continue;
            }
            return Err(Error::Parse {
                line,
                msg: format!("expected two numbers, got {:?}", rec.iter().collect::<Vec<_>>()),
            });
        };
        let p = Point2::new(x, y);
        if out.last() == Some(&p) {
            return Err(Error::DuplicateConsecutive { line });
        }
        out.push(p);
    }
    Ok(out)
}

pub fn read_points(path: impl AsRef<Path>) -> Result<Vec<Point2>> {
    parse_points(std::fs::File::open(path)?)
}

/// Writes points as `x,y` lines with a header.
pub fn write_points<W: Write>(points: &[Point2], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["x", "y"]).map_err(io)?;
    for p in points {
        w.serialize((p.x, p.y)).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveFormat {
    Json,
    Svg,
    Gcode,
}

impl std::str::FromStr for CurveFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            "gcode" | "nc" => Ok(Self::Gcode),
            other => Err(Error::Parse {
                line: 0,
                msg: format!("unknown curve format {other:?}"),
            }),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonPiece {
    #[serde(flatten)]
    seg: ArcSeg,
    /// 1-based inclusive range of source points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<(usize, usize)>,
}

fn check_chained(curve: &PccCurve) -> Result<()> {
    match curve.first_gap() {
        Some(k) => Err(Error::DisconnectedCurve(k)),
        None => Ok(()),
    }
}

pub fn curve_to_json(curve: &PccCurve) -> Result<String> {
    check_chained(curve)?;
    let pieces: Vec<JsonPiece> = curve
        .segs
        .iter()
        .zip(&curve.sources)
        .map(|(&seg, src)| JsonPiece {
            seg,
            source: src.map(|(a, b)| (a + 1, b + 1)),
        })
        .collect();
    serde_json::to_string_pretty(&pieces).map_err(|e| Error::Io(e.to_string()))
}

pub fn curve_from_json(text: &str) -> Result<PccCurve> {
    let pieces: Vec<JsonPiece> = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        msg: e.to_string(),
    })?;
    let mut curve = PccCurve::new();
    for p in pieces {
        let src = match p.source {
            Some((a, b)) if a == 0 || b == 0 => {
                return Err(Error::Parse {
                    line: 0,
                    msg: "source indices are 1-based".into(),
                })
            }
            Some((a, b)) => Some((a - 1, b - 1)),
            None => None,
        };
        curve.push(p.seg, src);
    }
    Ok(curve)
}

/// Fixed 4-decimal coordinate with negative zero printed as zero.
fn num(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

/// G-code program: `G21`/`G90` preamble, rapid to the start, then one
/// `G1`/`G2`/`G3` move per piece with `I`/`J` relative to the move start.
pub fn curve_to_gcode(curve: &PccCurve) -> Result<String> {
    check_chained(curve)?;
    let mut out = String::from("G21\nG90\n");
    let Some(first) = curve.segs.first() else {
        return Ok(out);
    };
    let s = first.start();
    let _ = writeln!(out, "G0 X{} Y{}", num(s.x), num(s.y));
    for seg in &curve.segs {
        out += &gcode_move(seg);
        out.push('\n');
    }
    Ok(out)
}

/// The single move line for one piece.
pub fn gcode_move(seg: &ArcSeg) -> String {
    match *seg {
        ArcSeg::Segment { end, .. } => format!("G1 X{} Y{}", num(end.x), num(end.y)),
        ArcSeg::Arc {
            start,
            end,
            center,
            orientation,
            ..
        } => {
            let code = match orientation {
                Orientation::Cw => "G2",
                Orientation::Ccw => "G3",
            };
            format!(
                "{code} X{} Y{} I{} J{}",
                num(end.x),
                num(end.y),
                num(center.x - start.x),
                num(center.y - start.y)
            )
        }
    }
}

/// SVG path data for the curve in model coordinates.
pub fn svg_path_data(curve: &PccCurve) -> String {
    let mut d = String::new();
    let Some(first) = curve.segs.first() else {
        return d;
    };
    let s = first.start();
    let _ = write!(d, "M {} {}", s.x, s.y);
    for seg in &curve.segs {
        match *seg {
            ArcSeg::Segment { end, .. } => {
                let _ = write!(d, " L {} {}", end.x, end.y);
            }
            ArcSeg::Arc {
                end,
                radius,
                orientation,
                ..
            } => {
                let large = u8::from(seg.sweep() > std::f64::consts::PI);
                let sweep = u8::from(orientation == Orientation::Ccw);
                let _ = write!(d, " A {radius} {radius} 0 {large} {sweep} {} {}", end.x, end.y);
            }
        }
    }
    d
}

/// SVG document with the curve as one path, plus optional data points and
/// corners. One user unit is one millimetre; the y axis points up.
pub fn curve_to_svg(curve: &PccCurve, points: &[Point2], corners: &[Point2]) -> Result<String> {
    check_chained(curve)?;
    let all = curve
        .segs
        .iter()
        .flat_map(|s| {
            let mut v = vec![s.start(), s.end()];
            if s.is_arc() {
                v.extend((1..8).map(|k| s.point_at(k as f64 / 8.0)));
            }
            v
        })
        .chain(points.iter().copied())
        .chain(corners.iter().copied());
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in all {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    if !x0.is_finite() {
        (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1.0);
    let (w, h) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let stroke = 0.002 * w.max(h);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}mm" height="{h}mm" viewBox="{} {} {w} {h}">"#,
        x0 - pad,
        -(y1 + pad)
    );
    out += "<g transform=\"scale(1,-1)\">\n";
    let _ = writeln!(
        out,
        r#"<path d="{}" fill="none" stroke="blue" stroke-width="{stroke}"/>"#,
        svg_path_data(curve)
    );
    for p in points {
        let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="{}" fill="black"/>"#, p.x, p.y, 1.5 * stroke);
    }
    for c in corners {
        let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="{}" fill="red"/>"#, c.x, c.y, 4.0 * stroke);
    }
    out += "</g>\n</svg>\n";
    Ok(out)
}

/// Serializes `curve` in `format`; SVG output includes `points` and
/// `corners` as dots.
pub fn format_curve(curve: &PccCurve, format: CurveFormat, points: &[Point2], corners: &[Point2]) -> Result<String> {
    match format {
        CurveFormat::Json => curve_to_json(curve),
        CurveFormat::Svg => curve_to_svg(curve, points, corners),
        CurveFormat::Gcode => curve_to_gcode(curve),
    }
}

pub fn write_curve(curve: &PccCurve, format: CurveFormat, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, format_curve(curve, format, &[], &[])?)?;
    Ok(())
}
