//! Stage-by-stage traces of planar compositions, written as CSV and SVG.

use std::fmt::Write as _;
use std::path::Path;

use mindisp_core::{Node, Operator64, Vector64};
use thiserror::Error;

use crate::files::{write_text, OutputError};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("steps must be at least 1")]
    NoSteps,
    #[error("traces need a planar operator, got dimension {0}")]
    NotPlanar(usize),
    #[error(transparent)]
    Core(#[from] mindisp_core::Error),
    #[error(transparent)]
    Output(#[from] OutputError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub stage: String,
    pub point: [f64; 2],
}

fn stages(op: &Operator64) -> Vec<Operator64> {
    match op.node() {
        Node::Compose { children } => children.to_vec(),
        _ => vec![op.clone()],
    }
}

/// Names of the partial products after each stage, outermost operator
/// first: `P1`, `P2P1`, `P3P2P1` for a composition applying `P1, P2, P3`.
pub fn stage_names(op: &Operator64) -> Vec<String> {
    let parts = stages(op);
    let single = parts.len() == 1;
    let labels: Vec<String> = parts
        .iter()
        .enumerate()
        .map(|(i, c)| match c.label() {
            Some(l) => l.to_string(),
            None if single => "T".to_string(),
            None => format!("T{}", i + 1),
        })
        .collect();
    (1..=labels.len())
        .map(|k| labels[..k].iter().rev().map(String::as_str).collect())
        .collect()
}

/// Applies `op` `steps` times from `x0`, recording the point after every stage.
pub fn trace_points(op: &Operator64, x0: &Vector64, steps: usize) -> Result<Vec<TraceRecord>, TraceError> {
    if steps == 0 {
        return Err(TraceError::NoSteps);
    }
    if op.dim() != 2 {
        return Err(TraceError::NotPlanar(op.dim()));
    }
    x0.check_dim(2)?;
    let parts = stages(op);
    let names = stage_names(op);
    let mut records = Vec::with_capacity(steps * parts.len());
    let mut x = x0.clone();
    for step in 1..=steps {
        for (part, name) in parts.iter().zip(&names) {
            x = part.apply(&x)?;
            records.push(TraceRecord {
                step,
                stage: name.clone(),
                point: [x[0], x[1]],
            });
        }
    }
    Ok(records)
}

pub fn trace_csv(records: &[TraceRecord]) -> String {
    let mut out = String::from("step,stage,x,y\n");
    for r in records {
        let _ = writeln!(out, "{},{},{},{}", r.step, csv_field(&r.stage), r.point[0], r.point[1]);
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 40.0;
const STAGE_COLOURS: [&str; 4] = ["#1f5fbf", "#2e9e3f", "#d9822b", "#8e44ad"];

fn stage_colour(index: usize, count: usize) -> &'static str {
    if index + 1 == count {
        "#000000"
    } else {
        STAGE_COLOURS[index % STAGE_COLOURS.len()]
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Data window mapped onto the canvas with equal scaling on both axes.
struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    scale: f64,
}

impl Frame {
    fn fit(points: &[[f64; 2]]) -> Self {
        let (mut x_min, mut x_max, mut y_min, mut y_max) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            x_min = x_min.min(p[0]);
            x_max = x_max.max(p[0]);
            y_min = y_min.min(p[1]);
            y_max = y_max.max(p[1]);
        }
        let pad = |lo: f64, hi: f64| {
            let span = (hi - lo).max(2.0);
            let mid = 0.5 * (lo + hi);
            (mid - 0.6 * span, mid + 0.6 * span)
        };
        let (x_min, x_max) = pad(x_min, x_max);
        let (y_min, y_max) = pad(y_min, y_max);
        let scale = ((WIDTH - 2.0 * MARGIN) / (x_max - x_min)).min((HEIGHT - 2.0 * MARGIN) / (y_max - y_min));
        // widen the looser axis so the window fills the canvas
        let x_extra = 0.5 * (WIDTH / scale - (x_max - x_min));
        let y_extra = 0.5 * (HEIGHT / scale - (y_max - y_min));
        Self {
            x_min: x_min - x_extra,
            x_max: x_max + x_extra,
            y_min: y_min - y_extra,
            y_max: y_max + y_extra,
            scale,
        }
    }

    fn px(&self, x: f64) -> f64 {
        (x - self.x_min) * self.scale
    }

    fn py(&self, y: f64) -> f64 {
        (self.y_max - y) * self.scale
    }

    fn corners(&self) -> [[f64; 2]; 4] {
        [
            [self.x_min, self.y_min],
            [self.x_max, self.y_min],
            [self.x_max, self.y_max],
            [self.x_min, self.y_max],
        ]
    }

    /// Clips the line `⟨n, p⟩ = c` to the window.
    fn line(&self, n: [f64; 2], c: f64) -> Option<([f64; 2], [f64; 2])> {
        let mut hits: Vec<[f64; 2]> = Vec::new();
        let corners = self.corners();
        for k in 0..4 {
            let (a, b) = (corners[k], corners[(k + 1) % 4]);
            let fa = n[0] * a[0] + n[1] * a[1] - c;
            let fb = n[0] * b[0] + n[1] * b[1] - c;
            if fa == fb {
                continue;
            }
            let t = fa / (fa - fb);
            if (0.0..=1.0).contains(&t) {
                let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                if !hits.iter().any(|q| (q[0] - p[0]).abs() + (q[1] - p[1]).abs() < 1e-12) {
                    hits.push(p);
                }
            }
        }
        (hits.len() >= 2).then(|| (hits[0], hits[1]))
    }
}

fn f4(v: f64) -> String {
    let s = format!("{v:.4}");
    if s == "-0.0000" {
        "0.0000".to_string()
    } else {
        s
    }
}

fn draw_set(svg: &mut String, frame: &Frame, op: &Operator64) {
    const STYLE: &str = "fill:none;stroke:#888888;stroke-width:1.5";
    match op.node() {
        Node::ProjHyperplane { normal, offset } | Node::ProjHalfspace { normal, offset } => {
            let dash = matches!(op.node(), Node::ProjHalfspace { .. });
            if let Some((a, b)) = frame.line([normal[0], normal[1]], *offset) {
                let _ = writeln!(
                    svg,
                    r#"<line x1="{}" y1="{}" x2="{}" y2="{}" style="{STYLE}{}"/>"#,
                    f4(frame.px(a[0])),
                    f4(frame.py(a[1])),
                    f4(frame.px(b[0])),
                    f4(frame.py(b[1])),
                    if dash { ";stroke-dasharray:6 4" } else { "" }
                );
            }
        }
        Node::ProjBox { lo, hi } => {
            let _ = writeln!(
                svg,
                r#"<rect x="{}" y="{}" width="{}" height="{}" style="{STYLE}"/>"#,
                f4(frame.px(lo[0])),
                f4(frame.py(hi[1])),
                f4((hi[0] - lo[0]) * frame.scale),
                f4((hi[1] - lo[1]) * frame.scale)
            );
        }
        Node::ProjBall { center, radius } => {
            let _ = writeln!(
                svg,
                r#"<circle cx="{}" cy="{}" r="{}" style="{STYLE}"/>"#,
                f4(frame.px(center[0])),
                f4(frame.py(center[1])),
                f4(radius * frame.scale)
            );
        }
        Node::ProjHyperbolaEpi => {
            let lo = frame.x_min.max(1.0 / frame.y_max.max(1e-6)).max(1e-6);
            let hi = frame.x_max;
            if hi > lo {
                let samples = 400;
                let points: Vec<String> = (0..=samples)
                    .map(|k| {
                        // geometric spacing in x
                        let x = lo * (hi / lo).powf(k as f64 / samples as f64);
                        format!("{},{}", f4(frame.px(x)), f4(frame.py(1.0 / x)))
                    })
                    .collect();
                let _ = writeln!(svg, r#"<polyline points="{}" style="{STYLE}"/>"#, points.join(" "));
            }
        }
        _ => {}
    }
}

pub fn trace_svg(op: &Operator64, x0: &Vector64, records: &[TraceRecord]) -> String {
    let names = stage_names(op);
    let mut all: Vec<[f64; 2]> = records.iter().map(|r| r.point).collect();
    all.push([x0[0], x0[1]]);
    let frame = Frame::fit(&all);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" style="fill:#ffffff"/>"#
    );
    for part in stages(op) {
        draw_set(&mut svg, &frame, &part);
    }
    let _ = writeln!(
        svg,
        r#"<circle cx="{}" cy="{}" r="4" style="fill:none;stroke:#c0392b;stroke-width:1.5"/>"#,
        f4(frame.px(x0[0])),
        f4(frame.py(x0[1]))
    );
    for r in records {
        let index = names.iter().position(|n| *n == r.stage).unwrap_or(0);
        let _ = writeln!(
            svg,
            r#"<circle cx="{}" cy="{}" r="2.5" style="fill:{}"/>"#,
            f4(frame.px(r.point[0])),
            f4(frame.py(r.point[1])),
            stage_colour(index, names.len())
        );
    }
    let legend_height = 18.0 * (names.len() + 1) as f64 + 8.0;
    let _ = writeln!(
        svg,
        r#"<rect x="10" y="10" width="170" height="{}" style="fill:#ffffff;stroke:#cccccc"/>"#,
        f4(legend_height)
    );
    let mut y = 28.0;
    let _ = writeln!(
        svg,
        r#"<circle cx="22" cy="{}" r="4" style="fill:none;stroke:#c0392b;stroke-width:1.5"/>"#,
        f4(y - 4.0)
    );
    let _ = writeln!(
        svg,
        r#"<text x="34" y="{}" style="font-family:sans-serif;font-size:12px">x0</text>"#,
        f4(y)
    );
    for (i, name) in names.iter().enumerate() {
        y += 18.0;
        let _ = writeln!(
            svg,
            r#"<circle cx="22" cy="{}" r="4" style="fill:{}"/>"#,
            f4(y - 4.0),
            stage_colour(i, names.len())
        );
        let _ = writeln!(
            svg,
            r#"<text x="34" y="{}" style="font-family:sans-serif;font-size:12px">{}</text>"#,
            f4(y),
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes the trace CSV and, when requested, the SVG.
pub fn emit_trace(
    op: &Operator64,
    x0: &Vector64,
    steps: usize,
    csv_path: &Path,
    svg_path: Option<&Path>,
) -> Result<Vec<TraceRecord>, TraceError> {
    let records = trace_points(op, x0, steps)?;
    write_text(csv_path, &trace_csv(&records))?;
    if let Some(svg_path) = svg_path {
        write_text(svg_path, &trace_svg(op, x0, &records))?;
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demos::{depierro_cyclic, depierro_noncyclic};
    use mindisp_core::OperatorExpr;

    fn x0() -> Vector64 {
        Vector64::from_f64(&[-3.0, 0.5]).unwrap()
    }

    #[test]
    fn stage_labels_follow_application_order() {
        assert_eq!(stage_names(&depierro_cyclic()), ["P1", "P2P1", "P3P2P1"]);
        assert_eq!(stage_names(&depierro_noncyclic()), ["P2", "P1P2", "P3P1P2"]);
        assert_eq!(stage_names(&OperatorExpr::identity(2)), ["T"]);
    }

    #[test]
    fn identity_trace_stays_put() {
        let records = trace_points(&OperatorExpr::identity(2), &x0(), 5).unwrap();
        assert_eq!(records.len(), 5);
        assert!(records.iter().all(|r| r.point == [-3.0, 0.5]));
        assert_eq!(records.iter().map(|r| r.step).collect::<Vec<_>>(), [1, 2, 3, 4, 5]);
    }

    #[test]
    fn preconditions() {
        assert!(matches!(
            trace_points(&OperatorExpr::identity(2), &x0(), 0),
            Err(TraceError::NoSteps)
        ));
        assert!(matches!(
            trace_points(&OperatorExpr::identity(3), &Vector64::zeros(3), 1),
            Err(TraceError::NotPlanar(3))
        ));
    }

    #[test]
    fn csv_has_the_fixed_header() {
        let records = trace_points(&depierro_cyclic(), &x0(), 2).unwrap();
        let csv = trace_csv(&records);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("step,stage,x,y"));
        assert_eq!(lines.next(), Some("1,P1,-3,0"));
        assert_eq!(lines.next(), Some("1,P2P1,-3,1"));
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn svg_is_well_formed_and_stable() {
        let op = depierro_cyclic();
        let records = trace_points(&op, &x0(), 30).unwrap();
        let a = trace_svg(&op, &x0(), &records);
        let b = trace_svg(&op, &x0(), &records);
        assert_eq!(a, b);
        assert!(a.starts_with("<?xml"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("<line").count(), 2);
        assert_eq!(a.matches("<polyline").count(), 1);
        assert!(a.contains(">P3P2P1</text>"));
    }
}
