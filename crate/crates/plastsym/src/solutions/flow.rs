//! Velocity-field sampling on a square grid, with CSV and SVG emitters.
//!
//! The grid walks y in the outer loop and x in the inner loop, skipping the
//! origin (where every catalogued flow is singular) and any point at which a
//! branch function leaves its domain; skipped points are counted so a
//! surprising gap is visible in the report. Output formatting avoids
//! anything platform- or time-dependent: identical inputs produce
//! byte-identical CSV and SVG.

use super::families::SolutionFamily;
use crate::symexpr::{Env, EvalError};
use std::fmt::Write as _;

/// Uniform sample positions `min..=max` with `n` points per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

/// Failure to read a `min:max:n` grid description.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum GridParseError {
    #[error("grid spec `{0}` is not of the form min:max:n")]
    Shape(String),
    #[error("grid spec `{0}`: {1}")]
    Value(String, String),
}

impl GridSpec {
    pub fn new(min: f64, max: f64, n: usize) -> Self {
        GridSpec { min, max, n }
    }

    /// Parse `"min:max:n"`, e.g. `-2:2:21`.
    pub fn parse(text: &str) -> Result<Self, GridParseError> {
        let shape = || GridParseError::Shape(text.to_string());
        let parts: Vec<&str> = text.split(':').collect();
        let [min, max, n] = parts.as_slice() else {
            return Err(shape());
        };
        let min: f64 = min.trim().parse().map_err(|_| shape())?;
        let max: f64 = max.trim().parse().map_err(|_| shape())?;
        let n: usize = n.trim().parse().map_err(|_| shape())?;
        let value = |msg: &str| GridParseError::Value(text.to_string(), msg.to_string());
        if !(min.is_finite() && max.is_finite()) {
            return Err(value("bounds must be finite"));
        }
        if min >= max {
            return Err(value("min must be below max"));
        }
        if n < 2 {
            return Err(value("need at least two points per axis"));
        }
        Ok(GridSpec { min, max, n })
    }

    /// The sample positions along one axis.
    pub fn points(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n).map(|i| self.min + i as f64 * step).collect()
    }

    /// Grid pitch in data units.
    pub fn cell(&self) -> f64 {
        (self.max - self.min) / (self.n - 1) as f64
    }
}

/// One evaluated grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowSample {
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
}

/// A velocity field sampled at a fixed time.
#[derive(Clone, Debug)]
pub struct FlowFieldGrid {
    pub family: String,
    pub t: f64,
    /// Parameter bindings in effect, sorted by name.
    pub params: Vec<(String, f64)>,
    pub grid: GridSpec,
    pub rows: Vec<FlowSample>,
    /// Points dropped at the origin or on a branch-domain violation.
    pub skipped: usize,
}

/// Evaluate the family's velocity components over the grid at time `t`.
///
/// Only `u` and `v` are evaluated — the stress fields are irrelevant to the
/// flow picture and often carry branch cuts (e.g. along y = 0) that the
/// velocity does not share.
pub fn flow_field(
    fam: &SolutionFamily,
    env: &Env,
    t: f64,
    grid: &GridSpec,
) -> Result<FlowFieldGrid, EvalError> {
    let axis = grid.points();
    let mut rows = Vec::with_capacity(grid.n * grid.n);
    let mut skipped = 0usize;
    for &y in &axis {
        for &x in &axis {
            if x * x + y * y == 0.0 {
                skipped += 1;
                continue;
            }
            let mut at = env.clone();
            at.set_var("t", t).set_var("x", x).set_var("y", y);
            let u = match fam.u.eval(&at) {
                Ok(u) => u,
                Err(EvalError::DomainViolation { .. }) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            let v = match fam.v.eval(&at) {
                Ok(v) => v,
                Err(EvalError::DomainViolation { .. }) => {
                    skipped += 1;
                    continue;
                }
                Err(e) => return Err(e),
            };
            rows.push(FlowSample { x, y, u, v });
        }
    }
    Ok(FlowFieldGrid {
        family: fam.name.to_string(),
        t,
        params: env
            .params
            .iter()
            .map(|(k, v)| (k.as_str().to_string(), *v))
            .collect(),
        grid: *grid,
        rows,
        skipped,
    })
}

/// CSV with a single comment line recording the provenance, then an
/// `x,y,u,v` header and one row per evaluated point. Floats print in
/// shortest round-trip form, so equal inputs give byte-equal output.
pub fn to_csv(field: &FlowFieldGrid) -> String {
    let mut out = String::new();
    let _ = write!(out, "# family={} t={}", field.family, field.t);
    for (k, v) in &field.params {
        let _ = write!(out, " {k}={v}");
    }
    out.push('\n');
    out.push_str("x,y,u,v\n");
    for s in &field.rows {
        let _ = writeln!(out, "{},{},{},{}", s.x, s.y, s.u, s.v);
    }
    out
}

const SVG_SIDE: f64 = 640.0;

/// A quiver plot: one arrow per sample, scaled so the fastest arrow spans
/// 0.45 grid cells, with a caption naming the family and time.
pub fn to_svg(field: &FlowFieldGrid) -> String {
    let g = &field.grid;
    // Pad the drawing by half a cell so edge arrows stay inside the frame.
    let span = (g.max - g.min) + g.cell();
    let scale = SVG_SIDE / span;
    let px = |x: f64| (x - g.min + 0.5 * g.cell()) * scale;
    let py = |y: f64| SVG_SIDE - (y - g.min + 0.5 * g.cell()) * scale;

    let max_speed = field
        .rows
        .iter()
        .map(|s| s.u.hypot(s.v))
        .fold(0.0f64, f64::max);
    let arrow_px = 0.45 * g.cell() * scale;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{side}\" height=\"{side}\" \
         viewBox=\"0 0 {side} {side}\">",
        side = SVG_SIDE
    );
    let _ = writeln!(
        out,
        "  <rect width=\"{side}\" height=\"{side}\" fill=\"#ffffff\"/>",
        side = SVG_SIDE
    );
    let _ = writeln!(
        out,
        "  <text x=\"10\" y=\"20\" font-family=\"monospace\" font-size=\"14\">{} t={}</text>",
        field.family, field.t
    );
    let _ = writeln!(out, "  <g stroke=\"#1a4f8a\" stroke-width=\"1\" fill=\"none\">");
    for s in &field.rows {
        let speed = s.u.hypot(s.v);
        let (cx, cy) = (px(s.x), py(s.y));
        if max_speed == 0.0 || speed == 0.0 {
            let _ = writeln!(
                out,
                "    <circle cx=\"{cx:.3}\" cy=\"{cy:.3}\" r=\"0.8\" fill=\"#1a4f8a\"/>"
            );
            continue;
        }
        let len = arrow_px * speed / max_speed;
        // Screen direction: x as-is, y flipped.
        let (dx, dy) = (s.u / speed * len, -s.v / speed * len);
        let (x0, y0) = (cx - 0.5 * dx, cy - 0.5 * dy);
        let (x1, y1) = (cx + 0.5 * dx, cy + 0.5 * dy);
        // Arrow head: two barbs swept back from the tip.
        let head = 0.3 * len;
        let (hx, hy) = (dx / len, dy / len);
        let (bx, by) = (-hy, hx);
        let (ax0, ay0) = (x1 - head * (hx - 0.5 * bx), y1 - head * (hy - 0.5 * by));
        let (ax1, ay1) = (x1 - head * (hx + 0.5 * bx), y1 - head * (hy + 0.5 * by));
        let _ = writeln!(
            out,
            "    <path d=\"M {x0:.3} {y0:.3} L {x1:.3} {y1:.3} M {ax0:.3} {ay0:.3} \
             L {x1:.3} {y1:.3} L {ax1:.3} {ay1:.3}\"/>"
        );
    }
    let _ = writeln!(out, "  </g>");
    out.push_str("</svg>\n");
    out
}
