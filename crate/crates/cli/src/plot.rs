//! Static SVG scatter plots of the objective images, for two and three
//! objectives. Three-objective images are drawn through a fixed orthographic
//! projection. Enclosure runs can additionally show the local bound
//! staircases.

use std::fmt::Write;

use nalgebra::DVector;
use vopt_core::engine::SolveResult;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

#[derive(Debug)]
pub enum PlotError {
    /// Plots are only rendered for two or three objectives.
    UnsupportedDimension(usize),
    NothingToPlot,
}

impl std::fmt::Display for PlotError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlotError::UnsupportedDimension(q) => {
                write!(f, "plotting supports 2 or 3 objectives, problem has {q}")
            }
            PlotError::NothingToPlot => write!(f, "no images to plot"),
        }
    }
}

impl std::error::Error for PlotError {}

/// Renders the image scatter (and, for enclosure runs in 2D, the local bound
/// staircases) as an SVG document.
pub fn render_svg(result: &SolveResult, q: usize) -> Result<String, PlotError> {
    if q != 2 && q != 3 {
        return Err(PlotError::UnsupportedDimension(q));
    }
    if result.images.is_empty() {
        return Err(PlotError::NothingToPlot);
    }

    type Projection = Box<dyn Fn(&DVector<f64>) -> (f64, f64)>;
    let project: Projection = if q == 2 {
        Box::new(|v: &DVector<f64>| (v[0], v[1]))
    } else {
        // Fixed orthographic view along (1,1,1).
        let u = DVector::from_row_slice(&[1.0, -1.0, 0.0]) / 2.0_f64.sqrt();
        let w = DVector::from_row_slice(&[1.0, 1.0, -2.0]) / 6.0_f64.sqrt();
        Box::new(move |v: &DVector<f64>| (u.dot(v), w.dot(v)))
    };

    let mut points: Vec<(f64, f64)> = result.images.iter().map(&*project).collect();
    let mut stair_lower: Vec<(f64, f64)> = Vec::new();
    let mut stair_upper: Vec<(f64, f64)> = Vec::new();
    if q == 2 {
        if let Some(enc) = &result.enclosure {
            stair_lower = staircase(&enc.lower, true);
            stair_upper = staircase(&enc.upper, false);
            points.extend(stair_lower.iter().copied());
            points.extend(stair_upper.iter().copied());
        }
    }

    let (mut xmin, mut xmax, mut ymin, mut ymax) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for (x, y) in &points {
        xmin = xmin.min(*x);
        xmax = xmax.max(*x);
        ymin = ymin.min(*y);
        ymax = ymax.max(*y);
    }
    let pad = |lo: f64, hi: f64| {
        let span = (hi - lo).max(1e-9);
        (lo - 0.05 * span, hi + 0.05 * span)
    };
    let (xmin, xmax) = pad(xmin, xmax);
    let (ymin, ymax) = pad(ymin, ymax);
    let sx = (WIDTH - 2.0 * MARGIN) / (xmax - xmin);
    let sy = (HEIGHT - 2.0 * MARGIN) / (ymax - ymin);
    let to_px = |x: f64, y: f64| (MARGIN + (x - xmin) * sx, HEIGHT - MARGIN - (y - ymin) * sy);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    // Axes.
    let (ax0, ay0) = to_px(xmin, ymin);
    let (ax1, _) = to_px(xmax, ymin);
    let (_, ay1) = to_px(xmin, ymax);
    let _ = writeln!(
        svg,
        "<line x1=\"{ax0}\" y1=\"{ay0}\" x2=\"{ax1}\" y2=\"{ay0}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{ax0}\" y1=\"{ay0}\" x2=\"{ax0}\" y2=\"{ay1}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\">{:.3} .. {:.3}</text>",
        MARGIN,
        HEIGHT - 12.0,
        xmin,
        xmax
    );
    let _ = writeln!(
        svg,
        "<text x=\"4\" y=\"{}\" font-size=\"12\" transform=\"rotate(-90 12 {})\">{:.3} .. {:.3}</text>",
        MARGIN, MARGIN, ymin, ymax
    );

    for (label, stair, color) in [
        ("lower", &stair_lower, "#1b7837"),
        ("upper", &stair_upper, "#b2182b"),
    ] {
        if stair.is_empty() {
            continue;
        }
        let pts: Vec<String> = stair
            .iter()
            .map(|(x, y)| {
                let (px, py) = to_px(*x, *y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1\" data-bound=\"{label}\"/>",
            pts.join(" ")
        );
    }

    for image in &result.images {
        let (x, y) = project(image);
        let (px, py) = to_px(x, y);
        let _ = writeln!(
            svg,
            "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"3\" fill=\"#2166ac\" fill-opacity=\"0.8\"/>"
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Staircase polyline through a 2D antichain: sort by the first coordinate
/// and alternate horizontal and vertical segments.
fn staircase(set: &[DVector<f64>], lower: bool) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = set.iter().map(|v| (v[0], v[1])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pts.len() * 2);
    for (i, &(x, y)) in pts.iter().enumerate() {
        if let Some(&(_, py)) = out.last() {
            // Corner point between consecutive staircase steps.
            if lower {
                out.push((x, py));
            } else {
                let _ = py;
                let prev = pts[i - 1];
                out.push((prev.0, y));
            }
        }
        out.push((x, y));
    }
    out
}
