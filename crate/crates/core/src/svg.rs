//! SVG rendering of geometries (patch boundaries, isoparameter lines,
//! highlighted interfaces) and of log-log convergence plots with
//! reference-slope triangles.
//!
//! All coordinates are written with fixed precision so identical inputs
//! produce byte-identical output.

use crate::multipatch::{MultiPatch, Side};
use crate::projection::ConvergenceReport;
use crate::spline::SplineError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SvgError {
    #[error("geometry has no patches")]
    Empty,
    #[error("convergence report has fewer than two usable levels")]
    TooFewLevels,
    #[error(transparent)]
    Spline(#[from] SplineError),
}

const CURVE_SEGMENTS: usize = 64;

fn fmt(v: f64) -> String {
    format!("{:.4}", v)
}

struct Frame {
    xmin: f64,
    ymax: f64,
    scale: f64,
}

impl Frame {
    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        // flip y: SVG grows downward
        (
            (x - self.xmin) * self.scale,
            (self.ymax - y) * self.scale,
        )
    }
}

fn edge_params(side: Side, t: f64) -> (f64, f64) {
    match side {
        Side::Bottom => (t, 0.0),
        Side::Top => (t, 1.0),
        Side::Left => (0.0, t),
        Side::Right => (1.0, t),
    }
}

fn sample_curve(
    geom: &MultiPatch<f64>,
    patch_pos: usize,
    point_at: impl Fn(f64) -> (f64, f64),
    frame: &Frame,
) -> Result<String, SvgError> {
    let g = &geom.patches[patch_pos].geometry;
    let mut d = String::new();
    for s in 0..=CURVE_SEGMENTS {
        let t = s as f64 / CURVE_SEGMENTS as f64;
        let (u, v) = point_at(t);
        let p = g.eval(&u, &v, 0, 0)?;
        let (x, y) = frame.map(p.x, p.y);
        if s == 0 {
            d.push_str(&format!("M {} {}", fmt(x), fmt(y)));
        } else {
            d.push_str(&format!(" L {} {}", fmt(x), fmt(y)));
        }
    }
    Ok(d)
}

/// Render a geometry: per patch its four boundary edges, `isolines`
/// isoparameter curves per direction, and every interface highlighted.
pub fn render_geometry(geom: &MultiPatch<f64>, isolines: usize) -> Result<String, SvgError> {
    if geom.patches.is_empty() {
        return Err(SvgError::Empty);
    }
    // bounding box over sampled boundaries
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for pm in &geom.patches {
        for side in [Side::Bottom, Side::Top, Side::Left, Side::Right] {
            for s in 0..=CURVE_SEGMENTS {
                let t = s as f64 / CURVE_SEGMENTS as f64;
                let (u, v) = edge_params(side, t);
                let p = pm.geometry.eval(&u, &v, 0, 0)?;
                xmin = xmin.min(p.x);
                xmax = xmax.max(p.x);
                ymin = ymin.min(p.y);
                ymax = ymax.max(p.y);
            }
        }
    }
    let spread = (xmax - xmin).max(ymax - ymin).max(1e-12);
    let scale = 500.0 / spread;
    let margin = 0.05 * spread;
    let frame = Frame {
        xmin: xmin - margin,
        ymax: ymax + margin,
        scale,
    };
    let width = (xmax - xmin + 2.0 * margin) * scale;
    let height = (ymax - ymin + 2.0 * margin) * scale;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\">\n",
        fmt(width),
        fmt(height),
        fmt(width),
        fmt(height)
    ));

    // isolines first so boundaries draw over them
    for (pos, _) in geom.patches.iter().enumerate() {
        for c in 1..=isolines {
            let w = c as f64 / (isolines + 1) as f64;
            let du = sample_curve(geom, pos, |t| (w, t), &frame)?;
            let dv = sample_curve(geom, pos, |t| (t, w), &frame)?;
            for d in [du, dv] {
                out.push_str(&format!(
                    "  <path class=\"isoline\" d=\"{}\" fill=\"none\" \
                     stroke=\"#b0c4de\" stroke-width=\"1\"/>\n",
                    d
                ));
            }
        }
    }
    for (pos, _) in geom.patches.iter().enumerate() {
        for side in [Side::Bottom, Side::Top, Side::Left, Side::Right] {
            let d = sample_curve(geom, pos, |t| edge_params(side, t), &frame)?;
            out.push_str(&format!(
                "  <path class=\"boundary\" d=\"{}\" fill=\"none\" \
                 stroke=\"#222222\" stroke-width=\"2\"/>\n",
                d
            ));
        }
    }
    for itf in &geom.interfaces {
        let pos = geom
            .patches
            .iter()
            .position(|p| p.id == itf.edge_a.patch)
            .expect("interface references an existing patch");
        let d = sample_curve(geom, pos, |t| edge_params(itf.edge_a.side, t), &frame)?;
        out.push_str(&format!(
            "  <path class=\"interface\" d=\"{}\" fill=\"none\" \
             stroke=\"#d62728\" stroke-width=\"3\"/>\n",
            d
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

const PLOT_W: f64 = 640.0;
const PLOT_H: f64 = 480.0;
const PLOT_MARGIN: f64 = 60.0;

/// Render a convergence report as a log-log plot (one polyline per norm)
/// with reference-slope triangles for orders 2, 3 and 4.
pub fn render_convergence(report: &ConvergenceReport) -> Result<String, SvgError> {
    let series: [(&str, &str, Vec<(f64, f64)>); 3] = [
        (
            "eL2",
            "#1f77b4",
            report
                .rows
                .iter()
                .filter(|r| r.e_l2 > 0.0)
                .map(|r| (r.h.log10(), r.e_l2.log10()))
                .collect(),
        ),
        (
            "eH1",
            "#2ca02c",
            report
                .rows
                .iter()
                .filter(|r| r.e_h1 > 0.0)
                .map(|r| (r.h.log10(), r.e_h1.log10()))
                .collect(),
        ),
        (
            "eH2",
            "#9467bd",
            report
                .rows
                .iter()
                .filter(|r| r.e_h2 > 0.0)
                .map(|r| (r.h.log10(), r.e_h2.log10()))
                .collect(),
        ),
    ];
    let pts: Vec<(f64, f64)> = series.iter().flat_map(|s| s.2.iter().copied()).collect();
    if pts.len() < 2 {
        return Err(SvgError::TooFewLevels);
    }
    let (mut lxmin, mut lxmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lymin, mut lymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &pts {
        lxmin = lxmin.min(*x);
        lxmax = lxmax.max(*x);
        lymin = lymin.min(*y);
        lymax = lymax.max(*y);
    }
    // one common scale for both axes so equal log-log slopes render as
    // equal on-screen slopes (the "parallel to the triangle" reading)
    let span = (lxmax - lxmin).max(lymax - lymin).max(1e-12);
    let scale = (PLOT_W - 2.0 * PLOT_MARGIN).min(PLOT_H - 2.0 * PLOT_MARGIN) / (1.4 * span);
    let map = |lx: f64, ly: f64| -> (f64, f64) {
        (
            PLOT_MARGIN + (lx - lxmin) * scale,
            PLOT_H - PLOT_MARGIN - (ly - lymin) * scale,
        )
    };

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\">\n",
        fmt(PLOT_W),
        fmt(PLOT_H),
        fmt(PLOT_W),
        fmt(PLOT_H)
    ));
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"20\" font-size=\"14\">target {} : log10 error vs log10 h</text>\n",
        fmt(PLOT_MARGIN),
        report.target
    ));
    for (name, color, data) in &series {
        if data.len() < 2 {
            continue;
        }
        let points: Vec<String> = data
            .iter()
            .map(|(lx, ly)| {
                let (x, y) = map(*lx, *ly);
                format!("{},{}", fmt(x), fmt(y))
            })
            .collect();
        out.push_str(&format!(
            "  <polyline class=\"{}\" points=\"{}\" fill=\"none\" stroke=\"{}\" \
             stroke-width=\"2\"/>\n",
            name,
            points.join(" "),
            color
        ));
    }
    // reference triangles: hypotenuse rises `order` decades per decade of h
    let tri_dx = 0.25 * span;
    for (i, order) in [2.0, 3.0, 4.0].iter().enumerate() {
        let lx0 = lxmin + 0.05 * span;
        let ly0 = lymin + (0.08 + 0.22 * i as f64) * span;
        let (x0, y0) = map(lx0, ly0);
        let (x1, y1) = map(lx0 + tri_dx, ly0 + order * tri_dx);
        out.push_str(&format!(
            "  <path class=\"ref-order-{}\" d=\"M {} {} L {} {} L {} {} Z\" fill=\"none\" \
             stroke=\"#888888\" stroke-width=\"1\"/>\n",
            *order as usize,
            fmt(x0),
            fmt(y0),
            fmt(x1),
            fmt(y1),
            fmt(x1),
            fmt(y0)
        ));
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" font-size=\"12\" fill=\"#888888\">{}</text>\n",
            fmt(x1 + 4.0),
            fmt(0.5 * (y0 + y1)),
            *order as usize
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
