//! Deterministic SVG rendering of patches.

use crate::tiling::{Patch, Window};

/// Vertical axis mapping. `Linear` keeps Euclidean proportions; `LogY`
/// spends equal height on each scale octave, which keeps deep hierarchies
/// legible.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YScale {
    Linear,
    LogY,
}

const CANVAS_W: f64 = 800.0;
const MAX_H: f64 = 1600.0;

/// Fills keyed by color index, cycling past the palette end.
const PALETTE: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#59a14a", "#e15759", "#b07aa1", "#76b7b2", "#edc948", "#ff9da7",
];

fn y_map(y: f64, w: &Window, scale: YScale) -> f64 {
    let (y0, y1) = (w.y0.to_f64(), w.y1.to_f64());
    let frac = match scale {
        YScale::Linear => (y - y0) / (y1 - y0),
        YScale::LogY => (y.ln() - y0.ln()) / (y1.ln() - y0.ln()),
    };
    1.0 - frac
}

fn fmt(v: f64) -> String {
    // fixed-point output keeps the byte stream stable across runs
    format!("{v:.4}")
}

/// Renders the patch as standalone SVG 1.1, one rectangle per tile clipped
/// to the window, fill keyed by color. Identical patches give identical
/// bytes. An empty patch renders the window frame alone.
pub fn render_svg(patch: &Patch, scale: YScale) -> String {
    let w = &patch.window;
    let (x0, x1) = (w.x0.to_f64(), w.x1.to_f64());
    let aspect = match scale {
        YScale::Linear => (w.y1.to_f64() - w.y0.to_f64()) / (x1 - x0),
        YScale::LogY => (w.y1.to_f64().ln() - w.y0.to_f64().ln()) / (x1 - x0),
    };
    let height = (CANVAS_W * aspect).clamp(1.0, MAX_H);
    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\">\n",
        fmt(CANVAS_W),
        fmt(height),
        fmt(CANVAS_W),
        fmt(height)
    ));
    out.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\" stroke=\"#222222\" \
         stroke-width=\"1\"/>\n",
        fmt(CANVAS_W),
        fmt(height)
    ));
    for ct in &patch.tiles {
        let tx0 = ct.tile.x1.to_f64().max(x0);
        let tx1 = ct.tile.x2.to_f64().min(x1);
        let ty0 = ct.tile.y1.to_f64().max(w.y0.to_f64());
        let ty1 = ct.tile.y2.to_f64().min(w.y1.to_f64());
        if tx0 >= tx1 || ty0 >= ty1 {
            continue;
        }
        let px0 = CANVAS_W * (tx0 - x0) / (x1 - x0);
        let px1 = CANVAS_W * (tx1 - x0) / (x1 - x0);
        let py0 = height * y_map(ty1, w, scale);
        let py1 = height * y_map(ty0, w, scale);
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" \
             stroke=\"#1a1a1a\" stroke-width=\"0.5\"/>\n",
            fmt(px0),
            fmt(py0),
            fmt(px1 - px0),
            fmt(py1 - py0),
            PALETTE[ct.color.0 % PALETTE.len()]
        ));
    }
    out.push_str("</svg>\n");
    out
}
