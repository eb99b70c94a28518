//! Deterministic SVG rendering: heatmap cells for fields, polylines for
//! trajectories, labeled goal markers. Identical inputs yield identical
//! bytes.

use std::fmt::Write as _;

use planchette_core::board::{BoardLayout, Position};
use planchette_core::oracle::Grid;

const SCALE: f64 = 60.0;
const MARGIN: f64 = 20.0;

/// Five-stop colormap from deep violet to yellow.
const STOPS: [(f64, f64, f64); 5] = [
    (0.267, 0.005, 0.329),
    (0.229, 0.322, 0.545),
    (0.127, 0.566, 0.551),
    (0.369, 0.789, 0.383),
    (0.993, 0.906, 0.144),
];

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (t as usize).min(STOPS.len() - 2);
    let f = t - i as f64;
    let mix = |a: f64, b: f64| ((a + (b - a) * f) * 255.0).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(STOPS[i].0, STOPS[i + 1].0),
        mix(STOPS[i].1, STOPS[i + 1].1),
        mix(STOPS[i].2, STOPS[i + 1].2)
    )
}

struct Frame {
    x_min: f64,
    y_max: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(board: &BoardLayout) -> Frame {
        let b = board.bounds();
        Frame {
            x_min: b.x_min,
            y_max: b.y_max,
            width: b.width() * SCALE + 2.0 * MARGIN,
            height: b.height() * SCALE + 2.0 * MARGIN,
        }
    }

    // SVG y grows downward; board y grows upward.
    fn px(&self, p: Position) -> (f64, f64) {
        (MARGIN + (p.x - self.x_min) * SCALE, MARGIN + (self.y_max - p.y) * SCALE)
    }
}

fn open_svg(out: &mut String, frame: &Frame) {
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" \
         viewBox=\"0 0 {:.0} {:.0}\">",
        frame.width, frame.height, frame.width, frame.height
    )
    .unwrap();
    writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{:.0}\" height=\"{:.0}\" fill=\"#ffffff\"/>",
        frame.width, frame.height
    )
    .unwrap();
}

fn draw_board(out: &mut String, board: &BoardLayout, frame: &Frame) {
    let b = board.bounds();
    let (bx, by) = frame.px(Position::new(b.x_min, b.y_max));
    writeln!(
        out,
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" \
         stroke=\"#333333\" stroke-width=\"1\"/>",
        bx,
        by,
        b.width() * SCALE,
        b.height() * SCALE
    )
    .unwrap();
    for s in board.alphabet().symbols() {
        let (gx, gy) = frame.px(board.goal(s));
        writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"#ffffff\" stroke=\"#222222\" \
             stroke-width=\"1\"/>",
            gx, gy
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" font-family=\"monospace\" \
             text-anchor=\"middle\" fill=\"#111111\">{}</text>",
            gx,
            gy - 6.0,
            board.alphabet().label(s)
        )
        .unwrap();
    }
}

/// Heatmap of per-cell values (energies or probabilities) with goal glyphs
/// on top.
pub fn render_field_svg(grid: &Grid, values: &[f64], board: &BoardLayout) -> String {
    let frame = Frame::new(board);
    let mut out = String::new();
    open_svg(&mut out, &frame);

    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cell_px = grid.step() * SCALE;
    for ((cell, _), &v) in grid.cells().zip(values) {
        let corner = Position::new(cell.x - grid.step() / 2.0, cell.y + grid.step() / 2.0);
        let (x, y) = frame.px(corner);
        writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
            x,
            y,
            cell_px,
            cell_px,
            color((v - lo) / span)
        )
        .unwrap();
    }
    draw_board(&mut out, board, &frame);
    out.push_str("</svg>\n");
    out
}

/// Board, goals, and the planchette path as a polyline (absent when the
/// trajectory is empty).
pub fn render_trajectory_svg(positions: &[Position], board: &BoardLayout) -> String {
    let frame = Frame::new(board);
    let mut out = String::new();
    open_svg(&mut out, &frame);
    draw_board(&mut out, board, &frame);
    if !positions.is_empty() {
        let mut points = String::new();
        for (i, &p) in positions.iter().enumerate() {
            let (x, y) = frame.px(p);
            if i > 0 {
                points.push(' ');
            }
            write!(points, "{x:.2},{y:.2}").unwrap();
        }
        writeln!(
            out,
            "<polyline points=\"{points}\" fill=\"none\" stroke=\"#cc3311\" \
             stroke-width=\"1.5\" stroke-opacity=\"0.8\"/>"
        )
        .unwrap();
        let (sx, sy) = frame.px(positions[0]);
        writeln!(out, "<circle cx=\"{sx:.2}\" cy=\"{sy:.2}\" r=\"4\" fill=\"#cc3311\"/>")
            .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
