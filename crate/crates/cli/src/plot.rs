//! SVG and CSV renderings of a map's graph.

use std::fmt::Write;

use plzig::rational::{format_rational, to_decimal, to_f64};
use plzig::{PLMap, Rational};

/// Significant digits used for every printed decimal.
pub const DIGITS: usize = 12;

#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub width: u32,
    pub height: u32,
    /// Levels drawn as dashed lines, both horizontal and vertical.
    pub guides: Vec<Rational>,
    pub marks: Vec<(Rational, Rational)>,
}

fn px(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub fn svg(f: &PLMap, spec: &PlotSpec) -> String {
    let (w, h) = (spec.width as f64, spec.height as f64);
    let margin = 10.0;
    let sx = |x: &Rational| px(margin + to_f64(x) * w);
    let sy = |y: &Rational| px(margin + (1.0 - to_f64(y)) * h);
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        px(w + 2.0 * margin),
        px(h + 2.0 * margin),
        px(w + 2.0 * margin),
        px(h + 2.0 * margin)
    );
    let _ = writeln!(
        out,
        "  <rect x=\"{m}\" y=\"{m}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>",
        px(w),
        px(h),
        m = px(margin)
    );
    let (zero, one) = (Rational::from_integer(0.into()), Rational::from_integer(1.into()));
    for q in &spec.guides {
        let _ = writeln!(
            out,
            "  <line class=\"guide\" x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>",
            sy(&zero),
            sy(&one),
            x = sx(q)
        );
        let _ = writeln!(
            out,
            "  <line class=\"guide\" x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>",
            sx(&zero),
            sx(&one),
            y = sy(q)
        );
    }
    let points: Vec<String> = f.breakpoints().iter().map(|b| format!("{},{}", sx(&b.x), sy(&b.y))).collect();
    let _ = writeln!(
        out,
        "  <polyline class=\"graph\" points=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>",
        points.join(" ")
    );
    for (x, y) in &spec.marks {
        let _ = writeln!(out, "  <circle class=\"mark\" cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"black\"/>", sx(x), sy(y));
    }
    out.push_str("</svg>\n");
    out
}

/// `x,y,x_exact,y_exact` per breakpoint.
pub fn csv(f: &PLMap) -> String {
    let mut out = String::from("x,y,x_exact,y_exact\n");
    for b in f.breakpoints() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            to_decimal(&b.x, DIGITS),
            to_decimal(&b.y, DIGITS),
            format_rational(&b.x),
            format_rational(&b.y)
        );
    }
    out
}
