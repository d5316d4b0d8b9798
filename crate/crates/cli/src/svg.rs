//! Indicatrix and fitted ellipse in square coordinates `x = |vhat|^2`,
//! `y = |v1|^2`, as a standalone SVG document.

use std::fmt::Write;

use egg_metrics::ellipsoid::EllipsoidFit;
use egg_metrics::kobayashi::{CurveBranch, KCurveSample};

const SIZE: f64 = 480.0;
const PAD: f64 = 40.0;

pub fn render(samples: &[KCurveSample], fit: &EllipsoidFit, m: f64, p: f64) -> String {
    let x_max = samples.iter().map(|s| s.x).fold(1.0 / fit.r2, f64::max);
    let y_max = samples.iter().map(|s| s.y).fold(1.0 / fit.r1, f64::max);
    let sx = |x: f64| PAD + x / x_max * (SIZE - 2.0 * PAD);
    let sy = |y: f64| SIZE - PAD - y / y_max * (SIZE - 2.0 * PAD);

    let path = |branch: CurveBranch| {
        let mut d = String::new();
        for (i, s) in samples.iter().filter(|s| s.branch == branch).enumerate() {
            let _ = write!(
                d,
                "{}{:.3},{:.3} ",
                if i == 0 { "M" } else { "L" },
                sx(s.x),
                sy(s.y)
            );
        }
        d.trim_end().to_string()
    };
    // the upper curve ends where the lower one starts
    let junction = samples.iter().rfind(|s| s.branch == CurveBranch::Upper).copied();
    let lower = match junction {
        Some(j) => format!(
            "M{:.3},{:.3} {}",
            sx(j.x),
            sy(j.y),
            path(CurveBranch::Lower).replacen('M', "L", 1)
        ),
        None => path(CurveBranch::Lower),
    };

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, "  <title>Indicatrix at p = {p}, m = {m}</title>");
    let _ = writeln!(out, r##"  <rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(
        out,
        r##"  <g stroke="#888888" stroke-width="1"><line x1="{0}" y1="{1}" x2="{2}" y2="{1}"/><line x1="{0}" y1="{1}" x2="{0}" y2="{3}"/></g>"##,
        sx(0.0),
        sy(0.0),
        sx(x_max),
        sy(y_max)
    );
    let _ = writeln!(
        out,
        r##"  <path class="upper-curve" d="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        path(CurveBranch::Upper)
    );
    let _ = writeln!(
        out,
        r##"  <path class="lower-curve" d="{lower}" fill="none" stroke="#2ca02c" stroke-width="2"/>"##
    );
    let _ = writeln!(
        out,
        r##"  <line class="ellipse" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#d62728" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
        sx(0.0),
        sy(1.0 / fit.r1),
        sx(1.0 / fit.r2),
        sy(0.0)
    );
    for (x, y) in touching(samples, fit) {
        let _ = writeln!(
            out,
            r##"  <circle class="tangency" cx="{:.3}" cy="{:.3}" r="4" fill="#d62728"/>"##,
            sx(x),
            sy(y)
        );
    }
    if let Some(j) = junction {
        let _ = writeln!(
            out,
            r##"  <circle class="crossover" cx="{:.3}" cy="{:.3}" r="3" fill="none" stroke="#000000"/>"##,
            sx(j.x),
            sy(j.y)
        );
    }
    let _ = writeln!(
        out,
        r##"  <text x="{PAD}" y="{}" font-family="sans-serif" font-size="12">x = |v2|^2 + ... + |vn|^2, y = |v1|^2; r1 = {:.6}, r2 = {:.6}</text>"##,
        SIZE - 10.0,
        fit.r1,
        fit.r2
    );
    out.push_str("</svg>\n");
    out
}

/// Samples where the fitted boundary touches the indicatrix.
fn touching(samples: &[KCurveSample], fit: &EllipsoidFit) -> Vec<(f64, f64)> {
    samples
        .iter()
        .filter(|s| fit.r1 * s.y + fit.r2 * s.x >= 1.0 - egg_metrics::ellipsoid::ACTIVITY_TOL)
        .map(|s| (s.x, s.y))
        .collect()
}
