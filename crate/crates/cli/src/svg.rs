use std::fmt::Write;

use homolink_core::mesh::SkeletonSet;

use crate::results::ResultBundle;
use crate::scenario::Scenario;
use crate::CliError;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];
const PLOT: f64 = 600.0;
const MARGIN: f64 = 20.0;
const LEGEND_W: f64 = 320.0;
const ROW: f64 = 18.0;

/// Parses `xy`, `xz`, `y0`-style axis pairs: letters x, y, z, w or digits.
pub fn parse_projection(s: &str) -> Result<[usize; 2], CliError> {
    let axis = |c: char| match c {
        'x' => Some(0),
        'y' => Some(1),
        'z' => Some(2),
        'w' => Some(3),
        d => d.to_digit(10).map(|v| v as usize),
    };
    let cs: Vec<char> = s.chars().collect();
    match cs.as_slice() {
        [a, b] => match (axis(*a), axis(*b)) {
            (Some(i), Some(j)) if i != j => Ok([i, j]),
            _ => Err(CliError::Usage(format!("bad projection {s:?}"))),
        },
        _ => Err(CliError::Usage(format!(
            "bad projection {s:?}; use two axes such as xy"
        ))),
    }
}

/// Draws obstacles, skeletons and the class paths of a plan result.
pub fn emit_svg(
    result: &ResultBundle,
    scenario: &Scenario,
    skeletons: &SkeletonSet,
    project: Option<[usize; 2]>,
) -> Result<String, CliError> {
    let axes = match (scenario.d, project) {
        (2, None) => [0, 1],
        (_, Some(p)) if p[0] < scenario.d && p[1] < scenario.d => p,
        (_, Some(p)) => {
            return Err(CliError::Usage(format!(
                "projection {p:?} out of range for D = {}",
                scenario.d
            )));
        }
        (d, None) => {
            return Err(CliError::Usage(format!(
                "D = {d} needs a projection such as --project xy"
            )))
        }
    };
    let legend_h = MARGIN * 2.0 + ROW * (result.classes.len() + 1) as f64;
    let mut out = String::new();
    if result.classes.is_empty() {
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{LEGEND_W}" height="{legend_h}">"#
        )
        .unwrap();
        legend(&mut out, result, 0.0);
        out.push_str("</svg>\n");
        return Ok(out);
    }

    let (lo, hi) = bounds(result, scenario, axes);
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let s = PLOT / span;
    let tx = |p: &[f64]| {
        (
            MARGIN + (p[axes[0]] - lo[0]) * s,
            MARGIN + (hi[1] - p[axes[1]]) * s,
        )
    };
    let width = PLOT + 2.0 * MARGIN + LEGEND_W;
    let height = (PLOT + 2.0 * MARGIN).max(legend_h);
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}">"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#
    )
    .unwrap();
    let rect = |out: &mut String, a: &[f64], b: &[f64], style: &str| {
        let (x0, y0) = tx(a);
        let (x1, y1) = tx(b);
        writeln!(
            out,
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" {style}/>"#,
            x0.min(x1),
            y0.min(y1),
            (x1 - x0).abs(),
            (y1 - y0).abs()
        )
        .unwrap();
    };
    if let Some(g) = &scenario.grid {
        rect(
            &mut out,
            &g.lower,
            &g.upper,
            r##"fill="none" stroke="#444" stroke-width="1""##,
        );
        out.push_str("<g id=\"obstacles\">\n");
        for b in &g.blocked {
            rect(&mut out, &b.lower, &b.upper, r##"fill="#bbbbbb""##);
        }
        out.push_str("</g>\n");
    }
    if let Some(sub) = &scenario.subspace {
        out.push_str("<g id=\"subspace\">\n");
        for b in &sub.boxes {
            rect(
                &mut out,
                &b.lower,
                &b.upper,
                r##"fill="#9ecae1" fill-opacity="0.4""##,
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("<g id=\"skeletons\">\n");
    for c in &skeletons.skeletons {
        for (simplex, _) in c.terms() {
            let v = simplex.vertices();
            if v.len() == 1 {
                let (x, y) = tx(&v[0].0);
                writeln!(
                    out,
                    r#"<path d="M{:.3} {:.3}L{:.3} {:.3}M{:.3} {:.3}L{:.3} {:.3}" stroke="black" stroke-width="2"/>"#,
                    x - 5.0,
                    y - 5.0,
                    x + 5.0,
                    y + 5.0,
                    x - 5.0,
                    y + 5.0,
                    x + 5.0,
                    y - 5.0
                )
                .unwrap();
            }
            for i in 0..v.len() {
                for j in i + 1..v.len() {
                    let (x0, y0) = tx(&v[i].0);
                    let (x1, y1) = tx(&v[j].0);
                    writeln!(
                        out,
                        r#"<line x1="{x0:.3}" y1="{y0:.3}" x2="{x1:.3}" y2="{y1:.3}" stroke="black" stroke-width="1"/>"#
                    )
                    .unwrap();
                }
            }
        }
    }
    out.push_str("</g>\n<g id=\"paths\">\n");
    for (i, c) in result.classes.iter().enumerate() {
        let pts: Vec<String> = c
            .path
            .iter()
            .map(|p| {
                let (x, y) = tx(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            pts.join(" "),
            PALETTE[i % PALETTE.len()]
        )
        .unwrap();
    }
    out.push_str("</g>\n");
    legend(&mut out, result, PLOT + 2.0 * MARGIN);
    out.push_str("</svg>\n");
    Ok(out)
}

fn legend(out: &mut String, result: &ResultBundle, x: f64) {
    writeln!(
        out,
        r#"<g id="legend" font-family="monospace" font-size="12">"#
    )
    .unwrap();
    let title = if result.classes.is_empty() {
        "no classes"
    } else {
        "rank  cost  signature"
    };
    writeln!(
        out,
        r#"<text x="{:.3}" y="{:.3}">{title}</text>"#,
        x + 10.0,
        MARGIN + 12.0
    )
    .unwrap();
    for (i, c) in result.classes.iter().enumerate() {
        let y = MARGIN + ROW * (i + 1) as f64;
        let sig: Vec<String> = c.signature.iter().map(|v| format!("{v:.3}")).collect();
        writeln!(
            out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{}" stroke-width="3"/>"#,
            x + 10.0,
            y + 8.0,
            x + 30.0,
            y + 8.0,
            PALETTE[i % PALETTE.len()]
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}">{}  {:.3}  [{}]</text>"#,
            x + 36.0,
            y + 12.0,
            c.rank,
            c.cost,
            sig.join(", ")
        )
        .unwrap();
    }
    out.push_str("</g>\n");
}

fn bounds(result: &ResultBundle, scenario: &Scenario, axes: [usize; 2]) -> ([f64; 2], [f64; 2]) {
    if let Some(g) = &scenario.grid {
        return (
            [g.lower[axes[0]], g.lower[axes[1]]],
            [g.upper[axes[0]], g.upper[axes[1]]],
        );
    }
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in result.classes.iter().flat_map(|c| &c.path) {
        for k in 0..2 {
            lo[k] = lo[k].min(p[axes[k]]);
            hi[k] = hi[k].max(p[axes[k]]);
        }
    }
    (lo, hi)
}
