//! Static SVG figures written as plain text. Coordinates are printed with a
//! fixed number of decimals so reruns produce identical files.

use std::fmt::Write as _;

use crate::bench::{EstimateTable, COMPLETE_CASE, FULL_DATA};
use crate::data::CompletedDataset;
use crate::error::{Error, Result};
use crate::uncertainty::CoverageTable;

const PANEL_W: f64 = 320.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 45.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Finite range padded by 5% on each side; degenerate ranges widen to 1.
fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Linear map from data to pixel coordinates.
#[derive(Clone, Copy)]
struct Scale {
    d0: f64,
    d1: f64,
    p0: f64,
    p1: f64,
}

impl Scale {
    fn new((d0, d1): (f64, f64), p0: f64, p1: f64) -> Self {
        Scale { d0, d1, p0, p1 }
    }

    fn at(&self, v: f64) -> f64 {
        self.p0 + (v - self.d0) / (self.d1 - self.d0) * (self.p1 - self.p0)
    }
}

struct Doc {
    buf: String,
}

impl Doc {
    fn new(width: f64, height: f64, title: &str) -> Self {
        let mut buf = String::new();
        let _ = writeln!(
            buf,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(buf, "<title>{}</title>", escape(title));
        let _ = writeln!(buf, r#"<rect width="100%" height="100%" fill="white"/>"#);
        Doc { buf }
    }

    fn raw(&mut self, s: &str) {
        self.buf.push_str(s);
        self.buf.push('\n');
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, s: &str) {
        let _ = writeln!(
            self.buf,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#,
            escape(s)
        );
    }

    fn line(&mut self, (x1, y1): (f64, f64), (x2, y2): (f64, f64), attrs: &str) {
        let _ = writeln!(
            self.buf,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {attrs}/>"#
        );
    }

    fn frame(&mut self, x0: f64, y0: f64, xs: Scale, ys: Scale) {
        let _ = writeln!(
            self.buf,
            r#"<rect x="{x0:.2}" y="{y0:.2}" width="{PANEL_W:.2}" height="{PANEL_H:.2}" fill="none" stroke="black"/>"#
        );
        for (v, label) in [(xs.d0, xs.d0), (xs.d1, xs.d1)] {
            self.text(xs.at(v), y0 + PANEL_H + 14.0, "middle", &format!("{label:.2}"));
        }
        for v in [ys.d0, ys.d1] {
            self.text(x0 - 4.0, ys.at(v) + 4.0, "end", &format!("{v:.3}"));
        }
    }

    fn finish(mut self) -> String {
        self.buf.push_str("</svg>\n");
        self.buf
    }
}

/// Side-by-side scatter plots of `(x_col, y_col)`, one panel per completed
/// dataset, with imputed points highlighted. Each panel is a `<g>` holding
/// exactly one `<circle>` per row.
pub fn scatter_panels(panels: &[(String, CompletedDataset)], x_col: usize, y_col: usize) -> Result<String> {
    if panels.is_empty() {
        return Err(Error::Config("no panels to plot".into()));
    }
    for (name, ds) in panels {
        if x_col.max(y_col) >= ds.n_cols() {
            return Err(Error::Shape(format!("panel `{name}` lacks column {}", x_col.max(y_col))));
        }
    }
    let xr = padded_range(panels.iter().flat_map(|(_, d)| d.column(x_col).iter().copied()));
    let yr = padded_range(panels.iter().flat_map(|(_, d)| d.column(y_col).iter().copied()));
    let width = panels.len() as f64 * (PANEL_W + MARGIN) + MARGIN;
    let height = PANEL_H + 2.0 * MARGIN + 10.0;
    let mut doc = Doc::new(width, height, "scatter by method");
    for (p, (name, ds)) in panels.iter().enumerate() {
        let x0 = MARGIN + p as f64 * (PANEL_W + MARGIN);
        let y0 = MARGIN;
        let xs = Scale::new(xr, x0, x0 + PANEL_W);
        let ys = Scale::new(yr, y0 + PANEL_H, y0);
        doc.frame(x0, y0, xs, ys);
        doc.text(x0 + PANEL_W / 2.0, y0 - 10.0, "middle", name);
        doc.raw(&format!(r#"<g class="panel" id="panel-{p}">"#));
        let (xv, yv) = (ds.column(x_col), ds.column(y_col));
        for i in 0..ds.n_rows() {
            let imputed = ds.is_imputed(i, x_col) || ds.is_imputed(i, y_col);
            let fill = if imputed { "#d62728" } else { "#555555" };
            let _ = writeln!(
                doc.buf,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.2" fill="{fill}" fill-opacity="0.5"/>"#,
                xs.at(xv[i]),
                ys.at(yv[i])
            );
        }
        doc.raw("</g>");
    }
    Ok(doc.finish())
}

/// Per-method strip plot of replication estimates with a blue line at
/// `alpha` and, if given, a red line at the complete-case oracle.
pub fn quantile_strip(table: &EstimateTable, alpha: f64, oracle: Option<f64>) -> Result<String> {
    let mut methods: Vec<&str> = Vec::new();
    for r in &table.rows {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    if methods.is_empty() {
        return Err(Error::Config("no estimates to plot".into()));
    }
    let reps = table.rows.iter().map(|r| r.rep).max().unwrap_or(1);
    let yr = padded_range(table.rows.iter().map(|r| r.estimate).chain([alpha]).chain(oracle));
    let slot = 90.0;
    let plot_w = slot * methods.len() as f64;
    let width = plot_w + 2.0 * MARGIN + 20.0;
    let height = PANEL_H + 2.0 * MARGIN + 30.0;
    let mut doc = Doc::new(width, height, "quantile estimates by method");
    let (x0, y0) = (MARGIN + 20.0, MARGIN);
    let ys = Scale::new(yr, y0 + PANEL_H, y0);
    let _ = writeln!(
        doc.buf,
        r#"<rect x="{x0:.2}" y="{y0:.2}" width="{plot_w:.2}" height="{PANEL_H:.2}" fill="none" stroke="black"/>"#
    );
    for v in [yr.0, yr.1] {
        doc.text(x0 - 4.0, ys.at(v) + 4.0, "end", &format!("{v:.4}"));
    }
    doc.line(
        (x0, ys.at(alpha)),
        (x0 + plot_w, ys.at(alpha)),
        r##"class="alpha-line" stroke="blue" stroke-width="1.5""##,
    );
    if let Some(o) = oracle {
        doc.line(
            (x0, ys.at(o)),
            (x0 + plot_w, ys.at(o)),
            r##"class="oracle-line" stroke="red" stroke-width="1.5""##,
        );
    }
    for (k, m) in methods.iter().enumerate() {
        let cx = x0 + slot * (k as f64 + 0.5);
        doc.text(cx, y0 + PANEL_H + 16.0, "middle", m);
        let reference = *m == FULL_DATA || *m == COMPLETE_CASE;
        let fill = if reference { "#7f7f7f" } else { "#1f1f1f" };
        doc.raw(&format!(r#"<g class="strip" data-method="{}">"#, escape(m)));
        for r in table.rows.iter().filter(|r| r.method == *m) {
            // spread replications evenly across the slot
            let jitter = if reps > 1 { (r.rep - 1) as f64 / (reps - 1) as f64 - 0.5 } else { 0.0 };
            let _ = writeln!(
                doc.buf,
                r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{fill}" fill-opacity="0.6"/>"#,
                cx + 0.5 * slot * jitter,
                ys.at(r.estimate)
            );
        }
        doc.raw("</g>");
        if let Some(s) = table.summary_for(m) {
            doc.line(
                (cx - 0.35 * slot, ys.at(s.mean)),
                (cx + 0.35 * slot, ys.at(s.mean)),
                r##"class="mean" stroke="black" stroke-width="2""##,
            );
        }
    }
    Ok(doc.finish())
}

/// One panel per method with a vertical interval per replication; misses
/// are drawn in red and the true value is a dashed line.
pub fn coverage_segments(table: &CoverageTable) -> Result<String> {
    if table.summary.is_empty() {
        return Err(Error::Config("no coverage results to plot".into()));
    }
    let yr = padded_range(
        table
            .rows
            .iter()
            .flat_map(|r| [r.ci_lower, r.ci_upper])
            .chain([table.true_value]),
    );
    let panels = table.summary.len();
    let width = panels as f64 * (PANEL_W + MARGIN) + MARGIN;
    let height = PANEL_H + 2.0 * MARGIN + 10.0;
    let mut doc = Doc::new(width, height, "bootstrap intervals by method");
    for (p, s) in table.summary.iter().enumerate() {
        let rows: Vec<_> = table.rows.iter().filter(|r| r.method == s.method).collect();
        let x0 = MARGIN + p as f64 * (PANEL_W + MARGIN);
        let y0 = MARGIN;
        let n = rows.iter().map(|r| r.replication).max().unwrap_or(1).max(1);
        let xs = Scale::new((0.0, n as f64 + 1.0), x0, x0 + PANEL_W);
        let ys = Scale::new(yr, y0 + PANEL_H, y0);
        doc.frame(x0, y0, xs, ys);
        doc.text(
            x0 + PANEL_W / 2.0,
            y0 - 10.0,
            "middle",
            &format!("{} (coverage {:.3})", s.method, s.coverage),
        );
        doc.raw(&format!(r#"<g class="intervals" data-method="{}">"#, escape(&s.method)));
        for r in rows {
            let x = xs.at(r.replication as f64);
            let stroke = if r.covered { "#333333" } else { "#d62728" };
            doc.line(
                (x, ys.at(r.ci_lower)),
                (x, ys.at(r.ci_upper)),
                &format!(r#"stroke="{stroke}" stroke-width="1""#),
            );
        }
        doc.raw("</g>");
        doc.line(
            (x0, ys.at(table.true_value)),
            (x0 + PANEL_W, ys.at(table.true_value)),
            r##"class="true-value" stroke="blue" stroke-dasharray="6,4""##,
        );
    }
    Ok(doc.finish())
}
