//! Fixed-canvas SVG line plot: first column on x, one polyline per
//! remaining column.

use std::fmt::Write;

use halfline::io::Table;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, hi + 0.5)
    }
}

/// Renders `table`. Needs at least two columns and finite values.
pub fn render(table: &Table) -> Result<String, String> {
    if table.header.len() < 2 {
        return Err("plot needs at least two columns".into());
    }
    if table.rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err("plot needs finite values".into());
    }
    let x = table.column(0);
    let (x0, x1) = range(x.iter().copied());
    let (y0, y1) = range(table.rows.iter().flat_map(|r| r[1..].iter().copied()));
    let px = |v: f64| MARGIN + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |v: f64| HEIGHT - MARGIN - (v - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<line class="axis" x1="{left}" y1="{bottom}" x2="{right}" y2="{bottom}" stroke="black"/>"#);
    let _ = writeln!(s, r#"<line class="axis" x1="{left}" y1="{top}" x2="{left}" y2="{bottom}" stroke="black"/>"#);
    let label = |s: &mut String, class: &str, x: f64, y: f64, anchor: &str, text: String| {
        let _ = writeln!(s, r#"<text class="{class}" x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" font-size="12">{text}</text>"#);
    };
    label(&mut s, "xmin", left, bottom + 16.0, "middle", format!("{x0:.4e}"));
    label(&mut s, "xmax", right, bottom + 16.0, "middle", format!("{x1:.4e}"));
    label(&mut s, "ymin", left - 4.0, bottom, "end", format!("{y0:.4e}"));
    label(&mut s, "ymax", left - 4.0, top, "end", format!("{y1:.4e}"));
    label(&mut s, "xlabel", 0.5 * WIDTH, HEIGHT - 12.0, "middle", escape(&table.header[0]));
    for (c, name) in table.header.iter().enumerate().skip(1) {
        let color = COLORS[(c - 1) % COLORS.len()];
        let pts: Vec<String> = table.rows.iter().map(|r| format!("{:.2},{:.2}", px(r[0]), py(r[c]))).collect();
        let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        label(&mut s, "legend", right, top - 8.0 - 14.0 * (table.header.len() - 1 - c) as f64, "end", escape(name));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
