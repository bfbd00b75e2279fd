//! Text emitters: CSV tables, JSON reports and SVG bar charts.

use std::fmt::Write as _;

use serde::Serialize;

/// A table keyed by an integer column (lattice site or sample count).
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub key: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<(i64, Vec<f64>)>,
}

impl Table {
    pub fn new(key: &'static str, columns: Vec<&'static str>) -> Self {
        Table {
            key,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, key: i64, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push((key, values));
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|(_, v)| v[i]).collect())
    }

    pub fn keys(&self) -> Vec<i64> {
        self.rows.iter().map(|(k, _)| *k).collect()
    }

    /// Header row, then one row per key; reals carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(self.key);
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (key, values) in &self.rows {
            write!(out, "{key}").unwrap();
            for v in values {
                write!(out, ",{v:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

pub struct Series<'a> {
    pub name: &'a str,
    pub values: &'a [f64],
    pub color: &'a str,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 48.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Grouped bar chart: one group per label, one bar per series.
pub fn bar_chart(title: &str, y_label: &str, labels: &[i64], series: &[Series<'_>]) -> String {
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let y_max = series
        .iter()
        .flat_map(|s| s.values.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let y_max = if y_max > 0.0 { y_max * 1.05 } else { 1.0 };
    let group_w = plot_w / labels.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    let y = |v: f64| TOP + plot_h * (1.0 - v.max(0.0) / y_max);

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )
    .unwrap();

    for i in 0..=4 {
        let v = y_max * i as f64 / 4.0;
        let py = y(v);
        writeln!(
            svg,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.1}" y2="{py:.2}" stroke="#ddd"/>"##,
            WIDTH - RIGHT
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.2}" text-anchor="end">{v:.3}</text>"#,
            LEFT - 4.0,
            py + 4.0
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="14" y="{:.1}" transform="rotate(-90 14 {:.1})" text-anchor="middle">{}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0,
        escape(y_label)
    )
    .unwrap();

    for (g, label) in labels.iter().enumerate() {
        let gx = LEFT + g as f64 * group_w + group_w * 0.1;
        for (k, s) in series.iter().enumerate() {
            let v = s.values.get(g).copied().unwrap_or(0.0);
            let top = y(v);
            writeln!(
                svg,
                r#"<rect x="{:.2}" y="{top:.2}" width="{bar_w:.2}" height="{:.2}" fill="{}"/>"#,
                gx + k as f64 * bar_w,
                TOP + plot_h - top,
                s.color
            )
            .unwrap();
        }
        writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.1}" text-anchor="middle">{label}</text>"#,
            LEFT + (g as f64 + 0.5) * group_w,
            TOP + plot_h + 16.0
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black"/>"#,
        TOP + plot_h,
        WIDTH - RIGHT,
        TOP + plot_h
    )
    .unwrap();

    for (k, s) in series.iter().enumerate() {
        let lx = LEFT + 8.0 + k as f64 * 140.0;
        writeln!(
            svg,
            r#"<rect x="{lx:.1}" y="{:.1}" width="10" height="10" fill="{}"/>"#,
            HEIGHT - 18.0,
            s.color
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            lx + 14.0,
            HEIGHT - 9.0,
            escape(s.name)
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
