//! Stacked bar chart of true positives and errors per model, as SVG.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::compare::ModelComparison;
use super::report_json::round_accuracy;
use crate::error::{Error, Result};

pub const CHART_WIDTH: u32 = 800;
pub const CHART_HEIGHT: u32 = 500;

const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;
const TP_COLOR: &str = "#4c9a6a";
const ERR_COLOR: &str = "#c8553d";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
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

/// Accuracy label text, two decimals of a percentage.
pub(crate) fn accuracy_label(acc: f64) -> String {
    format!("{:.2}%", round_accuracy(acc) * 100.0)
}

pub fn render_chart(cmp: &ModelComparison) -> Result<String> {
    if cmp.entries.is_empty() || cmp.test_size == 0 {
        return Err(Error::InvalidArgument("cannot chart an empty comparison".into()));
    }
    let (w, h) = (CHART_WIDTH as f64, CHART_HEIGHT as f64);
    let plot_w = w - LEFT - RIGHT;
    let plot_h = h - TOP - BOTTOM;
    let base = TOP + plot_h;
    let n = cmp.test_size as f64;
    let slot = plot_w / cmp.entries.len() as f64;
    let bar = slot * 0.6;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {CHART_WIDTH} {CHART_HEIGHT}" width="{CHART_WIDTH}" height="{CHART_HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{w}" height="{h}" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" font-size="16" text-anchor="middle">Accuracy comparison on {} test samples</text>"#,
        w / 2.0,
        cmp.test_size
    );
    // axes with ticks at every quarter of the test size
    let _ = writeln!(
        s,
        r##"<path d="M{LEFT:.2} {TOP:.2} V{base:.2} H{:.2}" stroke="#333333" fill="none"/>"##,
        w - RIGHT
    );
    for q in 0..=4 {
        let y = base - plot_h * q as f64 / 4.0;
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}%</text>"##,
            LEFT - 6.0,
            y + 4.0,
            q * 25
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {:.2})">Share of test samples</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    // legend
    let lx = w - RIGHT - 190.0;
    let _ = writeln!(
        s,
        r#"<rect x="{lx:.2}" y="32" width="10" height="10" fill="{TP_COLOR}"/><text x="{:.2}" y="41" font-size="11">True positives</text>"#,
        lx + 14.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{:.2}" y="32" width="10" height="10" fill="{ERR_COLOR}"/><text x="{:.2}" y="41" font-size="11">Errors</text>"#,
        lx + 110.0,
        lx + 124.0
    );

    for (i, e) in cmp.entries.iter().enumerate() {
        let x = LEFT + slot * i as f64 + (slot - bar) / 2.0;
        let cx = x + bar / 2.0;
        let tp_h = plot_h * e.true_positives as f64 / n;
        let err_h = plot_h * e.errors as f64 / n;
        let name = escape(&e.name);
        let _ = writeln!(s, r#"<g class="model" data-model="{name}">"#);
        let _ = writeln!(
            s,
            r#"<rect class="tp" x="{x:.2}" y="{:.2}" width="{bar:.2}" height="{tp_h:.2}" fill="{TP_COLOR}" data-count="{}"/>"#,
            base - tp_h,
            e.true_positives
        );
        let _ = writeln!(
            s,
            r#"<rect class="errors" x="{x:.2}" y="{:.2}" width="{bar:.2}" height="{err_h:.2}" fill="{ERR_COLOR}" data-count="{}"/>"#,
            base - tp_h - err_h,
            e.errors
        );
        let _ = writeln!(
            s,
            r#"<text class="accuracy" x="{cx:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            base - tp_h - err_h - 6.0,
            accuracy_label(e.accuracy)
        );
        let _ = writeln!(
            s,
            r#"<text class="name" x="{cx:.2}" y="{:.2}" font-size="12" text-anchor="middle">{name}</text>"#,
            base + 18.0
        );
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_chart(cmp: &ModelComparison, path: impl AsRef<Path>) -> Result<()> {
    let svg = render_chart(cmp)?;
    let path = path.as_ref();
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}
