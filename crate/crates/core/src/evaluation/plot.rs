//! Four-panel SVG of the metrics with dashed best/worst bounds.

use std::fmt::Write;

use super::report::{MetricReport, ReportEntry};
use crate::estimators::EstimatorKind;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 280.0;
const MARGIN_L: f64 = 50.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 40.0;
const MARGIN_R: f64 = 20.0;

const BEST: &str = "#2a9d3a";
const WORST: &str = "#c0392b";

fn color(kind: EstimatorKind) -> &'static str {
    match kind {
        EstimatorKind::Mlr => "#1f77b4",
        EstimatorKind::Lda => "#ff7f0e",
        EstimatorKind::Cpca => "#9467bd",
        EstimatorKind::Cov => "#8c564b",
        EstimatorKind::Leace => "#d62728",
        EstimatorKind::Rand => "#7f7f7f",
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace("--", "- -")
}

struct Panel {
    title: &'static str,
    value: fn(&MetricReport) -> f64,
    best: fn(&MetricReport) -> f64,
    worst: fn(&MetricReport) -> f64,
}

const PANELS: [Panel; 4] = [
    Panel { title: "Retention (acc., higher is better)", value: |r| r.metrics.retention, best: |r| r.bounds.ambient_acc_y, worst: |r| r.bounds.majority_y },
    Panel { title: "Leakage (acc., lower is better)", value: |r| r.metrics.leakage, best: |r| r.bounds.majority_y, worst: |r| r.bounds.ambient_acc_y },
    Panel { title: "Purity (err., higher is better)", value: |r| r.metrics.purity, best: |r| r.bounds.majority_err_yother, worst: |r| r.bounds.ambient_err_yother },
    Panel { title: "Interference (err., lower is better)", value: |r| r.metrics.interference, best: |r| r.bounds.ambient_err_yother, worst: |r| r.bounds.majority_err_yother },
];

fn label(r: &MetricReport, sweep: bool) -> String {
    match (sweep, r.dim) {
        (true, Some(m)) => format!("M={m}"),
        _ => r.estimator.to_string(),
    }
}

/// Render successful reports; failed slots are skipped. `metadata` is
/// embedded verbatim (escaped) so the figure carries its run configuration.
pub fn reports_to_svg(entries: &[ReportEntry], metadata: &str) -> String {
    let reports: Vec<&MetricReport> = entries.iter().filter_map(|e| e.report()).collect();
    let sweep = !reports.is_empty() && reports.iter().all(|r| r.estimator == EstimatorKind::Leace && r.dim.is_some());
    let width = 2.0 * PANEL_W;
    let height = 2.0 * PANEL_H;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, "<metadata>{}</metadata>", escape(metadata));
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);

    for (pi, panel) in PANELS.iter().enumerate() {
        let ox = (pi % 2) as f64 * PANEL_W;
        let oy = (pi / 2) as f64 * PANEL_H;
        let x0 = ox + MARGIN_L;
        let x1 = ox + PANEL_W - MARGIN_R;
        let y0 = oy + MARGIN_T;
        let y1 = oy + PANEL_H - MARGIN_B;
        let y_of = |v: f64| y1 - (v.clamp(0.0, 100.0) / 100.0) * (y1 - y0);

        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"#, (x0 + x1) / 2.0, oy + 18.0, panel.title);
        let _ = writeln!(s, r##"<rect x="{x0:.1}" y="{y0:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#333"/>"##, x1 - x0, y1 - y0);
        for tick in (0..=100).step_by(20) {
            let y = y_of(tick as f64);
            let _ = writeln!(s, r##"<line x1="{:.1}" y1="{y:.1}" x2="{x0:.1}" y2="{y:.1}" stroke="#333"/>"##, x0 - 4.0);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{tick}</text>"#, x0 - 6.0, y + 4.0);
        }
        if reports.is_empty() {
            continue;
        }
        let step = (x1 - x0) / reports.len() as f64;
        for (i, r) in reports.iter().enumerate() {
            let left = x0 + i as f64 * step;
            let cx = left + step / 2.0;
            for (v, colour) in [((panel.best)(r), BEST), ((panel.worst)(r), WORST)] {
                let y = y_of(v);
                let _ = writeln!(
                    s,
                    r#"<line x1="{left:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{colour}" stroke-dasharray="5,3"/>"#,
                    left + step
                );
            }
            let y = y_of((panel.value)(r));
            let _ = writeln!(
                s,
                r#"<circle cx="{cx:.1}" cy="{y:.1}" r="5" fill="{}"><title>{} {:.1}</title></circle>"#,
                color(r.estimator),
                escape(&label(r, sweep)),
                (panel.value)(r)
            );
            let _ = writeln!(s, r#"<text x="{cx:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, y1 + 14.0, escape(&label(r, sweep)));
        }
    }
    s.push_str("</svg>\n");
    s
}
