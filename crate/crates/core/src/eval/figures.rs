//! Standalone SVG figures built from a stored report.

use std::fmt::Write;

use super::cv::ModelReport;
use super::mean_cycle::MeanCycleReport;
use super::report::EvaluationReport;

const W: f64 = 480.0;
const H: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn header(title: &str, width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        width / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Plot area mapping from unit square to pixels.
fn px(x: f64, y: f64) -> (f64, f64) {
    (MARGIN + x * (W - 2.0 * MARGIN), H - MARGIN - y * (H - 2.0 * MARGIN))
}

fn axes(svg: &mut String, xlabel: &str, ylabel: &str, ticks: &[(f64, String)]) {
    let (x0, y0) = px(0.0, 0.0);
    let (x1, y1) = px(1.0, 1.0);
    let _ = writeln!(svg, "<rect x=\"{x0:.1}\" y=\"{y1:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" stroke=\"black\"/>", x1 - x0, y0 - y1);
    for (v, label) in ticks {
        let (tx, _) = px(*v, 0.0);
        let _ = writeln!(svg, "<text x=\"{tx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", y0 + 16.0, escape(label));
    }
    for v in [0.0, 0.5, 1.0] {
        let (_, ty) = px(0.0, v);
        let _ = writeln!(svg, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{v:.1}</text>", x0 - 6.0, ty + 4.0);
    }
    let _ = writeln!(svg, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>", (x0 + x1) / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

fn polyline(svg: &mut String, pts: impl Iterator<Item = (f64, f64)>, color: &str) {
    let coords: Vec<String> = pts
        .map(|(x, y)| {
            let (a, b) = px(x, y);
            format!("{a:.2},{b:.2}")
        })
        .collect();
    let _ = writeln!(svg, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>", coords.join(" "));
}

fn legend(svg: &mut String, entries: &[(String, &str)]) {
    for (i, (label, color)) in entries.iter().enumerate() {
        let y = MARGIN + 14.0 + 16.0 * i as f64;
        let x = W - MARGIN - 150.0;
        let _ = writeln!(svg, "<line x1=\"{x:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>", x + 18.0);
        let _ = writeln!(svg, "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>", x + 24.0, y + 4.0, escape(label));
    }
}

fn unit_ticks() -> Vec<(f64, String)> {
    [0.0, 0.5, 1.0].iter().map(|v| (*v, format!("{v:.1}"))).collect()
}

fn fmt_auc(a: Option<f64>) -> String {
    a.map_or("n/a".into(), |a| format!("{a:.3}"))
}

/// ROC of one fold, or of every fold overlaid when `fold` is `None`.
pub fn roc_svg(model: &ModelReport, fold: Option<usize>) -> String {
    let title = match fold {
        Some(f) => format!("ROC {} fold {}", model.kind.name(), f + 1),
        None => format!("ROC {} all folds (mean AUC {})", model.kind.name(), fmt_auc(model.mean("auc"))),
    };
    let mut svg = header(&title, W, H);
    axes(&mut svg, "False positive rate", "True positive rate", &unit_ticks());
    polyline(&mut svg, [(0.0, 0.0), (1.0, 1.0)].into_iter(), "#999999");
    let mut entries = Vec::new();
    for (i, f) in model.folds.iter().enumerate() {
        if fold.is_some_and(|k| k != f.fold) {
            continue;
        }
        let color = COLORS[i % COLORS.len()];
        polyline(&mut svg, f.roc.iter().map(|p| (p.fpr, p.tpr)), color);
        entries.push((format!("fold {} AUC {}", f.fold + 1, fmt_auc(f.metrics.auc)), color));
    }
    legend(&mut svg, &entries);
    svg.push_str("</svg>\n");
    svg
}

/// Horizontal bars of the `top` largest fold-mean importances.
pub fn importance_svg(model: &ModelReport, names: &[String], top: usize) -> String {
    let mut ranked: Vec<(usize, f64)> = model.importance.iter().copied().enumerate().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(top);
    let row = 18.0;
    let height = 60.0 + row * ranked.len() as f64;
    let width = 560.0;
    let mut svg = header(&format!("Permutation importance ({}, AUC drop)", model.kind.name()), width, height);
    let scale = ranked.iter().map(|r| r.1.abs()).fold(1e-12, f64::max);
    let x0 = 170.0;
    let span = width - x0 - 80.0;
    for (i, (j, v)) in ranked.iter().enumerate() {
        let y = 36.0 + row * i as f64;
        let len = span * v.abs() / scale;
        let name = names.get(*j).cloned().unwrap_or_else(|| format!("f{j}"));
        let color = if *v >= 0.0 { COLORS[0] } else { COLORS[1] };
        let _ = writeln!(svg, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>", x0 - 6.0, y + 12.0, escape(&name));
        let _ = writeln!(svg, "<rect x=\"{x0:.1}\" y=\"{y:.1}\" width=\"{len:.2}\" height=\"{:.1}\" fill=\"{color}\"/>", row - 4.0);
        let _ = writeln!(svg, "<text x=\"{:.1}\" y=\"{:.1}\">{v:.4}</text>", x0 + len + 4.0, y + 12.0);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Class mean waveforms, aligned at the peak.
pub fn mean_cycle_svg(report: &MeanCycleReport) -> String {
    let mut svg = header("Mean normalized cycle per class", W, H);
    let n = report.classes.first().map_or(0, |c| c.values.len());
    let span = report.dt_s * n as f64;
    let ticks = [0.0, 0.5, 1.0]
        .iter()
        .map(|v| (*v, format!("{:.2}", (v - 0.5) * span)))
        .collect::<Vec<_>>();
    axes(&mut svg, "Time from peak (s)", "Normalized amplitude", &ticks);
    let mut entries = Vec::new();
    for (i, c) in report.classes.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let denom = (c.values.len().max(2) - 1) as f64;
        // Break the line where the class has no coverage.
        let mut run: Vec<(f64, f64)> = Vec::new();
        for (k, v) in c.values.iter().enumerate() {
            match v {
                Some(v) => run.push((k as f64 / denom, *v)),
                None if !run.is_empty() => polyline(&mut svg, std::mem::take(&mut run).into_iter(), color),
                None => {}
            }
        }
        if !run.is_empty() {
            polyline(&mut svg, run.into_iter(), color);
        }
        entries.push((format!("{} (n = {})", c.class, c.n_cycles), color));
    }
    legend(&mut svg, &entries);
    svg.push_str("</svg>\n");
    svg
}

/// Every figure of a report as (file name, SVG text), in a fixed order.
pub fn report_figures(report: &EvaluationReport) -> Vec<(String, String)> {
    let mut out = Vec::new();
    for m in &report.models {
        let kind = m.kind.name();
        for f in &m.folds {
            out.push((format!("roc_{kind}_fold{}.svg", f.fold + 1), roc_svg(m, Some(f.fold))));
        }
        out.push((format!("roc_{kind}.svg"), roc_svg(m, None)));
        if !m.importance.is_empty() {
            out.push((format!("importance_{kind}.svg"), importance_svg(m, &report.feature_names, 20)));
        }
    }
    if let Some(mc) = &report.mean_cycles {
        out.push(("mean_cycles.svg".into(), mean_cycle_svg(mc)));
    }
    out
}
