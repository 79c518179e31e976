//! SVG figures: per-point `j`/`k` scatter against record index, and the `ψ`
//! envelope with the tested points when a report carries one.

use std::collections::BTreeMap;

use plotters::prelude::*;
use qhgeo_core::harness::ExperimentReport;

const SIZE: (u32, u32) = (800, 500);

/// `(file suffix, svg text)` for every figure the report supports.
pub fn report_plots(report: &ExperimentReport) -> Vec<(String, String)> {
    let mut out = Vec::new();
    if let Some(svg) = scatter(report) {
        out.push((String::new(), svg));
    }
    if let Some(svg) = envelope(report) {
        out.push(("_envelope".to_string(), svg));
    }
    out
}

fn range(vals: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return None;
    }
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
    Some((lo - pad, hi + pad))
}

fn scatter(report: &ExperimentReport) -> Option<String> {
    // series → (index, value, is_k)
    let mut series: BTreeMap<&str, Vec<(f64, f64, bool)>> = BTreeMap::new();
    for r in &report.records {
        let s = series.entry(r.series.as_str()).or_default();
        if let Some(j) = r.j {
            s.push((r.index as f64, j, false));
        }
        if let Some(k) = r.k {
            s.push((r.index as f64, k, true));
        }
    }
    series.retain(|_, v| v.len() > 1);
    let (y0, y1) = range(series.values().flatten().map(|p| p.1))?;
    let (x0, x1) = range(series.values().flatten().map(|p| p.0))?;
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).ok()?;
        let mut chart = ChartBuilder::on(&root)
            .caption(format!("{}: j (circles) and k (crosses)", report.name), ("sans-serif", 18))
            .margin(12)
            .x_label_area_size(36)
            .y_label_area_size(56)
            .build_cartesian_2d(x0..x1, y0..y1)
            .ok()?;
        chart.configure_mesh().x_desc("index").y_desc("value").draw().ok()?;
        for (i, (name, pts)) in series.iter().enumerate() {
            let color = Palette99::pick(i).to_rgba();
            let js = pts.iter().filter(|p| !p.2).map(|p| Circle::new((p.0, p.1), 2, color.filled()));
            let ks = pts.iter().filter(|p| p.2).map(|p| Cross::new((p.0, p.1), 3, color));
            chart
                .draw_series(js)
                .ok()?
                .label(*name)
                .legend(move |(x, y)| Circle::new((x, y), 3, color.filled()));
            chart.draw_series(ks).ok()?;
        }
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .ok()?;
        root.present().ok()?;
    }
    Some(svg)
}

fn envelope(report: &ExperimentReport) -> Option<String> {
    let knots: Vec<(f64, f64)> = report
        .diagnostics
        .get("psi_envelope")?
        .get("knots")?
        .as_array()?
        .iter()
        .filter_map(|k| Some((k.get(0)?.as_f64()?, k.get(1)?.as_f64()?)))
        .collect();
    // tested points: r = e^j - 1 against k
    let tested: Vec<(f64, f64)> = report
        .series("cor1")
        .filter_map(|r| Some((r.j?.exp_m1(), r.k?)))
        .collect();
    let (x0, x1) = range(knots.iter().chain(&tested).map(|p| p.0))?;
    let (y0, y1) = range(knots.iter().chain(&tested).map(|p| p.1))?;
    let mut steps = Vec::with_capacity(2 * knots.len());
    let mut prev_r = knots.first()?.0;
    for &(r, v) in &knots {
        steps.push((prev_r, v));
        steps.push((r, v));
        prev_r = r;
    }
    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE).ok()?;
        let mut chart = ChartBuilder::on(&root)
            .caption(format!("{}: psi envelope", report.name), ("sans-serif", 18))
            .margin(12)
            .x_label_area_size(36)
            .y_label_area_size(56)
            .build_cartesian_2d(x0..x1, y0..y1)
            .ok()?;
        chart.configure_mesh().x_desc("r_D").y_desc("k_D").draw().ok()?;
        chart
            .draw_series(LineSeries::new(steps, &BLUE))
            .ok()?
            .label("psi")
            .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], BLUE));
        chart
            .draw_series(tested.iter().map(|&p| Circle::new(p, 2, RED.filled())))
            .ok()?
            .label("k(x, f(x))")
            .legend(|(x, y)| Circle::new((x, y), 3, RED.filled()));
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.8))
            .border_style(BLACK)
            .draw()
            .ok()?;
        root.present().ok()?;
    }
    Some(svg)
}
