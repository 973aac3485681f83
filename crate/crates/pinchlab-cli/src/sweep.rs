//! Amplitude sweep over the harmonic perturbation family: one CSV row per
//! amplitude, optional per-run JSON reports, optional SVG chart.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use pinchlab::generate::gen_perturbed_sphere;

use crate::jsonfmt::format_float;
use crate::pipeline::{analyze_mesh, AnalysisRecord};
use crate::report;
use crate::{StageError, SweepArgs};

pub const CSV_HEADER: &str = "t,lambda1,defect,normY2Sq,normXt2Sq,normPhiInf,hausdorff,annulusMaxDev,coverageMaxGap,distortionMax,error";

struct Row {
    token: String,
    amplitude: f64,
    outcome: Result<Box<AnalysisRecord>, String>,
    total_ms: f64,
}

fn thread_budget(rows: usize) -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let cap = std::env::var("PINCHLAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(available);
    cap.min(rows).max(1)
}

fn csv_field(x: f64) -> String {
    format_float(x)
}

fn row_to_csv(row: &Row) -> String {
    match &row.outcome {
        Ok(rec) => format!(
            "{},{},{},{},{},{},{},{},{},{},",
            csv_field(row.amplitude),
            csv_field(rec.lambda1),
            csv_field(rec.defect),
            csv_field(rec.chain.norm_y2_sq),
            csv_field(rec.chain.norm_xt2_sq),
            csv_field(rec.chain.norm_phi_inf),
            csv_field(rec.hausdorff),
            csv_field(rec.annulus_dev),
            csv_field(rec.coverage_gap),
            csv_field(rec.map.distortion_max_numeric),
        ),
        Err(msg) => {
            let clean: String = msg
                .chars()
                .map(|c| if c == ',' || c == '\n' || c == '\r' { ';' } else { c })
                .collect();
            format!("{},,,,,,,,,,{clean}", csv_field(row.amplitude))
        }
    }
}

pub fn run_sweep(args: &SweepArgs) -> Result<(), StageError> {
    if args.family != "harmonic" {
        return Err(StageError::usage(
            "config",
            format!("unknown sweep family {:?} (only \"harmonic\")", args.family),
        ));
    }
    let tokens: Vec<String> = args
        .amps
        .split(',')
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect();
    if tokens.is_empty() {
        return Err(StageError::usage("config", "--amps list is empty"));
    }
    let mut amplitudes = Vec::with_capacity(tokens.len());
    for t in &tokens {
        let a: f64 = t
            .parse()
            .map_err(|e| StageError::usage("config", format!("bad amplitude {t:?}: {e}")))?;
        amplitudes.push(a);
    }

    // rows are independent; workers pull indices, output keeps input order
    let threads = thread_budget(amplitudes.len());
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Row>>> = Mutex::new((0..amplitudes.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= amplitudes.len() {
                    break;
                }
                let start = Instant::now();
                let outcome = gen_perturbed_sphere(
                    args.level,
                    amplitudes[i],
                    args.degree,
                    args.order,
                    args.radius,
                )
                .map_err(|e| StageError::from_lib("generate", e).to_string())
                .and_then(|mesh| {
                    analyze_mesh(&mesh, &args.numeric)
                        .map(|(rec, _)| Box::new(rec))
                        .map_err(|e| e.to_string())
                });
                let row = Row {
                    token: tokens[i].clone(),
                    amplitude: amplitudes[i],
                    outcome,
                    total_ms: start.elapsed().as_secs_f64() * 1e3,
                };
                slots.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let rows: Vec<Row> = slots.into_inner().unwrap().into_iter().map(|r| r.unwrap()).collect();

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row_to_csv(row));
        csv.push('\n');
    }
    std::fs::write(&args.csv, &csv).map_err(|e| StageError::io("csv", e))?;

    if let Some(dir) = &args.report_dir {
        std::fs::create_dir_all(dir).map_err(|e| StageError::io("report", e))?;
        for row in &rows {
            let Ok(rec) = &row.outcome else { continue };
            let source = format!(
                "generator: perturbed-sphere level={} t={} l={} m={} radius={}",
                args.level, row.token, args.degree, args.order, args.radius
            );
            let provenance = report::provenance_json(&source, None, rec, &args.numeric);
            let doc = report::analysis_document(provenance, rec, row.total_ms);
            let path = dir.join(format!("t_{}.json", row.token));
            std::fs::write(path, doc.render()).map_err(|e| StageError::io("report", e))?;
        }
    }

    if let Some(path) = &args.svg {
        let points: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.outcome.as_ref().ok().map(|rec| (rec.defect, rec.hausdorff)))
            .collect();
        std::fs::write(path, defect_vs_hausdorff_svg(&points))
            .map_err(|e| StageError::io("svg", e))?;
    }

    let failures = rows.iter().filter(|r| r.outcome.is_err()).count();
    println!(
        "sweep: {} rows ({} failed) -> {}",
        rows.len(),
        failures,
        args.csv.display()
    );
    Ok(())
}

/// Minimal dependency-free line chart of d_H against the defect.
fn defect_vs_hausdorff_svg(points: &[(f64, f64)]) -> String {
    let (w, h, pad) = (640.0, 480.0, 60.0);
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    if points.is_empty() {
        svg.push_str("<text x=\"20\" y=\"40\">no data</text>\n</svg>\n");
        return svg;
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let (sx, sy) = ((x1 - x0).max(1e-300), (y1 - y0).max(1e-300));
    let map = |x: f64, y: f64| {
        (
            pad + (x - x0) / sx * (w - 2.0 * pad),
            h - pad - (y - y0) / sy * (h - 2.0 * pad),
        )
    };
    // axes
    svg.push_str(&format!(
        "<line x1=\"{pad}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - pad,
        w - pad,
        h - pad
    ));
    svg.push_str(&format!(
        "<line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{}\" stroke=\"black\"/>\n",
        h - pad
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\">defect C</text>\n",
        w / 2.0 - 30.0,
        h - pad / 3.0
    ));
    svg.push_str(&format!(
        "<text x=\"14\" y=\"{}\" font-size=\"13\" transform=\"rotate(-90 14 {})\">d_H</text>\n",
        h / 2.0,
        h / 2.0
    ));
    for (v, label_x) in [(x0, true), (x1, true), (y0, false), (y1, false)] {
        let (px, py) = if label_x { (map(v, y0).0, h - pad + 16.0) } else { (pad - 52.0, map(x0, v).1) };
        svg.push_str(&format!("<text x=\"{px:.1}\" y=\"{py:.1}\" font-size=\"10\">{v:.3e}</text>\n"));
    }
    let path: Vec<String> = points
        .iter()
        .map(|&(x, y)| {
            let (px, py) = map(x, y);
            format!("{px:.2},{py:.2}")
        })
        .collect();
    svg.push_str(&format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
        path.join(" ")
    ));
    for p in &path {
        let mut it = p.split(',');
        let (px, py) = (it.next().unwrap(), it.next().unwrap());
        svg.push_str(&format!("<circle cx=\"{px}\" cy=\"{py}\" r=\"3\" fill=\"indianred\"/>\n"));
    }
    svg.push_str("</svg>\n");
    svg
}
