//! CSV tables and SVG plots of a benchmark.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use plotters::prelude::*;
use serde::{Deserialize, Serialize};

use super::{count_wins, DistanceTrace, GapCurve, ImportanceRow, MetricRow, Position};
use crate::error::{Error, Result};

pub const METRICS_CSV: &str = "metrics.csv";
pub const GAP_CSV: &str = "gap_curves.csv";
pub const DISTANCE_CSV: &str = "distance_traces.csv";
pub const WINS_CSV: &str = "wins.csv";
pub const IMPORTANCE_CSV: &str = "importance.csv";

const GAP_NOTE: &str = "# primal_gap = |pb - opt| / max(|pb|, |opt|), clipped to [0, 1]; \
                        1 without an incumbent, 0 when pb = opt within 1e-9 relative";
const DISTANCE_NOTE: &str = "# distance = |h_opt| + diff(h, h_opt) - LCS(h, h_opt); diff counts \
                             variables branched in both histories with conflicting directions";
const WINS_NOTE: &str = "# one win per instance to the fastest optimal row, every tied selector \
                         wins; instances solved by none are excluded. identity: \
                         sum(wins) = counted + tie_overcount";

/// Everything a report is made of.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportFiles {
    pub rows: Vec<MetricRow>,
    pub curves: Vec<GapCurve>,
    pub traces: Vec<DistanceTrace>,
    pub importance: Vec<ImportanceRow>,
}

#[derive(Serialize, Deserialize)]
struct GapRecord {
    instance_id: String,
    selector: String,
    nodes: usize,
    gap: f64,
}

#[derive(Serialize, Deserialize)]
struct DistanceRecord {
    instance_id: String,
    selector: String,
    selection: usize,
    distance: usize,
}

#[derive(Serialize, Deserialize)]
struct WinRecord {
    selector: String,
    wins: usize,
    counted: usize,
    excluded: usize,
    tie_overcount: usize,
}

#[derive(Serialize, Deserialize)]
struct ImportanceRecord {
    feature: String,
    position: String,
    importance: f64,
    std: f64,
}

fn write_csv<T: Serialize>(dir: &Path, name: &str, note: Option<&str>, header: &[&str], records: &[T]) -> Result<PathBuf> {
    let path = dir.join(name);
    let io = |e: std::io::Error| Error::io(&path, e);
    let mut file = BufWriter::new(File::create(&path).map_err(io)?);
    if let Some(note) = note {
        writeln!(file, "{note}").map_err(io)?;
    }
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    let csv_err = |e: csv::Error| Error::io(&path, std::io::Error::other(e));
    w.write_record(header).map_err(csv_err)?;
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(io)?;
    Ok(path)
}

fn read_csv<T: for<'de> Deserialize<'de>>(dir: &Path, name: &str) -> Result<Vec<T>> {
    let path = dir.join(name);
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(&path)
        .map_err(|e| Error::io(&path, std::io::Error::other(e)))?;
    r.deserialize()
        .map(|rec| {
            rec.map_err(|e| Error::Parse {
                path: path.display().to_string(),
                line: e.position().map_or(0, |p| p.line() as usize),
                field: name.to_string(),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Writes the five CSV tables and, when there is anything to draw, three SVG
/// plots. Returns the written paths.
pub fn emit_report(report: &ReportFiles, out_dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = out_dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    written.push(write_csv(
        dir,
        METRICS_CSV,
        None,
        &["instance_id", "selector", "status", "nodes", "bpb_nodes", "bpb_time", "solve_time", "optimum", "objective"],
        &report.rows,
    )?);

    let gaps: Vec<GapRecord> = report
        .curves
        .iter()
        .flat_map(|c| {
            c.samples.iter().map(|&(nodes, gap)| GapRecord {
                instance_id: c.instance_id.clone(),
                selector: c.selector.clone(),
                nodes,
                gap,
            })
        })
        .collect();
    written.push(write_csv(dir, GAP_CSV, Some(GAP_NOTE), &["instance_id", "selector", "nodes", "gap"], &gaps)?);

    let dists: Vec<DistanceRecord> = report
        .traces
        .iter()
        .flat_map(|t| {
            t.samples.iter().map(|&(selection, distance)| DistanceRecord {
                instance_id: t.instance_id.clone(),
                selector: t.selector.clone(),
                selection,
                distance,
            })
        })
        .collect();
    written.push(write_csv(
        dir,
        DISTANCE_CSV,
        Some(DISTANCE_NOTE),
        &["instance_id", "selector", "selection", "distance"],
        &dists,
    )?);

    let table = count_wins(&report.rows);
    let wins: Vec<WinRecord> = table
        .wins
        .iter()
        .map(|(s, &w)| WinRecord {
            selector: s.clone(),
            wins: w,
            counted: table.counted,
            excluded: table.excluded,
            tie_overcount: table.tie_overcount,
        })
        .collect();
    written.push(write_csv(
        dir,
        WINS_CSV,
        Some(WINS_NOTE),
        &["selector", "wins", "counted", "excluded", "tie_overcount"],
        &wins,
    )?);

    let imp: Vec<ImportanceRecord> = report
        .importance
        .iter()
        .map(|r| ImportanceRecord {
            feature: r.feature.clone(),
            position: r.position.name().into(),
            importance: r.importance,
            std: r.std,
        })
        .collect();
    written.push(write_csv(dir, IMPORTANCE_CSV, None, &["feature", "position", "importance", "std"], &imp)?);

    if report.rows.is_empty() {
        log::warn!("no benchmark rows; wrote header-only tables and no plots");
        return Ok(written);
    }
    let plot_err = |path: &Path, e: String| Error::io(path, std::io::Error::other(e));
    let p = dir.join("gap_curves.svg");
    plot_gap_bands(&report.curves, &p).map_err(|e| plot_err(&p, e))?;
    written.push(p);
    let p = dir.join("distance.svg");
    plot_distance(&report.traces, &p).map_err(|e| plot_err(&p, e))?;
    written.push(p);
    let p = dir.join("bpb_vs_solve.svg");
    plot_scatter(&report.rows, &p).map_err(|e| plot_err(&p, e))?;
    written.push(p);
    Ok(written)
}

/// Reads a report directory written by [`emit_report`]. The wins table is
/// derived data and is not read back.
pub fn load_report(dir: impl AsRef<Path>) -> Result<ReportFiles> {
    let dir = dir.as_ref();
    let rows: Vec<MetricRow> = read_csv(dir, METRICS_CSV)?;

    let mut curves: Vec<GapCurve> = Vec::new();
    for g in read_csv::<GapRecord>(dir, GAP_CSV)? {
        match curves.last_mut() {
            Some(c) if c.instance_id == g.instance_id && c.selector == g.selector => c.samples.push((g.nodes, g.gap)),
            _ => curves.push(GapCurve {
                instance_id: g.instance_id,
                selector: g.selector,
                samples: vec![(g.nodes, g.gap)],
            }),
        }
    }
    let mut traces: Vec<DistanceTrace> = Vec::new();
    for d in read_csv::<DistanceRecord>(dir, DISTANCE_CSV)? {
        match traces.last_mut() {
            Some(t) if t.instance_id == d.instance_id && t.selector == d.selector => {
                t.samples.push((d.selection, d.distance))
            }
            _ => traces.push(DistanceTrace {
                instance_id: d.instance_id,
                selector: d.selector,
                samples: vec![(d.selection, d.distance)],
            }),
        }
    }
    // Runs without samples have no CSV lines; restore them from the rows so
    // a reloaded report re-emits identically.
    let curves = realign(&rows, curves, |c| (&c.instance_id, &c.selector), |i, s| GapCurve {
        instance_id: i,
        selector: s,
        samples: Vec::new(),
    });
    let traces = realign(&rows, traces, |t| (&t.instance_id, &t.selector), |i, s| DistanceTrace {
        instance_id: i,
        selector: s,
        samples: Vec::new(),
    });

    let importance = read_csv::<ImportanceRecord>(dir, IMPORTANCE_CSV)?
        .into_iter()
        .map(|r| {
            let position = match r.position.as_str() {
                "self" => Position::SelfNode,
                "sibling" => Position::Sibling,
                other => return Err(Error::invalid(format!("unknown importance position `{other}`"))),
            };
            Ok(ImportanceRow {
                feature: r.feature,
                position,
                importance: r.importance,
                std: r.std,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ReportFiles {
        rows,
        curves,
        traces,
        importance,
    })
}

fn realign<T>(
    rows: &[MetricRow],
    items: Vec<T>,
    key: impl Fn(&T) -> (&String, &String),
    empty: impl Fn(String, String) -> T,
) -> Vec<T> {
    let mut by_key: BTreeMap<(String, String), T> = BTreeMap::new();
    for it in items {
        let (i, s) = key(&it);
        by_key.insert((i.clone(), s.clone()), it);
    }
    rows.iter()
        .map(|r| {
            by_key
                .remove(&(r.instance_id.clone(), r.selector.clone()))
                .unwrap_or_else(|| empty(r.instance_id.clone(), r.selector.clone()))
        })
        .collect()
}

fn selectors_in_order<'a>(names: impl Iterator<Item = &'a String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for n in names {
        if !out.contains(n) {
            out.push(n.clone());
        }
    }
    out
}

fn color(i: usize) -> RGBColor {
    const PALETTE: [RGBColor; 6] = [
        RGBColor(31, 119, 180),
        RGBColor(255, 127, 14),
        RGBColor(44, 160, 44),
        RGBColor(214, 39, 40),
        RGBColor(148, 103, 189),
        RGBColor(140, 86, 75),
    ];
    PALETTE[i % PALETTE.len()]
}

/// Mean and half-width of the normal 95% interval.
fn mean_ci(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

/// Gap of a curve after `n` nodes; the final value carries forward.
fn gap_at(samples: &[(usize, f64)], n: usize) -> f64 {
    samples
        .iter()
        .take_while(|(k, _)| *k <= n)
        .last()
        .map_or(1.0, |&(_, g)| g)
}

/// Up to 200 node counts covering `1..=max`.
fn node_grid(max: usize) -> Vec<usize> {
    let steps = max.min(200);
    let mut grid: Vec<usize> = (0..steps)
        .map(|i| 1 + ((max - 1) as f64 * i as f64 / (steps - 1).max(1) as f64).round() as usize)
        .collect();
    grid.dedup();
    grid
}

type PlotResult = std::result::Result<(), String>;

fn plot_gap_bands(curves: &[GapCurve], path: &Path) -> PlotResult {
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let max_nodes = curves
        .iter()
        .filter_map(|c| c.samples.last().map(|s| s.0))
        .max()
        .unwrap_or(1)
        .max(1);
    let mut chart = ChartBuilder::on(&root)
        .caption("Primal gap vs processed nodes (mean, 95% CI)", ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(1f64..(max_nodes as f64).max(2.0), 0f64..1.05)
        .map_err(|e| e.to_string())?;
    chart
        .configure_mesh()
        .x_desc("nodes processed")
        .y_desc("primal gap")
        .draw()
        .map_err(|e| e.to_string())?;
    let grid = node_grid(max_nodes);
    for (si, sel) in selectors_in_order(curves.iter().map(|c| &c.selector)).iter().enumerate() {
        let runs: Vec<&GapCurve> = curves.iter().filter(|c| &c.selector == sel && !c.samples.is_empty()).collect();
        if runs.is_empty() {
            continue;
        }
        let stats: Vec<(f64, f64, f64)> = grid
            .iter()
            .map(|&n| {
                let vals: Vec<f64> = runs.iter().map(|c| gap_at(&c.samples, n)).collect();
                let (m, h) = mean_ci(&vals);
                (n as f64, m, h)
            })
            .collect();
        let c = color(si);
        let mut band: Vec<(f64, f64)> = stats.iter().map(|&(x, m, h)| (x, (m + h).min(1.0))).collect();
        band.extend(stats.iter().rev().map(|&(x, m, h)| (x, (m - h).max(0.0))));
        chart
            .draw_series(std::iter::once(Polygon::new(band, c.mix(0.2).filled())))
            .map_err(|e| e.to_string())?;
        chart
            .draw_series(LineSeries::new(stats.iter().map(|&(x, m, _)| (x, m)), c.stroke_width(2)))
            .map_err(|e| e.to_string())?
            .label(sel.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], c.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| e.to_string())?;
    root.present().map_err(|e| e.to_string())
}

fn plot_distance(traces: &[DistanceTrace], path: &Path) -> PlotResult {
    let root = SVGBackend::new(path, (800, 500)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let max_len = traces.iter().map(|t| t.samples.len()).max().unwrap_or(0).max(2);
    let max_d = traces
        .iter()
        .flat_map(|t| t.samples.iter().map(|s| s.1))
        .max()
        .unwrap_or(1)
        .max(1);
    let mut chart = ChartBuilder::on(&root)
        .caption("Distance to the optimal node vs selection", ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(0f64..(max_len - 1) as f64, 0f64..max_d as f64 * 1.05)
        .map_err(|e| e.to_string())?;
    chart
        .configure_mesh()
        .x_desc("selection")
        .y_desc("mean distance")
        .draw()
        .map_err(|e| e.to_string())?;
    for (si, sel) in selectors_in_order(traces.iter().map(|t| &t.selector)).iter().enumerate() {
        let runs: Vec<&DistanceTrace> = traces.iter().filter(|t| &t.selector == sel).collect();
        // mean over the runs still searching at each selection index
        let mut points = Vec::new();
        for k in 0..max_len {
            let vals: Vec<f64> = runs.iter().filter_map(|t| t.samples.get(k).map(|s| s.1 as f64)).collect();
            if vals.is_empty() {
                break;
            }
            points.push((k as f64, mean_ci(&vals).0));
        }
        let c = color(si);
        chart
            .draw_series(LineSeries::new(points, c.stroke_width(2)))
            .map_err(|e| e.to_string())?
            .label(sel.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], c.stroke_width(2)));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| e.to_string())?;
    root.present().map_err(|e| e.to_string())
}

fn plot_scatter(rows: &[MetricRow], path: &Path) -> PlotResult {
    let root = SVGBackend::new(path, (600, 600)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let max_t = rows.iter().map(|r| r.solve_time).fold(0.0, f64::max).max(1e-9) * 1.05;
    let mut chart = ChartBuilder::on(&root)
        .caption("bpb time vs solve time", ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(0f64..max_t, 0f64..max_t)
        .map_err(|e| e.to_string())?;
    chart
        .configure_mesh()
        .x_desc("bpb time (s)")
        .y_desc("solve time (s)")
        .draw()
        .map_err(|e| e.to_string())?;
    chart
        .draw_series(LineSeries::new([(0.0, 0.0), (max_t, max_t)], BLACK.mix(0.3)))
        .map_err(|e| e.to_string())?;
    for (si, sel) in selectors_in_order(rows.iter().map(|r| &r.selector)).iter().enumerate() {
        let c = color(si);
        chart
            .draw_series(
                rows.iter()
                    .filter(|r| &r.selector == sel)
                    .map(|r| Circle::new((r.bpb_time, r.solve_time), 3, c.filled())),
            )
            .map_err(|e| e.to_string())?
            .label(sel.as_str())
            .legend(move |(x, y)| Circle::new((x + 10, y), 3, c.filled()));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| e.to_string())?;
    root.present().map_err(|e| e.to_string())
}
