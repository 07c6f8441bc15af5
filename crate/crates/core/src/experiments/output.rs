//! Writes a result table, its manifest and a plot into a directory.

use std::path::{Path, PathBuf};

use super::manifest::RunManifest;
use super::svg::{heatmap_svg, line_plot_svg, Axis, BandPoint, HeatPanel, LinePanel, Series};
use super::table::SweepResult;
use crate::error::{Error, Result};

/// Paths of the files produced by [`write_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub svg: PathBuf,
}

/// Writes `<name>.csv`, `<name>.manifest` and `<name>.svg` into `dir`,
/// creating it if needed. A missing timestamp is stamped into the written
/// manifest.
pub fn write_outputs(result: &SweepResult, manifest: &RunManifest, dir: impl AsRef<Path>) -> Result<OutputFiles> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = OutputFiles {
        csv: dir.join(format!("{}.csv", result.name)),
        manifest: dir.join(format!("{}.manifest", result.name)),
        svg: dir.join(format!("{}.svg", result.name)),
    };
    let mut manifest = manifest.clone();
    if manifest.get("timestamp").is_none() {
        manifest.stamp();
    }
    let write = |path: &Path, text: String| std::fs::write(path, text).map_err(|e| Error::io(path, e));
    write(&files.csv, result.to_csv())?;
    write(&files.manifest, manifest.to_text())?;
    write(&files.svg, plot(result))?;
    Ok(files)
}

fn band(result: &SweepResult, x: usize, q: usize, filter: impl Fn(&[f64]) -> bool) -> Vec<BandPoint> {
    result
        .rows
        .iter()
        .filter(|r| filter(&r.coords))
        .map(|r| BandPoint {
            x: r.coords[x],
            mid: r.stats[q].median,
            lo: r.stats[q].p5,
            hi: r.stats[q].p95,
        })
        .collect()
}

fn distinct(result: &SweepResult, c: usize) -> Vec<f64> {
    let mut v: Vec<f64> = result.rows.iter().map(|r| r.coords[c]).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn series_of(result: &SweepResult, q: &str, label: &str) -> Option<Series> {
    Some(Series {
        label: label.into(),
        points: band(result, 0, result.quantity_index(q)?, |_| true),
    })
}

/// The plot for a result table, chosen by experiment name.
pub fn plot(result: &SweepResult) -> String {
    match result.name.as_str() {
        "normal_comparison" => line_plot_svg(&[LinePanel {
            title: "Relative error of g_sigma_sigma, DEFT vs KDE".into(),
            x: Some(Axis::log("sigma")),
            y: Some(Axis::linear("(2/sigma^2 - FI) / (2/sigma^2)")),
            series: [("deft_rel_err", "DEFT"), ("kde_rel_err", "KDE")]
                .iter()
                .filter_map(|(q, l)| series_of(result, q, l))
                .collect(),
            hlines: vec![0.0],
            vlines: vec![],
        }]),
        "eps_sweep" => {
            let q = result.quantity_index("abs_rel_err").unwrap_or(0);
            let series = distinct(result, 0)
                .into_iter()
                .map(|sigma| Series {
                    label: format!("sigma = {sigma}"),
                    points: band(result, 1, q, |c| c[0] == sigma),
                })
                .collect();
            line_plot_svg(&[LinePanel {
                title: "Median |relative error| vs epsilon".into(),
                x: Some(Axis::log("epsilon")),
                y: Some(Axis::linear("|relative error|")),
                series,
                hlines: vec![],
                vlines: vec![],
            }])
        }
        "n_delta_heatmap" => {
            let ns = distinct(result, 0);
            let ds = distinct(result, 1);
            let q = result.quantity_index("abs_rel_err").unwrap_or(0);
            let mut values = vec![f64::NAN; ns.len() * ds.len()];
            for r in &result.rows {
                let iy = ns.iter().position(|v| *v == r.coords[0]).unwrap();
                let ix = ds.iter().position(|v| *v == r.coords[1]).unwrap();
                values[iy * ds.len() + ix] = r.stats[q].median;
            }
            let mut curves = Vec::new();
            if let Some(c) = result.extra_index("contour_delta_eps0.1") {
                let mut pts: Vec<(f64, f64)> = result
                    .rows
                    .iter()
                    .map(|r| (r.extras[c], r.coords[0]))
                    .collect();
                pts.dedup();
                curves.push(("epsilon = 0.1".to_string(), pts));
            }
            if let Some(l) = result.extra_index("line_delta") {
                let d = result.rows.first().map(|r| r.extras[l]).unwrap_or(f64::NAN);
                let lo = ns.first().copied().unwrap_or(1.0) * 0.5;
                let hi = ns.last().copied().unwrap_or(1.0) * 2.0;
                curves.push((format!("delta_sigma = {d}"), vec![(d, lo), (d, hi)]));
            }
            heatmap_svg(&HeatPanel {
                title: "Median |relative error| of g_sigma_sigma".into(),
                x: Axis::log("delta_sigma"),
                y: Axis::log("N"),
                xs: ds,
                ys: ns,
                values,
                value_label: "|relative error|".into(),
                curves,
            })
        }
        "ising_sweep" => {
            let mut g = LinePanel {
                title: "g_TT and C_h L^2 / T^2".into(),
                x: Some(Axis::linear("T")),
                y: Some(Axis::linear("information")),
                series: series_of(result, "g_TT", "g_TT").into_iter().collect(),
                hlines: vec![],
                vlines: vec![crate::models::critical_temperature()],
            };
            if let Some(p) = result.extra_index("pilot_g_TT_median") {
                g.series.push(Series {
                    label: "C_h L^2 / T^2".into(),
                    points: result
                        .rows
                        .iter()
                        .map(|r| BandPoint {
                            x: r.coords[0],
                            mid: r.extras[p],
                            lo: r.extras[p],
                            hi: r.extras[p],
                        })
                        .collect(),
                });
            }
            let ratio = LinePanel {
                title: "g_TT T^2 / (C_h L^2)".into(),
                x: Some(Axis::linear("T")),
                y: Some(Axis::linear("ratio")),
                series: series_of(result, "ratio", "ratio").into_iter().collect(),
                hlines: vec![1.0],
                vlines: vec![crate::models::critical_temperature()],
            };
            line_plot_svg(&[g, ratio])
        }
        _ => {
            let panels: Vec<LinePanel> = result
                .quantity_names
                .iter()
                .filter_map(|q| {
                    Some(LinePanel {
                        title: q.clone(),
                        x: Some(Axis::linear(result.coord_names.first()?)),
                        y: Some(Axis::linear(q)),
                        series: vec![series_of(result, q, q)?],
                        ..Default::default()
                    })
                })
                .collect();
            line_plot_svg(&panels)
        }
    }
}
