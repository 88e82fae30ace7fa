//! Self-contained SVG line plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use adasamp::TraceRecord;

use crate::error::{HarnessError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        }
        if hi - lo < 1e-12 {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.5 };
            lo -= pad;
            hi += pad;
        }
        Axis { lo, hi, log }
    }

    fn frac(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0);
            let mut out = Vec::new();
            let mut e = self.lo;
            while e <= self.hi + 1e-9 {
                out.push((10f64.powf(e), format!("1e{}", e as i64)));
                e += step;
            }
            out
        } else {
            (0..=5)
                .map(|i| {
                    let v = self.lo + (self.hi - self.lo) * i as f64 / 5.0;
                    (v, format!("{v:.3}"))
                })
                .collect()
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders the plot. On a log axis, nonpositive and non-finite values are dropped.
pub fn render_svg(plot: &Plot) -> Result<String> {
    let keep = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!plot.log_y || y > 0.0);
    let series: Vec<(&str, Vec<(f64, f64)>)> = plot
        .series
        .iter()
        .map(|s| (s.label.as_str(), s.points.iter().copied().filter(keep).collect()))
        .collect();
    if series.iter().all(|(_, p)| p.is_empty()) {
        return Err(HarnessError::EmptyTrace);
    }
    let all = || series.iter().flat_map(|(_, p)| p.iter().copied());
    let xa = Axis::fit(all().map(|p| p.0), false);
    let ya = Axis::fit(all().map(|p| p.1), plot.log_y);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + xa.frac(x) * pw;
    let py = |y: f64| TOP + (1.0 - ya.frac(y)) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&plot.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for (v, label) in xa.ticks() {
        let x = px(v);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{b2}" stroke="black"/><text x="{x:.2}" y="{t}" text-anchor="middle">{label}</text>"#,
            b = TOP + ph,
            b2 = TOP + ph + 5.0,
            t = TOP + ph + 18.0
        );
    }
    for (v, label) in ya.ticks() {
        let y = py(v);
        let _ = writeln!(
            s,
            r#"<line x1="{l2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{t}" y="{ty:.2}" text-anchor="end">{label}</text>"#,
            l2 = LEFT - 5.0,
            t = LEFT - 8.0,
            ty = y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(&plot.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{cy}" text-anchor="middle" transform="rotate(-90 18 {cy})">{}</text>"#,
        escape(&plot.y_label),
        cy = TOP + ph / 2.0
    );

    for (i, (label, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        match pts.len() {
            0 => {}
            1 => {
                let _ = writeln!(
                    s,
                    r#"<circle data-series="{}" cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    escape(label),
                    px(pts[0].0),
                    py(pts[0].1)
                );
            }
            _ => {
                let coords: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline data-series="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    escape(label),
                    coords.join(" ")
                );
            }
        }
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = WIDTH - RIGHT - 150.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}" class="legend">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// The four standard plots for one or more labelled traces: function error
/// against effective gradient evaluations (log scale), and batch size, angle
/// and steplength against iteration.
pub fn standard_plots(traces: &[(&str, &[TraceRecord])]) -> Vec<(&'static str, Plot)> {
    let mk = |title: &str, xl: &str, yl: &str, log_y: bool, f: &dyn Fn(&TraceRecord) -> (f64, f64)| Plot {
        title: title.into(),
        x_label: xl.into(),
        y_label: yl.into(),
        log_y,
        series: traces
            .iter()
            .map(|(label, t)| Series {
                label: label.to_string(),
                points: t.iter().map(f).collect(),
            })
            .collect(),
    };
    vec![
        (
            "f_error.svg",
            mk(
                "Function error vs. effective gradient evaluations",
                "effective gradient evaluations",
                "R(x) - R*",
                true,
                &|r| (r.eff_evals, r.f_error),
            ),
        ),
        (
            "batch_size.svg",
            mk("Batch size vs. iterations", "iteration", "|S_k|", false, &|r| {
                (r.k as f64, r.sample_size as f64)
            }),
        ),
        (
            "angle.svg",
            mk(
                "Angle between sampled and true gradient",
                "iteration",
                "degrees",
                false,
                &|r| (r.k as f64, r.angle_deg),
            ),
        ),
        (
            "steplength.svg",
            mk("Steplength vs. iterations", "iteration", "alpha_k", false, &|r| (r.k as f64, r.alpha)),
        ),
    ]
}

/// Writes the standard plots into `dir`. Plots with no drawable points are skipped;
/// fails only if every trace is empty.
pub fn emit_plots(dir: &Path, traces: &[(&str, &[TraceRecord])]) -> Result<Vec<PathBuf>> {
    if traces.iter().all(|(_, t)| t.is_empty()) {
        return Err(HarnessError::EmptyTrace);
    }
    let mut written = Vec::new();
    for (name, plot) in standard_plots(traces) {
        let svg = match render_svg(&plot) {
            Ok(s) => s,
            Err(HarnessError::EmptyTrace) => continue,
            Err(e) => return Err(e),
        };
        let path = dir.join(name);
        std::fs::write(&path, svg).map_err(|e| HarnessError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plot(series: Vec<Series>, log_y: bool) -> Plot {
        Plot {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            log_y,
            series,
        }
    }

    #[test]
    fn single_point_gets_a_marker() {
        let svg = render_svg(&plot(
            vec![Series {
                label: "a".into(),
                points: vec![(0.0, 1.0)],
            }],
            true,
        ))
        .unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(!svg.contains("<polyline"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn log_axis_drops_nonpositive_values() {
        let p = plot(
            vec![Series {
                label: "a".into(),
                points: vec![(0.0, 0.0), (1.0, -1.0), (2.0, f64::NAN)],
            }],
            true,
        );
        assert!(matches!(render_svg(&p), Err(HarnessError::EmptyTrace)));
    }

    #[test]
    fn legend_escapes_labels() {
        let svg = render_svg(&plot(
            vec![
                Series {
                    label: "a<b".into(),
                    points: vec![(0.0, 1.0), (1.0, 2.0)],
                },
                Series {
                    label: "c&d".into(),
                    points: vec![(0.0, 3.0), (1.0, 1.0)],
                },
            ],
            false,
        ))
        .unwrap();
        assert!(svg.contains(">a&lt;b</text>") && svg.contains(">c&amp;d</text>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
    }
}
