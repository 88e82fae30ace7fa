use std::io::Cursor;

use adasamp::{run, Dataset, ObjectiveSpec, RunConfig, TraceRecord};
use adasamp_harness::plot::{render_svg, standard_plots};
use adasamp_harness::{emit_plots, gen_synthetic, planted_weights, read_libsvm, write_libsvm};
use proptest::prelude::*;

fn dense_rows(data: &Dataset) -> Vec<Vec<u64>> {
    (0..data.n_samples())
        .map(|i| data.row(i).to_dense(data.n_features()).iter().map(|v| v.to_bits()).collect())
        .collect()
}

fn dataset() -> impl Strategy<Value = Dataset> {
    (1..25usize, 1..8usize).prop_flat_map(|(n, d)| {
        let value = prop_oneof![
            2 => Just(0.0),
            3 => -1e6..1e6f64,
            1 => prop::num::f64::NORMAL,
        ];
        (
            prop::collection::vec(prop::collection::vec(value, d), n),
            prop::collection::vec(prop::bool::ANY, n),
        )
            .prop_map(|(rows, signs)| {
                let labels: Vec<f64> = signs.iter().map(|&s| if s { 1.0 } else { -1.0 }).collect();
                Dataset::dense(&rows, &labels).unwrap()
            })
    })
}

proptest! {
    #[test]
    fn libsvm_round_trip_is_identity(data in dataset()) {
        let mut buf = Vec::new();
        write_libsvm(&data, &mut buf).unwrap();
        let back = read_libsvm(Cursor::new(buf), Some(data.n_features())).unwrap();
        prop_assert_eq!(back.n_samples(), data.n_samples());
        prop_assert_eq!(back.n_features(), data.n_features());
        prop_assert_eq!(back.labels(), data.labels());
        prop_assert_eq!(dense_rows(&back), dense_rows(&data));
    }

    #[test]
    fn synthetic_data_is_seed_deterministic(n in 1..200usize, d in 1..10usize, seed in any::<u64>(), flip in 0.0..0.49f64) {
        let a = gen_synthetic(n, d, flip, seed).unwrap();
        let b = gen_synthetic(n, d, flip, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.labels().iter().all(|&l| l == 1.0 || l == -1.0));
    }

    #[test]
    fn unflipped_synthetic_data_is_separated_by_planted_weights(n in 1..300usize, d in 1..10usize, seed in any::<u64>()) {
        let data = gen_synthetic(n, d, 0.0, seed).unwrap();
        let w = planted_weights(d, seed);
        for i in 0..n {
            prop_assert!(data.label(i) * data.row(i).dot(&w) > 0.0);
        }
    }
}

#[test]
fn synthetic_rejects_bad_parameters() {
    assert!(gen_synthetic(0, 3, 0.1, 1).is_err());
    assert!(gen_synthetic(3, 0, 0.1, 1).is_err());
    assert!(gen_synthetic(3, 3, 0.5, 1).is_err());
    assert!(gen_synthetic(3, 3, -0.1, 1).is_err());
}

fn polyline(svg: &str, series: &str) -> Vec<(f64, f64)> {
    let tag = format!("<polyline data-series=\"{series}\"");
    let start = svg.find(&tag).expect("polyline present");
    let rest = &svg[start..];
    let p = rest.find("points=\"").unwrap() + 8;
    let end = rest[p..].find('"').unwrap();
    rest[p..p + end]
        .split_whitespace()
        .map(|xy| {
            let (x, y) = xy.split_once(',').unwrap();
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect()
}

fn converging_trace() -> Vec<TraceRecord> {
    let data = gen_synthetic(400, 5, 0.1, 5).unwrap();
    let spec = ObjectiveSpec::logistic_for(&data);
    let cfg = RunConfig {
        seed: 5,
        max_epochs: 40.0,
        ..RunConfig::default()
    };
    run(&spec, &data, &cfg).unwrap().trace
}

#[test]
fn f_error_plot_trends_downward() {
    let trace = converging_trace();
    let plots = standard_plots(&[("run", &trace)]);
    let (_, f_plot) = plots.iter().find(|(n, _)| *n == "f_error.svg").unwrap();
    assert!(f_plot.log_y);
    let pts = polyline(&render_svg(f_plot).unwrap(), "run");
    assert!(pts.len() >= 10, "{} points", pts.len());
    assert!(pts.windows(2).all(|w| w[0].0 <= w[1].0), "x must follow eff_evals");
    // SVG y grows downward: the best error reached in each fifth of the run
    // sits strictly lower on the canvas than in the previous fifth.
    let blocks: Vec<f64> = pts
        .chunks(pts.len().div_ceil(5))
        .map(|c| c.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    assert!(blocks.windows(2).all(|w| w[1] > w[0]), "{blocks:?}");
    assert!(pts.last().unwrap().1 > pts[0].1 + 100.0);
}

#[test]
fn single_row_trace_plots_one_marker() {
    let trace = converging_trace();
    let one = &trace[..1];
    let plots = standard_plots(&[("solo", one)]);
    for (name, p) in &plots {
        if *name == "f_error.svg" || *name == "batch_size.svg" {
            let svg = render_svg(p).unwrap();
            assert!(svg.starts_with("<?xml"));
            assert!(svg.trim_end().ends_with("</svg>"));
            assert_eq!(svg.matches("<circle").count(), 1, "{name}");
            assert!(!svg.contains("<polyline"));
        }
    }
}

#[test]
fn two_traces_get_a_legend_with_both_labels() {
    let trace = converging_trace();
    let dir = tempfile::tempdir().unwrap();
    let files = emit_plots(dir.path(), &[("inner product", &trace), ("norm <test>", &trace[..trace.len() / 2])]).unwrap();
    assert_eq!(files.len(), 4);
    for f in files {
        let svg = std::fs::read_to_string(&f).unwrap();
        assert!(svg.contains(r#"class="legend">inner product</text>"#), "{f:?}");
        assert!(svg.contains(r#"class="legend">norm &lt;test&gt;</text>"#), "{f:?}");
        assert!(!svg.contains("href"), "external reference in {f:?}");
    }
}

#[test]
fn empty_traces_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert!(emit_plots(dir.path(), &[("a", &[])]).is_err());
}
