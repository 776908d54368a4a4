use autogmm::gmm::{log_likelihood, CovarianceConstraint};
use autogmm::hgmm::{cut_at_depth, hgmm_fit, HgmmConfig};
use autogmm::init::InitMethod;
use autogmm::io::synthetic::{generate, SyntheticKind, SyntheticSpec};
use autogmm::io::{self, DendrogramRecord, ModelRecord};
use autogmm::metrics::{adjusted_rand_index, subsample_benchmark, BenchmarkConfig};
use autogmm::search::{autogmm_search, SearchConfig};
use serde_json::Value;

fn quick(seed: u64) -> SearchConfig {
    SearchConfig {
        kmin: 1,
        kmax: 5,
        methods: vec![InitMethod::ALL[0], InitMethod::ALL[5], InitMethod::KMeans],
        seed,
        ..SearchConfig::default()
    }
}

#[test]
fn csv_search_model_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let s = generate(&SyntheticSpec::new(SyntheticKind::ThreeComponent, 11)).unwrap();
    let csv = dir.path().join("data.csv");
    io::write_matrix(&csv, &s.data).unwrap();
    let data = io::read_matrix(&csv, false).unwrap();
    assert_eq!(data, s.data);

    let result = autogmm_search(&data, &quick(11)).unwrap();
    assert_eq!(result.best.k, 3);
    assert!(adjusted_rand_index(&s.labels, result.labels()).unwrap() > 0.85);

    let model_path = dir.path().join("model.json");
    io::write_json(&model_path, &ModelRecord::from_search(&result, 11)).unwrap();
    let record = io::read_model(&model_path).unwrap();
    let fitted = &result.best.fit.as_ref().unwrap().model;
    let restored = record.to_model().unwrap();
    let before = log_likelihood(&data, fitted).unwrap();
    let after = log_likelihood(&data, &restored).unwrap();
    assert!((before - after).abs() <= 1e-9);
    assert_eq!(record.n, 100);
    assert_eq!(record.seed, 11);

    let grid_path = dir.path().join("grid.csv");
    io::write_grid(&grid_path, &result).unwrap();
    let rows = std::fs::read_to_string(&grid_path).unwrap().lines().count() - 1;
    assert_eq!(rows, quick(11).grid_size());

    let labels_path = dir.path().join("labels.csv");
    io::write_labels(&labels_path, result.labels()).unwrap();
    assert_eq!(io::read_labels(&labels_path).unwrap(), result.labels());
}

fn leaf_sizes(v: &Value) -> usize {
    let children = v["children"].as_array().unwrap();
    if children.is_empty() {
        assert!(v["leaf_reason"].is_string());
        v["size"].as_u64().unwrap() as usize
    } else {
        assert!(v["leaf_reason"].is_null());
        assert!(v["model"].is_object());
        children.iter().map(leaf_sizes).sum()
    }
}

#[test]
fn dendrogram_json_partitions_samples() {
    let dir = tempfile::tempdir().unwrap();
    let s = generate(&SyntheticSpec::new(SyntheticKind::Hierarchy, 2).with_n(400)).unwrap();
    let config = HgmmConfig {
        search: quick(2),
        ..HgmmConfig::default()
    };
    let root = hgmm_fit(&s.data, &config).unwrap();
    let path = dir.path().join("dendrogram.json");
    io::write_json(
        &path,
        &DendrogramRecord::new(&root, config.search.criterion),
    )
    .unwrap();
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["size"], 400);
    assert_eq!(v["depth"], 0);
    assert_eq!(leaf_sizes(&v), 400);
    assert_eq!(
        adjusted_rand_index(&s.levels[0], &cut_at_depth(&root, 1)).unwrap(),
        1.0
    );
}

#[test]
fn benchmark_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let s = generate(&SyntheticSpec::new(SyntheticKind::ThreeComponent, 3)).unwrap();
    let configs = [
        BenchmarkConfig {
            name: "mixed".into(),
            config: quick(3),
        },
        BenchmarkConfig {
            name: "spherical".into(),
            config: SearchConfig {
                constraints: vec![CovarianceConstraint::Spherical],
                ..quick(3)
            },
        },
    ];
    let report = subsample_benchmark(&s.data, &s.labels, &configs, 3, 0.8, 1).unwrap();
    let (table, timing) = (dir.path().join("bench.csv"), dir.path().join("timing.csv"));
    io::write_benchmark_tables(&table, &timing, &report).unwrap();
    io::write_benchmark_summary(dir.path().join("summary.json"), &report).unwrap();
    io::write_timing_summary(dir.path().join("timing.json"), &report).unwrap();
    let text = std::fs::read_to_string(&table).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 2);
    assert!(text.starts_with("rep,config,k,ari,status\n"));
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["subsamples"].as_array().unwrap().len(), 3);
    assert_eq!(summary["tests"].as_array().unwrap().len(), 1);
    assert!(summary["tests"][0]["metric"] == "ari");
}
