//! End-to-end tests of the `milmap` binary on a small three-dataset
//! pipeline.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use once_cell::sync::Lazy;
use tempfile::TempDir;

use milmap::data::save_dataset;
use milmap::distance::DistanceMatrix;
use milmap::embed::Embedding2D;
use milmap::eval::EvalMatrix;
use milmap::synth::{GenKind, GenSpec};

fn milmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_milmap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

struct Fixture {
    #[allow(dead_code)]
    dir: TempDir,
    data: Vec<PathBuf>,
    eval: PathBuf,
    dist_dir: PathBuf,
    embedding: PathBuf,
}

// One small pipeline shared by the read-only tests: three datasets,
// two classifiers, three folds.
static PIPELINE: Lazy<Fixture> = Lazy::new(|| {
    let dir = TempDir::new().unwrap();
    let mut data = Vec::new();
    for kind in [GenKind::Gaussian, GenKind::Difficult, GenKind::Widened] {
        let mut spec = GenSpec::defaults(kind, 5);
        spec.n_pos = 5;
        spec.n_neg = 5;
        spec.bag_size_min = 2;
        spec.bag_size_max = 4;
        let ds = spec.generate().unwrap();
        let path = dir.path().join(format!("{}.csv", kind.name()));
        save_dataset(&ds, &path).unwrap();
        data.push(path);
    }
    let eval = dir.path().join("eval.txt");
    let data_args: Vec<&str> = data.iter().map(|p| p.to_str().unwrap()).collect();
    let mut args = vec![
        "eval",
        "--classifiers",
        "simpleMIL,bag_stats_mean",
        "--folds",
        "3",
        "--seed",
        "5",
        "--out",
        eval.to_str().unwrap(),
        "--data",
    ];
    args.extend(&data_args);
    assert_success(&milmap(&args));

    let dist_dir = dir.path().join("dist");
    let mut args = vec![
        "dist",
        "--eval",
        eval.to_str().unwrap(),
        "--out",
        dist_dir.to_str().unwrap(),
        "--data",
    ];
    args.extend(&data_args);
    assert_success(&milmap(&args));

    let embedding = dir.path().join("embedding.csv");
    let d_roc = dist_dir.join("d_roc.csv");
    assert_success(&milmap(&[
        "embed",
        "--dist",
        d_roc.to_str().unwrap(),
        "--out",
        embedding.to_str().unwrap(),
    ]));

    Fixture {
        dir,
        data,
        eval,
        dist_dir,
        embedding,
    }
});

#[test]
fn gen_writes_six_datasets_deterministically() {
    let dir_a = TempDir::new().unwrap();
    let dir_b = TempDir::new().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = milmap(&["gen", "--all", "--seed", "7", "--out", dir.path().to_str().unwrap()]);
        assert_success(&out);
    }
    let names: Vec<String> = {
        let mut entries: Vec<String> = std::fs::read_dir(dir_a.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        entries.sort();
        entries
    };
    assert_eq!(names.len(), 12, "6 dataset files + 6 sidecars: {names:?}");
    for name in &names {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    // sidecars parse back to the generating spec
    let spec = GenSpec::from_kv(
        &std::fs::read_to_string(dir_a.path().join("maron.genspec")).unwrap(),
    )
    .unwrap();
    assert_eq!(spec.kind, GenKind::Maron);
    assert_eq!(spec.seed, 7);
}

#[test]
fn gen_rejects_unknown_kind() {
    let dir = TempDir::new().unwrap();
    let out = milmap(&["gen", "--kinds", "fractal", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_reports_missing_dataset_file() {
    let out = milmap(&["eval", "--data", "/no/such/dataset.csv"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("/no/such/dataset.csv"), "{stderr}");
}

#[test]
fn eval_rejects_unknown_classifier() {
    let fixture = &*PIPELINE;
    let out = milmap(&[
        "eval",
        "--data",
        fixture.data[0].to_str().unwrap(),
        "--classifiers",
        "oracle9000",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn eval_matrix_has_expected_cells() {
    let fixture = &*PIPELINE;
    let matrix = EvalMatrix::read_from(&fixture.eval).unwrap();
    assert_eq!(matrix.datasets().len(), 3);
    assert_eq!(
        matrix.classifiers(),
        &["simpleMIL".to_string(), "bag_stats_mean".to_string()]
    );
    assert_eq!(matrix.folds(), 3);
    assert_eq!(matrix.seed(), 5);
}

#[test]
fn eval_is_schedule_independent() {
    let fixture = &*PIPELINE;
    let dir = TempDir::new().unwrap();
    let mut outputs = Vec::new();
    for jobs in ["1", "2"] {
        let path = dir.path().join(format!("eval_j{jobs}.txt"));
        let mut args = vec![
            "eval",
            "--classifiers",
            "simpleMIL,bag_stats_mean",
            "--folds",
            "3",
            "--seed",
            "5",
            "--jobs",
            jobs,
            "--out",
            path.to_str().unwrap(),
            "--data",
        ];
        let data_args: Vec<&str> = fixture.data.iter().map(|p| p.to_str().unwrap()).collect();
        args.extend(&data_args);
        assert_success(&milmap(&args));
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    // and identical to the shared fixture's run
    assert_eq!(outputs[0], std::fs::read(&fixture.eval).unwrap());
}

#[test]
fn dist_outputs_three_consistent_matrices() {
    let fixture = &*PIPELINE;
    let read = |name: &str| {
        DistanceMatrix::read_from(fixture.dist_dir.join(name)).unwrap()
    };
    let dm = read("d_meta.csv");
    let da = read("d_auc.csv");
    let dr = read("d_roc.csv");
    assert_eq!(dm.names(), da.names());
    assert_eq!(da.names(), dr.names());
    for i in 0..3 {
        assert_eq!(dm.get(i, i), 0.0);
        for j in 0..3 {
            assert!(da.get(i, j) <= dr.get(i, j) + 1e-12);
        }
    }
}

#[test]
fn embed_writes_rows_and_stress() {
    let fixture = &*PIPELINE;
    let (embedding, oos_rows) = Embedding2D::read_from(&fixture.embedding).unwrap();
    assert_eq!(embedding.names().len(), 3);
    assert_eq!(embedding.dim(), 2);
    assert!(oos_rows.is_empty());
    let text = std::fs::read_to_string(&fixture.embedding).unwrap();
    assert!(text.contains("# stress = "), "{text}");
}

#[test]
fn oos_twin_lands_on_its_base_dataset() {
    let fixture = &*PIPELINE;
    // a private copy of the embedding file, since oos appends to it
    let dir = TempDir::new().unwrap();
    let embedding_copy = dir.path().join("embedding.csv");
    std::fs::copy(&fixture.embedding, &embedding_copy).unwrap();

    let out = milmap(&[
        "oos",
        "--eval",
        fixture.eval.to_str().unwrap(),
        "--embedding",
        embedding_copy.to_str().unwrap(),
        "--data",
        fixture.data[0].to_str().unwrap(),
    ]);
    assert_success(&out);

    let (embedding, oos_rows) = Embedding2D::read_from(&embedding_copy).unwrap();
    assert_eq!(oos_rows.len(), 1);
    let (name, coords) = &oos_rows[0];
    assert_eq!(name, "gaussian");
    // a three-point metric embeds exactly in 2D, so the twin placement must
    // coincide with the original dataset's coordinates
    let base = embedding.point(0);
    let err = ((coords[0] - base[0]).powi(2) + (coords[1] - base[1]).powi(2)).sqrt();
    assert!(err < 1e-3, "twin placed {err} away from its base");
}

#[test]
fn oos_rejects_fold_mismatch() {
    let fixture = &*PIPELINE;
    let out = milmap(&[
        "oos",
        "--eval",
        fixture.eval.to_str().unwrap(),
        "--embedding",
        fixture.embedding.to_str().unwrap(),
        "--data",
        fixture.data[0].to_str().unwrap(),
        "--folds",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("catalog/protocol mismatch"), "{stderr}");
}

#[test]
fn diversity_writes_correlations_and_variance() {
    let fixture = &*PIPELINE;
    let dir = TempDir::new().unwrap();
    assert_success(&milmap(&[
        "diversity",
        "--eval",
        fixture.eval.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]));
    let corr = std::fs::read_to_string(dir.path().join("correlations.csv")).unwrap();
    assert_eq!(corr.lines().count(), 3); // header + 2 classifiers
    let var = std::fs::read_to_string(dir.path().join("cumulative_variance.csv")).unwrap();
    let rows: Vec<&str> = var.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    let last: f64 = rows.last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((last - 1.0).abs() < 1e-9);
}

#[test]
fn diversity_over_the_full_catalog() {
    // tiny datasets keep the 22-classifier evaluation quick
    let dir = TempDir::new().unwrap();
    let mut data = Vec::new();
    for kind in [GenKind::Maron, GenKind::Concept, GenKind::Rotated] {
        let mut spec = GenSpec::defaults(kind, 2);
        spec.n_pos = 4;
        spec.n_neg = 4;
        spec.bag_size_min = 2;
        spec.bag_size_max = 3;
        let ds = spec.generate().unwrap();
        let path = dir.path().join(format!("{}.csv", kind.name()));
        save_dataset(&ds, &path).unwrap();
        data.push(path);
    }
    let eval = dir.path().join("eval.txt");
    let mut args = vec![
        "eval",
        "--folds",
        "2",
        "--seed",
        "2",
        "--out",
        eval.to_str().unwrap(),
        "--data",
    ];
    let data_args: Vec<&str> = data.iter().map(|p| p.to_str().unwrap()).collect();
    args.extend(&data_args);
    assert_success(&milmap(&args));
    let matrix = EvalMatrix::read_from(&eval).unwrap();
    assert_eq!(matrix.classifiers().len(), 22);

    assert_success(&milmap(&[
        "diversity",
        "--eval",
        eval.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]));
    let var = std::fs::read_to_string(dir.path().join("cumulative_variance.csv")).unwrap();
    let rows: Vec<&str> = var.lines().skip(1).collect();
    assert_eq!(rows.len(), 22);
    let fractions: Vec<f64> = rows
        .iter()
        .map(|r| r.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(fractions.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!((fractions.last().unwrap() - 1.0).abs() < 1e-9);
    let corr = std::fs::read_to_string(dir.path().join("correlations.csv")).unwrap();
    assert_eq!(corr.lines().count(), 23);
}

#[test]
fn plotdata_joins_embedding_and_aucs() {
    let fixture = &*PIPELINE;
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("plotdata.csv");
    assert_success(&milmap(&[
        "plotdata",
        "--eval",
        fixture.eval.to_str().unwrap(),
        "--embedding",
        fixture.embedding.to_str().unwrap(),
        "--classifier",
        "simpleMIL",
        "--out",
        path.to_str().unwrap(),
    ]));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,x,y,mean_auc,selected_auc"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    let matrix = EvalMatrix::read_from(&fixture.eval).unwrap();
    for (d, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[0], matrix.datasets()[d]);
        let mean: f64 = fields[3].parse().unwrap();
        let aucs = matrix.auc_vector(d);
        let lo = aucs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = aucs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(mean >= lo - 1e-12 && mean <= hi + 1e-12);
    }
}

#[test]
fn plotdata_rejects_absent_classifier() {
    let fixture = &*PIPELINE;
    let out = milmap(&[
        "plotdata",
        "--eval",
        fixture.eval.to_str().unwrap(),
        "--embedding",
        fixture.embedding.to_str().unwrap(),
    ]);
    // the default colorer is not part of this filtered matrix
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let out = milmap(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(Path::new(env!("CARGO_BIN_EXE_milmap")).exists());
}
