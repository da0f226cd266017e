//! Implementations of the pipeline subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use milmap::data::{load_dataset, meta_vector, normalize_meta, save_dataset, MilDataset};
use milmap::distance::{
    classifier_correlations, d_auc, d_meta, d_roc, pair_order, per_classifier_distances,
    DistanceMatrix,
};
use milmap::embed::{classical_mds, out_of_sample, Embedding2D};
use milmap::eval::{evaluate, roc_area_between, EvalMatrix};
use milmap::linalg::euclidean;
use milmap::synth::{GenKind, GenSpec};
use milmap::zoo::{catalog, ClassifierSpec};

use crate::{Cli, CliError, Command};

const DEFAULT_SEED: u64 = 42;
const DEFAULT_FOLDS: usize = 10;

pub fn run(cli: Cli) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(DEFAULT_SEED);
    let folds = cli.folds.unwrap_or(DEFAULT_FOLDS);
    let jobs = cli.jobs.unwrap_or(0);
    match cli.command {
        Command::Gen { all, kinds } => cmd_gen(all, &kinds, seed, cli.out.as_deref()),
        Command::Eval { data, classifiers } => {
            cmd_eval(&data, &classifiers, folds, seed, jobs, cli.out.as_deref())
        }
        Command::Dist { eval, data } => cmd_dist(&eval, &data, cli.out.as_deref()),
        Command::Embed { dist } => cmd_embed(&dist, cli.out.as_deref()),
        Command::Oos {
            eval,
            embedding,
            data,
            metric,
        } => cmd_oos(
            &eval,
            &embedding,
            &data,
            &metric,
            cli.seed,
            cli.folds,
            jobs,
        ),
        Command::Diversity { eval } => cmd_diversity(&eval, cli.out.as_deref()),
        Command::Plotdata {
            eval,
            embedding,
            classifier,
        } => cmd_plotdata(&eval, &embedding, &classifier, cli.out.as_deref()),
    }
}

fn out_dir(out: Option<&Path>) -> Result<PathBuf, CliError> {
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)
        .map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

/// File-producing commands accept either a file path or a directory (the
/// default file name is then placed inside it).
fn out_file(out: Option<&Path>, default_name: &str) -> PathBuf {
    match out {
        None => PathBuf::from(default_name),
        Some(p) if p.is_dir() => p.join(default_name),
        Some(p) => p.to_path_buf(),
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    fs::write(path, content).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Write via a temp file plus rename so interrupted runs never leave a
/// truncated output behind.
fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, content).map_err(|e| CliError::Data(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))
}

fn resolve_classifiers(names: &[String]) -> Result<Vec<ClassifierSpec>, CliError> {
    if names.is_empty() {
        return Ok(catalog());
    }
    names
        .iter()
        .map(|n| {
            ClassifierSpec::by_name(n)
                .ok_or_else(|| CliError::Usage(format!("unknown classifier {n:?}")))
        })
        .collect()
}

fn cmd_gen(all: bool, kinds: &[String], seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let kinds: Vec<GenKind> = if all || kinds.is_empty() {
        GenKind::ALL.to_vec()
    } else {
        kinds
            .iter()
            .map(|name| {
                GenKind::parse(name)
                    .ok_or_else(|| CliError::Usage(format!("unknown kind {name:?}")))
            })
            .collect::<Result<_, _>>()?
    };
    let dir = out_dir(out)?;
    for kind in kinds {
        let spec = GenSpec::defaults(kind, seed);
        let dataset = spec.generate()?;
        let csv_path = dir.join(format!("{}.csv", kind.name()));
        let spec_path = dir.join(format!("{}.genspec", kind.name()));
        save_dataset(&dataset, &csv_path)?;
        write_file(&spec_path, &spec.to_kv())?;
        println!(
            "wrote {} ({} bags, {} instances) and {}",
            csv_path.display(),
            dataset.bags().len(),
            dataset.n_instances(),
            spec_path.display()
        );
    }
    Ok(())
}

fn load_datasets(paths: &[PathBuf]) -> Result<Vec<MilDataset>, CliError> {
    paths.iter().map(|p| Ok(load_dataset(p)?)).collect()
}

fn cmd_eval(
    data: &[PathBuf],
    classifiers: &[String],
    folds: usize,
    seed: u64,
    jobs: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let datasets = load_datasets(data)?;
    let specs = resolve_classifiers(classifiers)?;
    let pool = thread_pool(jobs)?;
    let matrix = pool.install(|| {
        evaluate(&datasets, &specs, folds, seed, &|dataset, classifier| {
            eprintln!("done {dataset} / {classifier}");
        })
    })?;
    let path = out_file(out, "eval.txt");
    write_atomic(&path, &matrix.to_text())?;
    println!(
        "wrote {} ({} datasets x {} classifiers, {} folds, seed {})",
        path.display(),
        matrix.datasets().len(),
        matrix.classifiers().len(),
        matrix.folds(),
        matrix.seed()
    );
    Ok(())
}

/// Match dataset files to the matrix rows by name (file stem), in matrix
/// order.
fn datasets_for_matrix(
    matrix: &EvalMatrix,
    paths: &[PathBuf],
) -> Result<Vec<MilDataset>, CliError> {
    let loaded = load_datasets(paths)?;
    matrix
        .datasets()
        .iter()
        .map(|name| {
            loaded
                .iter()
                .find(|d| d.name() == *name)
                .cloned()
                .ok_or_else(|| {
                    CliError::Data(format!("no dataset file provided for {name:?}"))
                })
        })
        .collect()
}

fn cmd_dist(eval_path: &Path, data: &[PathBuf], out: Option<&Path>) -> Result<(), CliError> {
    let matrix = EvalMatrix::read_from(eval_path)?;
    let datasets = datasets_for_matrix(&matrix, data)?;
    let metas: Vec<_> = datasets.iter().map(meta_vector).collect();
    let names: Vec<String> = matrix.datasets().to_vec();
    let meta_rows = normalize_meta(&metas)?;
    let dm = d_meta(&meta_rows, &names)?;
    let da = d_auc(&matrix);
    let dr = d_roc(&matrix);

    // the AUC-vector distance is dominated by the ROC-difference distance;
    // a violation means the area computation is broken
    for (i, j) in pair_order(names.len()) {
        if da.get(i, j) > dr.get(i, j) + 1e-12 {
            return Err(CliError::Internal(format!(
                "domination violated for ({}, {}): d_auc {} > d_roc {}",
                names[i],
                names[j],
                da.get(i, j),
                dr.get(i, j)
            )));
        }
    }

    let dir = out_dir(out)?;
    for (name, matrix) in [("d_meta", &dm), ("d_auc", &da), ("d_roc", &dr)] {
        let path = dir.join(format!("{name}.csv"));
        write_file(&path, &matrix.to_csv())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_embed(dist_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let dist = DistanceMatrix::read_from(dist_path)?;
    let embedding = classical_mds(&dist, 2)?;
    let path = out_file(out, "embedding.csv");
    write_file(&path, &embedding.to_csv())?;
    println!(
        "wrote {} ({} points, stress {})",
        path.display(),
        embedding.names().len(),
        embedding.stress()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_oos(
    eval_path: &Path,
    embedding_path: &Path,
    data: &Path,
    metric: &str,
    seed_flag: Option<u64>,
    folds_flag: Option<usize>,
    jobs: usize,
) -> Result<(), CliError> {
    if metric != "roc" && metric != "auc" {
        return Err(CliError::Usage(format!(
            "metric must be roc or auc, got {metric:?}"
        )));
    }
    let matrix = EvalMatrix::read_from(eval_path)?;
    if let Some(folds) = folds_flag {
        if folds != matrix.folds() {
            return Err(CliError::Data(format!(
                "catalog/protocol mismatch: matrix used {} folds, requested {folds}",
                matrix.folds()
            )));
        }
    }
    if let Some(seed) = seed_flag {
        if seed != matrix.seed() {
            return Err(CliError::Data(format!(
                "catalog/protocol mismatch: matrix used seed {}, requested {seed}",
                matrix.seed()
            )));
        }
    }
    let specs: Vec<ClassifierSpec> = matrix
        .classifiers()
        .iter()
        .map(|n| {
            ClassifierSpec::by_name(n).ok_or_else(|| {
                CliError::Data(format!(
                    "catalog/protocol mismatch: matrix classifier {n:?} is not in this catalog"
                ))
            })
        })
        .collect::<Result<_, _>>()?;

    let (embedding, _) = Embedding2D::read_from(embedding_path)?;
    if embedding.names() != matrix.datasets() {
        return Err(CliError::Data(
            "catalog/protocol mismatch: embedding rows do not match the matrix datasets".into(),
        ));
    }

    let new_dataset = load_dataset(data)?;
    let pool = thread_pool(jobs)?;
    let new_matrix = pool.install(|| {
        evaluate(
            std::slice::from_ref(&new_dataset),
            &specs,
            matrix.folds(),
            matrix.seed(),
            &|dataset, classifier| eprintln!("done {dataset} / {classifier}"),
        )
    })?;

    let n = matrix.datasets().len();
    let l = matrix.classifiers().len();
    let dists: Vec<f64> = (0..n)
        .map(|i| match metric {
            "auc" => euclidean(&new_matrix.auc_vector(0), &matrix.auc_vector(i)),
            _ => (0..l)
                .map(|k| roc_area_between(&new_matrix.cell(0, k).roc, &matrix.cell(i, k).roc))
                .map(|a| a * a)
                .sum::<f64>()
                .sqrt(),
        })
        .collect();

    let (x, y) = out_of_sample(&embedding, &dists)?;
    let line = format!("{},{x},{y},oos", new_dataset.name());
    let mut text = fs::read_to_string(embedding_path)
        .map_err(|e| CliError::Data(format!("{}: {e}", embedding_path.display())))?;
    if !text.ends_with('\n') {
        text.push('\n');
    }
    text.push_str(&line);
    text.push('\n');
    write_file(embedding_path, &text)?;
    println!("{line}");
    Ok(())
}

fn cmd_diversity(eval_path: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let matrix = EvalMatrix::read_from(eval_path)?;
    let features = per_classifier_distances(&matrix);
    let correlations = classifier_correlations(&features)?;
    let fractions = milmap::distance::pca_cumulative_variance(&features)?;

    let dir = out_dir(out)?;
    let names = matrix.classifiers();

    let mut corr_csv = String::from("classifier");
    for name in names {
        let _ = write!(corr_csv, ",{name}");
    }
    corr_csv.push('\n');
    for (i, name) in names.iter().enumerate() {
        corr_csv.push_str(name);
        for j in 0..names.len() {
            let _ = write!(corr_csv, ",{}", correlations.get(i, j));
        }
        corr_csv.push('\n');
    }
    let corr_path = dir.join("correlations.csv");
    write_file(&corr_path, &corr_csv)?;

    let mut var_csv = String::from("component,cumulative_variance_fraction\n");
    for (k, f) in fractions.iter().enumerate() {
        let _ = writeln!(var_csv, "{},{f}", k + 1);
    }
    let var_path = dir.join("cumulative_variance.csv");
    write_file(&var_path, &var_csv)?;

    println!("wrote {} and {}", corr_path.display(), var_path.display());
    Ok(())
}

fn cmd_plotdata(
    eval_path: &Path,
    embedding_path: &Path,
    classifier: &str,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let matrix = EvalMatrix::read_from(eval_path)?;
    let (embedding, _) = Embedding2D::read_from(embedding_path)?;
    if embedding.names() != matrix.datasets() {
        return Err(CliError::Data(
            "embedding rows do not match the matrix datasets".into(),
        ));
    }
    let selected = matrix
        .classifiers()
        .iter()
        .position(|n| n == classifier)
        .ok_or_else(|| {
            CliError::Data(format!(
                "classifier {classifier:?} is not in the evaluation matrix"
            ))
        })?;

    let mut csv = String::from("name,x,y,mean_auc,selected_auc\n");
    for (d, name) in matrix.datasets().iter().enumerate() {
        let aucs = matrix.auc_vector(d);
        let mean: f64 = aucs.iter().sum::<f64>() / aucs.len() as f64;
        let point = embedding.point(d);
        let _ = writeln!(
            csv,
            "{name},{},{},{mean},{}",
            point[0],
            point[1],
            matrix.cell(d, selected).auc
        );
    }
    let path = out_file(out, "plotdata.csv");
    write_file(&path, &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}
