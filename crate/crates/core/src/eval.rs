//! ROC evaluation: threshold-sweep curves, trapezoidal AUC, the area between
//! two curves, stratified cross-validation, and the (dataset x classifier)
//! evaluation grid with its line-oriented file format.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use crate::data::{Label, MilDataset};
use crate::rng::{derive, hash_str, Stream};
use crate::zoo::{catalog, train, ClassifierSpec, TrainError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("scores and labels differ in length: {scores} vs {labels}")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("non-finite score")]
    NonFiniteScore,
    #[error("labels contain a single class")]
    SingleClassLabels,
    #[error("invalid ROC curve: {0}")]
    BadCurve(String),
    #[error("fold count must be at least 2, got {0}")]
    TooFewFolds(usize),
    #[error("{class} class has {have} bags, need at least {need}")]
    TooFewBags {
        class: &'static str,
        have: usize,
        need: usize,
    },
    #[error("duplicate dataset name {0}")]
    DuplicateDataset(String),
    #[error("training {classifier} on {dataset}: {source}")]
    Train {
        dataset: String,
        classifier: String,
        #[source]
        source: TrainError,
    },
    #[error("cell ({dataset}, {classifier}): {source}")]
    Cell {
        dataset: String,
        classifier: String,
        #[source]
        source: Box<EvalError>,
    },
    #[error("unknown classifier {0}")]
    UnknownClassifier(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Monotone piecewise-linear curve from (0,0) to (1,1) in (FPR, TPR) space.
#[derive(Clone, Debug, PartialEq)]
pub struct RocCurve {
    points: Vec<(f64, f64)>,
}

impl RocCurve {
    /// Validate and wrap an explicit point list.
    pub fn from_points(points: Vec<(f64, f64)>) -> Result<RocCurve, EvalError> {
        if points.len() < 2 {
            return Err(EvalError::BadCurve("fewer than 2 points".into()));
        }
        if points[0] != (0.0, 0.0) {
            return Err(EvalError::BadCurve("must start at (0,0)".into()));
        }
        if *points.last().unwrap() != (1.0, 1.0) {
            return Err(EvalError::BadCurve("must end at (1,1)".into()));
        }
        for w in points.windows(2) {
            let ((x1, y1), (x2, y2)) = (w[0], w[1]);
            if !(x1.is_finite() && y1.is_finite()) {
                return Err(EvalError::BadCurve("non-finite point".into()));
            }
            if x2 < x1 || y2 < y1 {
                return Err(EvalError::BadCurve("not monotone".into()));
            }
        }
        if points
            .iter()
            .any(|&(x, y)| !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y))
        {
            return Err(EvalError::BadCurve("point outside the unit square".into()));
        }
        Ok(RocCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// Threshold-sweep ROC curve. Scores are ranked descending; a group of tied
/// scores advances as a single step, which draws a diagonal segment.
pub fn roc_curve(scores: &[f64], labels: &[Label]) -> Result<RocCurve, EvalError> {
    if scores.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(EvalError::NonFiniteScore);
    }
    let pos = labels.iter().filter(|l| l.is_positive()).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::SingleClassLabels);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are finite")
    });

    let mut points = vec![(0.0, 0.0)];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]].is_positive() {
                tp += 1;
            } else {
                fp += 1;
            }
            j += 1;
        }
        points.push((fp as f64 / neg as f64, tp as f64 / pos as f64));
        i = j;
    }
    Ok(RocCurve { points })
}

/// Trapezoidal area under the curve.
pub fn auc(curve: &RocCurve) -> f64 {
    curve
        .points
        .windows(2)
        .map(|w| {
            let ((x1, y1), (x2, y2)) = (w[0], w[1]);
            (x2 - x1) * (y1 + y2) * 0.5
        })
        .sum()
}

// Collapse a curve into distinct FPR breakpoints with the lowest and highest
// TPR seen at each; between breakpoints the curve is the line from one
// breakpoint's high value to the next one's low value.
struct FprProfile {
    xs: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl FprProfile {
    fn of(curve: &RocCurve) -> FprProfile {
        let mut xs = Vec::new();
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for &(x, y) in &curve.points {
            if xs.last() == Some(&x) {
                let last = hi.len() - 1;
                hi[last] = y;
            } else {
                xs.push(x);
                lo.push(y);
                hi.push(y);
            }
        }
        FprProfile { xs, lo, hi }
    }

    // value approaching x from the right
    fn right(&self, x: f64) -> f64 {
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(k) => self.hi[k],
            Err(k) => self.interp(k, x),
        }
    }

    // value approaching x from the left
    fn left(&self, x: f64) -> f64 {
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(k) => self.lo[k],
            Err(k) => self.interp(k, x),
        }
    }

    fn interp(&self, upper: usize, x: f64) -> f64 {
        let (k0, k1) = (upper - 1, upper);
        let (x0, x1) = (self.xs[k0], self.xs[k1]);
        let (y0, y1) = (self.hi[k0], self.lo[k1]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}

/// Area between two ROC curves: the integral of |tpr_a(f) - tpr_b(f)| over
/// the unit FPR interval, evaluated exactly on the union of breakpoints with
/// segment crossings split.
pub fn roc_area_between(a: &RocCurve, b: &RocCurve) -> f64 {
    let pa = FprProfile::of(a);
    let pb = FprProfile::of(b);

    let mut xs: Vec<f64> = pa.xs.iter().chain(pb.xs.iter()).copied().collect();
    xs.sort_by(|p, q| p.partial_cmp(q).expect("finite breakpoints"));
    xs.dedup();

    let mut area = 0.0;
    for w in xs.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let du = pa.right(u) - pb.right(u);
        let dv = pa.left(v) - pb.left(v);
        let width = v - u;
        if du == 0.0 && dv == 0.0 {
            continue;
        }
        if du * dv >= 0.0 {
            area += (du.abs() + dv.abs()) * 0.5 * width;
        } else {
            // the difference crosses zero inside the interval
            let t = du.abs() / (du.abs() + dv.abs());
            area += 0.5 * (du.abs() * t + dv.abs() * (1.0 - t)) * width;
        }
    }
    area
}

/// One pooled test-fold score.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreRecord {
    pub fold: usize,
    pub bag_id: String,
    pub label: Label,
    pub score: f64,
}

/// Result of one (dataset, classifier) cell: the pooled ROC curve and AUC,
/// plus the per-fold scores they were computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub roc: RocCurve,
    pub auc: f64,
    pub scores: Vec<ScoreRecord>,
}

const ROLE_SPLIT: u64 = 0x53504C49; // "SPLI"

/// Stratified fold assignment: bag indices of each class are shuffled with a
/// stream keyed by `(seed, dataset name)` and dealt round-robin.
fn fold_assignment(dataset: &MilDataset, folds: usize, seed: u64) -> Vec<usize> {
    let mut stream = Stream::new(&[seed, ROLE_SPLIT, hash_str(dataset.name())]);
    let mut assignment = vec![0usize; dataset.bags().len()];
    for positive in [true, false] {
        let mut indices: Vec<usize> = dataset
            .bags()
            .iter()
            .enumerate()
            .filter(|(_, b)| b.label.is_positive() == positive)
            .map(|(i, _)| i)
            .collect();
        stream.shuffle(&mut indices);
        for (k, idx) in indices.into_iter().enumerate() {
            assignment[idx] = k % folds;
        }
    }
    assignment
}

/// Cross-validate one classifier on one dataset: stratified k-fold over bags,
/// test scores pooled across folds into a single ROC curve and AUC.
pub fn cross_validate(
    dataset: &MilDataset,
    spec: &ClassifierSpec,
    folds: usize,
    seed: u64,
) -> Result<CellResult, EvalError> {
    if folds < 2 {
        return Err(EvalError::TooFewFolds(folds));
    }
    for (positive, class) in [(true, "positive"), (false, "negative")] {
        let have = dataset
            .bags()
            .iter()
            .filter(|b| b.label.is_positive() == positive)
            .count();
        if have < folds {
            return Err(EvalError::TooFewBags {
                class,
                have,
                need: folds,
            });
        }
    }

    let assignment = fold_assignment(dataset, folds, seed);
    let mut records: Vec<ScoreRecord> = Vec::with_capacity(dataset.bags().len());
    for fold in 0..folds {
        let train_bags: Vec<_> = dataset
            .bags()
            .iter()
            .zip(assignment.iter())
            .filter(|(_, &f)| f != fold)
            .map(|(b, _)| b.clone())
            .collect();
        let test_bags: Vec<_> = dataset
            .bags()
            .iter()
            .zip(assignment.iter())
            .filter(|(_, &f)| f == fold)
            .map(|(b, _)| b.clone())
            .collect();
        let train_set =
            MilDataset::new(dataset.name(), train_bags).expect("stratified fold keeps both classes");
        let task_seed = derive(&[
            seed,
            hash_str(dataset.name()),
            hash_str(&spec.display_name),
            fold as u64,
        ]);
        let model = train(spec, &train_set, task_seed).map_err(|source| EvalError::Train {
            dataset: dataset.name().to_string(),
            classifier: spec.display_name.clone(),
            source,
        })?;
        let scores = model
            .score_bags(&test_bags)
            .map_err(|source| EvalError::Train {
                dataset: dataset.name().to_string(),
                classifier: spec.display_name.clone(),
                source,
            })?;
        for (bag, score) in test_bags.iter().zip(scores) {
            records.push(ScoreRecord {
                fold,
                bag_id: bag.id.clone(),
                label: bag.label,
                score,
            });
        }
    }

    let scores: Vec<f64> = records.iter().map(|r| r.score).collect();
    let labels: Vec<Label> = records.iter().map(|r| r.label).collect();
    let roc = roc_curve(&scores, &labels)?;
    let auc_value = auc(&roc);
    Ok(CellResult {
        roc,
        auc: auc_value,
        scores: records,
    })
}

/// Grid of (dataset x classifier) evaluation results.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalMatrix {
    datasets: Vec<String>,
    classifiers: Vec<String>,
    folds: usize,
    seed: u64,
    cells: Vec<CellResult>, // row-major: dataset index, then classifier index
}

impl EvalMatrix {
    pub fn datasets(&self) -> &[String] {
        &self.datasets
    }

    pub fn classifiers(&self) -> &[String] {
        &self.classifiers
    }

    pub fn folds(&self) -> usize {
        self.folds
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cell(&self, dataset: usize, classifier: usize) -> &CellResult {
        &self.cells[dataset * self.classifiers.len() + classifier]
    }

    pub fn dataset_index(&self, name: &str) -> Option<usize> {
        self.datasets.iter().position(|n| n == name)
    }

    /// AUC of every classifier on one dataset, in catalog order.
    pub fn auc_vector(&self, dataset: usize) -> Vec<f64> {
        (0..self.classifiers.len())
            .map(|c| self.cell(dataset, c).auc)
            .collect()
    }
}

/// Evaluate a set of classifiers on every dataset. Cells are computed in
/// parallel; results are identical for any schedule because each cell's
/// random streams are keyed by `(seed, dataset name, classifier name, fold)`.
/// `progress` is invoked once per finished cell.
pub fn evaluate(
    datasets: &[MilDataset],
    specs: &[ClassifierSpec],
    folds: usize,
    seed: u64,
    progress: &(dyn Fn(&str, &str) + Sync),
) -> Result<EvalMatrix, EvalError> {
    for (i, ds) in datasets.iter().enumerate() {
        if datasets[..i].iter().any(|d| d.name() == ds.name()) {
            return Err(EvalError::DuplicateDataset(ds.name().to_string()));
        }
    }
    let grid: Vec<(usize, usize)> = (0..datasets.len())
        .flat_map(|d| (0..specs.len()).map(move |c| (d, c)))
        .collect();
    let cells: Vec<CellResult> = grid
        .par_iter()
        .map(|&(d, c)| {
            let cell = cross_validate(&datasets[d], &specs[c], folds, seed).map_err(|e| {
                match e {
                    already_named @ EvalError::Train { .. } => already_named,
                    other => EvalError::Cell {
                        dataset: datasets[d].name().to_string(),
                        classifier: specs[c].display_name.clone(),
                        source: Box::new(other),
                    },
                }
            })?;
            progress(datasets[d].name(), &specs[c].display_name);
            Ok(cell)
        })
        .collect::<Result<_, EvalError>>()?;
    Ok(EvalMatrix {
        datasets: datasets.iter().map(|d| d.name().to_string()).collect(),
        classifiers: specs.iter().map(|s| s.display_name.clone()).collect(),
        folds,
        seed,
        cells,
    })
}

/// Evaluate the full 22-classifier catalog.
pub fn evaluate_all(
    datasets: &[MilDataset],
    folds: usize,
    seed: u64,
) -> Result<EvalMatrix, EvalError> {
    evaluate(datasets, &catalog(), folds, seed, &|_, _| {})
}

const EVAL_MAGIC: &str = "milmap-eval v1";

impl EvalMatrix {
    /// Line-oriented text serialization. Tab-separated fields; ROC points as
    /// `fpr,tpr` pairs; one `score` line per pooled test-fold score.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{EVAL_MAGIC}");
        let _ = writeln!(out, "seed\t{}", self.seed);
        let _ = writeln!(out, "folds\t{}", self.folds);
        out.push_str("datasets");
        for name in &self.datasets {
            out.push('\t');
            out.push_str(name);
        }
        out.push('\n');
        out.push_str("classifiers");
        for name in &self.classifiers {
            out.push('\t');
            out.push_str(name);
        }
        out.push('\n');
        for (d, dataset) in self.datasets.iter().enumerate() {
            for (c, classifier) in self.classifiers.iter().enumerate() {
                let cell = self.cell(d, c);
                let _ = writeln!(out, "cell\t{dataset}\t{classifier}");
                let _ = writeln!(out, "auc\t{}", cell.auc);
                out.push_str("roc");
                for &(x, y) in cell.roc.points() {
                    let _ = write!(out, "\t{x},{y}");
                }
                out.push('\n');
                for r in &cell.scores {
                    let _ = writeln!(
                        out,
                        "score\t{}\t{}\t{}\t{}",
                        r.fold,
                        r.bag_id,
                        r.label.as_int(),
                        r.score
                    );
                }
            }
        }
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<EvalMatrix, EvalError> {
        let bad = |line: usize, msg: &str| EvalError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, magic) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
        if magic != EVAL_MAGIC {
            return Err(bad(1, "not an evaluation matrix file"));
        }

        let mut seed = None;
        let mut folds = None;
        let mut datasets: Vec<String> = Vec::new();
        let mut classifiers: Vec<String> = Vec::new();
        let mut cells: Vec<CellResult> = Vec::new();

        // current cell under construction
        type PartialCell = (String, String, Option<f64>, Option<RocCurve>, Vec<ScoreRecord>);
        let mut current: Option<PartialCell> = None;
        let mut ended = false;

        fn finish(
            cur: &mut Option<PartialCell>,
            datasets: &[String],
            classifiers: &[String],
            cells: &mut Vec<CellResult>,
            line: usize,
        ) -> Result<(), EvalError> {
            let bad = |line: usize, msg: &str| EvalError::Parse {
                line,
                msg: msg.to_string(),
            };
            if let Some((dataset, classifier, auc_v, roc, scores)) = cur.take() {
                let auc_v = auc_v.ok_or_else(|| bad(line, "cell missing auc"))?;
                let roc = roc.ok_or_else(|| bad(line, "cell missing roc"))?;
                if (auc(&roc) - auc_v).abs() > 1e-12 {
                    return Err(bad(line, "auc does not match its curve"));
                }
                let d = datasets
                    .iter()
                    .position(|n| *n == dataset)
                    .ok_or_else(|| bad(line, "cell names unknown dataset"))?;
                let c = classifiers
                    .iter()
                    .position(|n| *n == classifier)
                    .ok_or_else(|| bad(line, "cell names unknown classifier"))?;
                if d * classifiers.len() + c != cells.len() {
                    return Err(bad(line, "cells out of order"));
                }
                cells.push(CellResult {
                    roc,
                    auc: auc_v,
                    scores,
                });
            }
            Ok(())
        }

        for (idx, raw) in lines {
            let line = idx + 1;
            if ended {
                if !raw.trim().is_empty() {
                    return Err(bad(line, "content after end marker"));
                }
                continue;
            }
            let mut fields = raw.split('\t');
            let tag = fields.next().unwrap_or("");
            match tag {
                "seed" => {
                    let v = fields.next().ok_or_else(|| bad(line, "missing seed"))?;
                    seed = Some(v.parse().map_err(|_| bad(line, "bad seed"))?);
                }
                "folds" => {
                    let v = fields.next().ok_or_else(|| bad(line, "missing folds"))?;
                    folds = Some(v.parse().map_err(|_| bad(line, "bad folds"))?);
                }
                "datasets" => datasets = fields.map(str::to_string).collect(),
                "classifiers" => classifiers = fields.map(str::to_string).collect(),
                "cell" => {
                    finish(&mut current, &datasets, &classifiers, &mut cells, line)?;
                    let dataset = fields
                        .next()
                        .ok_or_else(|| bad(line, "cell missing dataset"))?;
                    let classifier = fields
                        .next()
                        .ok_or_else(|| bad(line, "cell missing classifier"))?;
                    current = Some((
                        dataset.to_string(),
                        classifier.to_string(),
                        None,
                        None,
                        Vec::new(),
                    ));
                }
                "auc" => {
                    let v = fields.next().ok_or_else(|| bad(line, "missing auc"))?;
                    let auc_v: f64 = v.parse().map_err(|_| bad(line, "bad auc"))?;
                    match current.as_mut() {
                        Some((_, _, slot, _, _)) => *slot = Some(auc_v),
                        None => return Err(bad(line, "auc outside a cell")),
                    }
                }
                "roc" => {
                    let mut points = Vec::new();
                    for pair in fields {
                        let (x, y) = pair
                            .split_once(',')
                            .ok_or_else(|| bad(line, "bad roc point"))?;
                        points.push((
                            x.parse().map_err(|_| bad(line, "bad roc point"))?,
                            y.parse().map_err(|_| bad(line, "bad roc point"))?,
                        ));
                    }
                    let curve = RocCurve::from_points(points)
                        .map_err(|e| bad(line, &format!("invalid curve: {e}")))?;
                    match current.as_mut() {
                        Some((_, _, _, slot, _)) => *slot = Some(curve),
                        None => return Err(bad(line, "roc outside a cell")),
                    }
                }
                "score" => {
                    let fold: usize = fields
                        .next()
                        .ok_or_else(|| bad(line, "score missing fold"))?
                        .parse()
                        .map_err(|_| bad(line, "bad fold"))?;
                    let bag_id = fields
                        .next()
                        .ok_or_else(|| bad(line, "score missing bag id"))?
                        .to_string();
                    let label_raw: u8 = fields
                        .next()
                        .ok_or_else(|| bad(line, "score missing label"))?
                        .parse()
                        .map_err(|_| bad(line, "bad label"))?;
                    let label =
                        Label::from_int(label_raw).ok_or_else(|| bad(line, "bad label"))?;
                    let score: f64 = fields
                        .next()
                        .ok_or_else(|| bad(line, "score missing value"))?
                        .parse()
                        .map_err(|_| bad(line, "bad score"))?;
                    match current.as_mut() {
                        Some((_, _, _, _, scores)) => scores.push(ScoreRecord {
                            fold,
                            bag_id,
                            label,
                            score,
                        }),
                        None => return Err(bad(line, "score outside a cell")),
                    }
                }
                "end" => {
                    finish(&mut current, &datasets, &classifiers, &mut cells, line)?;
                    ended = true;
                }
                "" => {}
                other => return Err(bad(line, &format!("unknown tag {other:?}"))),
            }
        }
        if !ended {
            return Err(bad(text.lines().count(), "missing end marker"));
        }
        let seed = seed.ok_or_else(|| bad(1, "missing seed"))?;
        let folds = folds.ok_or_else(|| bad(1, "missing folds"))?;
        if datasets.is_empty() || classifiers.is_empty() {
            return Err(bad(1, "missing dataset or classifier lists"));
        }
        if cells.len() != datasets.len() * classifiers.len() {
            return Err(bad(
                1,
                &format!(
                    "incomplete matrix: {} cells for {} x {}",
                    cells.len(),
                    datasets.len(),
                    classifiers.len()
                ),
            ));
        }
        Ok(EvalMatrix {
            datasets,
            classifiers,
            folds,
            seed,
            cells,
        })
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<EvalMatrix, EvalError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| EvalError::Io {
            path: path.display().to_string(),
            source,
        })?;
        EvalMatrix::from_text(&text)
    }
}
