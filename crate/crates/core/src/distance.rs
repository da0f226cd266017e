//! Dataset-to-dataset distances and classifier-diversity diagnostics.
//!
//! Three distances are defined, all Euclidean norms of difference vectors:
//! over normalized metadata rows, over per-classifier AUC vectors, and over
//! per-classifier areas between ROC curves. The diversity diagnostics treat
//! each classifier's pairwise distances as one feature and report their
//! correlations and the cumulative variance captured by principal
//! components.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::eval::{roc_area_between, EvalMatrix};
use crate::linalg::{sym_eigen, Matrix};

#[derive(Debug, Error)]
pub enum DistanceError {
    #[error("name count {names} does not match matrix rows {rows}")]
    NameMismatch { names: usize, rows: usize },
    #[error("matrix is not a distance matrix: {0}")]
    NotADistance(String),
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("zero total variance")]
    ZeroVariance,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Symmetric nonnegative matrix with zero diagonal over named datasets.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    names: Vec<String>,
    values: Matrix,
}

impl DistanceMatrix {
    pub fn new(names: Vec<String>, values: Matrix) -> Result<DistanceMatrix, DistanceError> {
        let n = names.len();
        if values.nrows() != n || values.ncols() != n {
            return Err(DistanceError::NameMismatch {
                names: n,
                rows: values.nrows(),
            });
        }
        for i in 0..n {
            if values.get(i, i) != 0.0 {
                return Err(DistanceError::NotADistance("nonzero diagonal".into()));
            }
            for j in 0..n {
                let v = values.get(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(DistanceError::NotADistance("negative or non-finite entry".into()));
                }
                if (v - values.get(j, i)).abs() > 1e-12 {
                    return Err(DistanceError::NotADistance("asymmetric".into()));
                }
            }
        }
        Ok(DistanceMatrix { names, values })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    /// Square CSV with a header row and a leading name column.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name");
        for name in &self.names {
            let _ = write!(out, ",{name}");
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&self.names[i]);
            for j in 0..self.len() {
                let _ = write!(out, ",{}", self.values.get(i, j));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<DistanceMatrix, DistanceError> {
        let bad = |line: usize, msg: &str| DistanceError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
        let mut fields = header.split(',');
        if fields.next() != Some("name") {
            return Err(bad(1, "header must start with name"));
        }
        let names: Vec<String> = fields.map(str::to_string).collect();
        let n = names.len();
        if n == 0 {
            return Err(bad(1, "no dataset columns"));
        }
        let mut values = Matrix::zeros(n, n);
        let mut row = 0usize;
        for (idx, raw) in lines {
            if raw.trim().is_empty() {
                continue;
            }
            let line = idx + 1;
            if row >= n {
                return Err(bad(line, "too many rows"));
            }
            let mut fields = raw.split(',');
            let name = fields.next().unwrap_or("");
            if name != names[row] {
                return Err(bad(line, "row order must match header"));
            }
            for j in 0..n {
                let v: f64 = fields
                    .next()
                    .ok_or_else(|| bad(line, "missing value"))?
                    .parse()
                    .map_err(|_| bad(line, "bad value"))?;
                values.set(row, j, v);
            }
            if fields.next().is_some() {
                return Err(bad(line, "too many values"));
            }
            row += 1;
        }
        if row != n {
            return Err(bad(0, "missing rows"));
        }
        DistanceMatrix::new(names, values)
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<DistanceMatrix, DistanceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| DistanceError::Io {
            path: path.display().to_string(),
            source,
        })?;
        DistanceMatrix::from_csv(&text)
    }
}

fn from_row_vectors(names: Vec<String>, rows: &[Vec<f64>]) -> DistanceMatrix {
    let n = rows.len();
    let mut values = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = crate::linalg::euclidean(&rows[i], &rows[j]);
            values.set(i, j, d);
            values.set(j, i, d);
        }
    }
    DistanceMatrix { names, values }
}

/// Distance between normalized metadata rows (Euclidean per row pair).
pub fn d_meta(metas: &Matrix, names: &[String]) -> Result<DistanceMatrix, DistanceError> {
    if metas.nrows() != names.len() {
        return Err(DistanceError::NameMismatch {
            names: names.len(),
            rows: metas.nrows(),
        });
    }
    let rows: Vec<Vec<f64>> = (0..metas.nrows()).map(|i| metas.row(i).to_vec()).collect();
    Ok(from_row_vectors(names.to_vec(), &rows))
}

/// Distance between the per-classifier AUC vectors of two datasets.
pub fn d_auc(eval: &EvalMatrix) -> DistanceMatrix {
    let rows: Vec<Vec<f64>> = (0..eval.datasets().len())
        .map(|d| eval.auc_vector(d))
        .collect();
    from_row_vectors(eval.datasets().to_vec(), &rows)
}

/// Distance from per-classifier ROC differences:
/// `sqrt(sum over classifiers of area_between^2)`.
pub fn d_roc(eval: &EvalMatrix) -> DistanceMatrix {
    let features = per_classifier_distances(eval);
    let n = eval.datasets().len();
    let mut values = Matrix::zeros(n, n);
    for (row, (i, j)) in pair_order(n).into_iter().enumerate() {
        let d = features.row(row).iter().map(|a| a * a).sum::<f64>().sqrt();
        values.set(i, j, d);
        values.set(j, i, d);
    }
    DistanceMatrix {
        names: eval.datasets().to_vec(),
        values,
    }
}

/// The fixed ordering of dataset pairs `(i, j)` with `i < j`.
pub fn pair_order(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Feature matrix over dataset pairs: column k holds the area between the
/// two datasets' ROC curves under classifier k.
pub fn per_classifier_distances(eval: &EvalMatrix) -> Matrix {
    let n = eval.datasets().len();
    let l = eval.classifiers().len();
    let pairs = pair_order(n);
    let mut out = Matrix::zeros(pairs.len(), l);
    for (row, &(i, j)) in pairs.iter().enumerate() {
        for k in 0..l {
            out.set(
                row,
                k,
                roc_area_between(&eval.cell(i, k).roc, &eval.cell(j, k).roc),
            );
        }
    }
    out
}

/// Pearson correlations between feature columns. Constant columns correlate
/// 1 with themselves and 0 with everything else.
pub fn classifier_correlations(features: &Matrix) -> Result<Matrix, DistanceError> {
    let n = features.nrows();
    let l = features.ncols();
    if n < 2 {
        return Err(DistanceError::TooFewRows { need: 2, got: n });
    }
    let mut means = vec![0.0; l];
    for i in 0..n {
        for (m, &v) in means.iter_mut().zip(features.row(i).iter()) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n as f64);
    let mut centered = Matrix::zeros(n, l);
    for i in 0..n {
        for j in 0..l {
            centered.set(i, j, features.get(i, j) - means[j]);
        }
    }
    let norms: Vec<f64> = (0..l)
        .map(|j| (0..n).map(|i| centered.get(i, j).powi(2)).sum::<f64>().sqrt())
        .collect();
    let mut corr = Matrix::zeros(l, l);
    for a in 0..l {
        corr.set(a, a, 1.0);
        for b in (a + 1)..l {
            let value = if norms[a] > 0.0 && norms[b] > 0.0 {
                let dot: f64 = (0..n).map(|i| centered.get(i, a) * centered.get(i, b)).sum();
                (dot / (norms[a] * norms[b])).clamp(-1.0, 1.0)
            } else {
                0.0
            };
            corr.set(a, b, value);
            corr.set(b, a, value);
        }
    }
    Ok(corr)
}

/// Cumulative fraction of variance explained by the principal components of
/// the column-standardized feature matrix, one entry per column.
pub fn pca_cumulative_variance(features: &Matrix) -> Result<Vec<f64>, DistanceError> {
    let n = features.nrows();
    let l = features.ncols();
    if n < 2 {
        return Err(DistanceError::TooFewRows { need: 2, got: n });
    }
    // correlation-style PCA: standardize columns, constant columns drop to 0
    let mut std_cols = Matrix::zeros(n, l);
    for j in 0..l {
        let mean: f64 = (0..n).map(|i| features.get(i, j)).sum::<f64>() / n as f64;
        let var: f64 =
            (0..n).map(|i| (features.get(i, j) - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        if var > 0.0 {
            let std = var.sqrt();
            for i in 0..n {
                std_cols.set(i, j, (features.get(i, j) - mean) / std);
            }
        }
    }
    let mut cov = Matrix::zeros(l, l);
    for a in 0..l {
        for b in a..l {
            let v: f64 = (0..n).map(|i| std_cols.get(i, a) * std_cols.get(i, b)).sum::<f64>()
                / (n - 1) as f64;
            cov.set(a, b, v);
            cov.set(b, a, v);
        }
    }
    let (eigenvalues, _) = sym_eigen(&cov);
    let total: f64 = eigenvalues.iter().map(|v| v.max(0.0)).sum();
    if total <= 0.0 {
        return Err(DistanceError::ZeroVariance);
    }
    let mut acc = 0.0;
    let mut fractions = Vec::with_capacity(l);
    for v in &eigenvalues {
        acc += v.max(0.0);
        fractions.push(acc / total);
    }
    if let Some(last) = fractions.last_mut() {
        *last = 1.0;
    }
    Ok(fractions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Label;
    use crate::eval::{roc_curve, RocCurve};
    use crate::rng::Stream;

    fn names(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("ds{i}")).collect()
    }

    #[test]
    fn d_meta_identical_rows_collapse() {
        let rows = Matrix::from_rows(&[vec![1.0; 6], vec![1.0; 6], vec![0.0; 6]]);
        let d = d_meta(&rows, &names(3)).unwrap();
        assert_eq!(d.get(0, 1), 0.0);
        assert!(d.get(0, 2) > 0.0);
    }

    #[test]
    fn d_meta_musk_raw_rows() {
        // raw (unnormalized) metadata of the two molecule datasets
        let musk1 = [47.0, 45.0, 166.0, 476.0, 2.0, 40.0];
        let musk2 = [39.0, 63.0, 166.0, 6598.0, 1.0, 1044.0];
        let rows = Matrix::from_rows(&[musk1.to_vec(), musk2.to_vec()]);
        let d = d_meta(&rows, &names(2)).unwrap();
        assert!((d.get(0, 1) - 6203.8).abs() < 0.05, "{}", d.get(0, 1));
    }

    #[test]
    fn d_meta_triangle_inequality() {
        let mut s = Stream::new(&[31]);
        for _ in 0..50 {
            let rows = Matrix::from_rows(&[
                (0..6).map(|_| s.normal()).collect(),
                (0..6).map(|_| s.normal()).collect(),
                (0..6).map(|_| s.normal()).collect(),
            ]);
            let d = d_meta(&rows, &names(3)).unwrap();
            assert!(d.get(0, 1) <= d.get(0, 2) + d.get(2, 1) + 1e-9);
        }
    }

    // hand-built EvalMatrix with known curves
    fn toy_eval(curves: Vec<Vec<RocCurve>>) -> EvalMatrix {
        let n_datasets = curves.len();
        let n_classifiers = curves[0].len();
        let mut text = String::from("milmap-eval v1\nseed\t1\nfolds\t2\n");
        text.push_str("datasets");
        for i in 0..n_datasets {
            text.push_str(&format!("\tds{i}"));
        }
        text.push('\n');
        text.push_str("classifiers");
        for c in 0..n_classifiers {
            text.push_str(&format!("\tclf{c}"));
        }
        text.push('\n');
        for (i, row) in curves.iter().enumerate() {
            for (c, curve) in row.iter().enumerate() {
                text.push_str(&format!("cell\tds{i}\tclf{c}\n"));
                text.push_str(&format!("auc\t{}\n", crate::eval::auc(curve)));
                text.push_str("roc");
                for &(x, y) in curve.points() {
                    text.push_str(&format!("\t{x},{y}"));
                }
                text.push('\n');
            }
        }
        text.push_str("end\n");
        EvalMatrix::from_text(&text).unwrap()
    }

    fn perfect() -> RocCurve {
        RocCurve::from_points(vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0)]).unwrap()
    }

    fn step(t: f64) -> RocCurve {
        RocCurve::from_points(vec![(0.0, 0.0), (0.0, t), (1.0, t), (1.0, 1.0)]).unwrap()
    }

    #[test]
    fn d_auc_from_known_vectors() {
        // two classifiers: dataset 0 perfect on both, dataset 1 at chance
        let chance = RocCurve::from_points(vec![(0.0, 0.0), (1.0, 1.0)]).unwrap();
        let eval = toy_eval(vec![
            vec![perfect(), perfect()],
            vec![chance.clone(), chance],
        ]);
        let d = d_auc(&eval);
        assert_eq!(d.get(0, 0), 0.0);
        assert!((d.get(0, 1) - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn d_auc_invariant_to_classifier_permutation() {
        let eval = toy_eval(vec![
            vec![perfect(), step(0.3)],
            vec![step(0.6), step(0.9)],
        ]);
        let swapped = toy_eval(vec![
            vec![step(0.3), perfect()],
            vec![step(0.9), step(0.6)],
        ]);
        assert_eq!(d_auc(&eval).get(0, 1), d_auc(&swapped).get(0, 1));
    }

    #[test]
    fn d_roc_composes_euclidean() {
        // areas between: perfect vs step(t) = 1 - t
        let eval = toy_eval(vec![
            vec![perfect(), perfect()],
            vec![step(0.7), step(0.6)],
        ]);
        let d = d_roc(&eval);
        // sqrt(0.3^2 + 0.4^2) = 0.5
        assert!((d.get(0, 1) - 0.5).abs() < 1e-12, "{}", d.get(0, 1));
        // single classifier: distance equals the lone area
        let single = toy_eval(vec![vec![perfect()], vec![step(0.7)]]);
        assert!((d_roc(&single).get(0, 1) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn d_roc_identical_rows_are_zero() {
        let eval = toy_eval(vec![
            vec![step(0.4), step(0.8)],
            vec![step(0.4), step(0.8)],
        ]);
        assert_eq!(d_roc(&eval).get(0, 1), 0.0);
    }

    #[test]
    fn behavior_distances_satisfy_triangle_inequality() {
        let eval = toy_eval(vec![
            vec![perfect(), step(0.2)],
            vec![step(0.5), step(0.8)],
            vec![step(0.9), step(0.4)],
        ]);
        for d in [d_auc(&eval), d_roc(&eval)] {
            for (i, j) in pair_order(3) {
                let k = 3 - i - j; // the remaining index
                assert!(d.get(i, j) <= d.get(i, k) + d.get(k, j) + 1e-9);
                assert_eq!(d.get(i, j), d.get(j, i));
            }
        }
    }

    #[test]
    fn per_classifier_matrix_reconstructs_d_roc() {
        let eval = toy_eval(vec![
            vec![perfect(), step(0.2)],
            vec![step(0.5), step(0.8)],
            vec![step(0.9), perfect()],
        ]);
        let features = per_classifier_distances(&eval);
        assert_eq!(features.nrows(), 3); // 3 choose 2
        let d = d_roc(&eval);
        for (row, (i, j)) in pair_order(3).into_iter().enumerate() {
            let norm: f64 = features.row(row).iter().map(|v| v * v).sum::<f64>().sqrt();
            assert_eq!(norm, d.get(i, j));
        }
    }

    #[test]
    fn identical_classifiers_give_identical_columns() {
        let eval = toy_eval(vec![
            vec![step(0.2), step(0.2)],
            vec![step(0.5), step(0.5)],
            vec![step(0.9), step(0.9)],
        ]);
        let f = per_classifier_distances(&eval);
        for row in 0..f.nrows() {
            assert_eq!(f.get(row, 0), f.get(row, 1));
        }
    }

    #[test]
    fn correlations_of_duplicated_and_negated_columns() {
        let mut s = Stream::new(&[99]);
        let base: Vec<f64> = (0..40).map(|_| s.normal()).collect();
        let rows: Vec<Vec<f64>> = base.iter().map(|&v| vec![v, v, -v, 3.0]).collect();
        let corr = classifier_correlations(&Matrix::from_rows(&rows)).unwrap();
        assert!((corr.get(0, 1) - 1.0).abs() < 1e-12);
        assert!((corr.get(0, 2) + 1.0).abs() < 1e-12);
        // constant column: zero correlation off-diagonal, one on it
        assert_eq!(corr.get(0, 3), 0.0);
        assert_eq!(corr.get(3, 3), 1.0);
    }

    #[test]
    fn independent_columns_weakly_correlated() {
        let mut s = Stream::new(&[7]);
        let rows: Vec<Vec<f64>> = (0..100).map(|_| vec![s.normal(), s.normal()]).collect();
        let corr = classifier_correlations(&Matrix::from_rows(&rows)).unwrap();
        // ~3 sigma bound for 100 samples; deterministic under the fixed seed
        assert!(corr.get(0, 1).abs() < 0.3, "{}", corr.get(0, 1));
    }

    #[test]
    fn pca_rank_one_concentrates() {
        let mut s = Stream::new(&[13]);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|_| {
                let v = s.normal();
                vec![v, 2.0 * v, -0.5 * v]
            })
            .collect();
        let fractions = pca_cumulative_variance(&Matrix::from_rows(&rows)).unwrap();
        assert!((fractions[0] - 1.0).abs() < 1e-9);
        assert!(fractions.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!((fractions.last().unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pca_isotropic_spreads() {
        let mut s = Stream::new(&[17]);
        let rows: Vec<Vec<f64>> = (0..5000)
            .map(|_| (0..22).map(|_| s.normal()).collect())
            .collect();
        let fractions = pca_cumulative_variance(&Matrix::from_rows(&rows)).unwrap();
        assert!((fractions[0] - 1.0 / 22.0).abs() < 0.05, "{}", fractions[0]);
    }

    #[test]
    fn distance_csv_roundtrip() {
        let rows = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 0.5, 6.0]]);
        let d = d_meta(&rows, &names(2)).unwrap();
        let text = d.to_csv();
        let back = DistanceMatrix::from_csv(&text).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn distance_matrix_validation() {
        let bad = Matrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]);
        assert!(matches!(
            DistanceMatrix::new(names(2), bad),
            Err(DistanceError::NotADistance(_))
        ));
    }

    #[test]
    fn domination_on_random_score_sets() {
        // |auc_i - auc_j| <= area between the curves, for curves built from
        // real score data
        let mut s = Stream::new(&[314]);
        for _ in 0..50 {
            let make = |s: &mut Stream| {
                let n = 4 + s.below(20);
                let scores: Vec<f64> = (0..n).map(|_| s.below(7) as f64 / 6.0).collect();
                let mut labels: Vec<Label> = (0..n)
                    .map(|_| {
                        if s.below(2) == 0 {
                            Label::Positive
                        } else {
                            Label::Negative
                        }
                    })
                    .collect();
                labels[0] = Label::Positive;
                let last = labels.len() - 1;
                labels[last] = Label::Negative;
                roc_curve(&scores, &labels).unwrap()
            };
            let a = make(&mut s);
            let b = make(&mut s);
            let gap = (crate::eval::auc(&a) - crate::eval::auc(&b)).abs();
            assert!(gap <= roc_area_between(&a, &b) + 1e-12);
        }
    }
}
