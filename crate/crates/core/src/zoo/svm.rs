//! Linear SVM trained in the primal by deterministic epoch-ordered
//! subgradient descent, and the alternating instance-labeling scheme that
//! makes it a MIL classifier: instance labels start from bag labels, the SVM
//! is retrained, and instances in positive bags are relabeled by the decision
//! sign, forcing each positive bag to keep at least one positive instance.

use crate::linalg::Matrix;

use super::TrainData;

const SVM_EPOCHS: usize = 50;
const OUTER_MAX_ITER: usize = 20;

#[derive(Clone, Debug)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearSvm {
    #[inline]
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(x.iter())
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.bias
    }
}

/// Primal hinge-loss subgradient descent over instances in fixed order, with
/// the bias carried as an augmented constant feature and the usual
/// `1/sqrt(lambda)` norm projection after each step. Regularization follows
/// `lambda = 1 / (c * n)`.
pub fn fit_linear_svm(rows: &[&[f64]], targets: &[f64], c: f64) -> LinearSvm {
    let n = rows.len();
    assert!(n > 0);
    let dim = rows[0].len();
    let lambda = 1.0 / (c * n as f64);
    let radius = 1.0 / lambda.sqrt();
    let mut w = vec![0.0; dim + 1]; // last entry is the bias weight
    let mut t = 0usize;
    for _ in 0..SVM_EPOCHS {
        for (x, &y) in rows.iter().zip(targets.iter()) {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let score: f64 =
                w[..dim].iter().zip(x.iter()).map(|(wj, v)| wj * v).sum::<f64>() + w[dim];
            let shrink = 1.0 - eta * lambda;
            for wj in w.iter_mut() {
                *wj *= shrink;
            }
            if y * score < 1.0 {
                for (wj, &v) in w[..dim].iter_mut().zip(x.iter()) {
                    *wj += eta * y * v;
                }
                w[dim] += eta * y;
            }
            let norm: f64 = w.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > radius {
                let scale = radius / norm;
                for wj in w.iter_mut() {
                    *wj *= scale;
                }
            }
        }
    }
    let bias = w[dim];
    w.truncate(dim);
    LinearSvm { weights: w, bias }
}

/// Alternating optimization over instance labels in positive bags.
pub fn fit_misvm(train: &TrainData, c: f64) -> LinearSvm {
    let mut rows: Vec<&[f64]> = Vec::new();
    let mut bag_of: Vec<usize> = Vec::new();
    for (b, bag) in train.bags.iter().enumerate() {
        for row in bag.rows_iter() {
            rows.push(row);
            bag_of.push(b);
        }
    }
    let mut labels: Vec<f64> = bag_of
        .iter()
        .map(|&b| {
            if train.labels[b].is_positive() {
                1.0
            } else {
                -1.0
            }
        })
        .collect();

    let mut svm = fit_linear_svm(&rows, &labels, c);
    for _ in 0..OUTER_MAX_ITER {
        let mut next = labels.clone();
        for (b, bag_label) in train.labels.iter().enumerate() {
            if !bag_label.is_positive() {
                continue;
            }
            let members: Vec<usize> = (0..rows.len()).filter(|&i| bag_of[i] == b).collect();
            let mut any_positive = false;
            for &i in &members {
                let v = svm.decision(rows[i]);
                next[i] = if v >= 0.0 { 1.0 } else { -1.0 };
                any_positive |= next[i] > 0.0;
            }
            if !any_positive {
                // keep the most positive-looking instance positive
                let best = members
                    .iter()
                    .copied()
                    .max_by(|&a, &bb| {
                        svm.decision(rows[a])
                            .partial_cmp(&svm.decision(rows[bb]))
                            .expect("finite decisions")
                            .then(bb.cmp(&a)) // first index wins ties
                    })
                    .expect("positive bags are nonempty");
                next[best] = 1.0;
            }
        }
        if next == labels {
            break;
        }
        labels = next;
        svm = fit_linear_svm(&rows, &labels, c);
    }
    svm
}

/// Bag score: maximum instance decision value.
pub fn misvm_bag_score(svm: &LinearSvm, bag: &Matrix) -> f64 {
    bag.rows_iter()
        .map(|row| svm.decision(row))
        .fold(f64::NEG_INFINITY, f64::max)
}
