//! Bag-vector representations: each family maps a bag to a single feature
//! vector and hands it to the logistic base learner. Absolute statistics,
//! word-histogram, prototype-similarity, and bag-dissimilarity variants.

use crate::linalg::{euclidean, sq_euclidean, Matrix};

use super::kmeans::nearest_center;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StatKind {
    Mean,
    MinMax,
    MeanMinMax,
}

pub fn bag_stats_vector(bag: &Matrix, kind: StatKind) -> Vec<f64> {
    let d = bag.ncols();
    let n = bag.nrows() as f64;
    let mut mean = vec![0.0; d];
    let mut min = vec![f64::INFINITY; d];
    let mut max = vec![f64::NEG_INFINITY; d];
    for row in bag.rows_iter() {
        for j in 0..d {
            mean[j] += row[j];
            min[j] = min[j].min(row[j]);
            max[j] = max[j].max(row[j]);
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    match kind {
        StatKind::Mean => mean,
        StatKind::MinMax => {
            min.extend(max);
            min
        }
        StatKind::MeanMinMax => {
            mean.extend(min);
            mean.extend(max);
            mean
        }
    }
}

/// Normalized word-occurrence histogram over a fitted vocabulary.
pub fn bow_histogram(bag: &Matrix, vocab: &Matrix) -> Vec<f64> {
    let mut hist = vec![0.0; vocab.nrows()];
    for row in bag.rows_iter() {
        hist[nearest_center(vocab, row)] += 1.0;
    }
    let n = bag.nrows() as f64;
    hist.iter_mut().for_each(|h| *h /= n);
    hist
}

/// Similarity of a bag to every prototype instance:
/// `s(B, x) = max_j exp(-||x_j - x||^2 / sigma2)`.
pub fn prototype_vector(bag: &Matrix, prototypes: &Matrix, sigma2: f64) -> Vec<f64> {
    (0..prototypes.nrows())
        .map(|k| {
            let proto = prototypes.row(k);
            bag.rows_iter()
                .map(|row| (-sq_euclidean(row, proto) / sigma2).exp())
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DissimAgg {
    MeanMin,
    MinMin,
    MeanMean,
}

/// One dissimilarity between two bags, from their pairwise instance
/// distances.
pub fn bag_dissimilarity(a: &Matrix, b: &Matrix, agg: DissimAgg) -> f64 {
    match agg {
        DissimAgg::MeanMin => {
            let mut sum = 0.0;
            for i in 0..a.nrows() {
                let mut best = f64::INFINITY;
                for j in 0..b.nrows() {
                    best = best.min(euclidean(a.row(i), b.row(j)));
                }
                sum += best;
            }
            sum / a.nrows() as f64
        }
        DissimAgg::MinMin => {
            let mut best = f64::INFINITY;
            for i in 0..a.nrows() {
                for j in 0..b.nrows() {
                    best = best.min(euclidean(a.row(i), b.row(j)));
                }
            }
            best
        }
        DissimAgg::MeanMean => {
            let mut sum = 0.0;
            for i in 0..a.nrows() {
                for j in 0..b.nrows() {
                    sum += euclidean(a.row(i), b.row(j));
                }
            }
            sum / (a.nrows() as f64 * b.nrows() as f64)
        }
    }
}

/// Vector of dissimilarities to every training bag.
pub fn dissim_vector(bag: &Matrix, train_bags: &[Matrix], agg: DissimAgg) -> Vec<f64> {
    train_bags
        .iter()
        .map(|t| bag_dissimilarity(bag, t, agg))
        .collect()
}
