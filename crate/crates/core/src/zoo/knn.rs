//! Citation k-NN: a lazy bag classifier built on the minimal Hausdorff
//! distance. A query bag collects its R nearest training bags (references)
//! and the training bags that would place the query within their own C
//! nearest neighbors (citers); the score is the positive fraction among them.

use crate::data::Label;
use crate::linalg::{sq_euclidean, Matrix};

/// Minimal Hausdorff distance: the larger of the two directed minima of
/// per-instance nearest distances, which for the minimal variant reduces to
/// the smallest pairwise instance distance.
pub fn min_hausdorff(a: &Matrix, b: &Matrix) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..a.nrows() {
        for j in 0..b.nrows() {
            let d = sq_euclidean(a.row(i), b.row(j));
            if d < best {
                best = d;
            }
        }
    }
    best.sqrt()
}

#[derive(Clone, Debug)]
pub struct CitationKnnModel {
    pub bags: Vec<Matrix>,
    pub labels: Vec<Label>,
    pub references: usize,
    pub citer_rank: usize,
    // training-bag pairwise distances, row-major n x n
    train_dist: Vec<f64>,
}

impl CitationKnnModel {
    pub fn fit(bags: Vec<Matrix>, labels: Vec<Label>, references: usize, citer_rank: usize) -> Self {
        let n = bags.len();
        let mut train_dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = min_hausdorff(&bags[i], &bags[j]);
                train_dist[i * n + j] = d;
                train_dist[j * n + i] = d;
            }
        }
        CitationKnnModel {
            bags,
            labels,
            references,
            citer_rank,
            train_dist,
        }
    }

    pub fn score(&self, query: &Matrix) -> f64 {
        let n = self.bags.len();
        let query_dist: Vec<f64> = self.bags.iter().map(|b| min_hausdorff(b, query)).collect();

        // references: R nearest training bags, ties broken by bag index
        let r = self.references.min(n);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            query_dist[a]
                .partial_cmp(&query_dist[b])
                .expect("finite distances")
                .then(a.cmp(&b))
        });
        let mut positive = 0usize;
        for &i in order.iter().take(r) {
            if self.labels[i].is_positive() {
                positive += 1;
            }
        }

        // citers: bags that rank the query within their own C nearest
        // neighbors, with the query placed after equally distant train bags
        let mut citers = 0usize;
        for i in 0..n {
            let mut closer = 0usize;
            for j in 0..n {
                if j != i && self.train_dist[i * n + j] <= query_dist[i] {
                    closer += 1;
                }
            }
            if closer < self.citer_rank {
                citers += 1;
                if self.labels[i].is_positive() {
                    positive += 1;
                }
            }
        }

        positive as f64 / (r + citers) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bag(rows: &[Vec<f64>]) -> Matrix {
        Matrix::from_rows(rows)
    }

    #[test]
    fn min_hausdorff_is_closest_pair() {
        let a = bag(&[vec![0.0, 0.0], vec![10.0, 10.0]]);
        let b = bag(&[vec![0.0, 3.0], vec![20.0, 0.0]]);
        assert!((min_hausdorff(&a, &b) - 3.0).abs() < 1e-12);
        assert_eq!(min_hausdorff(&a, &b), min_hausdorff(&b, &a));
        assert_eq!(min_hausdorff(&a, &a), 0.0);
    }

    #[test]
    fn scores_cluster_membership() {
        let bags = vec![
            bag(&[vec![0.0, 0.0]]),
            bag(&[vec![0.2, 0.1]]),
            bag(&[vec![0.1, -0.1]]),
            bag(&[vec![5.0, 5.0]]),
            bag(&[vec![5.2, 4.9]]),
            bag(&[vec![4.9, 5.1]]),
        ];
        let labels = vec![
            Label::Positive,
            Label::Positive,
            Label::Positive,
            Label::Negative,
            Label::Negative,
            Label::Negative,
        ];
        // citer_rank 2 keeps citation votes local to each cluster
        let model = CitationKnnModel::fit(bags, labels, 3, 2);
        let near_pos = model.score(&bag(&[vec![0.05, 0.05]]));
        let near_neg = model.score(&bag(&[vec![5.05, 5.05]]));
        assert!(near_pos > 0.8, "{near_pos}");
        assert!(near_neg < 0.2, "{near_neg}");
    }

    #[test]
    fn score_is_a_fraction() {
        let bags = vec![bag(&[vec![0.0]]), bag(&[vec![1.0]]), bag(&[vec![2.0]])];
        let labels = vec![Label::Positive, Label::Negative, Label::Positive];
        let model = CitationKnnModel::fit(bags, labels, 5, 7);
        let s = model.score(&bag(&[vec![0.5]]));
        assert!((0.0..=1.0).contains(&s));
    }
}
