//! Seeded k-means (k-means++ start, Lloyd iterations) for the bag-of-words
//! vocabulary.

use crate::linalg::{sq_euclidean, Matrix};
use crate::rng::Stream;

const MAX_ITER: usize = 100;

/// Cluster the rows of `points` into `k` centers. `k` is clamped to the
/// number of points. Ties in assignment go to the lowest center index; an
/// emptied cluster is reseeded to the point farthest from its own center.
pub fn kmeans(points: &Matrix, k: usize, stream: &mut Stream) -> Matrix {
    let n = points.nrows();
    let d = points.ncols();
    let k = k.min(n).max(1);

    // k-means++ seeding
    let mut centers = Matrix::zeros(k, d);
    let first = stream.below(n);
    centers.row_mut(0).copy_from_slice(points.row(first));
    let mut best_sq: Vec<f64> = (0..n)
        .map(|i| sq_euclidean(points.row(i), centers.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = best_sq.iter().sum();
        let idx = if total > 0.0 {
            let mut target = stream.next_f64() * total;
            let mut chosen = n - 1;
            for (i, &w) in best_sq.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // all remaining points coincide with a chosen center
            stream.below(n)
        };
        centers.row_mut(c).copy_from_slice(points.row(idx));
        for i in 0..n {
            let dist = sq_euclidean(points.row(i), centers.row(c));
            if dist < best_sq[i] {
                best_sq[i] = dist;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    for _ in 0..MAX_ITER {
        let mut changed = false;
        for i in 0..n {
            let mut best = 0usize;
            let mut best_dist = f64::INFINITY;
            for c in 0..k {
                let dist = sq_euclidean(points.row(i), centers.row(c));
                if dist < best_dist {
                    best_dist = dist;
                    best = c;
                }
            }
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut counts = vec![0usize; k];
        let mut sums = Matrix::zeros(k, d);
        for i in 0..n {
            let c = assignment[i];
            counts[c] += 1;
            for (s, &v) in sums.row_mut(c).iter_mut().zip(points.row(i).iter()) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                let row = sums.row(c).to_vec();
                for (dst, v) in centers.row_mut(c).iter_mut().zip(row.iter()) {
                    *dst = v * inv;
                }
            } else {
                // farthest point from its current center takes over
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_euclidean(points.row(a), centers.row(assignment[a]));
                        let db = sq_euclidean(points.row(b), centers.row(assignment[b]));
                        da.partial_cmp(&db).expect("finite distances")
                    })
                    .expect("nonempty points");
                centers.row_mut(c).copy_from_slice(points.row(far));
            }
        }
    }
    centers
}

/// Index of the nearest center, lowest index winning ties.
pub fn nearest_center(centers: &Matrix, point: &[f64]) -> usize {
    let mut best = 0usize;
    let mut best_dist = f64::INFINITY;
    for c in 0..centers.nrows() {
        let dist = sq_euclidean(centers.row(c), point);
        if dist < best_dist {
            best_dist = dist;
            best = c;
        }
    }
    best
}
