//! Per-feature standardization fit on training-fold instances.

use crate::linalg::Matrix;

/// Maps each feature to zero mean and unit standard deviation using the
/// statistics captured at fit time. Constant features map to zero, which
/// gives them zero weight in every downstream learner.
#[derive(Clone, Debug)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>, // 0.0 marks a constant feature
}

impl Standardizer {
    pub fn fit<'a>(instances: impl Iterator<Item = &'a [f64]>, dim: usize) -> Standardizer {
        let mut count = 0usize;
        let mut sum = vec![0.0; dim];
        let mut sum_sq = vec![0.0; dim];
        for row in instances {
            count += 1;
            for (j, &v) in row.iter().enumerate() {
                sum[j] += v;
                sum_sq[j] += v * v;
            }
        }
        let n = count.max(1) as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let scale: Vec<f64> = (0..dim)
            .map(|j| {
                let var = if count > 1 {
                    (sum_sq[j] - n * mean[j] * mean[j]) / (n - 1.0)
                } else {
                    0.0
                };
                if var > 1e-24 {
                    var.sqrt()
                } else {
                    0.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn transform_point(&self, row: &[f64], out: &mut [f64]) {
        for j in 0..self.mean.len() {
            out[j] = if self.scale[j] > 0.0 {
                (row[j] - self.mean[j]) / self.scale[j]
            } else {
                0.0
            };
        }
    }

    pub fn transform_bag(&self, bag: &Matrix) -> Matrix {
        let d = self.mean.len();
        let mut out = Matrix::zeros(bag.nrows(), d);
        for i in 0..bag.nrows() {
            let row = bag.row(i).to_vec();
            self.transform_point(&row, out.row_mut(i));
        }
        out
    }

    /// Map a point from standardized space back to the original features.
    pub fn inverse_point(&self, z: &[f64]) -> Vec<f64> {
        (0..self.mean.len())
            .map(|j| {
                if self.scale[j] > 0.0 {
                    z[j] * self.scale[j] + self.mean[j]
                } else {
                    self.mean[j]
                }
            })
            .collect()
    }
}
