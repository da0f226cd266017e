//! Mean Gaussian set kernel between bags plus a regularized least-squares
//! classifier in that kernel's feature space.

use crate::linalg::{solve_spd, sq_euclidean, Matrix};

use super::TrainData;

const RIDGE: f64 = 0.01;

/// `K(A, B) = mean over instance pairs of exp(-gamma ||a - b||^2)`.
pub fn set_kernel(a: &Matrix, b: &Matrix, gamma: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..a.nrows() {
        for j in 0..b.nrows() {
            sum += (-gamma * sq_euclidean(a.row(i), b.row(j))).exp();
        }
    }
    sum / (a.nrows() as f64 * b.nrows() as f64)
}

#[derive(Clone, Debug)]
pub struct KernelModel {
    pub bags: Vec<Matrix>,
    pub alphas: Vec<f64>,
    pub gamma: f64,
}

impl KernelModel {
    pub fn score(&self, bag: &Matrix) -> f64 {
        self.bags
            .iter()
            .zip(self.alphas.iter())
            .map(|(train_bag, alpha)| alpha * set_kernel(train_bag, bag, self.gamma))
            .sum()
    }
}

/// Ridge-regularized least squares on +-1 targets in the set-kernel space.
/// The Gram matrix is positive semi-definite, so the ridge keeps the solve
/// well posed; if it still fails numerically the ridge is grown.
pub fn fit_kernel_model(train: &TrainData, gamma: f64) -> KernelModel {
    let n = train.bags.len();
    let mut gram = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let k = set_kernel(&train.bags[i], &train.bags[j], gamma);
            gram.set(i, j, k);
            gram.set(j, i, k);
        }
    }
    let targets: Vec<f64> = train
        .labels
        .iter()
        .map(|l| if l.is_positive() { 1.0 } else { -1.0 })
        .collect();

    let mut ridge = RIDGE;
    let alphas = loop {
        let mut reg = gram.clone();
        for i in 0..n {
            reg.set(i, i, reg.get(i, i) + ridge);
        }
        match solve_spd(&reg, &targets) {
            Ok(a) => break a,
            Err(_) => ridge *= 10.0,
        }
    };
    KernelModel {
        bags: train.bags.clone(),
        alphas,
        gamma,
    }
}
