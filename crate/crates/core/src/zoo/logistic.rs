//! The shared base learner: a logistic classifier trained by full-batch
//! gradient descent.
//!
//! Solver settings are fixed for the whole zoo: at most 2000 iterations,
//! gradient-norm tolerance 1e-6, step size from the Lipschitz bound of the
//! logistic loss. The intercept is never penalized. The L1 variant (used by
//! the prototype-similarity family) runs the same descent with a
//! soft-threshold step.

use crate::linalg::Matrix;

pub const MAX_ITER: usize = 2000;
pub const GRAD_TOL: f64 = 1e-6;
pub const L2_LAMBDA: f64 = 0.01;
pub const L1_LAMBDA: f64 = 0.01;

#[derive(Clone, Copy, Debug)]
pub enum Penalty {
    L2(f64),
    L1(f64),
}

#[derive(Clone, Debug)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticModel {
    pub fn prob(&self, x: &[f64]) -> f64 {
        let z: f64 = self
            .weights
            .iter()
            .zip(x.iter())
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.bias;
        sigmoid(z)
    }
}

/// Fit on rows `x` with targets `y` in {0, 1}.
pub fn fit_logistic(x: &Matrix, y: &[f64], penalty: Penalty) -> LogisticModel {
    let n = x.nrows();
    let d = x.ncols();
    assert_eq!(n, y.len());
    assert!(n > 0);

    // Lipschitz bound of the mean logistic loss gradient plus the ridge term;
    // the +1 accounts for the intercept column.
    let sq_norms: f64 = x.data().iter().map(|v| v * v).sum::<f64>() + n as f64;
    let lip = 0.25 * sq_norms / n as f64
        + match penalty {
            Penalty::L2(l) => l,
            Penalty::L1(_) => 0.0,
        };
    let step = 1.0 / lip.max(1e-12);

    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut probs = vec![0.0; n];
    let mut grad = vec![0.0; d];

    for _ in 0..MAX_ITER {
        for i in 0..n {
            let z: f64 = w
                .iter()
                .zip(x.row(i).iter())
                .map(|(wj, v)| wj * v)
                .sum::<f64>()
                + b;
            probs[i] = sigmoid(z);
        }
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_b = 0.0;
        for i in 0..n {
            let err = probs[i] - y[i];
            grad_b += err;
            for (g, &v) in grad.iter_mut().zip(x.row(i).iter()) {
                *g += err * v;
            }
        }
        let inv_n = 1.0 / n as f64;
        grad_b *= inv_n;
        grad.iter_mut().for_each(|g| *g *= inv_n);

        match penalty {
            Penalty::L2(l) => {
                for (g, wj) in grad.iter_mut().zip(w.iter()) {
                    *g += l * wj;
                }
                let norm: f64 = (grad.iter().map(|g| g * g).sum::<f64>() + grad_b * grad_b).sqrt();
                if norm < GRAD_TOL {
                    break;
                }
                for (wj, g) in w.iter_mut().zip(grad.iter()) {
                    *wj -= step * g;
                }
                b -= step * grad_b;
            }
            Penalty::L1(l) => {
                // proximal step; convergence measured on the gradient mapping
                let mut moved = 0.0;
                for (wj, g) in w.iter_mut().zip(grad.iter()) {
                    let candidate = *wj - step * g;
                    let new = candidate.signum() * (candidate.abs() - step * l).max(0.0);
                    moved += (new - *wj) * (new - *wj);
                    *wj = new;
                }
                let new_b = b - step * grad_b;
                moved += (new_b - b) * (new_b - b);
                b = new_b;
                if moved.sqrt() / step < GRAD_TOL {
                    break;
                }
            }
        }
    }
    LogisticModel { weights: w, bias: b }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separates_trivial_data() {
        let x = Matrix::from_rows(&[vec![-2.0], vec![-1.5], vec![1.5], vec![2.0]]);
        let y = [0.0, 0.0, 1.0, 1.0];
        let m = fit_logistic(&x, &y, Penalty::L2(L2_LAMBDA));
        assert!(m.prob(&[-2.0]) < 0.2);
        assert!(m.prob(&[2.0]) > 0.8);
        assert!(m.prob(&[-2.0]) < m.prob(&[-1.0]));
    }

    #[test]
    fn l1_zeroes_irrelevant_feature() {
        // feature 0 is informative, feature 1 is pure noise in a fixed pattern
        let x = Matrix::from_rows(&[
            vec![-2.0, 0.3],
            vec![-1.0, -0.3],
            vec![-1.5, 0.1],
            vec![1.0, 0.2],
            vec![1.5, -0.2],
            vec![2.0, 0.0],
        ]);
        let y = [0.0, 0.0, 0.0, 1.0, 1.0, 1.0];
        let m = fit_logistic(&x, &y, Penalty::L1(0.05));
        assert!(m.weights[0] > 0.1);
        assert!(m.weights[1].abs() < m.weights[0].abs() * 0.2);
    }

    #[test]
    fn deterministic() {
        let x = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]);
        let y = [0.0, 1.0, 1.0];
        let a = fit_logistic(&x, &y, Penalty::L2(L2_LAMBDA));
        let b = fit_logistic(&x, &y, Penalty::L2(L2_LAMBDA));
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.bias, b.bias);
    }
}
