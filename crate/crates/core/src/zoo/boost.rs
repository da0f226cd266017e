//! Boosting of depth-1 stumps on instances with bag-level noisy-or
//! probabilities. Each round reweights instances by the gradient of the bag
//! log-likelihood with respect to the instance scores, picks the stump with
//! the highest weighted correlation, and sets its coefficient by a
//! golden-section line search.

use crate::data::Label;
use crate::linalg::Matrix;

use super::TrainData;

use super::density::noisy_or;
use super::logistic::sigmoid;

const ROUNDS: usize = 100;
const ALPHA_MAX: f64 = 5.0;
const LINE_SEARCH_ITERS: usize = 30;

#[derive(Clone, Debug)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: f64, // +1: fire above threshold; -1: fire below
}

impl Stump {
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        if x[self.feature] > self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoostModel {
    pub stumps: Vec<(Stump, f64)>,
}

impl BoostModel {
    pub fn instance_score(&self, x: &[f64]) -> f64 {
        self.stumps
            .iter()
            .map(|(stump, alpha)| alpha * stump.eval(x))
            .sum()
    }

    pub fn bag_prob(&self, bag: &Matrix) -> f64 {
        noisy_or(bag.rows_iter().map(|row| sigmoid(self.instance_score(row))))
    }
}

struct Pool {
    // flat instance list plus which bag each instance belongs to
    instances: Matrix,
    bag_of: Vec<usize>,
    bag_count: usize,
    labels: Vec<Label>,
    // per feature: instance indices sorted by value
    sorted: Vec<Vec<u32>>,
}

fn bag_loglik(pool: &Pool, scores: &[f64]) -> f64 {
    let mut keep = vec![1.0f64; pool.bag_count];
    for (i, &b) in pool.bag_of.iter().enumerate() {
        keep[b] *= 1.0 - sigmoid(scores[i]);
    }
    let mut loglik = 0.0;
    for (b, &label) in pool.labels.iter().enumerate() {
        let p = (1.0 - keep[b]).clamp(1e-12, 1.0 - 1e-12);
        loglik += if label.is_positive() {
            p.ln()
        } else {
            (1.0 - p).ln()
        };
    }
    loglik
}

/// d loglik / d score_i: `p_i (1 - P_b) / P_b` inside positive bags and
/// `-p_i` inside negative ones.
fn instance_weights(pool: &Pool, scores: &[f64]) -> Vec<f64> {
    let mut keep = vec![1.0f64; pool.bag_count];
    for (i, &b) in pool.bag_of.iter().enumerate() {
        keep[b] *= 1.0 - sigmoid(scores[i]);
    }
    pool.bag_of
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let p_i = sigmoid(scores[i]);
            if pool.labels[b].is_positive() {
                let bag_p = (1.0 - keep[b]).max(1e-12);
                p_i * (1.0 - bag_p) / bag_p
            } else {
                -p_i
            }
        })
        .collect()
}

/// Best stump by weighted correlation, thresholds at midpoints of sorted
/// unique feature values. Ties keep the first candidate scanned.
fn best_stump(pool: &Pool, weights: &[f64]) -> Option<Stump> {
    let total: f64 = weights.iter().sum();
    let mut best: Option<(f64, Stump)> = None;
    for feature in 0..pool.instances.ncols() {
        let order = &pool.sorted[feature];
        let mut below = 0.0;
        for k in 0..order.len().saturating_sub(1) {
            below += weights[order[k] as usize];
            let lo = pool.instances.get(order[k] as usize, feature);
            let hi = pool.instances.get(order[k + 1] as usize, feature);
            if lo == hi {
                continue;
            }
            let threshold = 0.5 * (lo + hi);
            // correlation of the "fire above" stump
            let corr = total - 2.0 * below;
            let (gain, polarity) = if corr >= 0.0 { (corr, 1.0) } else { (-corr, -1.0) };
            if best.as_ref().is_none_or(|(bg, _)| gain > *bg) {
                best = Some((
                    gain,
                    Stump {
                        feature,
                        threshold,
                        polarity,
                    },
                ));
            }
        }
    }
    best.map(|(_, s)| s)
}

fn golden_section_alpha(pool: &Pool, scores: &[f64], deltas: &[f64]) -> f64 {
    let eval = |alpha: f64| -> f64 {
        let shifted: Vec<f64> = scores
            .iter()
            .zip(deltas.iter())
            .map(|(s, d)| s + alpha * d)
            .collect();
        bag_loglik(pool, &shifted)
    };
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut lo = 0.0;
    let mut hi = ALPHA_MAX;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    for _ in 0..LINE_SEARCH_ITERS {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = eval(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = eval(x1);
        }
    }
    let alpha = 0.5 * (lo + hi);
    if eval(alpha) > eval(0.0) {
        alpha
    } else {
        0.0
    }
}

pub fn fit_milboost(train: &TrainData) -> BoostModel {
    let dim = train.dim;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut bag_of = Vec::new();
    for (b, bag) in train.bags.iter().enumerate() {
        for row in bag.rows_iter() {
            rows.push(row.to_vec());
            bag_of.push(b);
        }
    }
    let instances = Matrix::from_rows(&rows);
    let sorted: Vec<Vec<u32>> = (0..dim)
        .map(|feature| {
            let mut order: Vec<u32> = (0..instances.nrows() as u32).collect();
            order.sort_by(|&a, &b| {
                instances
                    .get(a as usize, feature)
                    .partial_cmp(&instances.get(b as usize, feature))
                    .expect("finite features")
                    .then(a.cmp(&b))
            });
            order
        })
        .collect();
    let pool = Pool {
        instances,
        bag_of,
        bag_count: train.bags.len(),
        labels: train.labels.clone(),
        sorted,
    };

    let n = pool.instances.nrows();
    let mut scores = vec![0.0; n];
    let mut stumps = Vec::new();
    for _ in 0..ROUNDS {
        let weights = instance_weights(&pool, &scores);
        let Some(stump) = best_stump(&pool, &weights) else {
            break;
        };
        let deltas: Vec<f64> = (0..n).map(|i| stump.eval(pool.instances.row(i))).collect();
        let alpha = golden_section_alpha(&pool, &scores, &deltas);
        if alpha <= 1e-12 {
            break;
        }
        for (s, d) in scores.iter_mut().zip(deltas.iter()) {
            *s += alpha * d;
        }
        stumps.push((stump, alpha));
    }
    BoostModel { stumps }
}
