//! Concept learning by diverse density: a target location and per-feature
//! scales are fit so that instances near the target are likely in positive
//! bags and unlikely in negative ones. Two fitters share the machinery: the
//! full noisy-or objective, and the expectation-maximization variant that
//! alternates between picking each bag's most positive instance and
//! maximizing the single-instance objective.


use crate::linalg::Matrix;
use crate::rng::Stream;

use super::TrainData;

const RESTARTS: usize = 10;
const SCALE_INIT: f64 = 1.0;
const ASCENT_MAX_ITER: usize = 200;
const ASCENT_TOL: f64 = 1e-6;
const EM_MAX_ROUNDS: usize = 50;
const EM_TOL: f64 = 1e-4;
const P_CLAMP: f64 = 1e-12;

/// Combine instance probabilities into a bag probability: `1 - prod(1 - p)`.
pub fn noisy_or(probs: impl Iterator<Item = f64>) -> f64 {
    let mut keep = 1.0;
    for p in probs {
        keep *= 1.0 - p;
    }
    1.0 - keep
}

/// An ellipsoidal concept in standardized feature space. Scales are kept in
/// log form so they stay positive during optimization.
#[derive(Clone, Debug)]
pub struct ConceptModel {
    pub target: Vec<f64>,
    pub log_scales: Vec<f64>,
}

impl ConceptModel {
    pub fn instance_prob(&self, x: &[f64]) -> f64 {
        let mut e = 0.0;
        for j in 0..self.target.len() {
            let s = self.log_scales[j].exp();
            let d = x[j] - self.target[j];
            e += s * s * d * d;
        }
        (-e).exp()
    }

    pub fn bag_prob(&self, bag: &Matrix) -> f64 {
        noisy_or(bag.rows_iter().map(|row| self.instance_prob(row)))
    }
}

// params layout: [t_0..t_d, u_0..u_d] with scales s_j = exp(u_j)
fn unpack(params: &[f64]) -> (&[f64], &[f64]) {
    let d = params.len() / 2;
    (&params[..d], &params[d..])
}

/// Instance probability plus its partial derivative factors, clamped for the
/// likelihood computations.
fn instance_terms(x: &[f64], t: &[f64], u: &[f64]) -> (f64, Vec<f64>) {
    let d = t.len();
    let mut e = 0.0;
    let mut dlogp = vec![0.0; 2 * d]; // gradient of ln p wrt (t, u)
    for j in 0..d {
        let s2 = (2.0 * u[j]).exp();
        let diff = x[j] - t[j];
        e += s2 * diff * diff;
        dlogp[j] = 2.0 * s2 * diff;
        dlogp[d + j] = -2.0 * s2 * diff * diff;
    }
    ((-e).exp(), dlogp)
}

/// Log-likelihood and gradient of the full noisy-or objective.
fn noisy_or_objective(train: &TrainData, params: &[f64]) -> (f64, Vec<f64>) {
    let (t, u) = unpack(params);
    let dim2 = params.len();
    let mut loglik = 0.0;
    let mut grad = vec![0.0; dim2];
    let mut ds = vec![0.0; dim2];

    for (bag, &label) in train.bags.iter().zip(train.labels.iter()) {
        // s = sum of ln(1 - p_j); ds its gradient
        let mut s = 0.0;
        ds.iter_mut().for_each(|v| *v = 0.0);
        for row in bag.rows_iter() {
            let (p_raw, dlogp) = instance_terms(row, t, u);
            let p = p_raw.clamp(P_CLAMP, 1.0 - P_CLAMP);
            s += (1.0 - p).ln();
            let factor = -p / (1.0 - p);
            for (dst, dl) in ds.iter_mut().zip(dlogp.iter()) {
                *dst += factor * dl;
            }
        }
        if label.is_positive() {
            // ln P = ln(1 - exp(s))
            let bag_p = (-s.exp_m1()).max(P_CLAMP);
            loglik += bag_p.ln();
            let factor = -(1.0 - bag_p) / bag_p;
            for (g, dsv) in grad.iter_mut().zip(ds.iter()) {
                *g += factor * dsv;
            }
        } else {
            loglik += s;
            for (g, dsv) in grad.iter_mut().zip(ds.iter()) {
                *g += dsv;
            }
        }
    }
    (loglik, grad)
}

/// Log-likelihood and gradient over one selected instance per bag.
fn single_instance_objective(
    train: &TrainData,
    selected: &[usize],
    params: &[f64],
) -> (f64, Vec<f64>) {
    let (t, u) = unpack(params);
    let dim2 = params.len();
    let mut loglik = 0.0;
    let mut grad = vec![0.0; dim2];

    for ((bag, &label), &pick) in train.bags.iter().zip(train.labels.iter()).zip(selected) {
        let (p_raw, dlogp) = instance_terms(bag.row(pick), t, u);
        let p = p_raw.clamp(P_CLAMP, 1.0 - P_CLAMP);
        if label.is_positive() {
            loglik += p.ln();
            for (g, dl) in grad.iter_mut().zip(dlogp.iter()) {
                *g += dl;
            }
        } else {
            loglik += (1.0 - p).ln();
            let factor = -p / (1.0 - p);
            for (g, dl) in grad.iter_mut().zip(dlogp.iter()) {
                *g += factor * dl;
            }
        }
    }
    (loglik, grad)
}

/// Gradient ascent with backtracking; returns the best parameters and value.
fn ascend(
    objective: impl Fn(&[f64]) -> (f64, Vec<f64>),
    mut params: Vec<f64>,
) -> (f64, Vec<f64>) {
    let (mut value, mut grad) = objective(&params);
    let mut step = 1.0;
    for _ in 0..ASCENT_MAX_ITER {
        let gnorm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < ASCENT_TOL {
            break;
        }
        let mut improved = false;
        for _ in 0..60 {
            let candidate: Vec<f64> = params
                .iter()
                .zip(grad.iter())
                .map(|(p, g)| p + step * g)
                .collect();
            let (cand_value, cand_grad) = objective(&candidate);
            if cand_value > value {
                params = candidate;
                value = cand_value;
                grad = cand_grad;
                step = (step * 2.0).min(16.0);
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    (value, params)
}

/// Deterministic restart points: instances of positive bags, sampled without
/// replacement from the pooled list.
fn restart_points(train: &TrainData, seed: u64) -> Vec<Vec<f64>> {
    let pool: Vec<&[f64]> = train
        .bags
        .iter()
        .zip(train.labels.iter())
        .filter(|(_, l)| l.is_positive())
        .flat_map(|(bag, _)| bag.rows_iter())
        .collect();
    let mut order: Vec<usize> = (0..pool.len()).collect();
    Stream::new(&[seed, 0x5245_5354]).shuffle(&mut order); // "REST"
    order
        .into_iter()
        .take(RESTARTS)
        .map(|i| pool[i].to_vec())
        .collect()
}

fn init_params(point: &[f64]) -> Vec<f64> {
    init_params_with(point, SCALE_INIT)
}

fn init_params_with(point: &[f64], scale: f64) -> Vec<f64> {
    let d = point.len();
    let mut params = Vec::with_capacity(2 * d);
    params.extend_from_slice(point);
    params.extend(std::iter::repeat_n(scale.ln(), d));
    params
}

fn to_model(params: &[f64]) -> ConceptModel {
    let (t, u) = unpack(params);
    ConceptModel {
        target: t.to_vec(),
        log_scales: u.to_vec(),
    }
}

/// Maximize the noisy-or diverse-density likelihood from multiple restarts.
pub fn fit_diverse_density(train: &TrainData, seed: u64) -> ConceptModel {
    let mut best: Option<(f64, Vec<f64>)> = None;
    for point in restart_points(train, seed) {
        let (value, params) = ascend(|p| noisy_or_objective(train, p), init_params(&point));
        if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
            best = Some((value, params));
        }
    }
    let (_, params) = best.expect("at least one positive instance to start from");
    to_model(&params)
}

/// EM variant: alternate instance selection and single-instance maximization.
pub fn fit_emdd(train: &TrainData, seed: u64) -> ConceptModel {
    let select = |params: &[f64]| -> Vec<usize> {
        let (t, u) = unpack(params);
        train
            .bags
            .iter()
            .map(|bag| {
                let mut best = 0usize;
                let mut best_p = f64::NEG_INFINITY;
                for (j, row) in bag.rows_iter().enumerate() {
                    let (p, _) = instance_terms(row, t, u);
                    if p > best_p {
                        best_p = p;
                        best = j;
                    }
                }
                best
            })
            .collect()
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    for point in restart_points(train, seed) {
        let mut params = init_params(&point);
        let mut value = f64::NEG_INFINITY;
        for _ in 0..EM_MAX_ROUNDS {
            let selected = select(&params);
            let before: Vec<f64> = params[..train.dim].to_vec();
            let (v, p) = ascend(
                |p| single_instance_objective(train, &selected, p),
                params.clone(),
            );
            params = p;
            value = v;
            let moved: f64 = params[..train.dim]
                .iter()
                .zip(before.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            if moved < EM_TOL {
                break;
            }
        }
        if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
            best = Some((value, params));
        }
    }
    let (_, params) = best.expect("at least one positive instance to start from");
    to_model(&params)
}
