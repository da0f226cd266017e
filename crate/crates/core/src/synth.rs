//! Seeded generators for the six artificial MIL dataset families.
//!
//! Each generator is a pure function of its [`GenSpec`]. Random draws come
//! from streams keyed by `(seed, role, bag index)`, so the content of a bag
//! does not depend on how many instances any other bag drew, and the bag-size
//! stream is shared by all kinds. Positive bags occupy indices
//! `0..n_pos`, negative bags follow.

use std::fmt::Write as _;

use thiserror::Error;

use crate::data::{Bag, DataError, Label, MilDataset};
use crate::linalg::Matrix;
use crate::rng::Stream;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid generator spec: {0}")]
    Invalid(String),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Which artificial family to generate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GenKind {
    Gaussian,
    Maron,
    Concept,
    Difficult,
    Rotated,
    Widened,
}

impl GenKind {
    pub const ALL: [GenKind; 6] = [
        GenKind::Gaussian,
        GenKind::Maron,
        GenKind::Concept,
        GenKind::Difficult,
        GenKind::Rotated,
        GenKind::Widened,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GenKind::Gaussian => "gaussian",
            GenKind::Maron => "maron",
            GenKind::Concept => "concept",
            GenKind::Difficult => "difficult",
            GenKind::Rotated => "rotated",
            GenKind::Widened => "widened",
        }
    }

    pub fn parse(s: &str) -> Option<GenKind> {
        GenKind::ALL.iter().copied().find(|k| k.name() == s)
    }
}

/// Real-valued knobs of the generators. Every field applies to one kind and
/// is ignored by the others; keeping them all in one block makes the sidecar
/// format self-describing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenParams {
    /// Rotated: angle in degrees between the positive and negative
    /// instance distributions.
    pub rotation_deg: f64,
    /// Widened: factor scaling the positive covariance.
    pub widen_factor: f64,
    /// Gaussian: concept instances per positive bag are drawn uniformly from
    /// `{1, ..., ceil(bag_size * concept_fraction)}`.
    pub concept_fraction: f64,
    /// Maron: side length of the uniform background square.
    pub domain_side: f64,
    /// Maron: side length of the centered concept square.
    pub concept_side: f64,
    /// Difficult: shift of the positive mean along the first feature.
    pub mean_shift: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            rotation_deg: 10.0,
            widen_factor: 1.5,
            concept_fraction: 0.5,
            domain_side: 100.0,
            concept_side: 5.0,
            mean_shift: 2.0,
        }
    }
}

/// Full description of one synthetic dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n_pos: usize,
    pub n_neg: usize,
    pub bag_size_min: usize,
    pub bag_size_max: usize,
    pub seed: u64,
    pub params: GenParams,
}

impl GenSpec {
    /// The default sizes of each family: bag counts and bag-size ranges.
    pub fn defaults(kind: GenKind, seed: u64) -> GenSpec {
        let (n_pos, n_neg, lo, hi) = match kind {
            GenKind::Gaussian => (50, 50, 5, 9),
            GenKind::Maron => (50, 50, 10, 10),
            GenKind::Concept => (10, 10, 5, 8),
            GenKind::Difficult => (10, 40, 5, 9),
            GenKind::Rotated => (30, 30, 15, 29),
            GenKind::Widened => (30, 30, 15, 29),
        };
        GenSpec {
            kind,
            n_pos,
            n_neg,
            bag_size_min: lo,
            bag_size_max: hi,
            seed,
            params: GenParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n_pos < 1 || self.n_neg < 1 {
            return Err(GenError::Invalid("need at least one bag per class".into()));
        }
        if self.bag_size_min < 1 || self.bag_size_min > self.bag_size_max {
            return Err(GenError::Invalid(format!(
                "bad bag size range [{}, {}]",
                self.bag_size_min, self.bag_size_max
            )));
        }
        let p = &self.params;
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(p.widen_factor) {
            return Err(GenError::Invalid("widen_factor must be positive".into()));
        }
        if !positive(p.concept_fraction) || p.concept_fraction > 1.0 {
            return Err(GenError::Invalid("concept_fraction must be in (0, 1]".into()));
        }
        if !positive(p.domain_side) || !positive(p.concept_side) || p.concept_side > p.domain_side
        {
            return Err(GenError::Invalid("bad Maron square sides".into()));
        }
        if !p.rotation_deg.is_finite() || !p.mean_shift.is_finite() {
            return Err(GenError::Invalid("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Generate the dataset this spec describes.
    pub fn generate(&self) -> Result<MilDataset, GenError> {
        match self.kind {
            GenKind::Gaussian => gen_gaussian(self),
            GenKind::Maron => gen_maron(self),
            GenKind::Concept => gen_concept(self),
            GenKind::Difficult => gen_difficult(self),
            GenKind::Rotated => gen_rotated(self),
            GenKind::Widened => gen_widened(self),
        }
    }

    /// Flat `key = value` sidecar block, one key per line.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "kind = {}", self.kind.name());
        let _ = writeln!(s, "n_pos = {}", self.n_pos);
        let _ = writeln!(s, "n_neg = {}", self.n_neg);
        let _ = writeln!(s, "bag_size_min = {}", self.bag_size_min);
        let _ = writeln!(s, "bag_size_max = {}", self.bag_size_max);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "rotation_deg = {}", self.params.rotation_deg);
        let _ = writeln!(s, "widen_factor = {}", self.params.widen_factor);
        let _ = writeln!(s, "concept_fraction = {}", self.params.concept_fraction);
        let _ = writeln!(s, "domain_side = {}", self.params.domain_side);
        let _ = writeln!(s, "concept_side = {}", self.params.concept_side);
        let _ = writeln!(s, "mean_shift = {}", self.params.mean_shift);
        s
    }

    pub fn from_kv(text: &str) -> Result<GenSpec, GenError> {
        let mut kind = None;
        let mut ints: std::collections::HashMap<&str, u64> = Default::default();
        let mut floats: std::collections::HashMap<&str, f64> = Default::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| GenError::Invalid(format!("line {}: expected key = value", idx + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "kind" => {
                    kind = Some(GenKind::parse(value).ok_or_else(|| {
                        GenError::Invalid(format!("unknown kind {value:?}"))
                    })?)
                }
                "n_pos" | "n_neg" | "bag_size_min" | "bag_size_max" | "seed" => {
                    let v: u64 = value
                        .parse()
                        .map_err(|_| GenError::Invalid(format!("bad integer for {key}: {value:?}")))?;
                    ints.insert(match key {
                        "n_pos" => "n_pos",
                        "n_neg" => "n_neg",
                        "bag_size_min" => "bag_size_min",
                        "bag_size_max" => "bag_size_max",
                        _ => "seed",
                    }, v);
                }
                "rotation_deg" | "widen_factor" | "concept_fraction" | "domain_side"
                | "concept_side" | "mean_shift" => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| GenError::Invalid(format!("bad number for {key}: {value:?}")))?;
                    floats.insert(
                        match key {
                            "rotation_deg" => "rotation_deg",
                            "widen_factor" => "widen_factor",
                            "concept_fraction" => "concept_fraction",
                            "domain_side" => "domain_side",
                            "concept_side" => "concept_side",
                            _ => "mean_shift",
                        },
                        v,
                    );
                }
                other => return Err(GenError::Invalid(format!("unknown key {other:?}"))),
            }
        }
        let kind = kind.ok_or_else(|| GenError::Invalid("missing kind".into()))?;
        let int = |k: &str| -> Result<u64, GenError> {
            ints.get(k)
                .copied()
                .ok_or_else(|| GenError::Invalid(format!("missing {k}")))
        };
        let float = |k: &str| -> Result<f64, GenError> {
            floats
                .get(k)
                .copied()
                .ok_or_else(|| GenError::Invalid(format!("missing {k}")))
        };
        let spec = GenSpec {
            kind,
            n_pos: int("n_pos")? as usize,
            n_neg: int("n_neg")? as usize,
            bag_size_min: int("bag_size_min")? as usize,
            bag_size_max: int("bag_size_max")? as usize,
            seed: int("seed")?,
            params: GenParams {
                rotation_deg: float("rotation_deg")?,
                widen_factor: float("widen_factor")?,
                concept_fraction: float("concept_fraction")?,
                domain_side: float("domain_side")?,
                concept_side: float("concept_side")?,
                mean_shift: float("mean_shift")?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}

// Stream roles. BAG_SIZE is shared by every kind so that two specs with the
// same seed and size range produce the same bag sizes regardless of kind.
const ROLE_BAG_SIZE: u64 = 1;
const ROLE_INSTANCE: u64 = 2;
const ROLE_CONCEPT: u64 = 3;
const ROLE_CONCEPT_COUNT: u64 = 4;

fn bag_size(spec: &GenSpec, bag_idx: usize) -> usize {
    Stream::new(&[spec.seed, ROLE_BAG_SIZE, bag_idx as u64])
        .range_inclusive(spec.bag_size_min, spec.bag_size_max)
}

fn bag_id(label: Label, class_idx: usize) -> String {
    match label {
        Label::Positive => format!("p{class_idx:03}"),
        Label::Negative => format!("n{class_idx:03}"),
    }
}

fn instance_stream(spec: &GenSpec, bag_idx: usize) -> Stream {
    Stream::new(&[spec.seed, ROLE_INSTANCE, bag_idx as u64])
}

fn concept_stream(spec: &GenSpec, bag_idx: usize) -> Stream {
    Stream::new(&[spec.seed, ROLE_CONCEPT, bag_idx as u64])
}

fn require_kind(spec: &GenSpec, kind: GenKind) -> Result<(), GenError> {
    spec.validate()?;
    if spec.kind != kind {
        return Err(GenError::Invalid(format!(
            "expected kind {}, got {}",
            kind.name(),
            spec.kind.name()
        )));
    }
    Ok(())
}

fn build(spec: &GenSpec, mut gen_bag: impl FnMut(usize, usize, Label) -> Vec<f64>) -> Result<MilDataset, GenError> {
    let total = spec.n_pos + spec.n_neg;
    let mut bags = Vec::with_capacity(total);
    for bag_idx in 0..total {
        let (label, class_idx) = if bag_idx < spec.n_pos {
            (Label::Positive, bag_idx)
        } else {
            (Label::Negative, bag_idx - spec.n_pos)
        };
        let n = bag_size(spec, bag_idx);
        let data = gen_bag(bag_idx, n, label);
        debug_assert_eq!(data.len(), n * 2);
        bags.push(Bag::new(bag_id(label, class_idx), Matrix::from_vec(n, 2, data), label));
    }
    Ok(MilDataset::new(spec.kind.name(), bags)?)
}

/// Positive bags mix a concept Gaussian at (7, 1) with the background
/// Gaussian at the origin; negative bags are pure background. Both have unit
/// covariance.
pub fn gen_gaussian(spec: &GenSpec) -> Result<MilDataset, GenError> {
    require_kind(spec, GenKind::Gaussian)?;
    build(spec, |bag_idx, n, label| {
        let mut bg = instance_stream(spec, bag_idx);
        let mut data = Vec::with_capacity(n * 2);
        let m = if label.is_positive() {
            let cap = ((n as f64) * spec.params.concept_fraction).ceil() as usize;
            Stream::new(&[spec.seed, ROLE_CONCEPT_COUNT, bag_idx as u64])
                .range_inclusive(1, cap.max(1))
        } else {
            0
        };
        let mut concept = concept_stream(spec, bag_idx);
        for _ in 0..m {
            data.push(7.0 + concept.normal());
            data.push(1.0 + concept.normal());
        }
        for _ in 0..n - m {
            data.push(bg.normal());
            data.push(bg.normal());
        }
        data
    })
}

/// Uniform instances on a square; each positive bag swaps one instance for a
/// draw from the small concept square at the center.
pub fn gen_maron(spec: &GenSpec) -> Result<MilDataset, GenError> {
    require_kind(spec, GenKind::Maron)?;
    let side = spec.params.domain_side;
    let c_lo = (side - spec.params.concept_side) / 2.0;
    let c_hi = (side + spec.params.concept_side) / 2.0;
    build(spec, |bag_idx, n, label| {
        let mut bg = instance_stream(spec, bag_idx);
        let mut data = Vec::with_capacity(n * 2);
        let n_bg = if label.is_positive() { n - 1 } else { n };
        for _ in 0..n_bg {
            data.push(bg.uniform(0.0, side));
            data.push(bg.uniform(0.0, side));
        }
        if label.is_positive() {
            let mut concept = concept_stream(spec, bag_idx);
            data.push(concept.uniform(c_lo, c_hi));
            data.push(concept.uniform(c_lo, c_hi));
        }
        data
    })
}

const CONCEPT_BG_CENTERS: [[f64; 2]; 3] = [[2.0, -2.0], [-2.0, 2.0], [-2.0, -2.0]];
const CONCEPT_CENTER: [f64; 2] = [2.0, 2.0];

/// Background instances come from three unit-variance Gaussians at
/// (+2,-2), (-2,+2), (-2,-2); each positive bag adds one instance from the
/// concept Gaussian at (+2,+2).
pub fn gen_concept(spec: &GenSpec) -> Result<MilDataset, GenError> {
    require_kind(spec, GenKind::Concept)?;
    build(spec, |bag_idx, n, label| {
        let mut bg = instance_stream(spec, bag_idx);
        let mut data = Vec::with_capacity(n * 2);
        let n_bg = if label.is_positive() { n - 1 } else { n };
        for _ in 0..n_bg {
            let center = CONCEPT_BG_CENTERS[bg.below(3)];
            data.push(center[0] + bg.normal());
            data.push(center[1] + bg.normal());
        }
        if label.is_positive() {
            let mut concept = concept_stream(spec, bag_idx);
            data.push(CONCEPT_CENTER[0] + concept.normal());
            data.push(CONCEPT_CENTER[1] + concept.normal());
        }
        data
    })
}

// Elongated base distribution shared by Difficult and Rotated: zero mean,
// standard deviations (3, 1).
const ELONGATED_STD: [f64; 2] = [3.0, 1.0];

/// Row-major 2x2 factor mapping standard normals to the positive-class
/// distribution of the Rotated family. At 0 degrees this equals the negative
/// factor exactly.
fn rotated_factor(deg: f64) -> [f64; 4] {
    let (s, c) = deg.to_radians().sin_cos();
    [
        c * ELONGATED_STD[0],
        -s * ELONGATED_STD[1],
        s * ELONGATED_STD[0],
        c * ELONGATED_STD[1],
    ]
}

fn negative_factor() -> [f64; 4] {
    [ELONGATED_STD[0], 0.0, 0.0, ELONGATED_STD[1]]
}

fn gen_two_gaussians(
    spec: &GenSpec,
    pos_mean: [f64; 2],
    pos_factor: [f64; 4],
    neg_factor: [f64; 4],
) -> Result<MilDataset, GenError> {
    build(spec, |bag_idx, n, label| {
        let mut stream = instance_stream(spec, bag_idx);
        let (mean, f) = if label.is_positive() {
            (pos_mean, pos_factor)
        } else {
            ([0.0, 0.0], neg_factor)
        };
        let mut data = Vec::with_capacity(n * 2);
        for _ in 0..n {
            let z1 = stream.normal();
            let z2 = stream.normal();
            data.push(mean[0] + f[0] * z1 + f[1] * z2);
            data.push(mean[1] + f[2] * z1 + f[3] * z2);
        }
        data
    })
}

/// Both classes share an elongated Gaussian; the positive mean is shifted
/// along the first feature only.
pub fn gen_difficult(spec: &GenSpec) -> Result<MilDataset, GenError> {
    require_kind(spec, GenKind::Difficult)?;
    gen_two_gaussians(
        spec,
        [spec.params.mean_shift, 0.0],
        negative_factor(),
        negative_factor(),
    )
}

/// The positive instances come from the negative elongated Gaussian rotated
/// about its mean.
pub fn gen_rotated(spec: &GenSpec) -> Result<MilDataset, GenError> {
    require_kind(spec, GenKind::Rotated)?;
    gen_two_gaussians(
        spec,
        [0.0, 0.0],
        rotated_factor(spec.params.rotation_deg),
        negative_factor(),
    )
}

/// The positive instances come from the negative Gaussian with covariance
/// scaled by `widen_factor`.
pub fn gen_widened(spec: &GenSpec) -> Result<MilDataset, GenError> {
    require_kind(spec, GenKind::Widened)?;
    let s = spec.params.widen_factor.sqrt();
    gen_two_gaussians(spec, [0.0, 0.0], [s, 0.0, 0.0, s], [1.0, 0.0, 0.0, 1.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::meta_vector;

    #[test]
    fn defaults_match_expected_shapes() {
        let cases = [
            (GenKind::Gaussian, 50, 50, 5, 9),
            (GenKind::Maron, 50, 50, 10, 10),
            (GenKind::Concept, 10, 10, 5, 8),
            (GenKind::Difficult, 10, 40, 5, 9),
            (GenKind::Rotated, 30, 30, 15, 29),
            (GenKind::Widened, 30, 30, 15, 29),
        ];
        for (kind, n_pos, n_neg, lo, hi) in cases {
            let ds = GenSpec::defaults(kind, 1).generate().unwrap();
            let m = meta_vector(&ds);
            assert_eq!(m.n_pos_bags, n_pos, "{}", kind.name());
            assert_eq!(m.n_neg_bags, n_neg, "{}", kind.name());
            assert_eq!(m.n_features, 2, "{}", kind.name());
            assert!(m.min_bag_size >= lo, "{}", kind.name());
            assert!(m.max_bag_size <= hi, "{}", kind.name());
        }
    }

    #[test]
    fn generation_is_deterministic() {
        for kind in GenKind::ALL {
            let spec = GenSpec::defaults(kind, 99);
            assert_eq!(spec.generate().unwrap(), spec.generate().unwrap());
        }
    }

    #[test]
    fn different_seeds_differ() {
        let a = GenSpec::defaults(GenKind::Gaussian, 1).generate().unwrap();
        let b = GenSpec::defaults(GenKind::Gaussian, 2).generate().unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn gaussian_concept_mean_near_target() {
        let ds = GenSpec::defaults(GenKind::Gaussian, 1).generate().unwrap();
        // classify positive-bag instances by nearest center: (7,1) vs (0,0)
        let (mut sx, mut sy, mut count) = (0.0, 0.0, 0usize);
        for bag in ds.bags().iter().filter(|b| b.label.is_positive()) {
            for row in bag.instances.rows_iter() {
                let d_concept = (row[0] - 7.0).powi(2) + (row[1] - 1.0).powi(2);
                let d_bg = row[0].powi(2) + row[1].powi(2);
                if d_concept < d_bg {
                    sx += row[0];
                    sy += row[1];
                    count += 1;
                }
            }
        }
        assert!(count > 50);
        let dist = ((sx / count as f64 - 7.0).powi(2) + (sy / count as f64 - 1.0).powi(2)).sqrt();
        assert!(dist < 0.5, "concept sample mean off by {dist}");
    }

    #[test]
    fn maron_supports_and_concept_presence() {
        let ds = GenSpec::defaults(GenKind::Maron, 1).generate().unwrap();
        assert_eq!(ds.n_instances(), 1000);
        for bag in ds.bags() {
            assert_eq!(bag.size(), 10);
            for row in bag.instances.rows_iter() {
                assert!(row.iter().all(|&v| (0.0..=100.0).contains(&v)));
            }
            if bag.label.is_positive() {
                let hit = bag.instances.rows_iter().any(|r| {
                    (47.5..=52.5).contains(&r[0]) && (47.5..=52.5).contains(&r[1])
                });
                assert!(hit, "positive bag {} has no concept instance", bag.id);
            }
        }
    }

    #[test]
    fn concept_background_lands_near_listed_centers() {
        let ds = GenSpec::defaults(GenKind::Concept, 1).generate().unwrap();
        let mut near = 0usize;
        let mut total = 0usize;
        for bag in ds.bags().iter().filter(|b| !b.label.is_positive()) {
            for row in bag.instances.rows_iter() {
                let best = CONCEPT_BG_CENTERS
                    .iter()
                    .map(|c| ((row[0] - c[0]).powi(2) + (row[1] - c[1]).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min);
                total += 1;
                if best < 3.0 {
                    near += 1;
                }
            }
        }
        assert!(total > 0);
        assert!(
            near as f64 / total as f64 > 0.9,
            "only {near}/{total} background instances near a listed center"
        );
    }

    #[test]
    fn difficult_shifts_first_feature_only() {
        let ds = GenSpec::defaults(GenKind::Difficult, 1).generate().unwrap();
        let pool = |want_pos: bool, feature: usize| -> f64 {
            let (mut sum, mut count) = (0.0, 0usize);
            for bag in ds.bags().iter().filter(|b| b.label.is_positive() == want_pos) {
                for row in bag.instances.rows_iter() {
                    sum += row[feature];
                    count += 1;
                }
            }
            sum / count as f64
        };
        assert!((pool(true, 1) - pool(false, 1)).abs() < 0.5);
        assert!((pool(true, 0) - pool(false, 0)).abs() > 1.0);
    }

    #[test]
    fn rotation_zero_is_identity_factor() {
        assert_eq!(rotated_factor(0.0), negative_factor());
    }

    #[test]
    fn rotation_zero_matches_negative_recipe() {
        let mut spec = GenSpec::defaults(GenKind::Rotated, 5);
        spec.params.rotation_deg = 0.0;
        let ds = spec.generate().unwrap();
        // reconstruct positive bags with the negative-class transform
        let nf = negative_factor();
        for (bag_idx, bag) in ds.bags().iter().enumerate().take(spec.n_pos) {
            let mut stream = instance_stream(&spec, bag_idx);
            for row in bag.instances.rows_iter() {
                let z1 = stream.normal();
                let z2 = stream.normal();
                assert_eq!(row[0], nf[0] * z1 + nf[1] * z2);
                assert_eq!(row[1], nf[2] * z1 + nf[3] * z2);
            }
        }
    }

    #[test]
    fn widened_unit_factor_matches_negative() {
        let mut spec = GenSpec::defaults(GenKind::Widened, 5);
        spec.params.widen_factor = 1.0;
        let ds = spec.generate().unwrap();
        for (bag_idx, bag) in ds.bags().iter().enumerate().take(spec.n_pos) {
            let mut stream = instance_stream(&spec, bag_idx);
            for row in bag.instances.rows_iter() {
                assert_eq!(row[0], stream.normal());
                assert_eq!(row[1], stream.normal());
            }
        }
    }

    #[test]
    fn widened_positive_variance_exceeds_negative() {
        let ds = GenSpec::defaults(GenKind::Widened, 1).generate().unwrap();
        let var = |want_pos: bool, feature: usize| -> f64 {
            let vals: Vec<f64> = ds
                .bags()
                .iter()
                .filter(|b| b.label.is_positive() == want_pos)
                .flat_map(|b| b.instances.rows_iter().map(move |r| r[feature]))
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64
        };
        assert!(var(true, 0) > var(false, 0));
        assert!(var(true, 1) > var(false, 1));
    }

    #[test]
    fn same_seed_shares_bag_sizes_across_kinds() {
        let a = GenSpec::defaults(GenKind::Rotated, 7).generate().unwrap();
        let b = GenSpec::defaults(GenKind::Widened, 7).generate().unwrap();
        let sizes = |ds: &MilDataset| ds.bags().iter().map(Bag::size).collect::<Vec<_>>();
        assert_eq!(sizes(&a), sizes(&b));
        assert_eq!(meta_vector(&a), meta_vector(&b));
    }

    #[test]
    fn sidecar_roundtrip() {
        let mut spec = GenSpec::defaults(GenKind::Rotated, 1234);
        spec.params.rotation_deg = 12.5;
        let text = spec.to_kv();
        let back = GenSpec::from_kv(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn sidecar_rejects_unknown_key() {
        let text = "kind = maron\nbogus = 1\n";
        assert!(matches!(GenSpec::from_kv(text), Err(GenError::Invalid(_))));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut spec = GenSpec::defaults(GenKind::Gaussian, 1);
        spec.bag_size_min = 0;
        assert!(spec.generate().is_err());
        let mut spec = GenSpec::defaults(GenKind::Gaussian, 1);
        spec.n_neg = 0;
        assert!(spec.generate().is_err());
        // kind mismatch
        let spec = GenSpec::defaults(GenKind::Maron, 1);
        assert!(gen_gaussian(&spec).is_err());
    }

    #[test]
    fn small_specs_produce_valid_datasets() {
        for kind in GenKind::ALL {
            for seed in 0..5 {
                let spec = GenSpec {
                    kind,
                    n_pos: 1 + (seed as usize % 3),
                    n_neg: 1 + (seed as usize % 2),
                    bag_size_min: 1,
                    bag_size_max: 3,
                    seed,
                    params: GenParams::default(),
                };
                let ds = spec.generate().unwrap();
                assert_eq!(ds.bags().len(), spec.n_pos + spec.n_neg);
            }
        }
    }
}
