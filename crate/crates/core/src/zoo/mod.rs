//! The fixed catalog of 22 MIL classifiers used by the evaluation grid.
//!
//! Three broad approaches are covered: training a supervised learner on
//! instances with inherited bag labels (simpleMIL), learning an instance
//! concept consistent with the bag labels (diverse density, EM variant,
//! boosting, the SVM with latent instance labels), and mapping each bag to a
//! single vector or kernel/dissimilarity representation before a supervised
//! bag-level learner (statistics, bag of words, prototype similarities,
//! set kernel, bag dissimilarities, citation k-NN).
//!
//! Every classifier standardizes features with training-fold statistics,
//! runs to fixed iteration caps rather than failing, and is a deterministic
//! function of `(spec, training set, seed)`.

mod bagvec;
mod boost;
mod density;
mod kernel;
mod kmeans;
mod knn;
mod logistic;
mod standardize;
mod svm;

use thiserror::Error;

use crate::data::{Bag, Label, MilDataset};
use crate::linalg::Matrix;
use crate::rng::Stream;

use bagvec::{bag_stats_vector, bow_histogram, dissim_vector, prototype_vector};
pub use bagvec::{DissimAgg, StatKind};
use boost::{fit_milboost, BoostModel};
use density::{fit_diverse_density, fit_emdd, ConceptModel};
pub use density::noisy_or;
use kernel::{fit_kernel_model, KernelModel};
pub use kernel::set_kernel;
use kmeans::kmeans;
use knn::CitationKnnModel;
pub use knn::min_hausdorff;
use logistic::{fit_logistic, LogisticModel, Penalty, L1_LAMBDA, L2_LAMBDA};
use standardize::Standardizer;
use svm::{fit_misvm, misvm_bag_score, LinearSvm};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("single-class training set")]
    SingleClassTrainingSet,
    #[error("feature dimension mismatch: model {model}, bag {bag}")]
    DimensionMismatch { model: usize, bag: usize },
}

/// The eleven classifier families of the catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    SimpleMil,
    DiverseDensity,
    Emdd,
    MilBoost,
    CitationKnn,
    MiSvm,
    Miles,
    MilKernel,
    BagStatistics,
    BagOfWords,
    BagDissimilarity,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::SimpleMil => "simple_mil",
            Family::DiverseDensity => "diverse_density",
            Family::Emdd => "emdd",
            Family::MilBoost => "milboost",
            Family::CitationKnn => "citation_knn",
            Family::MiSvm => "misvm",
            Family::Miles => "miles",
            Family::MilKernel => "mil_kernel",
            Family::BagStatistics => "bag_statistics",
            Family::BagOfWords => "bag_of_words",
            Family::BagDissimilarity => "bag_dissimilarity",
        }
    }
}

/// One entry of the catalog: a family plus a variant selecting its
/// hyperparameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassifierSpec {
    pub family: Family,
    pub variant_id: usize,
    pub display_name: String,
}

impl ClassifierSpec {
    fn new(family: Family, variant_id: usize, display_name: &str) -> ClassifierSpec {
        ClassifierSpec {
            family,
            variant_id,
            display_name: display_name.to_string(),
        }
    }

    /// Human-readable hyperparameters for the manifest.
    pub fn hyperparams(&self) -> String {
        match (self.family, self.variant_id) {
            (Family::SimpleMil, _) => "base=logistic".into(),
            (Family::DiverseDensity, _) => "restarts=10".into(),
            (Family::Emdd, _) => "restarts=10".into(),
            (Family::MilBoost, _) => "rounds=100".into(),
            (Family::CitationKnn, v) => {
                let (r, c) = CITATION_VARIANTS[v];
                format!("references={r}, citer_rank={c}")
            }
            (Family::MiSvm, v) => format!("C={}", MISVM_C[v]),
            (Family::Miles, v) => format!("sigma2={}d", MILES_SIGMA_FACTOR[v]),
            (Family::MilKernel, v) => format!("gamma={}/d", KERNEL_GAMMA_FACTOR[v]),
            (Family::BagStatistics, v) => format!(
                "stats={}",
                ["mean", "minmax", "meanminmax"][v]
            ),
            (Family::BagOfWords, v) => format!("k={}", BOW_K[v]),
            (Family::BagDissimilarity, v) => format!(
                "agg={}",
                ["mean-min", "min-min", "mean-mean"][v]
            ),
        }
    }

    /// Look a spec up by display name.
    pub fn by_name(name: &str) -> Option<ClassifierSpec> {
        catalog().into_iter().find(|s| s.display_name == name)
    }
}

const CITATION_VARIANTS: [(usize, usize); 2] = [(3, 5), (5, 7)];
const MISVM_C: [f64; 2] = [1.0, 100.0];
const MILES_SIGMA_FACTOR: [f64; 2] = [1.0, 5.0];
const KERNEL_GAMMA_FACTOR: [f64; 3] = [0.1, 1.0, 10.0];
const BOW_K: [usize; 3] = [10, 25, 50];

/// The full ordered catalog:
/// simpleMIL, diverse density, EM-DD, MILBoost, citation k-NN x2, miSVM x2,
/// MILES x2, MIL kernel x3, bag statistics x3, bag of words x3,
/// bag dissimilarity x3 — 22 classifiers.
pub fn catalog() -> Vec<ClassifierSpec> {
    vec![
        ClassifierSpec::new(Family::SimpleMil, 0, "simpleMIL"),
        ClassifierSpec::new(Family::DiverseDensity, 0, "diverse_density"),
        ClassifierSpec::new(Family::Emdd, 0, "emdd"),
        ClassifierSpec::new(Family::MilBoost, 0, "milboost"),
        ClassifierSpec::new(Family::CitationKnn, 0, "citation_knn_3_5"),
        ClassifierSpec::new(Family::CitationKnn, 1, "citation_knn_5_7"),
        ClassifierSpec::new(Family::MiSvm, 0, "misvm_c1"),
        ClassifierSpec::new(Family::MiSvm, 1, "misvm_c100"),
        ClassifierSpec::new(Family::Miles, 0, "miles_s1"),
        ClassifierSpec::new(Family::Miles, 1, "miles_s5"),
        ClassifierSpec::new(Family::MilKernel, 0, "mil_kernel_g0.1"),
        ClassifierSpec::new(Family::MilKernel, 1, "mil_kernel_g1"),
        ClassifierSpec::new(Family::MilKernel, 2, "mil_kernel_g10"),
        ClassifierSpec::new(Family::BagStatistics, 0, "bag_stats_mean"),
        ClassifierSpec::new(Family::BagStatistics, 1, "bag_stats_minmax"),
        ClassifierSpec::new(Family::BagStatistics, 2, "bag_stats_meanminmax"),
        ClassifierSpec::new(Family::BagOfWords, 0, "bag_words_k10"),
        ClassifierSpec::new(Family::BagOfWords, 1, "bag_words_k25"),
        ClassifierSpec::new(Family::BagOfWords, 2, "bag_words_k50"),
        ClassifierSpec::new(Family::BagDissimilarity, 0, "bag_dissim_meanmin"),
        ClassifierSpec::new(Family::BagDissimilarity, 1, "bag_dissim_minmin"),
        ClassifierSpec::new(Family::BagDissimilarity, 2, "bag_dissim_meanmean"),
    ]
}

/// Tab-separated catalog manifest: display name, family, hyperparameters.
pub fn catalog_manifest() -> String {
    let mut out = String::new();
    for spec in catalog() {
        out.push_str(&spec.display_name);
        out.push('\t');
        out.push_str(spec.family.name());
        out.push('\t');
        out.push_str(&spec.hyperparams());
        out.push('\n');
    }
    out
}

/// Standardized training data shared by the family fitters.
pub(crate) struct TrainData {
    pub bags: Vec<Matrix>,
    pub labels: Vec<Label>,
    pub dim: usize,
}

#[derive(Clone, Debug)]
enum ModelKind {
    SimpleMil(LogisticModel),
    Concept(ConceptModel),
    Boost(BoostModel),
    Knn(CitationKnnModel),
    Svm(LinearSvm),
    Miles {
        prototypes: Matrix,
        sigma2: f64,
        model: LogisticModel,
    },
    Kernel(KernelModel),
    Stats {
        kind: StatKind,
        model: LogisticModel,
    },
    Words {
        vocab: Matrix,
        model: LogisticModel,
    },
    Dissim {
        train_bags: Vec<Matrix>,
        agg: DissimAgg,
        model: LogisticModel,
    },
}

/// A trained classifier. Immutable; scoring is deterministic and yields one
/// finite value per bag, higher meaning more positive.
#[derive(Clone, Debug)]
pub struct TrainedModel {
    spec: ClassifierSpec,
    feature_dim: usize,
    scaler: Standardizer,
    kind: ModelKind,
}

const ROLE_KMEANS: u64 = 0x4B4D_4541; // "KMEA"

/// Train one catalog entry on a dataset. Deterministic in
/// `(spec, train_set, seed)`; iteration caps guarantee a model is returned
/// for any valid two-class training set.
pub fn train(
    spec: &ClassifierSpec,
    train_set: &MilDataset,
    seed: u64,
) -> Result<TrainedModel, TrainError> {
    let has_pos = train_set.bags().iter().any(|b| b.label.is_positive());
    let has_neg = train_set.bags().iter().any(|b| !b.label.is_positive());
    if !has_pos || !has_neg {
        return Err(TrainError::SingleClassTrainingSet);
    }

    let dim = train_set.feature_dim();
    let scaler = Standardizer::fit(
        train_set
            .bags()
            .iter()
            .flat_map(|b| b.instances.rows_iter()),
        dim,
    );
    let train = TrainData {
        bags: train_set
            .bags()
            .iter()
            .map(|b| scaler.transform_bag(&b.instances))
            .collect(),
        labels: train_set.bags().iter().map(|b| b.label).collect(),
        dim,
    };
    let targets: Vec<f64> = train
        .labels
        .iter()
        .map(|l| if l.is_positive() { 1.0 } else { 0.0 })
        .collect();

    // trains the base learner on one vector per bag
    let bag_vector_model = |vectors: Vec<Vec<f64>>| -> LogisticModel {
        fit_logistic(
            &Matrix::from_rows(&vectors),
            &targets,
            Penalty::L2(L2_LAMBDA),
        )
    };

    let kind = match spec.family {
        Family::SimpleMil => {
            let mut rows = Vec::new();
            let mut ys = Vec::new();
            for (bag, y) in train.bags.iter().zip(targets.iter()) {
                for row in bag.rows_iter() {
                    rows.push(row.to_vec());
                    ys.push(*y);
                }
            }
            ModelKind::SimpleMil(fit_logistic(
                &Matrix::from_rows(&rows),
                &ys,
                Penalty::L2(L2_LAMBDA),
            ))
        }
        Family::DiverseDensity => ModelKind::Concept(fit_diverse_density(&train, seed)),
        Family::Emdd => ModelKind::Concept(fit_emdd(&train, seed)),
        Family::MilBoost => ModelKind::Boost(fit_milboost(&train)),
        Family::CitationKnn => {
            let (r, c) = CITATION_VARIANTS[spec.variant_id];
            ModelKind::Knn(CitationKnnModel::fit(
                train.bags.clone(),
                train.labels.clone(),
                r,
                c,
            ))
        }
        Family::MiSvm => ModelKind::Svm(fit_misvm(&train, MISVM_C[spec.variant_id])),
        Family::Miles => {
            let mut rows = Vec::new();
            for bag in &train.bags {
                for row in bag.rows_iter() {
                    rows.push(row.to_vec());
                }
            }
            let prototypes = Matrix::from_rows(&rows);
            let sigma2 = MILES_SIGMA_FACTOR[spec.variant_id] * dim as f64;
            let vectors: Vec<Vec<f64>> = train
                .bags
                .iter()
                .map(|b| prototype_vector(b, &prototypes, sigma2))
                .collect();
            let model = fit_logistic(
                &Matrix::from_rows(&vectors),
                &targets,
                Penalty::L1(L1_LAMBDA),
            );
            ModelKind::Miles {
                prototypes,
                sigma2,
                model,
            }
        }
        Family::MilKernel => {
            let gamma = KERNEL_GAMMA_FACTOR[spec.variant_id] / dim as f64;
            ModelKind::Kernel(fit_kernel_model(&train, gamma))
        }
        Family::BagStatistics => {
            let kind = [StatKind::Mean, StatKind::MinMax, StatKind::MeanMinMax]
                [spec.variant_id];
            let vectors: Vec<Vec<f64>> = train
                .bags
                .iter()
                .map(|b| bag_stats_vector(b, kind))
                .collect();
            ModelKind::Stats {
                kind,
                model: bag_vector_model(vectors),
            }
        }
        Family::BagOfWords => {
            let mut rows = Vec::new();
            for bag in &train.bags {
                for row in bag.rows_iter() {
                    rows.push(row.to_vec());
                }
            }
            let instances = Matrix::from_rows(&rows);
            let vocab = kmeans(
                &instances,
                BOW_K[spec.variant_id],
                &mut Stream::new(&[seed, ROLE_KMEANS, spec.variant_id as u64]),
            );
            let vectors: Vec<Vec<f64>> = train
                .bags
                .iter()
                .map(|b| bow_histogram(b, &vocab))
                .collect();
            ModelKind::Words {
                vocab,
                model: bag_vector_model(vectors),
            }
        }
        Family::BagDissimilarity => {
            let agg = [DissimAgg::MeanMin, DissimAgg::MinMin, DissimAgg::MeanMean]
                [spec.variant_id];
            let vectors: Vec<Vec<f64>> = train
                .bags
                .iter()
                .map(|b| dissim_vector(b, &train.bags, agg))
                .collect();
            ModelKind::Dissim {
                train_bags: train.bags.clone(),
                agg,
                model: bag_vector_model(vectors),
            }
        }
    };

    Ok(TrainedModel {
        spec: spec.clone(),
        feature_dim: dim,
        scaler,
        kind,
    })
}

impl TrainedModel {
    pub fn spec(&self) -> &ClassifierSpec {
        &self.spec
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Score bags in order; higher means more positive.
    pub fn score_bags(&self, bags: &[Bag]) -> Result<Vec<f64>, TrainError> {
        bags.iter()
            .map(|bag| {
                if bag.instances.ncols() != self.feature_dim {
                    return Err(TrainError::DimensionMismatch {
                        model: self.feature_dim,
                        bag: bag.instances.ncols(),
                    });
                }
                let std_bag = self.scaler.transform_bag(&bag.instances);
                Ok(self.score_std(&std_bag))
            })
            .collect()
    }

    fn score_std(&self, bag: &Matrix) -> f64 {
        match &self.kind {
            ModelKind::SimpleMil(model) => {
                let sum: f64 = bag.rows_iter().map(|row| model.prob(row)).sum();
                sum / bag.nrows() as f64
            }
            ModelKind::Concept(model) => model.bag_prob(bag),
            ModelKind::Boost(model) => model.bag_prob(bag),
            ModelKind::Knn(model) => model.score(bag),
            ModelKind::Svm(svm) => misvm_bag_score(svm, bag),
            ModelKind::Miles {
                prototypes,
                sigma2,
                model,
            } => model.prob(&prototype_vector(bag, prototypes, *sigma2)),
            ModelKind::Kernel(model) => model.score(bag),
            ModelKind::Stats { kind, model } => model.prob(&bag_stats_vector(bag, *kind)),
            ModelKind::Words { vocab, model } => model.prob(&bow_histogram(bag, vocab)),
            ModelKind::Dissim {
                train_bags,
                agg,
                model,
            } => model.prob(&dissim_vector(bag, train_bags, *agg)),
        }
    }

    /// Original-space concept location, for the concept-learning families.
    pub fn concept_location(&self) -> Option<Vec<f64>> {
        match &self.kind {
            ModelKind::Concept(model) => Some(self.scaler.inverse_point(&model.target)),
            _ => None,
        }
    }
}
