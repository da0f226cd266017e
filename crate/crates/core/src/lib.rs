//! Characterize multiple-instance-learning (MIL) datasets by how a fixed zoo
//! of MIL classifiers behaves on them.
//!
//! The toolkit covers the full pipeline:
//!
//! 1. [`synth`] — seeded generators for six artificial MIL dataset families.
//! 2. [`data`] — the bag/instance data model, dataset CSV I/O, and metadata
//!    extraction.
//! 3. [`zoo`] — a fixed catalog of 22 MIL classifiers spanning instance-level,
//!    concept-learning, and bag-representation approaches.
//! 4. [`eval`] — stratified cross-validation producing one ROC curve and AUC
//!    per (dataset, classifier) cell.
//! 5. [`distance`] — dataset-to-dataset distances from metadata vectors, AUC
//!    vectors, and areas between ROC curves, plus classifier-diversity
//!    diagnostics.
//! 6. [`embed`] — classical 2D scaling of a distance matrix and out-of-sample
//!    placement of new datasets.
//!
//! Everything is deterministic: all randomness flows through counter-based
//! streams keyed by explicit 64-bit parts (see [`rng`]), so results are
//! independent of execution order and thread schedule.

pub mod data;
pub mod distance;
pub mod embed;
pub mod eval;
pub mod linalg;
pub mod rng;
pub mod synth;
pub mod zoo;

pub use data::{Bag, DataError, Label, MetaVector, MilDataset};
pub use distance::{DistanceError, DistanceMatrix};
pub use embed::{Embedding2D, EmbedError};
pub use eval::{EvalError, EvalMatrix, RocCurve};
pub use linalg::Matrix;
pub use synth::{GenError, GenKind, GenParams, GenSpec};
pub use zoo::{ClassifierSpec, Family, TrainError, TrainedModel};
