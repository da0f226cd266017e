//! MIL data model: labeled bags of instances, dataset CSV I/O, and metadata
//! extraction.
//!
//! A dataset is an ordered list of bags; each bag is a small matrix whose
//! rows are instances, plus a binary label. All types are immutable after
//! construction and validated on construction.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::linalg::Matrix;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed row: {msg}")]
    MalformedRow { line: usize, msg: String },
    #[error("line {line}: inconsistent bag label for bag {bag}")]
    InconsistentBagLabel { line: usize, bag: String },
    #[error("line {line}: expected {expected} columns, found {found}")]
    InconsistentColumns {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("dataset {name}: no {class} bags")]
    MissingClass { name: String, class: &'static str },
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("meta normalization needs at least 2 vectors, got {0}")]
    TooFewMeta(usize),
}

/// Binary bag label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    pub fn is_positive(self) -> bool {
        matches!(self, Label::Positive)
    }

    pub fn as_int(self) -> u8 {
        match self {
            Label::Negative => 0,
            Label::Positive => 1,
        }
    }

    pub fn from_int(v: u8) -> Option<Label> {
        match v {
            0 => Some(Label::Negative),
            1 => Some(Label::Positive),
            _ => None,
        }
    }
}

/// One bag: an identifier, an `n_i x d` instance matrix, and a label.
#[derive(Clone, Debug, PartialEq)]
pub struct Bag {
    pub id: String,
    pub instances: Matrix,
    pub label: Label,
}

impl Bag {
    pub fn new(id: impl Into<String>, instances: Matrix, label: Label) -> Self {
        Bag {
            id: id.into(),
            instances,
            label,
        }
    }

    pub fn size(&self) -> usize {
        self.instances.nrows()
    }
}

/// A named, validated collection of bags over a fixed feature dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct MilDataset {
    name: String,
    bags: Vec<Bag>,
    feature_dim: usize,
}

impl MilDataset {
    /// Validates every invariant: nonempty bags of consistent dimension with
    /// finite features, unique bag ids, and both classes present.
    pub fn new(name: impl Into<String>, bags: Vec<Bag>) -> Result<Self, DataError> {
        let name = name.into();
        if bags.is_empty() {
            return Err(DataError::Invalid(format!("dataset {name}: no bags")));
        }
        let feature_dim = bags[0].instances.ncols();
        if feature_dim == 0 {
            return Err(DataError::Invalid(format!("dataset {name}: zero features")));
        }
        let mut seen = HashMap::new();
        for bag in &bags {
            if bag.instances.nrows() == 0 {
                return Err(DataError::Invalid(format!(
                    "dataset {name}: bag {} is empty",
                    bag.id
                )));
            }
            if bag.instances.ncols() != feature_dim {
                return Err(DataError::Invalid(format!(
                    "dataset {name}: bag {} has {} features, expected {feature_dim}",
                    bag.id,
                    bag.instances.ncols()
                )));
            }
            if bag.instances.data().iter().any(|v| !v.is_finite()) {
                return Err(DataError::Invalid(format!(
                    "dataset {name}: bag {} contains a non-finite feature",
                    bag.id
                )));
            }
            if bag.id.is_empty() || bag.id.chars().any(|c| c.is_control() || c == ',') {
                return Err(DataError::Invalid(format!(
                    "dataset {name}: bag id {:?} must be printable and comma-free",
                    bag.id
                )));
            }
            if seen.insert(bag.id.clone(), ()).is_some() {
                return Err(DataError::Invalid(format!(
                    "dataset {name}: duplicate bag id {}",
                    bag.id
                )));
            }
        }
        if !bags.iter().any(|b| b.label.is_positive()) {
            return Err(DataError::MissingClass {
                name,
                class: "positive",
            });
        }
        if !bags.iter().any(|b| !b.label.is_positive()) {
            return Err(DataError::MissingClass {
                name,
                class: "negative",
            });
        }
        Ok(MilDataset {
            name,
            bags,
            feature_dim,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bags(&self) -> &[Bag] {
        &self.bags
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn n_instances(&self) -> usize {
        self.bags.iter().map(Bag::size).sum()
    }

    /// Same bags under a different name.
    pub fn renamed(&self, name: impl Into<String>) -> MilDataset {
        MilDataset {
            name: name.into(),
            bags: self.bags.clone(),
            feature_dim: self.feature_dim,
        }
    }
}

/// The six metadata counts describing a dataset, in the fixed column order
/// (positive bags, negative bags, features, total instances, min bag size,
/// max bag size).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MetaVector {
    pub n_pos_bags: usize,
    pub n_neg_bags: usize,
    pub n_features: usize,
    pub n_total_instances: usize,
    pub min_bag_size: usize,
    pub max_bag_size: usize,
}

impl MetaVector {
    pub fn as_array(&self) -> [f64; 6] {
        [
            self.n_pos_bags as f64,
            self.n_neg_bags as f64,
            self.n_features as f64,
            self.n_total_instances as f64,
            self.min_bag_size as f64,
            self.max_bag_size as f64,
        ]
    }
}

/// Extract the six metadata counts from a dataset.
pub fn meta_vector(dataset: &MilDataset) -> MetaVector {
    let sizes: Vec<usize> = dataset.bags().iter().map(Bag::size).collect();
    MetaVector {
        n_pos_bags: dataset
            .bags()
            .iter()
            .filter(|b| b.label.is_positive())
            .count(),
        n_neg_bags: dataset
            .bags()
            .iter()
            .filter(|b| !b.label.is_positive())
            .count(),
        n_features: dataset.feature_dim(),
        n_total_instances: sizes.iter().sum(),
        min_bag_size: sizes.iter().copied().min().unwrap_or(0),
        max_bag_size: sizes.iter().copied().max().unwrap_or(0),
    }
}

/// Standardize a collection of meta vectors to per-column zero mean and unit
/// sample standard deviation (n-1 denominator). Constant columns map to all
/// zeros instead of dividing by zero.
pub fn normalize_meta(collection: &[MetaVector]) -> Result<Matrix, DataError> {
    let n = collection.len();
    if n < 2 {
        return Err(DataError::TooFewMeta(n));
    }
    let rows: Vec<[f64; 6]> = collection.iter().map(MetaVector::as_array).collect();
    let mut out = Matrix::zeros(n, 6);
    for c in 0..6 {
        let mean = rows.iter().map(|r| r[c]).sum::<f64>() / n as f64;
        let var = rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std = var.sqrt();
        if std > 0.0 {
            for (i, r) in rows.iter().enumerate() {
                out.set(i, c, (r[c] - mean) / std);
            }
        }
    }
    Ok(out)
}

/// Load a dataset from the flat CSV format: header `bag_id,label,f1,...,fd`,
/// then one instance per row. Rows of one bag need not be contiguous but must
/// agree on the label; bag order follows first appearance.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<MilDataset, DataError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    parse_dataset(&text, &name)
}

/// Parse the dataset CSV format from a string. `name` becomes the dataset name.
pub fn parse_dataset(text: &str, name: &str) -> Result<MilDataset, DataError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| DataError::MalformedRow {
        line: 1,
        msg: "empty file".into(),
    })?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "bag_id" || cols[1] != "label" {
        return Err(DataError::MalformedRow {
            line: 1,
            msg: "header must be bag_id,label,f1,...,fd".into(),
        });
    }
    let dim = cols.len() - 2;

    // bag id -> (order index, label, instance rows)
    let mut order: Vec<String> = Vec::new();
    let mut by_id: HashMap<String, (Label, Vec<Vec<f64>>)> = HashMap::new();

    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split(',').collect();
        if fields.len() != dim + 2 {
            return Err(DataError::InconsistentColumns {
                line,
                expected: dim + 2,
                found: fields.len(),
            });
        }
        let id = fields[0];
        if id.is_empty() {
            return Err(DataError::MalformedRow {
                line,
                msg: "empty bag id".into(),
            });
        }
        let label = match fields[1] {
            "0" => Label::Negative,
            "1" => Label::Positive,
            other => {
                return Err(DataError::MalformedRow {
                    line,
                    msg: format!("label must be 0 or 1, found {other:?}"),
                })
            }
        };
        let mut row = Vec::with_capacity(dim);
        for f in &fields[2..] {
            let v: f64 = f.parse().map_err(|_| DataError::MalformedRow {
                line,
                msg: format!("bad feature value {f:?}"),
            })?;
            if !v.is_finite() {
                return Err(DataError::MalformedRow {
                    line,
                    msg: format!("non-finite feature value {f:?}"),
                });
            }
            row.push(v);
        }
        match by_id.get_mut(id) {
            Some((existing, rows)) => {
                if *existing != label {
                    return Err(DataError::InconsistentBagLabel {
                        line,
                        bag: id.to_string(),
                    });
                }
                rows.push(row);
            }
            None => {
                order.push(id.to_string());
                by_id.insert(id.to_string(), (label, vec![row]));
            }
        }
    }

    let mut bags = Vec::with_capacity(order.len());
    for id in order {
        let (label, rows) = by_id.remove(&id).expect("collected above");
        bags.push(Bag::new(id, Matrix::from_rows(&rows), label));
    }
    MilDataset::new(name, bags)
}

/// Serialize a dataset to the CSV format. Feature values use the shortest
/// representation that parses back to the identical bits.
pub fn format_dataset(dataset: &MilDataset) -> String {
    let mut out = String::new();
    out.push_str("bag_id,label");
    for i in 1..=dataset.feature_dim() {
        let _ = write!(out, ",f{i}");
    }
    out.push('\n');
    for bag in dataset.bags() {
        for row in bag.instances.rows_iter() {
            let _ = write!(out, "{},{}", bag.id, bag.label.as_int());
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
    }
    out
}

/// Write a dataset to `path` in the CSV format.
pub fn save_dataset(dataset: &MilDataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    std::fs::write(path, format_dataset(dataset)).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })
}
