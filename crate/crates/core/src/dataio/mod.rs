//! Dataset parsing, validation holdouts, and continual-learning curricula.
//!
//! Raw pixel datasets (IDX and the CIFAR binary batches) are scaled to `[0, 1]`
//! by dividing by 255. Precomputed feature files (NNAF) are consumed as-is.

mod cifar;
mod curriculum;
mod idx;
mod nnaf;
mod split;
pub mod synthetic;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{NnaError, Result};

pub use cifar::{load_cifar_batches, parse_cifar, CifarKind};
pub use curriculum::{
    build_curriculum, consecutive_groups, Curriculum, Sampling, Scenario, TaskSpec,
};
pub use idx::{load_idx, parse_idx};
pub use nnaf::{load_feature_file, read_features, write_feature_file, write_features, FeatureFile};
pub use split::{split_validation, split_validation_stratified};

/// One labelled input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f32>,
    pub label: usize,
}

impl Sample {
    pub fn new(features: Vec<f32>, label: usize) -> Self {
        Sample { features, label }
    }
}

/// Train / test / validation partitions of one dataset.
#[derive(Debug, Clone, Default)]
pub struct DatasetSplit {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    pub validation: Vec<Sample>,
    pub class_count: usize,
    pub input_dim: usize,
}

impl DatasetSplit {
    /// Assemble a split, checking that dimensions and labels are consistent.
    pub fn new(train: Vec<Sample>, test: Vec<Sample>, class_count: usize) -> Result<Self> {
        let input_dim = train
            .first()
            .or_else(|| test.first())
            .map(|s| s.features.len())
            .unwrap_or(0);
        let split = DatasetSplit {
            train,
            test,
            validation: Vec::new(),
            class_count,
            input_dim,
        };
        split.validate()?;
        Ok(split)
    }

    pub fn validate(&self) -> Result<()> {
        for s in self.train.iter().chain(&self.test).chain(&self.validation) {
            if s.features.len() != self.input_dim {
                return Err(NnaError::DimensionMismatch {
                    expected: self.input_dim,
                    actual: s.features.len(),
                });
            }
            if s.label >= self.class_count {
                return Err(NnaError::LabelOutOfRange {
                    label: s.label,
                    classes: self.class_count,
                });
            }
        }
        Ok(())
    }

    /// Move `holdout` training samples into the validation partition.
    pub fn with_validation(mut self, holdout: usize, seed: u64) -> Result<Self> {
        let train = std::mem::take(&mut self.train);
        let (train, validation) = split_validation(train, holdout, seed)?;
        self.train = train;
        self.validation = validation;
        Ok(self)
    }

    /// Use the validation partition as the evaluation set. Search objectives
    /// train on the reduced training set and score on this view.
    pub fn validation_view(&self) -> DatasetSplit {
        DatasetSplit {
            train: self.train.clone(),
            test: self.validation.clone(),
            validation: Vec::new(),
            class_count: self.class_count,
            input_dim: self.input_dim,
        }
    }
}

/// Named datasets with a conventional on-disk layout under a data directory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    Mnist,
    FashionMnist,
    Emnist,
    Cifar10,
    Cifar100,
    /// Precomputed NNAF feature files (`train.nnaf`, `test.nnaf`).
    Features,
}

impl DatasetKind {
    pub fn name(self) -> &'static str {
        match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::FashionMnist => "fashion-mnist",
            DatasetKind::Emnist => "emnist",
            DatasetKind::Cifar10 => "cifar10",
            DatasetKind::Cifar100 => "cifar100",
            DatasetKind::Features => "features",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "mnist" => DatasetKind::Mnist,
            "fashion-mnist" | "fmnist" | "f-mnist" => DatasetKind::FashionMnist,
            "emnist" => DatasetKind::Emnist,
            "cifar10" | "cifar-10" => DatasetKind::Cifar10,
            "cifar100" | "cifar-100" => DatasetKind::Cifar100,
            "features" => DatasetKind::Features,
            _ => return None,
        })
    }

    /// Directory (relative to the data root) holding this dataset's files.
    pub fn default_dir(self) -> &'static str {
        match self {
            DatasetKind::Cifar10 => "cifar-10-batches-bin",
            DatasetKind::Cifar100 => "cifar-100-binary",
            other => other.name(),
        }
    }
}

/// Load a named dataset from `dir`, which holds the files directly:
///
/// * IDX datasets: `train-images-idx3-ubyte`, `train-labels-idx1-ubyte`,
///   `t10k-images-idx3-ubyte`, `t10k-labels-idx1-ubyte`
/// * CIFAR-10: `data_batch_{1..5}.bin`, `test_batch.bin`
/// * CIFAR-100: `train.bin`, `test.bin`
/// * features: `train.nnaf`, `test.nnaf`
pub fn load_dataset(kind: DatasetKind, dir: &Path) -> Result<DatasetSplit> {
    if !dir.exists() {
        return Err(NnaError::MissingPath(dir.to_path_buf()));
    }
    match kind {
        DatasetKind::Mnist | DatasetKind::FashionMnist | DatasetKind::Emnist => {
            let train = load_idx(
                &dir.join("train-images-idx3-ubyte"),
                &dir.join("train-labels-idx1-ubyte"),
            )?;
            let test = load_idx(
                &dir.join("t10k-images-idx3-ubyte"),
                &dir.join("t10k-labels-idx1-ubyte"),
            )?;
            let classes = train
                .iter()
                .chain(&test)
                .map(|s| s.label + 1)
                .max()
                .unwrap_or(0);
            DatasetSplit::new(train, test, classes)
        }
        DatasetKind::Cifar10 => {
            let train_files: Vec<PathBuf> = (1..=5)
                .map(|i| dir.join(format!("data_batch_{i}.bin")))
                .collect();
            let train = load_cifar_batches(&train_files, CifarKind::Cifar10)?;
            let test = load_cifar_batches(&[dir.join("test_batch.bin")], CifarKind::Cifar10)?;
            DatasetSplit::new(train, test, 10)
        }
        DatasetKind::Cifar100 => {
            let train = load_cifar_batches(&[dir.join("train.bin")], CifarKind::Cifar100)?;
            let test = load_cifar_batches(&[dir.join("test.bin")], CifarKind::Cifar100)?;
            DatasetSplit::new(train, test, 100)
        }
        DatasetKind::Features => {
            let train = load_feature_file(&dir.join("train.nnaf"))?;
            let test = load_feature_file(&dir.join("test.nnaf"))?;
            if train.feature_dim != test.feature_dim {
                return Err(NnaError::DimensionMismatch {
                    expected: train.feature_dim,
                    actual: test.feature_dim,
                });
            }
            let classes = train.class_count.max(test.class_count);
            DatasetSplit::new(train.samples, test.samples, classes)
        }
    }
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| NnaError::io(path, e))
}
