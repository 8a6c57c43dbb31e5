//! Datasets: in-memory representation, IDX image ingestion, SPT state
//! files, and CSV result emission.

mod idx;
mod results;
mod spt_file;

pub use idx::{downsample_area, images_to_dataset, load_idx_images, preprocess_images, RawImages, DOWNSAMPLE_RULE};
pub use results::{emit_results, CellKey, ResultTable, RunKey, SummaryRow};
pub use spt_file::{load_spt, save_spt, SPT_MAGIC};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{QnnError, Result};
use crate::spin_models::LambdaGrid;
use crate::statevec::StateVector;

/// Sample payload of a dataset.
#[derive(Clone, Debug)]
pub enum Samples {
    /// Classical feature vectors, one per sample.
    Features(Vec<Vec<f64>>),
    /// Quantum states handed to the classifier directly.
    States(Vec<StateVector>),
}

impl Samples {
    pub fn len(&self) -> usize {
        match self {
            Samples::Features(v) => v.len(),
            Samples::States(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn select(&self, idx: &[usize]) -> Samples {
        match self {
            Samples::Features(v) => Samples::Features(idx.iter().map(|&i| v[i].clone()).collect()),
            Samples::States(v) => Samples::States(idx.iter().map(|&i| v[i].clone()).collect()),
        }
    }
}

/// Cluster-Ising provenance carried by SPT datasets.
#[derive(Clone, Debug, PartialEq)]
pub struct SptMeta {
    pub num_sites: usize,
    pub grid: LambdaGrid,
    /// Coupling of every stored state, in sample order.
    pub lambdas: Vec<f64>,
    /// Spectral gap `E_1 − E_0` of every stored state.
    pub gaps: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct DatasetMeta {
    pub source: String,
    pub preprocessing: Vec<String>,
    pub seed: Option<u64>,
    pub spt: Option<SptMeta>,
}

/// Samples paired with binary class labels (`0 ↦ (1,0)`, `1 ↦ (0,1)`).
#[derive(Clone, Debug)]
pub struct LabeledDataset {
    pub samples: Samples,
    pub labels: Vec<usize>,
    pub meta: DatasetMeta,
}

/// One-hot vector of a binary class label.
pub fn one_hot(class: usize) -> [f64; 2] {
    if class == 0 {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    }
}

impl LabeledDataset {
    pub fn new(samples: Samples, labels: Vec<usize>, source: impl Into<String>) -> Result<Self> {
        if samples.len() != labels.len() {
            return Err(QnnError::DimensionMismatch {
                what: "label count",
                expected: samples.len(),
                actual: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&c| c > 1) {
            return Err(QnnError::InvalidArgument(format!("label {bad} is not binary")));
        }
        Ok(Self {
            samples,
            labels,
            meta: DatasetMeta {
                source: source.into(),
                ..DatasetMeta::default()
            },
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn one_hot(&self, i: usize) -> [f64; 2] {
        one_hot(self.labels[i])
    }

    pub fn features(&self) -> Option<&[Vec<f64>]> {
        match &self.samples {
            Samples::Features(v) => Some(v),
            Samples::States(_) => None,
        }
    }

    pub fn states(&self) -> Option<&[StateVector]> {
        match &self.samples {
            Samples::States(v) => Some(v),
            Samples::Features(_) => None,
        }
    }

    /// Sub-dataset of the given sample indices (in that order). SPT
    /// metadata is carried along for the selected samples.
    pub fn subset(&self, idx: &[usize]) -> LabeledDataset {
        let mut meta = self.meta.clone();
        if let Some(spt) = meta.spt.as_mut() {
            spt.lambdas = idx.iter().map(|&i| spt.lambdas[i]).collect();
            spt.gaps = idx.iter().map(|&i| spt.gaps[i]).collect();
        }
        LabeledDataset {
            samples: self.samples.select(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            meta,
        }
    }

    /// Seeded, class-stratified train/test split. Each part takes half of
    /// its samples from each class (the odd one from class 0).
    pub fn split_stratified(&self, num_train: usize, num_test: usize, seed: u64) -> Result<DatasetSplit> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (i, &c) in self.labels.iter().enumerate() {
            by_class[c].push(i);
        }
        for pool in by_class.iter_mut() {
            pool.shuffle(&mut rng);
        }
        let halves = |total: usize| [total.div_ceil(2), total / 2];
        let (tr, te) = (halves(num_train), halves(num_test));
        for c in 0..2 {
            let need = tr[c] + te[c];
            if by_class[c].len() < need {
                return Err(QnnError::InvalidArgument(format!(
                    "class {c} has {} samples, {need} requested",
                    by_class[c].len()
                )));
            }
        }
        let mut train_idx: Vec<usize> = Vec::with_capacity(num_train);
        let mut test_idx: Vec<usize> = Vec::with_capacity(num_test);
        for c in 0..2 {
            train_idx.extend(&by_class[c][..tr[c]]);
            test_idx.extend(&by_class[c][tr[c]..tr[c] + te[c]]);
        }
        train_idx.shuffle(&mut rng);
        test_idx.shuffle(&mut rng);
        let note = format!("stratified split train={num_train} test={num_test} seed={seed}");
        let mut train = self.subset(&train_idx);
        let mut test = self.subset(&test_idx);
        for part in [&mut train, &mut test] {
            part.meta.preprocessing.push(note.clone());
            part.meta.seed = Some(seed);
        }
        Ok(DatasetSplit { train, test })
    }
}

#[derive(Clone, Debug)]
pub struct DatasetSplit {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}

/// `x / ‖x‖₂`; the zero vector is returned unchanged.
pub fn l2_normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

/// Per-feature z-scoring (mean 0, standard deviation 1) across samples.
/// Constant features are only centered.
pub fn standardize(features: &mut [Vec<f64>]) {
    let Some(dim) = features.first().map(Vec::len) else {
        return;
    };
    let m = features.len() as f64;
    for k in 0..dim {
        let mean = features.iter().map(|x| x[k]).sum::<f64>() / m;
        let var = features.iter().map(|x| (x[k] - mean).powi(2)).sum::<f64>() / m;
        let sd = var.sqrt();
        for x in features.iter_mut() {
            x[k] -= mean;
            if sd > 0.0 {
                x[k] /= sd;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy(n: usize) -> LabeledDataset {
        let feats = (0..n).map(|i| vec![i as f64]).collect();
        let labels = (0..n).map(|i| i % 2).collect();
        LabeledDataset::new(Samples::Features(feats), labels, "toy").unwrap()
    }

    #[test]
    fn split_is_balanced_and_disjoint() {
        let ds = toy(40);
        let split = ds.split_stratified(10, 6, 3).unwrap();
        assert_eq!(split.train.len(), 10);
        assert_eq!(split.test.len(), 6);
        assert_eq!(split.train.labels.iter().filter(|&&c| c == 1).count(), 5);
        assert_eq!(split.test.labels.iter().filter(|&&c| c == 1).count(), 3);
        let tr: Vec<f64> = split.train.features().unwrap().iter().map(|x| x[0]).collect();
        let te: Vec<f64> = split.test.features().unwrap().iter().map(|x| x[0]).collect();
        assert!(tr.iter().all(|v| !te.contains(v)));
    }

    #[test]
    fn split_rejects_oversized_request() {
        assert!(toy(10).split_stratified(10, 2, 0).is_err());
    }

    #[test]
    fn label_count_mismatch() {
        let err = LabeledDataset::new(Samples::Features(vec![vec![1.0]]), vec![0, 1], "x");
        assert!(err.is_err());
        let err = LabeledDataset::new(Samples::Features(vec![vec![1.0]]), vec![2], "x");
        assert!(err.is_err());
    }

    #[test]
    fn standardize_centers_and_scales() {
        let mut f = vec![vec![1.0, 1.0], vec![3.0, 3.0]];
        standardize(&mut f);
        assert_eq!(f, vec![vec![-1.0, -1.0], vec![1.0, 1.0]]);
    }

    proptest! {
        // labels follow their samples through any split
        #[test]
        fn split_preserves_label_association(seed in any::<u64>(), n in 8usize..60) {
            let ds = toy(n);
            let half = n / 4;
            let split = ds.split_stratified(half, half, seed).unwrap();
            for part in [&split.train, &split.test] {
                for (x, &c) in part.features().unwrap().iter().zip(&part.labels) {
                    prop_assert_eq!(x[0] as usize % 2, c);
                }
            }
        }
    }
}
