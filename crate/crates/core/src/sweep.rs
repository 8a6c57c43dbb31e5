//! Dataset selection and hyperparameter sweeps: the Cartesian product of
//! depths × entanglers × scales × evolution times, repeated over seeds,
//! run concurrently and written out as CSV tables.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::ansatz::{build_classifier, EntKind, Entangler};
use crate::data::{
    emit_results, images_to_dataset, load_idx_images, load_spt, CellKey, DatasetSplit, LabeledDataset, ResultTable,
    RunKey, Samples,
};
use crate::encoding::{fix_global_phase, AmplitudeEncoding, BlockEncoding, Encoding};
use crate::error::{QnnError, Result};
use crate::objective::{default_measured_qubit, GradientMethod, Hypothesis, LossKind};
use crate::spin_models::{make_spt_dataset, HamiltonianSpec, LambdaGrid};
use crate::trainer::{RunRecord, TrainConfig};

/// Stride between the seeds of consecutive cells.
pub const CELL_SEED_STRIDE: u64 = 10007;

/// Environment variable naming the dataset directory (default `./data`).
pub const DATA_DIR_ENV: &str = "QNN_DATA_DIR";

/// Dataset directory from [`DATA_DIR_ENV`], falling back to `./data`.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"))
}

#[derive(Clone, Debug, PartialEq)]
pub enum DatasetSelector {
    /// MNIST digits 1 vs 9.
    Mnist,
    /// FashionMNIST T-shirt (0) vs ankle boot (9).
    Fashion,
    /// Cluster-Ising ground states on `N` sites, generated on the default grid.
    Spt(usize),
    /// A saved `QNNSPT1` file.
    SptFile(PathBuf),
}

impl DatasetSelector {
    pub fn name(&self) -> String {
        match self {
            DatasetSelector::Mnist => "mnist".into(),
            DatasetSelector::Fashion => "fashion".into(),
            DatasetSelector::Spt(n) => format!("spt-{n}"),
            DatasetSelector::SptFile(p) => p.display().to_string(),
        }
    }

    /// Register size used for this dataset by default.
    pub fn default_qubits(&self) -> Option<usize> {
        match self {
            DatasetSelector::Mnist | DatasetSelector::Fashion => Some(10),
            DatasetSelector::Spt(n) => Some(*n),
            DatasetSelector::SptFile(_) => None,
        }
    }
}

impl std::str::FromStr for DatasetSelector {
    type Err = QnnError;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "mnist" => return Ok(DatasetSelector::Mnist),
            "fashion" | "fashion-mnist" | "fashionmnist" => return Ok(DatasetSelector::Fashion),
            _ => {}
        }
        if let Some(n) = lower.strip_prefix("spt-") {
            if let Ok(n) = n.parse() {
                return Ok(DatasetSelector::Spt(n));
            }
        }
        let path = PathBuf::from(s);
        if path.extension().is_some() || path.exists() {
            return Ok(DatasetSelector::SptFile(path));
        }
        Err(QnnError::InvalidArgument(format!(
            "unknown dataset `{s}` (expected mnist, fashion, spt-N, or a QNNSPT1 file path)"
        )))
    }
}

/// A dataset loaded once and split per run.
#[derive(Clone, Debug)]
pub enum PreparedData {
    /// Two-class image features; the test split comes from the held-out files.
    Images { train: LabeledDataset, test: LabeledDataset },
    States(LabeledDataset),
}

impl PreparedData {
    pub fn load(selector: &DatasetSelector, data_dir: &Path) -> Result<Self> {
        let images = |dir: &str, classes: (u8, u8), name: &str| -> Result<Self> {
            let d = data_dir.join(dir);
            let train = load_idx_images(&d.join("train-images-idx3-ubyte"), &d.join("train-labels-idx1-ubyte"))?;
            let test = load_idx_images(&d.join("t10k-images-idx3-ubyte"), &d.join("t10k-labels-idx1-ubyte"))?;
            Ok(PreparedData::Images {
                train: images_to_dataset(&train, classes, name)?,
                test: images_to_dataset(&test, classes, name)?,
            })
        };
        match selector {
            DatasetSelector::Mnist => images("mnist", (1, 9), "mnist"),
            DatasetSelector::Fashion => images("fashion", (0, 9), "fashion"),
            DatasetSelector::Spt(n) => Ok(PreparedData::States(make_spt_dataset(*n, LambdaGrid::default())?)),
            DatasetSelector::SptFile(p) => Ok(PreparedData::States(load_spt(p, None)?)),
        }
    }

    pub fn num_qubits_hint(&self) -> Option<usize> {
        match self {
            PreparedData::States(ds) => ds.states().and_then(|s| s.first()).map(|s| s.num_qubits()),
            PreparedData::Images { .. } => None,
        }
    }

    pub fn split(&self, num_train: usize, num_test: usize, seed: u64) -> Result<DatasetSplit> {
        match self {
            PreparedData::Images { train, test } => Ok(DatasetSplit {
                train: train.split_stratified(num_train, 0, seed)?.train,
                test: test.split_stratified(0, num_test, seed)?.test,
            }),
            PreparedData::States(ds) => ds.split_stratified(num_train, num_test, seed),
        }
    }
}

/// Appends `num_ones` ones to every feature vector.
pub fn pad_with_ones(ds: &mut LabeledDataset, num_ones: usize) -> Result<()> {
    match &mut ds.samples {
        Samples::Features(f) => {
            for x in f.iter_mut() {
                *x = fix_global_phase(x, num_ones);
            }
            ds.meta.preprocessing.push(format!("appended {num_ones} ones"));
            Ok(())
        }
        Samples::States(_) => Err(QnnError::InvalidArgument(
            "global-phase padding applies to feature vectors only".into(),
        )),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingMode {
    #[default]
    Amplitude,
    Block,
}

impl EncodingMode {
    pub fn name(self) -> &'static str {
        match self {
            EncodingMode::Amplitude => "amplitude",
            EncodingMode::Block => "block",
        }
    }
}

impl std::str::FromStr for EncodingMode {
    type Err = QnnError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "amplitude" => Ok(EncodingMode::Amplitude),
            "block" => Ok(EncodingMode::Block),
            other => Err(QnnError::InvalidArgument(format!("unknown encoding `{other}`"))),
        }
    }
}

/// Entangler axis value; analog times come from the separate time axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntChoice {
    Digital(EntKind),
    Analog,
}

impl EntChoice {
    pub fn name(self) -> &'static str {
        match self {
            EntChoice::Digital(k) => k.name(),
            EntChoice::Analog => "analog",
        }
    }
}

impl std::str::FromStr for EntChoice {
    type Err = QnnError;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("analog") {
            Ok(EntChoice::Analog)
        } else {
            s.parse().map(EntChoice::Digital)
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub dataset: DatasetSelector,
    pub encoding: EncodingMode,
    /// Register size; `None` picks the dataset default.
    pub num_qubits: Option<usize>,
    pub depths: Vec<usize>,
    pub ents: Vec<EntChoice>,
    /// Block-encoding scale factors (ignored in amplitude mode).
    pub scales: Vec<f64>,
    /// Analog evolution times (used by `EntChoice::Analog` only).
    pub t_evos: Vec<f64>,
    pub seeds: usize,
    pub seed_base: u64,
    /// 0-based readout qubit; `None` for the middle qubit.
    pub measure_qubit: Option<usize>,
    pub num_train: usize,
    pub num_test: usize,
    /// Ones appended to each feature vector before encoding (0 = none).
    pub global_phase_ones: usize,
    pub train: TrainConfig,
    pub table: String,
    pub out_dir: PathBuf,
    pub data_dir: PathBuf,
    pub jobs: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            dataset: DatasetSelector::Mnist,
            encoding: EncodingMode::Amplitude,
            num_qubits: None,
            depths: vec![1],
            ents: vec![EntChoice::Digital(EntKind::Cx)],
            scales: vec![1.0],
            t_evos: vec![1.0],
            seeds: 1,
            seed_base: 0,
            measure_qubit: None,
            num_train: 500,
            num_test: 100,
            global_phase_ones: 0,
            train: TrainConfig::default(),
            table: "sweep".into(),
            out_dir: PathBuf::from("results"),
            data_dir: default_data_dir(),
            jobs: 1,
        }
    }
}

/// One hyperparameter setting.
#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub depth: usize,
    pub ent: EntChoice,
    pub scale: Option<f64>,
    pub t_evo: Option<f64>,
}

/// Warnings raised by [`SweepSpec::validate`] for ignored settings.
pub type Warnings = Vec<String>;

impl SweepSpec {
    pub fn validate(&self) -> Result<Warnings> {
        let mut warnings = Vec::new();
        let usage = |m: &str| Err(QnnError::InvalidArgument(m.to_string()));
        if self.depths.is_empty() || self.ents.is_empty() {
            return usage("depth and entangler axes must be nonempty");
        }
        if self.depths.contains(&0) {
            return usage("depths must be at least 1");
        }
        if self.seeds == 0 {
            return usage("at least one seed per cell is required");
        }
        if self.train.iterations == 0 {
            return usage("iterations must be at least 1");
        }
        let analog = self.ents.contains(&EntChoice::Analog);
        if analog && self.t_evos.is_empty() {
            return usage("analog entangler needs at least one evolution time");
        }
        if self.t_evos.iter().any(|t| !(*t >= 0.0)) {
            return usage("evolution times must be non-negative");
        }
        match self.encoding {
            EncodingMode::Block if self.scales.is_empty() => return usage("block encoding needs at least one scale"),
            EncodingMode::Amplitude if self.scales != [1.0] && !self.scales.is_empty() => {
                warnings.push("scale has no effect with amplitude encoding; ignored".to_string())
            }
            _ => {}
        }
        if self.jobs == 0 {
            return usage("jobs must be at least 1");
        }
        Ok(warnings)
    }

    /// Cells in table order: depth-major, then entangler, scale, time.
    pub fn cells(&self) -> Vec<Cell> {
        let scales: Vec<Option<f64>> = match self.encoding {
            EncodingMode::Block => self.scales.iter().copied().map(Some).collect(),
            EncodingMode::Amplitude => vec![None],
        };
        let mut cells = Vec::new();
        for &depth in &self.depths {
            for &ent in &self.ents {
                let times: Vec<Option<f64>> = match ent {
                    EntChoice::Analog => self.t_evos.iter().copied().map(Some).collect(),
                    EntChoice::Digital(_) => vec![None],
                };
                for &scale in &scales {
                    for &t_evo in &times {
                        cells.push(Cell { depth, ent, scale, t_evo });
                    }
                }
            }
        }
        cells
    }

    pub fn run_seed(&self, cell_index: usize, rep: usize) -> u64 {
        self.seed_base + cell_index as u64 * CELL_SEED_STRIDE + rep as u64
    }

    fn cell_key(&self, cell: &Cell) -> CellKey {
        CellKey {
            dataset: self.dataset.name(),
            encoding: self.encoding.name().to_string(),
            ent_kind: cell.ent.name().to_string(),
            depth: cell.depth,
            scale: cell.scale,
            t_evo: cell.t_evo,
        }
    }

    /// Hypothesis for `cell` on an `n`-qubit register.
    pub fn hypothesis(&self, cell: &Cell, n: usize) -> Result<Hypothesis> {
        let ent = match cell.ent {
            EntChoice::Digital(k) => Entangler::Digital(k),
            EntChoice::Analog => Entangler::Analog {
                hamiltonian: HamiltonianSpec::aubry_andre(n, 1.0),
                t: cell.t_evo.unwrap_or(1.0),
            },
        };
        let template = build_classifier(n, cell.depth, &ent)?;
        let encoding = match self.encoding {
            EncodingMode::Amplitude => Encoding::Amplitude(AmplitudeEncoding::new(n)),
            EncodingMode::Block => Encoding::Block(BlockEncoding {
                scale: cell.scale.unwrap_or(1.0),
                pad_to: template.num_params(),
            }),
        };
        let q = self.measure_qubit.unwrap_or_else(|| default_measured_qubit(n));
        Hypothesis::new(template, encoding, q)
    }
}

/// Everything a sweep produced.
pub struct SweepOutcome {
    pub table: ResultTable,
    pub runs: Vec<(RunKey, std::result::Result<RunRecord, String>)>,
}

/// One seeded run of `cell` on `data`.
pub fn run_one(spec: &SweepSpec, data: &PreparedData, cell: &Cell, seed: u64) -> Result<RunRecord> {
    let n = spec
        .num_qubits
        .or_else(|| data.num_qubits_hint())
        .or_else(|| spec.dataset.default_qubits())
        .ok_or_else(|| QnnError::InvalidArgument("cannot infer the register size".into()))?;
    let h = spec.hypothesis(cell, n)?;
    let DatasetSplit { mut train, mut test } = data.split(spec.num_train, spec.num_test, seed)?;
    if spec.global_phase_ones > 0 {
        pad_with_ones(&mut train, spec.global_phase_ones)?;
        pad_with_ones(&mut test, spec.global_phase_ones)?;
    }
    let config = TrainConfig {
        seed,
        ..spec.train.clone()
    };
    crate::trainer::train(&h, &train, &test, &config)
}

/// Runs every (cell, seed) pair on up to `spec.jobs` threads and writes
/// `runs.csv` and `summary_<table>.csv` under `spec.out_dir`. A failing run
/// is recorded against its cell; the sweep carries on.
pub fn run_sweep(spec: &SweepSpec, data: &PreparedData) -> Result<SweepOutcome> {
    spec.validate()?;
    let cells = spec.cells();
    let jobs: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..spec.seeds).map(move |r| (c, spec.run_seed(c, r))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.jobs)
        .build()
        .map_err(|e| QnnError::InvalidArgument(format!("thread pool: {e}")))?;
    let runs: Vec<(RunKey, std::result::Result<RunRecord, String>)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(c, seed)| {
                let key = RunKey {
                    cell: spec.cell_key(&cells[c]),
                    seed,
                };
                let outcome = match run_one(spec, data, &cells[c], seed) {
                    Ok(r) => match &r.aborted {
                        Some(reason) => Err(reason.clone()),
                        None => Ok(r),
                    },
                    Err(e) => Err(e.to_string()),
                };
                (key, outcome)
            })
            .collect()
    });
    let keys: Vec<CellKey> = cells.iter().map(|c| spec.cell_key(c)).collect();
    let table = emit_results(&runs, &keys, &spec.table, &spec.out_dir)?;
    Ok(SweepOutcome { table, runs })
}

/// Optional sweep settings read from a TOML file. Every key is optional;
/// explicitly given command-line flags take precedence.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub dataset: Option<String>,
    pub encoding: Option<EncodingMode>,
    pub qubits: Option<usize>,
    pub depths: Option<Vec<usize>>,
    pub ents: Option<Vec<String>>,
    pub scales: Option<Vec<f64>>,
    pub t_evos: Option<Vec<f64>>,
    pub seeds: Option<usize>,
    pub seed_base: Option<u64>,
    /// 1-based, like the command-line flag.
    pub measure_qubit: Option<usize>,
    pub num_train: Option<usize>,
    pub num_test: Option<usize>,
    pub global_phase_ones: Option<usize>,
    pub lr: Option<f64>,
    pub batch: Option<usize>,
    pub iters: Option<usize>,
    pub eval_every: Option<usize>,
    pub loss: Option<String>,
    pub grad: Option<String>,
    pub table: Option<String>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| QnnError::InvalidArgument(format!("sweep file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| QnnError::io(path, e))?;
        toml::from_str(&text).map_err(|e| QnnError::format(path, e.to_string()))
    }

    /// Overwrites the fields of `spec` that this file sets.
    pub fn apply(&self, spec: &mut SweepSpec) -> Result<()> {
        if let Some(d) = &self.dataset {
            spec.dataset = d.parse()?;
        }
        if let Some(e) = self.encoding {
            spec.encoding = e;
        }
        if self.qubits.is_some() {
            spec.num_qubits = self.qubits;
        }
        if let Some(v) = &self.depths {
            spec.depths = v.clone();
        }
        if let Some(v) = &self.ents {
            spec.ents = v.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        }
        if let Some(v) = &self.scales {
            spec.scales = v.clone();
        }
        if let Some(v) = &self.t_evos {
            spec.t_evos = v.clone();
        }
        if let Some(v) = self.seeds {
            spec.seeds = v;
        }
        if let Some(v) = self.seed_base {
            spec.seed_base = v;
        }
        if let Some(q) = self.measure_qubit {
            spec.measure_qubit = Some(one_based(q)?);
        }
        if let Some(v) = self.num_train {
            spec.num_train = v;
        }
        if let Some(v) = self.num_test {
            spec.num_test = v;
        }
        if let Some(v) = self.global_phase_ones {
            spec.global_phase_ones = v;
        }
        if let Some(v) = self.lr {
            spec.train.learning_rate = v;
        }
        if let Some(v) = self.batch {
            spec.train.batch_size = v;
        }
        if let Some(v) = self.iters {
            spec.train.iterations = v;
        }
        if let Some(v) = self.eval_every {
            spec.train.eval_every = v;
        }
        if let Some(v) = &self.loss {
            spec.train.loss = v.parse::<LossKind>()?;
        }
        if let Some(v) = &self.grad {
            spec.train.gradient = v.parse::<GradientMethod>()?;
        }
        if let Some(v) = &self.table {
            spec.table = v.clone();
        }
        if let Some(v) = &self.out {
            spec.out_dir = v.clone();
        }
        if let Some(v) = self.jobs {
            spec.jobs = v;
        }
        Ok(())
    }
}

/// Converts a 1-based qubit number to a 0-based index.
pub fn one_based(q: usize) -> Result<usize> {
    q.checked_sub(1)
        .ok_or_else(|| QnnError::InvalidArgument("qubit numbers start at 1".into()))
}
