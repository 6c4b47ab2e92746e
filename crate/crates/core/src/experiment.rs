//! End-to-end experiments: single runs, grid search over the ansatz
//! hyperparameters, and kernel convergence tables.
//!
//! A run goes load → extract digits → split → chi-squared selection → sample
//! basis → map train → train → map test → predict → score.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::ansatz::{self, AnsatzParams};
use crate::dataio::{self, TaskDataset};
use crate::featmap::{self, MappedFeatures};
use crate::linclf::{self, LabeledFeatures, TrainParams};
use crate::par::Execution;
use crate::rng;
use crate::{Error, Result};

/// Environment variable overriding the default data directory.
pub const DATA_DIR_ENV: &str = "QRF_DATA_DIR";

pub const RESULT_FORMAT_VERSION: u32 = 1;

pub fn default_data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data/mnist"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BasisSource {
    /// Vectors from random circuits.
    Quantum,
    /// i.i.d. Gaussian vectors (RBF kernel).
    Gaussian { bandwidth: f64 },
    /// No feature map: the classifier sees the selected pixels directly.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    /// Chi-squared scores from the training portion only.
    Train,
    /// Chi-squared scores from all points before splitting.
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub data_dir: PathBuf,
    pub digits: (u8, u8),
    pub features: usize,
    pub selection: SelectionMode,
    pub scale_pixels: bool,
    pub qubits: usize,
    pub layers: usize,
    pub rotation_mean: f64,
    pub rotation_std: f64,
    pub weight_std: f64,
    pub basis_size: usize,
    pub basis: BasisSource,
    /// 0 means exact amplitudes.
    pub shots: u64,
    pub reg_c: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub basis_seed: u64,
    pub split_seed: u64,
    pub shot_seed: u64,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            data_dir: default_data_dir(),
            digits: (3, 5),
            features: 128,
            selection: SelectionMode::Train,
            scale_pixels: true,
            qubits: 7,
            layers: 14,
            rotation_mean: 0.5 * std::f64::consts::PI,
            rotation_std: 0.1,
            weight_std: 1.0,
            basis_size: 8000,
            basis: BasisSource::Quantum,
            shots: 0,
            reg_c: DEFAULT_REG_C,
            tol: 1e-4,
            max_iters: 1000,
            basis_seed: 0,
            split_seed: 0,
            shot_seed: 0,
            output_dir: None,
        }
    }
}

/// Default regularization constant. Features are scaled by `√(1/D)`, so each
/// mapped point has unit norm and a small `C` regularizes very strongly.
pub const DEFAULT_REG_C: f64 = 100.0;

impl ExperimentConfig {
    pub fn ansatz_params(&self) -> AnsatzParams {
        AnsatzParams {
            qubits: self.qubits,
            layers: self.layers,
            rotation_mean: self.rotation_mean,
            rotation_std: self.rotation_std,
            weight_std: self.weight_std,
            basis_size: self.basis_size,
            master_seed: self.basis_seed,
        }
    }

    pub fn train_params(&self) -> TrainParams {
        TrainParams {
            reg_c: self.reg_c,
            tol: self.tol,
            max_iters: self.max_iters,
            execution: Execution::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.features == 0 {
            return Err(Error::InvalidParameter("feature count must be positive".into()));
        }
        if let BasisSource::Quantum = self.basis {
            self.ansatz_params().validate()?;
            if self.features > 1 << self.qubits {
                return Err(Error::InvalidParameter(format!(
                    "{} features do not fit in {} qubits",
                    self.features, self.qubits
                )));
            }
        }
        if let BasisSource::Gaussian { bandwidth } = self.basis {
            if !(bandwidth > 0.0 && bandwidth.is_finite()) {
                return Err(Error::InvalidParameter(format!("bandwidth {bandwidth} must be positive")));
            }
            if self.basis_size == 0 {
                return Err(Error::InvalidParameter("basis size must be positive".into()));
            }
        }
        if self.shots > 0 && self.basis != BasisSource::Quantum {
            return Err(Error::InvalidParameter("shots apply to the quantum basis only".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Selected, scaled, split task data shared by runs with the same data
/// settings.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub train: TaskDataset,
    pub test: TaskDataset,
    pub selected: Vec<usize>,
    pub train_points: Vec<usize>,
    pub test_points: Vec<usize>,
    pub total_points: usize,
}

pub fn prepare_data(config: &ExperimentConfig) -> Result<PreparedData> {
    let (a, b) = config.digits;
    let raw = dataio::load_pooled(&config.data_dir).map_err(|e| e.in_stage("load"))?;
    let filtered = dataio::extract_binary_task(&raw, a, b).map_err(|e| e.in_stage("extract"))?;
    drop(raw);
    log::info!("digits {a}/{b}: {} points", filtered.len());
    if filtered.is_empty() {
        return Err(Error::InvalidData(format!("no images with digits {a} or {b}")).in_stage("extract"));
    }
    prepare_from_raw(config, &filtered)
}

/// Same as [`prepare_data`] for an already filtered dataset.
pub fn prepare_from_raw(config: &ExperimentConfig, filtered: &dataio::RawDataset) -> Result<PreparedData> {
    let (a, b) = config.digits;
    let (train_points, test_points) =
        dataio::split_indices(filtered.len(), config.split_seed).map_err(|e| e.in_stage("split"))?;
    let labels = dataio::binary_labels(filtered, a, b).map_err(|e| e.in_stage("select"))?;
    let selected = match config.selection {
        SelectionMode::Pooled => dataio::chi2_select(filtered.images.view(), &labels, config.features),
        SelectionMode::Train => {
            let rows = filtered.images.select(ndarray::Axis(0), &train_points);
            let y: Vec<i8> = train_points.iter().map(|&i| labels[i]).collect();
            dataio::chi2_select(rows.view(), &y, config.features)
        }
    }
    .map_err(|e| e.in_stage("select"))?;
    let task = dataio::to_feature_matrix(filtered, &selected, a, b, config.scale_pixels)
        .map_err(|e| e.in_stage("select"))?;
    let mut train = task.subset(&train_points);
    let mut test = task.subset(&test_points);
    train.split_seed = Some(config.split_seed);
    test.split_seed = Some(config.split_seed);
    Ok(PreparedData {
        train,
        test,
        selected,
        train_points,
        test_points,
        total_points: filtered.len(),
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub prepare_s: f64,
    pub sample_s: f64,
    pub map_train_s: f64,
    pub train_s: f64,
    pub map_test_s: f64,
    pub predict_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub version: u32,
    pub config: ExperimentConfig,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub train_points: usize,
    pub test_points: usize,
    pub basis_fingerprint: String,
    pub zero_norm_points: usize,
    pub training_iters: usize,
    pub converged: bool,
    pub final_objective: f64,
    pub timings: StageTimings,
    pub timestamp: u64,
}

enum Basis {
    Quantum(ansatz::FeatureBasis),
    Gaussian(featmap::GaussianBasis),
    Raw,
}

impl Basis {
    fn fingerprint(&self) -> String {
        use featmap::RandomBasis;
        match self {
            Basis::Quantum(b) => b.fingerprint(),
            Basis::Gaussian(b) => b.basis_id(),
            Basis::Raw => "raw".into(),
        }
    }
}

struct Mapped {
    features: Array2<f64>,
    zero_norm: usize,
}

fn map_points(config: &ExperimentConfig, basis: &Basis, points: &Array2<f64>, shot_stream: u64) -> Result<Mapped> {
    let exec = Execution::default();
    let done = |m: MappedFeatures| Mapped {
        zero_norm: m.zero_norm_count(),
        features: m.into_matrix(),
    };
    match basis {
        Basis::Quantum(b) => {
            let padded = featmap::pad_rows(points.view(), b.dim())?;
            if config.shots > 0 {
                let seed = rng::substream_seed(config.shot_seed, shot_stream);
                featmap::map_dataset_with_shots(padded.view(), b, config.shots, seed, exec).map(done)
            } else {
                featmap::map_dataset_with(padded.view(), b, exec).map(done)
            }
        }
        Basis::Gaussian(b) => featmap::map_dataset_with(points.view(), b, exec).map(done),
        Basis::Raw => Ok(Mapped {
            features: points.clone(),
            zero_norm: points.columns().into_iter().filter(|c| c.iter().all(|&x| x == 0.0)).count(),
        }),
    }
}

fn seconds(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

/// Runs the pipeline on prepared data. Does not write any files.
pub fn run_prepared(config: &ExperimentConfig, data: &PreparedData) -> Result<RunResult> {
    config.validate()?;
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let basis = match config.basis {
        BasisSource::Quantum => Basis::Quantum(
            ansatz::sample_basis(&config.ansatz_params())
                .map_err(|e| e.in_stage("sample"))?
                .without_circuits(),
        ),
        BasisSource::Gaussian { bandwidth } => Basis::Gaussian(
            featmap::sample_gaussian_basis(data.train.features.nrows(), config.basis_size, bandwidth, config.basis_seed)
                .map_err(|e| e.in_stage("sample"))?,
        ),
        BasisSource::Raw => Basis::Raw,
    };
    timings.sample_s = seconds(t);

    let t = Instant::now();
    let mapped = map_points(config, &basis, &data.train.features, 0).map_err(|e| e.in_stage("map_train"))?;
    timings.map_train_s = seconds(t);

    let t = Instant::now();
    let model = {
        let labeled = LabeledFeatures::new(mapped.features.view(), &data.train.labels).map_err(|e| e.in_stage("train"))?;
        linclf::train(&labeled, &config.train_params()).map_err(|e| e.in_stage("train"))?
    };
    timings.train_s = seconds(t);

    let t = Instant::now();
    let train_pred = linclf::predict(&model, mapped.features.view()).map_err(|e| e.in_stage("predict"))?;
    let train_accuracy = linclf::accuracy(&train_pred, &data.train.labels).map_err(|e| e.in_stage("predict"))?;
    let mut zero_norm_points = mapped.zero_norm;
    drop(mapped);
    timings.predict_s = seconds(t);

    let t = Instant::now();
    let mapped = map_points(config, &basis, &data.test.features, 1).map_err(|e| e.in_stage("map_test"))?;
    timings.map_test_s = seconds(t);
    zero_norm_points += mapped.zero_norm;

    let t = Instant::now();
    let test_pred = linclf::predict(&model, mapped.features.view()).map_err(|e| e.in_stage("predict"))?;
    let test_accuracy = linclf::accuracy(&test_pred, &data.test.labels).map_err(|e| e.in_stage("predict"))?;
    timings.predict_s += seconds(t);

    Ok(RunResult {
        version: RESULT_FORMAT_VERSION,
        config: config.clone(),
        train_accuracy,
        test_accuracy,
        train_points: data.train.len(),
        test_points: data.test.len(),
        basis_fingerprint: basis.fingerprint(),
        zero_norm_points,
        training_iters: model.training_iters,
        converged: model.converged,
        final_objective: model.final_objective,
        timings,
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    })
}

const RUN_CSV_HEADER: &str = "timestamp,basis,qubits,layers,rotation_mean,rotation_std,weight_std,basis_size,shots,reg_c,basis_seed,split_seed,train_accuracy,test_accuracy,basis_fingerprint";

fn basis_label(b: &BasisSource) -> String {
    match b {
        BasisSource::Quantum => "quantum".into(),
        BasisSource::Gaussian { bandwidth } => format!("gaussian:{bandwidth}"),
        BasisSource::Raw => "raw".into(),
    }
}

impl RunResult {
    pub fn csv_row(&self) -> String {
        let c = &self.config;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.timestamp,
            basis_label(&c.basis),
            c.qubits,
            c.layers,
            c.rotation_mean,
            c.rotation_std,
            c.weight_std,
            c.basis_size,
            c.shots,
            c.reg_c,
            c.basis_seed,
            c.split_seed,
            self.train_accuracy,
            self.test_accuracy,
            self.basis_fingerprint
        )
    }

    /// Appends the record to `runs.jsonl` and `runs.csv` in `dir`.
    pub fn append_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        let mut line = serde_json::to_string(self)?;
        line.push('\n');
        append(&dir.join("runs.jsonl"), None, &line)?;
        append(&dir.join("runs.csv"), Some(RUN_CSV_HEADER), &format!("{}\n", self.csv_row()))
    }
}

fn append(path: &Path, header: Option<&str>, text: &str) -> Result<()> {
    let fresh = !path.exists();
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    let mut out = String::new();
    if let (true, Some(h)) = (fresh, header) {
        out.push_str(h);
        out.push('\n');
    }
    out.push_str(text);
    f.write_all(out.as_bytes())
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn write_manifests(dir: &Path, data: &PreparedData) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    dataio::write_index_list(&dir.join("selected_features.txt"), &data.selected)?;
    dataio::write_index_list(&dir.join("split_train.txt"), &data.train_points)?;
    dataio::write_index_list(&dir.join("split_test.txt"), &data.test_points)
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunResult> {
    config.validate()?;
    let t = Instant::now();
    let data = prepare_data(config)?;
    let prepare_s = seconds(t);
    let mut result = run_prepared(config, &data)?;
    result.timings.prepare_s = prepare_s;
    if let Some(dir) = &config.output_dir {
        write_manifests(dir, &data).map_err(|e| e.in_stage("write"))?;
        result.append_to(dir).map_err(|e| e.in_stage("write"))?;
    }
    Ok(result)
}

/// Re-runs the configuration recorded in `result`.
pub fn replay(result: &RunResult) -> Result<RunResult> {
    let config = ExperimentConfig {
        output_dir: None,
        ..result.config.clone()
    };
    run_experiment(&config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub layers: Vec<usize>,
    pub rotation_mean: Vec<f64>,
    pub rotation_std: Vec<f64>,
    pub weight_std: Vec<f64>,
    pub basis_size: Vec<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        let pi = std::f64::consts::PI;
        GridSpec {
            layers: vec![7, 14, 21],
            rotation_mean: vec![0.25 * pi, 0.5 * pi],
            rotation_std: vec![0.05, 0.1, 0.2],
            weight_std: vec![0.5, 1.0],
            basis_size: vec![500, 1000, 2000, 4000, 8000],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub layers: usize,
    pub rotation_mean: f64,
    pub rotation_std: f64,
    pub weight_std: f64,
    pub basis_size: usize,
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.layers.len() * self.rotation_mean.len() * self.rotation_std.len() * self.weight_std.len() * self.basis_size.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cells in canonical order: basis size outermost, then layers, mean,
    /// std, weight std.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut out = Vec::with_capacity(self.len());
        for &basis_size in &self.basis_size {
            for &layers in &self.layers {
                for &rotation_mean in &self.rotation_mean {
                    for &rotation_std in &self.rotation_std {
                        for &weight_std in &self.weight_std {
                            out.push(GridCell {
                                layers,
                                rotation_mean,
                                rotation_std,
                                weight_std,
                                basis_size,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

impl GridCell {
    pub fn apply(&self, base: &ExperimentConfig) -> ExperimentConfig {
        ExperimentConfig {
            layers: self.layers,
            rotation_mean: self.rotation_mean,
            rotation_std: self.rotation_std,
            weight_std: self.weight_std,
            basis_size: self.basis_size,
            ..base.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub index: usize,
    pub cell: GridCell,
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub basis_fingerprint: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeSummary {
    pub basis_size: usize,
    pub runs: usize,
    pub failed: usize,
    pub best: f64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

pub const HISTOGRAM_BINS: usize = 20;
pub const HISTOGRAM_RANGE: (f64, f64) = (0.9, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreHistogram {
    pub basis_size: usize,
    /// Scores below the histogram range.
    pub below: usize,
    pub counts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub rows: Vec<GridRow>,
    pub summary: Vec<SizeSummary>,
    pub histograms: Vec<ScoreHistogram>,
}

pub fn histogram(scores: &[f64]) -> (usize, Vec<usize>) {
    let (lo, hi) = HISTOGRAM_RANGE;
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut counts = vec![0; HISTOGRAM_BINS];
    let mut below = 0;
    for &s in scores {
        if s < lo {
            below += 1;
        } else {
            // accuracies sitting on a bin edge belong to the upper bin
            let bin = (((s - lo) / width + 1e-9).floor() as usize).min(HISTOGRAM_BINS - 1);
            counts[bin] += 1;
        }
    }
    (below, counts)
}

fn summarize(rows: &[GridRow]) -> (Vec<SizeSummary>, Vec<ScoreHistogram>) {
    let mut sizes: Vec<usize> = rows.iter().map(|r| r.cell.basis_size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut summary = Vec::new();
    let mut hists = Vec::new();
    for d in sizes {
        let group: Vec<&GridRow> = rows.iter().filter(|r| r.cell.basis_size == d).collect();
        let scores: Vec<f64> = group.iter().filter_map(|r| r.test_accuracy).collect();
        let (best, min, mean) = if scores.is_empty() {
            (f64::NAN, f64::NAN, f64::NAN)
        } else {
            (
                scores.iter().cloned().fold(f64::MIN, f64::max),
                scores.iter().cloned().fold(f64::MAX, f64::min),
                scores.iter().sum::<f64>() / scores.len() as f64,
            )
        };
        summary.push(SizeSummary {
            basis_size: d,
            runs: group.len(),
            failed: group.len() - scores.len(),
            best,
            min,
            max: best,
            mean,
        });
        let (below, counts) = histogram(&scores);
        hists.push(ScoreHistogram {
            basis_size: d,
            below,
            counts,
        });
    }
    (summary, hists)
}

/// Runs every grid cell on shared prepared data. `jobs` bounds the number
/// of cells in flight; rows come back in canonical cell order regardless.
pub fn grid_search_prepared(grid: &GridSpec, base: &ExperimentConfig, data: &PreparedData, jobs: usize) -> Result<GridReport> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("grid has no cells".into()));
    }
    let cells = grid.cells();
    let run_cell = |index: usize| {
        let cell = cells[index];
        let config = cell.apply(base);
        match run_prepared(&config, data) {
            Ok(r) => {
                log::info!("grid cell {index}: {cell:?} → {:.4}", r.test_accuracy);
                GridRow {
                    index,
                    cell,
                    train_accuracy: Some(r.train_accuracy),
                    test_accuracy: Some(r.test_accuracy),
                    basis_fingerprint: Some(r.basis_fingerprint),
                    error: None,
                }
            }
            Err(e) => {
                log::warn!("grid cell {index} failed: {e}");
                GridRow {
                    index,
                    cell,
                    train_accuracy: None,
                    test_accuracy: None,
                    basis_fingerprint: None,
                    error: Some(e.to_string()),
                }
            }
        }
    };
    let mut rows = run_cells(cells.len(), jobs, &run_cell)?;
    rows.sort_by_key(|r| r.index);
    let (summary, histograms) = summarize(&rows);
    Ok(GridReport {
        rows,
        summary,
        histograms,
    })
}

#[cfg(feature = "parallel")]
fn run_cells<F: Fn(usize) -> GridRow + Sync + Send>(n: usize, jobs: usize, f: &F) -> Result<Vec<GridRow>> {
    if jobs <= 1 {
        return Ok((0..n).map(f).collect());
    }
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| (0..n).into_par_iter().map(f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn run_cells<F: Fn(usize) -> GridRow + Sync + Send>(n: usize, _jobs: usize, f: &F) -> Result<Vec<GridRow>> {
    Ok((0..n).map(f).collect())
}

pub fn grid_search(grid: &GridSpec, base: &ExperimentConfig, jobs: usize) -> Result<GridReport> {
    base.validate()?;
    let data = prepare_data(base)?;
    let report = grid_search_prepared(grid, base, &data, jobs)?;
    if let Some(dir) = &base.output_dir {
        write_manifests(dir, &data).map_err(|e| e.in_stage("write"))?;
        report.write_to(dir).map_err(|e| e.in_stage("write"))?;
    }
    Ok(report)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

impl GridReport {
    pub fn rows_csv(&self) -> String {
        let mut s = String::from("index,layers,rotation_mean,rotation_std,weight_std,basis_size,train_accuracy,test_accuracy,basis_fingerprint,error\n");
        for r in &self.rows {
            let c = &r.cell;
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.index,
                c.layers,
                c.rotation_mean,
                c.rotation_std,
                c.weight_std,
                c.basis_size,
                fmt_opt(r.train_accuracy),
                fmt_opt(r.test_accuracy),
                r.basis_fingerprint.clone().unwrap_or_default(),
                r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
            ));
        }
        s
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("basis_size,runs,failed,best,min,max,mean\n");
        for r in &self.summary {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.basis_size, r.runs, r.failed, r.best, r.min, r.max, r.mean
            ));
        }
        s
    }

    pub fn histograms_text(&self) -> String {
        let (lo, hi) = HISTOGRAM_RANGE;
        let width = (hi - lo) / HISTOGRAM_BINS as f64;
        let mut s = format!("# format-version {RESULT_FORMAT_VERSION}\n");
        for h in &self.histograms {
            s.push_str(&format!("basis_size {}\n", h.basis_size));
            s.push_str(&format!("below {lo:.3}\t{}\n", h.below));
            for (i, c) in h.counts.iter().enumerate() {
                let a = lo + i as f64 * width;
                s.push_str(&format!("[{a:.3}, {:.3})\t{c}\n", a + width));
            }
        }
        s
    }

    pub fn best_for(&self, basis_size: usize) -> Option<f64> {
        self.summary
            .iter()
            .find(|s| s.basis_size == basis_size && s.runs > s.failed)
            .map(|s| s.best)
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        for (name, text) in [
            ("grid.csv", self.rows_csv()),
            ("grid_summary.csv", self.summary_csv()),
            ("grid_histograms.txt", self.histograms_text()),
        ] {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| Error::io(format!("writing {}", p.display()), e))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelCheckRow {
    pub basis_size: usize,
    pub max_error: f64,
    pub mean_error: f64,
}

/// `count` pairs of points drawn uniformly from the radius-`radius` ball
/// around the origin of `ℝ^dim`.
pub fn sample_ball_pairs(dim: usize, count: usize, radius: f64, seed: u64) -> Vec<(Array1<f64>, Array1<f64>)> {
    let mut r = rng::stream(seed);
    let mut point = || {
        let dir: Array1<f64> = (0..dim).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        let norm = dir.dot(&dir).sqrt();
        let u: f64 = r.random();
        dir * (radius * u.powf(1.0 / dim as f64) / norm)
    };
    (0..count).map(|_| (point(), point())).collect()
}

/// `(max, mean)` of `|c(f₁)ᵀc(f₂) − exp(−γ²‖f₁−f₂‖²/2)|` over `pairs`.
pub fn kernel_errors(pairs: &[(Array1<f64>, Array1<f64>)], basis: &featmap::GaussianBasis) -> Result<(f64, f64)> {
    let mut max: f64 = 0.0;
    let mut sum = 0.0;
    for (a, b) in pairs {
        let approx = featmap::approx_kernel(a.view(), b.view(), basis)?;
        let exact = featmap::rbf_kernel(a.view(), b.view(), basis.bandwidth());
        let err = (approx - exact).abs();
        max = max.max(err);
        sum += err;
    }
    Ok((max, sum / pairs.len().max(1) as f64))
}

/// Kernel approximation error of Gaussian bases of each size in `sizes`
/// over `pair_count` point pairs in a ball of diameter 2.
pub fn kernel_check(dim: usize, sizes: &[usize], bandwidth: f64, pair_count: usize, seed: u64) -> Result<Vec<KernelCheckRow>> {
    if pair_count == 0 {
        return Err(Error::InvalidParameter("need at least one pair".into()));
    }
    let pairs = sample_ball_pairs(dim, pair_count, 1.0, rng::substream_seed(seed, 0));
    sizes
        .iter()
        .map(|&size| {
            let basis = featmap::sample_gaussian_basis(dim, size, bandwidth, rng::substream_seed(seed, 1 + size as u64))?;
            let (max_error, mean_error) = kernel_errors(&pairs, &basis)?;
            Ok(KernelCheckRow {
                basis_size: size,
                max_error,
                mean_error,
            })
        })
        .collect()
}

pub fn kernel_check_csv(rows: &[KernelCheckRow]) -> String {
    let mut s = String::from("basis_size,max_error,mean_error\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.basis_size, r.max_error, r.mean_error));
    }
    s
}

/// Downloads any missing dataset files and verifies all checksums.
pub fn fetch_data(data_dir: &Path, mirror: &str, lockfile: Option<&Path>) -> Result<Vec<(String, dataio::FetchOutcome)>> {
    let text = match lockfile {
        Some(p) => fs::read_to_string(p).map_err(|e| Error::io(format!("reading {}", p.display()), e))?,
        None => dataio::DEFAULT_LOCKFILE.to_string(),
    };
    let lock = dataio::parse_lockfile(&text)?;
    dataio::fetch_files(data_dir, mirror, &lock)
}
