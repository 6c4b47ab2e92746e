//! MNIST ingestion and the binary digit task.
//!
//! IDX files are big-endian: a `u32` magic (`0x00000803` for image stacks,
//! `0x00000801` for label vectors), one `u32` per dimension, then the raw
//! `u8` payload. Gzip-compressed files are recognized by their `1f 8b`
//! prefix and decompressed transparently.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use sha2::{Digest, Sha256};

use crate::rng;
use crate::{Error, Result};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

pub const TRAIN_IMAGES: &str = "train-images-idx3-ubyte";
pub const TRAIN_LABELS: &str = "train-labels-idx1-ubyte";
pub const TEST_IMAGES: &str = "t10k-images-idx3-ubyte";
pub const TEST_LABELS: &str = "t10k-labels-idx1-ubyte";

/// Checksums (SHA-256 of the decompressed files) for the standard release,
/// in `sha256sum` format.
pub const DEFAULT_LOCKFILE: &str = "\
ba891046e6505d7aadcbbe25680a0738ad16aec93bde7f9b65e87a2fc25776db  train-images-idx3-ubyte
65a50cbbf4e906d70832878ad85ccda5333a97f0f4c3dd2ef09a8a9eef7101c5  train-labels-idx1-ubyte
0fa7898d509279e482958e8ce81c8e77db3f2f8254e26661ceb7762c4d494ce7  t10k-images-idx3-ubyte
ff7bcfd416de33731a308c3f266cc351222c34898ecbeaf847f06e48f7ec33f2  t10k-labels-idx1-ubyte
";

pub const DEFAULT_MIRROR: &str = "https://ossci-datasets.s3.amazonaws.com/mnist";

/// Images (one flattened image per row) and digit labels.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub images: Array2<u8>,
    pub labels: Vec<u8>,
    pub rows: usize,
    pub cols: usize,
}

impl RawDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Appends `other` below `self`.
    pub fn concat(mut self, other: &RawDataset) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::Format(format!(
                "image shapes differ: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut images = self.images.into_raw_vec_and_offset().0;
        images.extend(other.images.iter());
        self.labels.extend(&other.labels);
        self.images = Array2::from_shape_vec((self.labels.len(), self.rows * self.cols), images)
            .expect("concatenated image buffer");
        Ok(self)
    }

    fn select(&self, rows: &[usize]) -> RawDataset {
        RawDataset {
            images: self.images.select(ndarray::Axis(0), rows),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
            rows: self.rows,
            cols: self.cols,
        }
    }
}

fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    if bytes.starts_with(&[0x1f, 0x8b]) {
        let mut out = Vec::new();
        GzDecoder::new(bytes.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                offset: 0,
                message: format!("gzip: {e}"),
            })?;
        Ok(out)
    } else {
        Ok(bytes)
    }
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            offset: offset as u64,
            message: "truncated header".into(),
        })
}

fn check_magic(bytes: &[u8], expected: u32, path: &Path) -> Result<()> {
    let magic = be_u32(bytes, 0, path)?;
    if magic != expected {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            offset: 0,
            message: format!("bad magic {magic:#010x}, expected {expected:#010x}"),
        });
    }
    Ok(())
}

fn payload<'b>(bytes: &'b [u8], header: usize, len: usize, path: &Path) -> Result<&'b [u8]> {
    bytes.get(header..header + len).ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        offset: bytes.len() as u64,
        message: format!("truncated payload: expected {} bytes", header + len),
    })
}

pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<RawDataset> {
    let img = read_maybe_gz(images_path)?;
    check_magic(&img, IMAGES_MAGIC, images_path)?;
    let n = be_u32(&img, 4, images_path)? as usize;
    let rows = be_u32(&img, 8, images_path)? as usize;
    let cols = be_u32(&img, 12, images_path)? as usize;
    let pixels = payload(&img, 16, n * rows * cols, images_path)?;

    let lab = read_maybe_gz(labels_path)?;
    check_magic(&lab, LABELS_MAGIC, labels_path)?;
    let n_labels = be_u32(&lab, 4, labels_path)? as usize;
    if n_labels != n {
        return Err(Error::Parse {
            path: labels_path.to_path_buf(),
            offset: 4,
            message: format!("{n_labels} labels for {n} images"),
        });
    }
    let labels = payload(&lab, 8, n, labels_path)?.to_vec();
    Ok(RawDataset {
        images: Array2::from_shape_vec((n, rows * cols), pixels.to_vec()).expect("pixel buffer"),
        labels,
        rows,
        cols,
    })
}

pub fn write_idx(raw: &RawDataset, images_path: &Path, labels_path: &Path) -> Result<()> {
    let mut img = Vec::with_capacity(16 + raw.images.len());
    for v in [IMAGES_MAGIC, raw.len() as u32, raw.rows as u32, raw.cols as u32] {
        img.extend(v.to_be_bytes());
    }
    img.extend(raw.images.iter());
    fs::write(images_path, img).map_err(|e| Error::io(format!("writing {}", images_path.display()), e))?;
    let mut lab = Vec::with_capacity(8 + raw.len());
    lab.extend(LABELS_MAGIC.to_be_bytes());
    lab.extend((raw.len() as u32).to_be_bytes());
    lab.extend(&raw.labels);
    fs::write(labels_path, lab).map_err(|e| Error::io(format!("writing {}", labels_path.display()), e))
}

/// The standard training and test files of `dir`, pooled (train first).
pub fn load_pooled(dir: &Path) -> Result<RawDataset> {
    let find = |name: &str| -> PathBuf {
        let plain = dir.join(name);
        let gz = dir.join(format!("{name}.gz"));
        if !plain.exists() && gz.exists() {
            gz
        } else {
            plain
        }
    };
    let train = load_idx(&find(TRAIN_IMAGES), &find(TRAIN_LABELS))?;
    let test = load_idx(&find(TEST_IMAGES), &find(TEST_LABELS))?;
    train.concat(&test)
}

/// Rows whose label is `digit_a` or `digit_b`, in their original order.
pub fn extract_binary_task(raw: &RawDataset, digit_a: u8, digit_b: u8) -> Result<RawDataset> {
    if digit_a == digit_b {
        return Err(Error::InvalidParameter(format!("digits must differ, got {digit_a} twice")));
    }
    let keep: Vec<usize> = (0..raw.len())
        .filter(|&i| raw.labels[i] == digit_a || raw.labels[i] == digit_b)
        .collect();
    Ok(raw.select(&keep))
}

/// Per-feature chi-squared statistic between feature mass and class.
///
/// `samples` is `N × p` with non-negative entries. For class `c` the observed
/// value is the feature's sum over class-`c` points and the expected value is
/// `(n_c / N) ·` the feature's total. Features with zero total score 0.
pub fn chi2_scores<T>(samples: ArrayView2<'_, T>, labels: &[i8]) -> Result<Vec<f64>>
where
    T: Copy + Into<f64>,
{
    if samples.nrows() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: samples.nrows(),
            actual: labels.len(),
        });
    }
    let n = labels.len() as f64;
    let n_pos = labels.iter().filter(|&&y| y > 0).count() as f64;
    if n_pos == 0.0 || n_pos == n {
        return Err(Error::InvalidData("chi-squared selection needs both classes".into()));
    }
    let p = samples.ncols();
    let mut pos = vec![0.0; p];
    let mut neg = vec![0.0; p];
    for (row, &y) in samples.rows().into_iter().zip(labels) {
        let acc = if y > 0 { &mut pos } else { &mut neg };
        for (a, &x) in acc.iter_mut().zip(row) {
            let x: f64 = x.into();
            if x < 0.0 {
                return Err(Error::InvalidData("chi-squared selection needs non-negative values".into()));
            }
            *a += x;
        }
    }
    Ok(pos
        .iter()
        .zip(&neg)
        .map(|(&o_pos, &o_neg)| {
            let total = o_pos + o_neg;
            if total == 0.0 {
                return 0.0;
            }
            let e_pos = total * n_pos / n;
            let e_neg = total * (n - n_pos) / n;
            (o_pos - e_pos).powi(2) / e_pos + (o_neg - e_neg).powi(2) / e_neg
        })
        .collect())
}

/// Indices of the `k` highest-scoring features (ties to the lower index),
/// returned in increasing order.
pub fn chi2_select<T>(samples: ArrayView2<'_, T>, labels: &[i8], k: usize) -> Result<Vec<usize>>
where
    T: Copy + Into<f64>,
{
    if k > samples.ncols() {
        return Err(Error::InvalidParameter(format!(
            "cannot select {k} of {} features",
            samples.ncols()
        )));
    }
    let scores = chi2_scores(samples, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut chosen = order[..k].to_vec();
    chosen.sort_unstable();
    Ok(chosen)
}

/// Labels `digit_a → −1`, `digit_b → +1`.
pub fn binary_labels(raw: &RawDataset, digit_a: u8, digit_b: u8) -> Result<Vec<i8>> {
    raw.labels
        .iter()
        .map(|&l| match l {
            _ if l == digit_a => Ok(-1),
            _ if l == digit_b => Ok(1),
            other => Err(Error::InvalidData(format!(
                "label {other} is neither {digit_a} nor {digit_b}"
            ))),
        })
        .collect()
}

/// The task matrix: `d × N` with one point per column.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDataset {
    pub features: Array2<f64>,
    pub labels: Vec<i8>,
    pub selected: Vec<usize>,
    pub split_seed: Option<u64>,
}

impl TaskDataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn subset(&self, points: &[usize]) -> TaskDataset {
        TaskDataset {
            features: self.features.select(ndarray::Axis(1), points),
            labels: points.iter().map(|&j| self.labels[j]).collect(),
            selected: self.selected.clone(),
            split_seed: self.split_seed,
        }
    }
}

/// Keeps the `indices` pixel columns, optionally divides by 255, and lays
/// points out as columns.
pub fn to_feature_matrix(
    filtered: &RawDataset,
    indices: &[usize],
    digit_a: u8,
    digit_b: u8,
    scale_pixels: bool,
) -> Result<TaskDataset> {
    let width = filtered.images.ncols();
    if let Some(&bad) = indices.iter().find(|&&i| i >= width) {
        return Err(Error::InvalidParameter(format!("feature index {bad} >= {width}")));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("feature indices must be strictly increasing".into()));
    }
    let scale = if scale_pixels { 1.0 / 255.0 } else { 1.0 };
    let n = filtered.len();
    let mut features = Array2::zeros((indices.len(), n));
    for (j, img) in filtered.images.rows().into_iter().enumerate() {
        for (r, &i) in indices.iter().enumerate() {
            features[[r, j]] = img[i] as f64 * scale;
        }
    }
    Ok(TaskDataset {
        features,
        labels: binary_labels(filtered, digit_a, digit_b)?,
        selected: indices.to_vec(),
        split_seed: None,
    })
}

/// Training share of a 6:1 split.
pub fn train_size(n: usize) -> usize {
    (6 * n).div_ceil(7)
}

/// Seeded shuffle of `0..n`; the first [`train_size`] entries are the
/// training points, the rest the test points.
pub fn split_indices(n: usize, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if n < 7 {
        return Err(Error::InvalidData(format!("need at least 7 points to split, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed));
    let test = order.split_off(train_size(n));
    Ok((order, test))
}

pub fn split(task: &TaskDataset, seed: u64) -> Result<(TaskDataset, TaskDataset)> {
    let (train, test) = split_indices(task.len(), seed)?;
    let mut a = task.subset(&train);
    let mut b = task.subset(&test);
    a.split_seed = Some(seed);
    b.split_seed = Some(seed);
    Ok((a, b))
}

pub fn write_index_list(path: &Path, indices: &[usize]) -> Result<()> {
    let mut text = String::new();
    for i in indices {
        text.push_str(&i.to_string());
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn read_index_list(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(n, l)| {
            l.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                offset: n as u64,
                message: format!("line {}: not an index: {l:?}", n + 1),
            })
        })
        .collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `(file name, sha256)` pairs from `sha256sum`-style text.
pub fn parse_lockfile(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let mut parts = l.split_whitespace();
            match (parts.next(), parts.next(), parts.next()) {
                (Some(sum), Some(name), None) if sum.len() == 64 => {
                    Ok((name.trim_start_matches('*').to_string(), sum.to_lowercase()))
                }
                _ => Err(Error::Format(format!("bad lockfile line {l:?}"))),
            }
        })
        .collect()
}

/// What [`fetch_files`] did for each file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchOutcome {
    AlreadyPresent,
    Downloaded { from: String },
}

fn fetch_bytes(mirror: &str, name: &str) -> Result<(Vec<u8>, String)> {
    let remote = mirror.starts_with("http://") || mirror.starts_with("https://");
    let base = mirror.trim_end_matches('/');
    let mut last_err = None;
    for candidate in [name.to_string(), format!("{name}.gz")] {
        if remote {
            let url = format!("{base}/{candidate}");
            match ureq::get(&url).call() {
                Ok(resp) => {
                    let mut bytes = Vec::new();
                    resp.into_body()
                        .into_reader()
                        .read_to_end(&mut bytes)
                        .map_err(|e| Error::Download {
                            url: url.clone(),
                            message: e.to_string(),
                        })?;
                    return Ok((bytes, url));
                }
                Err(e) => {
                    last_err = Some(Error::Download {
                        url,
                        message: e.to_string(),
                    })
                }
            }
        } else {
            let path = Path::new(base.trim_start_matches("file://")).join(&candidate);
            match fs::read(&path) {
                Ok(bytes) => return Ok((bytes, path.display().to_string())),
                Err(e) => last_err = Some(Error::io(format!("reading {}", path.display()), e)),
            }
        }
    }
    Err(last_err.expect("at least one candidate tried"))
}

fn gunzip_if_needed(bytes: Vec<u8>, from: &str) -> Result<Vec<u8>> {
    if !bytes.starts_with(&[0x1f, 0x8b]) {
        return Ok(bytes);
    }
    let mut out = Vec::new();
    GzDecoder::new(bytes.as_slice())
        .read_to_end(&mut out)
        .map_err(|e| Error::Download {
            url: from.to_string(),
            message: format!("gzip: {e}"),
        })?;
    Ok(out)
}

/// Makes sure every lockfile entry exists in `dir` with the right checksum.
///
/// Files already present and matching are left alone without touching the
/// mirror. A present file with the wrong checksum is an error. `mirror` is an
/// `http(s)://` base URL or a local directory; for each file the plain name
/// is tried first, then `<name>.gz`.
pub fn fetch_files(dir: &Path, mirror: &str, lock: &[(String, String)]) -> Result<Vec<(String, FetchOutcome)>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    let mut report = Vec::new();
    for (name, expected) in lock {
        let target = dir.join(name);
        if target.exists() {
            let bytes = read_maybe_gz(&target)?;
            let actual = sha256_hex(&bytes);
            if &actual != expected {
                return Err(Error::Checksum {
                    path: target,
                    expected: expected.clone(),
                    actual,
                });
            }
            report.push((name.clone(), FetchOutcome::AlreadyPresent));
            continue;
        }
        let (bytes, from) = fetch_bytes(mirror, name)?;
        let bytes = gunzip_if_needed(bytes, &from)?;
        let actual = sha256_hex(&bytes);
        if &actual != expected {
            return Err(Error::Checksum {
                path: PathBuf::from(&from),
                expected: expected.clone(),
                actual,
            });
        }
        let tmp = dir.join(format!(".{name}.partial"));
        let write = || -> std::io::Result<()> {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
            fs::rename(&tmp, &target)
        };
        write().map_err(|e| Error::io(format!("writing {}", target.display()), e))?;
        log::info!("fetched {name} from {from}");
        report.push((name.clone(), FetchOutcome::Downloaded { from }));
    }
    Ok(report)
}
