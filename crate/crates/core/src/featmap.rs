//! Randomized cos/sin feature map.
//!
//! For a basis `{g_i}` of size `D` a point `f` maps to
//! `√(1/D) [cos⟨g_1,f⟩, …, cos⟨g_D,f⟩, sin⟨g_1,f⟩, …, sin⟨g_D,f⟩]`, so the dot
//! product of two mapped points is `(1/D) Σ_i cos⟨g_i, f₁ − f₂⟩`.
//!
//! Data matrices are `d × N` with one point per column.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{s, Array2, ArrayView1, ArrayView2, Axis};
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use crate::ansatz::{read_f64s, read_u32, FeatureBasis};
use crate::par::{self, Execution};
use crate::qsim::{self, StateVector};
use crate::rng;
use crate::{Error, Result};

/// Points mapped per block of the production path.
const POINT_BLOCK: usize = 256;

/// A set of random projection directions.
pub trait RandomBasis: Sync {
    /// `D × d`, one direction `g_i` per row.
    fn vectors(&self) -> ArrayView2<'_, f64>;

    fn basis_id(&self) -> String;

    fn len(&self) -> usize {
        self.vectors().nrows()
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn dim(&self) -> usize {
        self.vectors().ncols()
    }
}

impl RandomBasis for FeatureBasis {
    fn vectors(&self) -> ArrayView2<'_, f64> {
        FeatureBasis::vectors(self)
    }

    fn basis_id(&self) -> String {
        self.fingerprint()
    }
}

/// Classical basis with i.i.d. `N(0, γ²)` entries; its induced kernel is
/// `exp(−γ²‖f₁−f₂‖²/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBasis {
    vectors: Array2<f64>,
    bandwidth: f64,
    seed: u64,
}

impl GaussianBasis {
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RandomBasis for GaussianBasis {
    fn vectors(&self) -> ArrayView2<'_, f64> {
        self.vectors.view()
    }

    fn basis_id(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"gaussian");
        for x in self.vectors.iter() {
            h.update(x.to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
    }
}

pub fn sample_gaussian_basis(dim: usize, size: usize, bandwidth: f64, seed: u64) -> Result<GaussianBasis> {
    if dim == 0 || size == 0 {
        return Err(Error::InvalidParameter("gaussian basis needs d, D >= 1".into()));
    }
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth {bandwidth} must be positive"
        )));
    }
    let normal = Normal::new(0.0, bandwidth).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut stream = rng::stream(seed);
    let vectors = Array2::from_shape_simple_fn((size, dim), || normal.sample(&mut stream));
    Ok(GaussianBasis {
        vectors,
        bandwidth,
        seed,
    })
}

/// Analytic kernel induced by a [`GaussianBasis`] of bandwidth `γ`.
pub fn rbf_kernel(f1: ArrayView1<'_, f64>, f2: ArrayView1<'_, f64>, bandwidth: f64) -> f64 {
    let r2: f64 = f1.iter().zip(f2).map(|(a, b)| (a - b) * (a - b)).sum();
    (-bandwidth * bandwidth * r2 / 2.0).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedPoints {
    /// `d × N`, unit columns (zero columns stay zero).
    pub unit: Array2<f64>,
    pub norms: Vec<f64>,
    pub zero_count: usize,
}

pub fn normalize_points(points: ArrayView2<'_, f64>) -> NormalizedPoints {
    let mut unit = points.to_owned();
    let mut norms = Vec::with_capacity(points.ncols());
    let mut zero_count = 0;
    for mut col in unit.columns_mut() {
        let n = col.dot(&col).sqrt();
        if n > 0.0 {
            col /= n;
        } else {
            zero_count += 1;
        }
        norms.push(n);
    }
    NormalizedPoints {
        unit,
        norms,
        zero_count,
    }
}

/// Zero-pads a `d × N` matrix to `dim` rows.
pub fn pad_rows(points: ArrayView2<'_, f64>, dim: usize) -> Result<Array2<f64>> {
    if points.nrows() > dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: points.nrows(),
        });
    }
    let mut out = Array2::zeros((dim, points.ncols()));
    out.slice_mut(s![..points.nrows(), ..]).assign(&points);
    Ok(out)
}

/// The `2D × N` feature matrix of a mapped dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedFeatures {
    // column-major, so each point's features are contiguous
    matrix: Array2<f64>,
    basis_id: String,
    norms: Vec<f64>,
    zero_norm_count: usize,
}

impl MappedFeatures {
    fn from_point_rows(rows: Vec<f64>, n: usize, width: usize, basis_id: String, norms: Vec<f64>) -> Self {
        let zero_norm_count = norms.iter().filter(|&&x| x == 0.0).count();
        let matrix = Array2::from_shape_vec((n, width), rows)
            .expect("feature buffer sized n × 2D")
            .reversed_axes();
        MappedFeatures {
            matrix,
            basis_id,
            norms,
            zero_norm_count,
        }
    }

    /// `2D × N`.
    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.matrix.view()
    }

    /// `N × 2D`, one contiguous row per point.
    pub fn points(&self) -> ArrayView2<'_, f64> {
        self.matrix.t()
    }

    pub fn feature_count(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn point_count(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn basis_id(&self) -> &str {
        &self.basis_id
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }

    pub fn zero_norm_count(&self) -> usize {
        self.zero_norm_count
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.matrix
    }
}

fn check_dim(points: &ArrayView2<'_, f64>, basis_dim: usize) -> Result<()> {
    if points.nrows() != basis_dim {
        return Err(Error::DimensionMismatch {
            expected: basis_dim,
            actual: points.nrows(),
        });
    }
    Ok(())
}

fn write_point(row: &mut [f64], projections: ArrayView1<'_, f64>, scale: f64) {
    let d = projections.len();
    let (cos, sin) = row.split_at_mut(d);
    for ((c, s), &b) in cos.iter_mut().zip(sin.iter_mut()).zip(projections) {
        let (sb, cb) = b.sin_cos();
        *c = scale * cb;
        *s = scale * sb;
    }
}

fn column_norms(points: &ArrayView2<'_, f64>) -> Vec<f64> {
    points
        .columns()
        .into_iter()
        .map(|c| c.dot(&c).sqrt())
        .collect()
}

pub fn map_dataset<B: RandomBasis + ?Sized>(points: ArrayView2<'_, f64>, basis: &B) -> Result<MappedFeatures> {
    map_dataset_with(points, basis, Execution::default())
}

/// Production path: projections `⟨g_i, f_j⟩` via blocked matrix products.
/// Blocks are fixed-size, so `exec` does not affect the result.
pub fn map_dataset_with<B: RandomBasis + ?Sized>(
    points: ArrayView2<'_, f64>,
    basis: &B,
    exec: Execution,
) -> Result<MappedFeatures> {
    check_dim(&points, basis.dim())?;
    let size = basis.len();
    let n = points.ncols();
    let width = 2 * size;
    let scale = (1.0 / size as f64).sqrt();
    let g = basis.vectors();
    let mut rows = vec![0.0; n * width];
    par::for_each_chunk_mut(exec, &mut rows, POINT_BLOCK * width, |block, out| {
        let start = block * POINT_BLOCK;
        let count = out.len() / width;
        let chunk = points.slice(s![.., start..start + count]);
        // (count × d)·(d × D)
        let proj = chunk.t().dot(&g.t());
        for (row, p) in out.chunks_exact_mut(width).zip(proj.rows()) {
            write_point(row, p, scale);
        }
    });
    Ok(MappedFeatures::from_point_rows(
        rows,
        n,
        width,
        basis.basis_id(),
        column_norms(&points),
    ))
}

/// Simulation path: every projection is obtained by running circuit `i` on
/// the normalized point `d_j`, reading the first amplitude, and rescaling by
/// `w_i ‖f_j‖`. Needs the basis to retain its circuits; meant for small `D`.
pub fn map_dataset_by_simulation(points: ArrayView2<'_, f64>, basis: &FeatureBasis) -> Result<MappedFeatures> {
    check_dim(&points, basis.dim())?;
    let circuits = basis
        .circuits()
        .ok_or_else(|| Error::InvalidParameter("basis was stored without circuits".into()))?;
    let normalized = normalize_points(points);
    let size = basis.len();
    let width = 2 * size;
    let scale = (1.0 / size as f64).sqrt();
    let n = points.ncols();
    let mut rows = vec![0.0; n * width];
    let mut proj = ndarray::Array1::zeros(size);
    for (j, row) in rows.chunks_exact_mut(width).enumerate() {
        let state = StateVector::from_amplitudes(normalized.unit.column(j).to_vec())?;
        for (i, circuit) in circuits.iter().enumerate() {
            let a = qsim::first_amplitude(circuit, &state)?;
            proj[i] = a * basis.weights()[i] * normalized.norms[j];
        }
        write_point(row, proj.view(), scale);
    }
    Ok(MappedFeatures::from_point_rows(
        rows,
        n,
        width,
        basis.basis_id(),
        normalized.norms,
    ))
}

/// Like [`map_dataset_with`], but each amplitude `⟨u_i, d_j⟩` is replaced by
/// its `shots`-trial estimate. Column `j` draws from substream `j` of `seed`.
pub fn map_dataset_with_shots(
    points: ArrayView2<'_, f64>,
    basis: &FeatureBasis,
    shots: u64,
    seed: u64,
    exec: Execution,
) -> Result<MappedFeatures> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    check_dim(&points, basis.dim())?;
    let normalized = normalize_points(points);
    let size = basis.len();
    let n = points.ncols();
    let width = 2 * size;
    let scale = (1.0 / size as f64).sqrt();
    let u = basis.units();
    let weights = basis.weights();
    let mut rows = vec![0.0; n * width];
    let failures = std::sync::atomic::AtomicUsize::new(0);
    par::for_each_chunk_mut(exec, &mut rows, POINT_BLOCK * width, |block, out| {
        let start = block * POINT_BLOCK;
        let count = out.len() / width;
        let chunk = normalized.unit.slice(s![.., start..start + count]);
        let mut amps = chunk.t().dot(&u.t());
        for (k, (row, mut a)) in out
            .chunks_exact_mut(width)
            .zip(amps.axis_iter_mut(Axis(0)))
            .enumerate()
        {
            let j = start + k;
            let mut stream = rng::substream(seed, j as u64);
            for (x, &w) in a.iter_mut().zip(weights) {
                match qsim::estimate_amplitude(*x, shots, &mut stream) {
                    Ok(est) => *x = est * w * normalized.norms[j],
                    Err(_) => {
                        failures.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    }
                }
            }
            write_point(row, a.view(), scale);
        }
    });
    if failures.into_inner() > 0 {
        return Err(Error::InvalidParameter("amplitude estimation failed".into()));
    }
    Ok(MappedFeatures::from_point_rows(
        rows,
        n,
        width,
        basis.basis_id(),
        normalized.norms,
    ))
}

/// `c(f)` for a single point.
pub fn feature_vector<B: RandomBasis + ?Sized>(f: ArrayView1<'_, f64>, basis: &B) -> Result<Vec<f64>> {
    if f.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            actual: f.len(),
        });
    }
    let proj = basis.vectors().dot(&f);
    let mut out = vec![0.0; 2 * basis.len()];
    write_point(&mut out, proj.view(), (1.0 / basis.len() as f64).sqrt());
    Ok(out)
}

/// Kernel estimate `c(f₁)ᵀ c(f₂)`.
pub fn approx_kernel<B: RandomBasis + ?Sized>(
    f1: ArrayView1<'_, f64>,
    f2: ArrayView1<'_, f64>,
    basis: &B,
) -> Result<f64> {
    let c1 = feature_vector(f1, basis)?;
    let c2 = feature_vector(f2, basis)?;
    let k = c1.iter().zip(&c2).map(|(a, b)| a * b).sum::<f64>();
    debug_assert!({
        let diff = &f1 - &f2;
        let direct = basis.vectors().dot(&diff).mapv(f64::cos).sum() / basis.len() as f64;
        (direct - k).abs() < 1e-9
    });
    Ok(k)
}

const MAPPED_MAGIC: &[u8; 8] = b"QRFMAPPD";
pub const MAPPED_FORMAT_VERSION: u32 = 1;

// Layout: magic, u32 version, u64 rows (2D), u64 cols (N), u32 id length,
// id bytes, N f64 norms, then rows × cols f64 in column-major order; all
// little-endian.
impl MappedFeatures {
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(MAPPED_MAGIC)?;
        w.write_all(&MAPPED_FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.feature_count() as u64).to_le_bytes())?;
        w.write_all(&(self.point_count() as u64).to_le_bytes())?;
        w.write_all(&(self.basis_id.len() as u32).to_le_bytes())?;
        w.write_all(self.basis_id.as_bytes())?;
        for x in &self.norms {
            w.write_all(&x.to_le_bytes())?;
        }
        for point in self.points().rows() {
            for x in point {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let io = |e| Error::io("reading mapped features", e);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAPPED_MAGIC {
            return Err(Error::Format("not a mapped feature file".into()));
        }
        let version = read_u32(r).map_err(io)?;
        if version != MAPPED_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "mapped feature version {version}, expected {MAPPED_FORMAT_VERSION}"
            )));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8).map_err(io)?;
        let rows = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8).map_err(io)?;
        let cols = u64::from_le_bytes(b8) as usize;
        let id_len = read_u32(r).map_err(io)? as usize;
        let mut id = vec![0u8; id_len];
        r.read_exact(&mut id).map_err(io)?;
        let basis_id = String::from_utf8(id).map_err(|e| Error::Format(e.to_string()))?;
        let norms = read_f64s(r, cols).map_err(io)?;
        let data = read_f64s(r, rows * cols).map_err(io)?;
        Ok(MappedFeatures::from_point_rows(data, cols, rows, basis_id, norms))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)
            .map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)
            .map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        Self::read_from(&mut std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{sample_basis, AnsatzParams};
    use ndarray::{arr1, Array1};
    use rand::Rng;

    fn z_basis(k: usize) -> FeatureBasis {
        sample_basis(&AnsatzParams {
            qubits: k,
            layers: 0,
            rotation_mean: 0.0,
            rotation_std: 0.0,
            weight_std: 0.0,
            basis_size: 1,
            master_seed: 0,
        })
        .unwrap()
    }

    fn random_points(d: usize, n: usize, seed: u64) -> Array2<f64> {
        let mut r = rng::stream(seed);
        Array2::from_shape_simple_fn((d, n), || r.random_range(-1.0..1.0))
    }

    #[test]
    fn normalize_simple_and_zero() {
        let f = ndarray::arr2(&[[3.0, 0.0], [4.0, 0.0], [0.0, 0.0], [0.0, 0.0]]);
        let n = normalize_points(f.view());
        assert_eq!(n.unit.column(0).to_vec(), vec![0.6, 0.8, 0.0, 0.0]);
        assert_eq!(n.unit.column(1).to_vec(), vec![0.0; 4]);
        assert_eq!(n.norms, vec![5.0, 0.0]);
        assert_eq!(n.zero_count, 1);
    }

    #[test]
    fn normalize_random_columns_unit() {
        let f = random_points(128, 10, 1);
        let n = normalize_points(f.view());
        for c in n.unit.columns() {
            assert!((c.dot(&c) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn z_basis_on_z() {
        let basis = z_basis(3);
        let mut f = Array2::zeros((8, 1));
        f[[0, 0]] = 1.0;
        let m = map_dataset(f.view(), &basis).unwrap();
        assert_eq!(m.matrix().column(0).to_vec(), vec![1f64.cos(), 1f64.sin()]);
    }

    #[test]
    fn orthogonal_point_gives_unit_cos() {
        let basis = z_basis(2);
        let f = ndarray::arr2(&[[0.0], [1.0], [-2.0], [0.5]]);
        let m = map_dataset(f.view(), &basis).unwrap();
        assert_eq!(m.matrix().column(0).to_vec(), vec![1.0, 0.0]);
    }

    #[test]
    fn zero_point_maps_to_cos_one() {
        let basis = sample_basis(&AnsatzParams {
            qubits: 3,
            layers: 3,
            basis_size: 4,
            ..AnsatzParams::default()
        })
        .unwrap();
        let f = Array2::zeros((8, 2));
        let m = map_dataset(f.view(), &basis).unwrap();
        assert_eq!(m.zero_norm_count(), 2);
        for x in m.matrix().slice(s![..4, ..]) {
            assert_eq!(*x, 0.5);
        }
        for x in m.matrix().slice(s![4.., ..]) {
            assert_eq!(*x, 0.0);
        }
    }

    #[test]
    fn dimension_checks() {
        let basis = z_basis(3);
        let f = Array2::zeros((7, 2));
        assert!(map_dataset(f.view(), &basis).is_err());
        let padded = pad_rows(f.view(), 8).unwrap();
        assert_eq!(padded.dim(), (8, 2));
        assert!(pad_rows(f.view(), 4).is_err());
        assert!(approx_kernel(arr1(&[1.0]).view(), arr1(&[1.0]).view(), &basis).is_err());
    }

    #[test]
    fn simulation_path_matches_matrix_path() {
        let basis = sample_basis(&AnsatzParams {
            qubits: 4,
            layers: 8,
            basis_size: 16,
            master_seed: 3,
            ..AnsatzParams::default()
        })
        .unwrap();
        let f = random_points(16, 8, 2);
        let a = map_dataset(f.view(), &basis).unwrap();
        let b = map_dataset_by_simulation(f.view(), &basis).unwrap();
        for (x, y) in a.matrix().iter().zip(b.matrix()) {
            assert!((x - y).abs() < 1e-9);
        }
        let lean = basis.without_circuits();
        assert!(map_dataset_by_simulation(f.view(), &lean).is_err());
    }

    #[test]
    fn execution_mode_does_not_change_features() {
        let basis = sample_gaussian_basis(8, 40, 1.0, 4).unwrap();
        let f = random_points(8, 700, 5);
        let a = map_dataset_with(f.view(), &basis, Execution::Sequential).unwrap();
        let b = map_dataset_with(f.view(), &basis, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn columns_unit_and_entries_bounded() {
        let basis = sample_gaussian_basis(8, 50, 2.0, 4).unwrap();
        let f = random_points(8, 30, 6);
        let m = map_dataset(f.view(), &basis).unwrap();
        let bound = (1.0f64 / 50.0).sqrt();
        for c in m.matrix().columns() {
            assert!((c.dot(&c) - 1.0).abs() < 1e-9);
            assert!(c.iter().all(|x| x.abs() <= bound + 1e-15));
        }
    }

    #[test]
    fn shots_path_converges_to_exact() {
        let basis = sample_basis(&AnsatzParams {
            qubits: 3,
            layers: 4,
            basis_size: 8,
            master_seed: 1,
            ..AnsatzParams::default()
        })
        .unwrap();
        let f = random_points(8, 5, 7);
        let exact = map_dataset(f.view(), &basis).unwrap();
        let noisy = map_dataset_with_shots(f.view(), &basis, 1_000_000, 9, Execution::default()).unwrap();
        let err = exact
            .matrix()
            .iter()
            .zip(noisy.matrix())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 0.02, "{err}");
        let again = map_dataset_with_shots(f.view(), &basis, 1_000_000, 9, Execution::Sequential).unwrap();
        assert_eq!(noisy, again);
        assert!(map_dataset_with_shots(f.view(), &basis, 0, 9, Execution::default()).is_err());
    }

    #[test]
    fn gaussian_basis_determinism_and_validation() {
        let a = sample_gaussian_basis(2, 1, 1.0, 77).unwrap();
        let b = sample_gaussian_basis(2, 1, 1.0, 77).unwrap();
        assert_eq!(a, b);
        assert!(sample_gaussian_basis(2, 1, 0.0, 77).is_err());
        assert!(sample_gaussian_basis(0, 1, 1.0, 77).is_err());
    }

    #[test]
    fn gaussian_basis_moments() {
        let gamma = 1.5;
        let b = sample_gaussian_basis(8, 5000, gamma, 3).unwrap();
        let v = b.vectors();
        let n = v.len() as f64;
        let mean = v.sum() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        assert!(mean.abs() <= 3.0 * gamma / n.sqrt(), "{mean}");
        assert!((var / (gamma * gamma) - 1.0).abs() < 0.1, "{var}");
    }

    #[test]
    fn kernel_of_identical_points_is_one() {
        let b = sample_gaussian_basis(4, 300, 1.0, 8).unwrap();
        let f = arr1(&[0.3, -0.2, 1.0, 0.0]);
        let k = approx_kernel(f.view(), f.view(), &b).unwrap();
        assert!((k - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_is_symmetric_and_shift_invariant() {
        let b = sample_gaussian_basis(4, 300, 1.0, 8).unwrap();
        let f1 = arr1(&[0.3, -0.2, 1.0, 0.0]);
        let f2 = arr1(&[-0.1, 0.4, 0.2, 0.7]);
        let shift = arr1(&[0.05, -0.3, 0.11, 0.2]);
        let k12 = approx_kernel(f1.view(), f2.view(), &b).unwrap();
        let k21 = approx_kernel(f2.view(), f1.view(), &b).unwrap();
        assert!((k12 - k21).abs() < 1e-15);
        let s1: Array1<f64> = &f1 + &shift;
        let s2: Array1<f64> = &f2 + &shift;
        let ks = approx_kernel(s1.view(), s2.view(), &b).unwrap();
        assert!((k12 - ks).abs() < 1e-12);
    }

    #[test]
    fn kernel_matches_rbf_at_large_d() {
        // MC error sd ≈ 1/√(2D) ≈ 0.003 at D = 50000
        let b = sample_gaussian_basis(3, 50_000, 1.0, 21).unwrap();
        let f1 = arr1(&[0.0, 0.0, 0.0]);
        for r in [0.25, 0.5, 1.0, 1.5] {
            let f2 = arr1(&[r, 0.0, 0.0]);
            let k = approx_kernel(f1.view(), f2.view(), &b).unwrap();
            assert!((k - (-r * r / 2.0f64).exp()).abs() < 0.02, "r={r} k={k}");
        }
    }

    #[test]
    fn mapped_file_round_trip() {
        let b = sample_gaussian_basis(8, 6, 1.0, 4).unwrap();
        let f = random_points(8, 5, 2);
        let m = map_dataset(f.view(), &b).unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        assert_eq!(MappedFeatures::read_from(&mut buf.as_slice()).unwrap(), m);
        buf[9] = 7;
        assert!(MappedFeatures::read_from(&mut buf.as_slice()).is_err());
    }
}
