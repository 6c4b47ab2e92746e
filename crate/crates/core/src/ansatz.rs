//! Random circuit family and the feature basis sampled from it.
//!
//! A circuit on `k` qubits starts with one Ry per qubit, followed by `L`
//! layers. Each layer picks an ordered (control, target) pair uniformly,
//! rotates the target, rotates the control, then applies the CNOT. All angles
//! are drawn from `N(m, σ)`. Each circuit also gets a length `w ~ N(1, σ_w)`
//! and contributes the vector `g = w · u`, where `u` is the first row of the
//! circuit's operator.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::par::{self, Execution};
use crate::qsim::{self, Circuit, Gate};
use crate::rng::{self, StreamRng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnsatzParams {
    pub qubits: usize,
    pub layers: usize,
    pub rotation_mean: f64,
    pub rotation_std: f64,
    pub weight_std: f64,
    pub basis_size: usize,
    pub master_seed: u64,
}

impl Default for AnsatzParams {
    fn default() -> Self {
        AnsatzParams {
            qubits: 7,
            layers: 14,
            rotation_mean: 0.5 * std::f64::consts::PI,
            rotation_std: 0.1,
            weight_std: 1.0,
            basis_size: 8000,
            master_seed: 0,
        }
    }
}

impl AnsatzParams {
    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn gates_per_circuit(&self) -> usize {
        self.qubits + 3 * self.layers
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.qubits == 0 || self.qubits > qsim::MAX_QUBITS {
            return bad(format!("qubits must be in 1..={}", qsim::MAX_QUBITS));
        }
        if self.basis_size == 0 {
            return bad("basis size must be positive".into());
        }
        if !(self.rotation_std >= 0.0 && self.rotation_std.is_finite()) {
            return bad(format!("rotation std {} must be >= 0", self.rotation_std));
        }
        if !(self.weight_std >= 0.0 && self.weight_std.is_finite()) {
            return bad(format!("weight std {} must be >= 0", self.weight_std));
        }
        if !self.rotation_mean.is_finite() {
            return bad("rotation mean must be finite".into());
        }
        if self.qubits < 2 && self.layers > 0 {
            return bad("CNOT layers need at least two qubits".into());
        }
        Ok(())
    }
}

fn normal(mean: f64, std: f64) -> Result<Normal<f64>> {
    Normal::new(mean, std).map_err(|e| Error::InvalidParameter(format!("N({mean}, {std}): {e}")))
}

/// Draws one circuit from the ansatz distribution.
pub fn sample_circuit<R: Rng + ?Sized>(params: &AnsatzParams, rng: &mut R) -> Result<Circuit> {
    params.validate()?;
    let k = params.qubits;
    let angle = normal(params.rotation_mean, params.rotation_std)?;
    let mut gates = Vec::with_capacity(params.gates_per_circuit());
    for q in 1..=k {
        gates.push(Gate::ry(q, angle.sample(rng)));
    }
    for _ in 0..params.layers {
        let control = rng.random_range(1..=k);
        let mut target = rng.random_range(1..k);
        if target >= control {
            target += 1;
        }
        gates.push(Gate::ry(target, angle.sample(rng)));
        gates.push(Gate::ry(control, angle.sample(rng)));
        gates.push(Gate::cnot(control, target));
    }
    Circuit::new(k, gates)
}

/// D sampled circuits, their unit first-row vectors `u_i`, lengths `w_i`,
/// and the scaled vectors `g_i = w_i u_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBasis {
    params: AnsatzParams,
    units: Array2<f64>,
    weights: Vec<f64>,
    vectors: Array2<f64>,
    circuits: Option<Vec<Circuit>>,
}

struct Sampled {
    circuit: Circuit,
    unit: Vec<f64>,
    weight: f64,
}

fn sample_member(params: &AnsatzParams, index: usize, weight_dist: &Normal<f64>) -> Result<Sampled> {
    let mut stream: StreamRng = rng::substream(params.master_seed, index as u64);
    let circuit = sample_circuit(params, &mut stream)?;
    let weight = weight_dist.sample(&mut stream);
    let unit = qsim::first_row_vector(&circuit);
    Ok(Sampled {
        circuit,
        unit,
        weight,
    })
}

/// Samples a basis with the default execution mode.
pub fn sample_basis(params: &AnsatzParams) -> Result<FeatureBasis> {
    sample_basis_with(params, Execution::default())
}

/// Samples `basis_size` circuits, each from its own substream of
/// `master_seed`, so the result does not depend on `exec`.
pub fn sample_basis_with(params: &AnsatzParams, exec: Execution) -> Result<FeatureBasis> {
    params.validate()?;
    let weight_dist = normal(1.0, params.weight_std)?;
    let members = par::map_range(exec, params.basis_size, |i| {
        sample_member(params, i, &weight_dist)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let dim = params.dim();
    let mut units = Array2::zeros((params.basis_size, dim));
    let mut weights = Vec::with_capacity(params.basis_size);
    let mut circuits = Vec::with_capacity(params.basis_size);
    for (i, m) in members.into_iter().enumerate() {
        units.row_mut(i).assign(&ndarray::ArrayView1::from(&m.unit));
        weights.push(m.weight);
        circuits.push(m.circuit);
    }
    FeatureBasis::from_parts(params.clone(), units, weights, Some(circuits))
}

impl FeatureBasis {
    fn from_parts(
        params: AnsatzParams,
        units: Array2<f64>,
        weights: Vec<f64>,
        circuits: Option<Vec<Circuit>>,
    ) -> Result<Self> {
        if units.dim() != (params.basis_size, params.dim()) {
            return Err(Error::Format(format!(
                "basis matrix is {:?}, expected ({}, {})",
                units.dim(),
                params.basis_size,
                params.dim()
            )));
        }
        if weights.len() != params.basis_size {
            return Err(Error::DimensionMismatch {
                expected: params.basis_size,
                actual: weights.len(),
            });
        }
        let mut vectors = units.clone();
        for (mut row, &w) in vectors.rows_mut().into_iter().zip(&weights) {
            row *= w;
        }
        Ok(FeatureBasis {
            params,
            units,
            weights,
            vectors,
            circuits,
        })
    }

    pub fn params(&self) -> &AnsatzParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.units.ncols()
    }

    /// Rows are the unit vectors `u_i`.
    pub fn units(&self) -> ArrayView2<'_, f64> {
        self.units.view()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Rows are `g_i = w_i u_i`.
    pub fn vectors(&self) -> ArrayView2<'_, f64> {
        self.vectors.view()
    }

    pub fn circuits(&self) -> Option<&[Circuit]> {
        self.circuits.as_deref()
    }

    /// Drops the retained circuits; the vectors are enough for classification.
    pub fn without_circuits(mut self) -> Self {
        self.circuits = None;
        self
    }

    /// Hex digest of the weights and unit vectors.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"quantum");
        for w in &self.weights {
            h.update(w.to_le_bytes());
        }
        for x in self.units.iter() {
            h.update(x.to_le_bytes());
        }
        hex::encode(&h.finalize()[..8])
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

const BASIS_MAGIC: &[u8; 8] = b"QRFBASIS";
pub const BASIS_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct BasisHeader {
    version: u32,
    params: AnsatzParams,
    count: usize,
    dim: usize,
    has_circuits: bool,
}

// Layout: magic, u32 version, u32 header length, JSON header, then
// little-endian f64 weights, f64 unit vectors (row-major), and optionally
// per circuit a u32 gate count followed by (u8 tag, u16, u16, f64) records.
impl FeatureBasis {
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let header = BasisHeader {
            version: BASIS_FORMAT_VERSION,
            params: self.params.clone(),
            count: self.len(),
            dim: self.dim(),
            has_circuits: self.circuits.is_some(),
        };
        let header = serde_json::to_vec(&header)?;
        w.write_all(BASIS_MAGIC)?;
        w.write_all(&BASIS_FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(header.len() as u32).to_le_bytes())?;
        w.write_all(&header)?;
        for x in self.weights.iter().chain(self.units.iter()) {
            w.write_all(&x.to_le_bytes())?;
        }
        if let Some(circuits) = &self.circuits {
            for c in circuits {
                w.write_all(&(c.len() as u32).to_le_bytes())?;
                for g in c.gates() {
                    let (tag, a, b, angle) = match *g {
                        Gate::RotationY { qubit, angle } => (0u8, qubit, 0, angle),
                        Gate::Cnot { control, target } => (1u8, control, target, 0.0),
                    };
                    w.write_all(&[tag])?;
                    w.write_all(&(a as u16).to_le_bytes())?;
                    w.write_all(&(b as u16).to_le_bytes())?;
                    w.write_all(&angle.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let io = |e| Error::io("reading feature basis", e);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != BASIS_MAGIC {
            return Err(Error::Format("not a feature basis file".into()));
        }
        let version = read_u32(r).map_err(io)?;
        if version != BASIS_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "feature basis version {version}, expected {BASIS_FORMAT_VERSION}"
            )));
        }
        let len = read_u32(r).map_err(io)? as usize;
        let mut header = vec![0u8; len];
        r.read_exact(&mut header).map_err(io)?;
        let header: BasisHeader = serde_json::from_slice(&header)?;
        header.params.validate()?;
        let weights = read_f64s(r, header.count).map_err(io)?;
        let units = read_f64s(r, header.count * header.dim).map_err(io)?;
        let units = Array2::from_shape_vec((header.count, header.dim), units)
            .map_err(|e| Error::Format(e.to_string()))?;
        let circuits = if header.has_circuits {
            let mut all = Vec::with_capacity(header.count);
            for _ in 0..header.count {
                let n = read_u32(r).map_err(io)? as usize;
                let mut gates = Vec::with_capacity(n);
                for _ in 0..n {
                    let mut rec = [0u8; 13];
                    r.read_exact(&mut rec).map_err(io)?;
                    let a = u16::from_le_bytes([rec[1], rec[2]]) as usize;
                    let b = u16::from_le_bytes([rec[3], rec[4]]) as usize;
                    let angle = f64::from_le_bytes(rec[5..13].try_into().unwrap());
                    gates.push(match rec[0] {
                        0 => Gate::ry(a, angle),
                        1 => Gate::cnot(a, b),
                        t => return Err(Error::Format(format!("unknown gate tag {t}"))),
                    });
                }
                all.push(Circuit::new(header.params.qubits, gates)?);
            }
            Some(all)
        } else {
            None
        };
        FeatureBasis::from_parts(header.params, units, weights, circuits)
    }
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_f64s<R: Read>(r: &mut R, n: usize) -> std::io::Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize, l: usize) -> AnsatzParams {
        AnsatzParams {
            qubits: k,
            layers: l,
            basis_size: 20,
            master_seed: 5,
            ..AnsatzParams::default()
        }
    }

    #[test]
    fn no_layers_means_one_rotation_per_qubit() {
        let c = sample_circuit(&params(3, 0), &mut rng::stream(1)).unwrap();
        assert_eq!(c.len(), 3);
        for (i, g) in c.gates().iter().enumerate() {
            assert!(matches!(g, Gate::RotationY { qubit, .. } if *qubit == i + 1));
        }
    }

    #[test]
    fn layer_pattern() {
        let c = sample_circuit(&params(3, 3), &mut rng::stream(2)).unwrap();
        assert_eq!(c.len(), 12);
        for layer in c.gates()[3..].chunks(3) {
            let (Gate::RotationY { qubit: t, .. }, Gate::RotationY { qubit: ctl, .. }, Gate::Cnot { control, target }) =
                (layer[0], layer[1], layer[2])
            else {
                panic!("unexpected layer {layer:?}");
            };
            assert_eq!((ctl, t), (control, target));
            assert_ne!(control, target);
        }
    }

    #[test]
    fn zero_spread_zero_mean_gives_z() {
        let p = AnsatzParams {
            rotation_mean: 0.0,
            rotation_std: 0.0,
            ..params(4, 6)
        };
        let c = sample_circuit(&p, &mut rng::stream(3)).unwrap();
        assert!(c.gates().iter().all(|g| match g {
            Gate::RotationY { angle, .. } => *angle == 0.0,
            _ => true,
        }));
        let mut z = vec![0.0; 16];
        z[0] = 1.0;
        assert_eq!(qsim::first_row_vector(&c), z);
    }

    #[test]
    fn single_qubit_with_layers_rejected() {
        assert!(sample_circuit(&params(1, 1), &mut rng::stream(0)).is_err());
        assert!(sample_circuit(&params(1, 0), &mut rng::stream(0)).is_ok());
    }

    #[test]
    fn invalid_params_rejected() {
        for p in [
            AnsatzParams { basis_size: 0, ..params(2, 1) },
            AnsatzParams { rotation_std: -1.0, ..params(2, 1) },
            AnsatzParams { weight_std: f64::NAN, ..params(2, 1) },
            AnsatzParams { qubits: 0, ..params(2, 1) },
        ] {
            assert!(sample_basis(&p).is_err(), "{p:?}");
        }
    }

    #[test]
    fn degenerate_single_member_basis() {
        let p = AnsatzParams {
            qubits: 3,
            layers: 0,
            rotation_mean: 0.0,
            rotation_std: 0.0,
            weight_std: 0.0,
            basis_size: 1,
            master_seed: 9,
        };
        let b = sample_basis(&p).unwrap();
        assert_eq!(b.weights(), &[1.0]);
        let mut z = vec![0.0; 8];
        z[0] = 1.0;
        assert_eq!(b.vectors().row(0).to_vec(), z);
    }

    #[test]
    fn rows_are_unit_and_scaled() {
        let b = sample_basis(&params(5, 10)).unwrap();
        for (i, u) in b.units().rows().into_iter().enumerate() {
            let n = u.dot(&u).sqrt();
            assert!((n - 1.0).abs() < 1e-9);
            for (g, x) in b.vectors().row(i).iter().zip(u) {
                assert_eq!(*g, x * b.weights()[i]);
            }
        }
    }

    #[test]
    fn weight_mean_within_three_standard_errors() {
        let p = AnsatzParams {
            qubits: 3,
            layers: 6,
            rotation_mean: std::f64::consts::FRAC_PI_2,
            rotation_std: 0.1,
            weight_std: 1.0,
            basis_size: 100,
            master_seed: 42,
        };
        let b = sample_basis(&p).unwrap();
        let mean = b.weights().iter().sum::<f64>() / 100.0;
        assert!((mean - 1.0).abs() <= 3.0 * 1.0 / 10.0, "{mean}");
    }

    #[test]
    fn execution_mode_does_not_change_basis() {
        let p = params(6, 12);
        let a = sample_basis_with(&p, Execution::Sequential).unwrap();
        let b = sample_basis_with(&p, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.fingerprint(), b.fingerprint());
        let c = sample_basis(&AnsatzParams { master_seed: 6, ..p }).unwrap();
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn component_mean_near_zero_for_wide_angles() {
        let p = AnsatzParams {
            qubits: 4,
            layers: 8,
            rotation_mean: 0.0,
            rotation_std: 50.0,
            weight_std: 0.0,
            basis_size: 2000,
            master_seed: 17,
        };
        let b = sample_basis(&p).unwrap();
        let n = b.units().len() as f64;
        let mean = b.units().sum() / n;
        assert!(mean.abs() <= 3.0 / n.sqrt(), "{mean}");
    }

    #[test]
    fn file_round_trip() {
        let b = sample_basis(&params(3, 4)).unwrap();
        let mut buf = Vec::new();
        b.write_to(&mut buf).unwrap();
        let back = FeatureBasis::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, b);

        let lean = b.clone().without_circuits();
        let mut buf = Vec::new();
        lean.write_to(&mut buf).unwrap();
        let back = FeatureBasis::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, lean);
        assert_eq!(back.fingerprint(), b.fingerprint());

        buf[0] = b'X';
        assert!(matches!(
            FeatureBasis::read_from(&mut buf.as_slice()),
            Err(Error::Format(_))
        ));
    }
}
