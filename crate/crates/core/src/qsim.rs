//! Real-amplitude statevector simulator for the {Ry, CNOT} gate set.
//!
//! Both gates have real matrix entries, so states are stored as `f64`
//! amplitudes. Qubit `j` (1-based) is embedded as
//! `1_{2^{j-1}} ⊗ G ⊗ 1_{2^{k-j}}`, i.e. qubit 1 is the most significant bit
//! of the basis index.
//!
//! The rotation uses the matrix `[[cos α, sin α], [-sin α, cos α]]`.

use ndarray::{linalg::kron, Array2};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest register for which [`dense_unitary`] will build a matrix.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Largest register the simulator accepts at all.
pub const MAX_QUBITS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "gate", rename_all = "snake_case")]
pub enum Gate {
    /// Rotation about y on a 1-based qubit index.
    RotationY { qubit: usize, angle: f64 },
    /// Flips `target` when `control` is set. 1-based indices.
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn ry(qubit: usize, angle: f64) -> Self {
        Gate::RotationY { qubit, angle }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn validate(&self, qubits: usize) -> Result<()> {
        let in_range = |q: usize| (1..=qubits).contains(&q);
        match *self {
            Gate::RotationY { qubit, angle } => {
                if !in_range(qubit) {
                    return Err(Error::InvalidGate(format!(
                        "rotation qubit {qubit} outside 1..={qubits}"
                    )));
                }
                if !angle.is_finite() {
                    return Err(Error::InvalidGate(format!("non-finite angle {angle}")));
                }
            }
            Gate::Cnot { control, target } => {
                if !in_range(control) || !in_range(target) {
                    return Err(Error::InvalidGate(format!(
                        "cnot ({control}, {target}) outside 1..={qubits}"
                    )));
                }
                if control == target {
                    return Err(Error::InvalidGate(format!(
                        "cnot control equals target ({control})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The inverse gate: Ry(α)⁻¹ = Ry(−α), CNOT is self-inverse.
    pub fn inverse(&self) -> Self {
        match *self {
            Gate::RotationY { qubit, angle } => Gate::RotationY {
                qubit,
                angle: -angle,
            },
            cnot @ Gate::Cnot { .. } => cnot,
        }
    }
}

/// A validated gate sequence; gates apply in list order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        check_qubits(qubits)?;
        for g in &gates {
            g.validate(qubits)?;
        }
        Ok(Circuit { qubits, gates })
    }

    pub fn empty(qubits: usize) -> Result<Self> {
        Self::new(qubits, Vec::new())
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Reversed gate order with every gate inverted.
    pub fn adjoint(&self) -> Circuit {
        Circuit {
            qubits: self.qubits,
            gates: self.gates.iter().rev().map(Gate::inverse).collect(),
        }
    }
}

fn check_qubits(qubits: usize) -> Result<()> {
    if qubits == 0 || qubits > MAX_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "qubit count {qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amplitudes: Vec<f64>,
}

impl StateVector {
    pub fn new(qubits: usize, amplitudes: Vec<f64>) -> Result<Self> {
        check_qubits(qubits)?;
        if amplitudes.len() != 1 << qubits {
            return Err(Error::DimensionMismatch {
                expected: 1 << qubits,
                actual: amplitudes.len(),
            });
        }
        Ok(StateVector { qubits, amplitudes })
    }

    /// Builds a state from amplitudes whose length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<f64>) -> Result<Self> {
        let n = amplitudes.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "state length {n} is not a power of two >= 2"
            )));
        }
        Self::new(n.trailing_zeros() as usize, amplitudes)
    }

    /// The first computational basis state `z = (1, 0, …, 0)`.
    pub fn zero(qubits: usize) -> Result<Self> {
        check_qubits(qubits)?;
        let mut amplitudes = vec![0.0; 1 << qubits];
        amplitudes[0] = 1.0;
        Ok(StateVector { qubits, amplitudes })
    }

    pub fn basis(qubits: usize, index: usize) -> Result<Self> {
        let mut s = Self::zero(qubits)?;
        if index >= s.amplitudes.len() {
            return Err(Error::DimensionMismatch {
                expected: s.amplitudes.len(),
                actual: index,
            });
        }
        s.amplitudes[0] = 0.0;
        s.amplitudes[index] = 1.0;
        Ok(s)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<f64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// Applies `gate` in place to a `2^qubits` amplitude buffer.
///
/// The gate must already be valid for `qubits`.
pub fn apply_gate_in_place(amplitudes: &mut [f64], qubits: usize, gate: &Gate) {
    debug_assert_eq!(amplitudes.len(), 1 << qubits);
    match *gate {
        Gate::RotationY { qubit, angle } => {
            let stride = 1usize << (qubits - qubit);
            let (s, c) = angle.sin_cos();
            for block in amplitudes.chunks_exact_mut(2 * stride) {
                let (lo, hi) = block.split_at_mut(stride);
                for (x0, x1) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (a, b) = (*x0, *x1);
                    *x0 = c * a + s * b;
                    *x1 = -s * a + c * b;
                }
            }
        }
        Gate::Cnot { control, target } => {
            let cbit = 1usize << (qubits - control);
            let tbit = 1usize << (qubits - target);
            for i in 0..amplitudes.len() {
                // visit each swapped pair once, from its target-clear member
                if i & cbit != 0 && i & tbit == 0 {
                    amplitudes.swap(i, i | tbit);
                }
            }
        }
    }
}

pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    gate.validate(state.qubits)?;
    let mut out = state.clone();
    apply_gate_in_place(&mut out.amplitudes, out.qubits, gate);
    Ok(out)
}

fn check_matching(circuit: &Circuit, len: usize) -> Result<()> {
    if len != circuit.dim() {
        return Err(Error::DimensionMismatch {
            expected: circuit.dim(),
            actual: len,
        });
    }
    Ok(())
}

/// Runs `circuit` on an amplitude buffer in place.
pub fn run_in_place(circuit: &Circuit, amplitudes: &mut [f64]) -> Result<()> {
    check_matching(circuit, amplitudes.len())?;
    for g in &circuit.gates {
        apply_gate_in_place(amplitudes, circuit.qubits, g);
    }
    Ok(())
}

pub fn run_circuit(input: &StateVector, circuit: &Circuit) -> Result<StateVector> {
    let mut out = input.clone();
    run_in_place(circuit, &mut out.amplitudes)?;
    Ok(out)
}

/// The 2×2 rotation matrix.
pub fn ry_matrix(angle: f64) -> Array2<f64> {
    let (s, c) = angle.sin_cos();
    ndarray::arr2(&[[c, s], [-s, c]])
}

/// `2^k × 2^k` matrix of a single gate, built from Kronecker products.
pub fn embedded_gate_matrix(qubits: usize, gate: &Gate) -> Result<Array2<f64>> {
    gate.validate(qubits)?;
    let eye = |n: usize| Array2::<f64>::eye(n);
    Ok(match *gate {
        Gate::RotationY { qubit, angle } => {
            let left = kron(&eye(1 << (qubit - 1)), &ry_matrix(angle));
            kron(&left, &eye(1 << (qubits - qubit)))
        }
        Gate::Cnot { control, target } => {
            // |0⟩⟨0|_c ⊗ 1 + |1⟩⟨1|_c ⊗ X_t
            let p0 = ndarray::arr2(&[[1.0, 0.0], [0.0, 0.0]]);
            let p1 = ndarray::arr2(&[[0.0, 0.0], [0.0, 1.0]]);
            let x = ndarray::arr2(&[[0.0, 1.0], [1.0, 0.0]]);
            let factor = |q: usize, on: bool| {
                if q == control {
                    if on {
                        p1.clone()
                    } else {
                        p0.clone()
                    }
                } else if q == target && on {
                    x.clone()
                } else {
                    eye(2)
                }
            };
            let mut off = Array2::<f64>::eye(1);
            let mut on = Array2::<f64>::eye(1);
            for q in 1..=qubits {
                off = kron(&off, &factor(q, false));
                on = kron(&on, &factor(q, true));
            }
            off + on
        }
    })
}

/// Explicit operator `U = G_n ⋯ G_1` for a circuit whose gates are `G_1..G_n`.
pub fn dense_unitary(circuit: &Circuit) -> Result<Array2<f64>> {
    if circuit.qubits > MAX_DENSE_QUBITS {
        return Err(Error::Capacity(format!(
            "dense operator for {} qubits exceeds the {MAX_DENSE_QUBITS}-qubit limit",
            circuit.qubits
        )));
    }
    let mut u = Array2::<f64>::eye(circuit.dim());
    for g in &circuit.gates {
        u = embedded_gate_matrix(circuit.qubits, g)?.dot(&u);
    }
    Ok(u)
}

/// `u = U†·z`: the first row of the circuit's operator, obtained by running
/// the adjoint circuit on `z`.
pub fn first_row_vector(circuit: &Circuit) -> Vec<f64> {
    let mut amps = vec![0.0; circuit.dim()];
    amps[0] = 1.0;
    for g in circuit.gates.iter().rev() {
        apply_gate_in_place(&mut amps, circuit.qubits, &g.inverse());
    }
    amps
}

/// `(U·d)_1`, read off the simulated output state.
pub fn first_amplitude(circuit: &Circuit, input: &StateVector) -> Result<f64> {
    let mut amps = input.amplitudes.clone();
    run_in_place(circuit, &mut amps)?;
    Ok(amps[0])
}

/// Estimate of an amplitude `a` from `shots` Bernoulli(a²) trials, with the
/// sign taken from `a`.
pub fn estimate_amplitude<R: Rng + ?Sized>(amplitude: f64, shots: u64, rng: &mut R) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let p = (amplitude * amplitude).clamp(0.0, 1.0);
    let hits = Binomial::new(shots, p)
        .map_err(|e| Error::InvalidParameter(format!("binomial({shots}, {p}): {e}")))?
        .sample(rng);
    let p_hat = hits as f64 / shots as f64;
    Ok(amplitude.signum() * p_hat.sqrt())
}

/// Shot-based estimate of [`first_amplitude`].
pub fn estimate_first_amplitude<R: Rng + ?Sized>(
    circuit: &Circuit,
    input: &StateVector,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let a = first_amplitude(circuit, input)?;
    estimate_amplitude(a, shots, rng)
}
