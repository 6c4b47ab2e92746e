use ndarray::{Array1, Array2};
use proptest::prelude::*;
use qrf_core::ansatz::{self, AnsatzParams};
use qrf_core::dataio::{self, RawDataset};
use qrf_core::featmap;
use qrf_core::linclf::{self, LinearModel};
use qrf_core::qsim::{self, Circuit, Gate, StateVector};

fn gate(qubits: usize) -> impl Strategy<Value = Gate> {
    prop_oneof![
        (1..=qubits, -7.0..7.0f64).prop_map(|(q, a)| Gate::ry(q, a)),
        (1..=qubits, 1..qubits).prop_map(move |(c, shift)| Gate::cnot(c, (c - 1 + shift) % qubits + 1)),
    ]
}

fn circuit(max_qubits: usize) -> impl Strategy<Value = Circuit> {
    (2..=max_qubits).prop_flat_map(|k| prop::collection::vec(gate(k), 0..40).prop_map(move |g| Circuit::new(k, g).unwrap()))
}

fn circuit_and_state(max_qubits: usize) -> impl Strategy<Value = (Circuit, Vec<f64>)> {
    circuit(max_qubits).prop_flat_map(|c| {
        let n = c.dim();
        (Just(c), prop::collection::vec(-1.0..1.0f64, n))
    })
}

fn model(m: usize) -> LinearModel {
    LinearModel {
        version: linclf::MODEL_FORMAT_VERSION,
        weights: vec![0.0; m],
        bias: 0.0,
        reg_c: 1.0,
        tol: 1e-4,
        max_iters: 1,
        training_iters: 0,
        final_objective: 0.0,
        converged: true,
        objective_trace: vec![],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circuits_preserve_norm((c, v) in circuit_and_state(8)) {
        let s = StateVector::new(c.qubits(), v).unwrap();
        let out = qsim::run_circuit(&s, &c).unwrap();
        prop_assert!((out.norm() - s.norm()).abs() < 1e-12);
    }

    #[test]
    fn simulation_matches_dense_operator((c, v) in circuit_and_state(4)) {
        let u = qsim::dense_unitary(&c).unwrap();
        let expected = u.dot(&Array1::from(v.clone()));
        let out = qsim::run_circuit(&StateVector::new(c.qubits(), v).unwrap(), &c).unwrap();
        for (a, b) in out.amplitudes().iter().zip(expected.iter()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn adjoint_undoes_circuit((c, v) in circuit_and_state(7)) {
        let s = StateVector::new(c.qubits(), v.clone()).unwrap();
        let back = qsim::run_circuit(&qsim::run_circuit(&s, &c).unwrap(), &c.adjoint()).unwrap();
        for (a, b) in back.amplitudes().iter().zip(&v) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn first_amplitude_is_inner_product((c, v) in circuit_and_state(7)) {
        let u = qsim::first_row_vector(&c);
        prop_assert!((u.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        let expected: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
        let got = qsim::first_amplitude(&c, &StateVector::new(c.qubits(), v).unwrap()).unwrap();
        prop_assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn basis_vectors_have_weight_norm(seed in any::<u64>(), k in 2usize..6, layers in 0usize..10) {
        let p = AnsatzParams { qubits: k, layers, basis_size: 20, master_seed: seed, ..AnsatzParams::default() };
        let b = ansatz::sample_basis(&p).unwrap();
        for (row, w) in b.vectors().rows().into_iter().zip(b.weights()) {
            prop_assert!((row.dot(&row).sqrt() - w.abs()).abs() < 1e-12 * (1.0 + w.abs()));
        }
    }

    #[test]
    fn feature_vectors_are_unit_and_kernel_bounded(
        seed in any::<u64>(),
        a in prop::collection::vec(-2.0..2.0f64, 8),
        b in prop::collection::vec(-2.0..2.0f64, 8),
    ) {
        let basis = featmap::sample_gaussian_basis(8, 64, 1.0, seed).unwrap();
        let (a, b) = (Array1::from(a), Array1::from(b));
        let c = featmap::feature_vector(a.view(), &basis).unwrap();
        prop_assert!((c.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        let ab = featmap::approx_kernel(a.view(), b.view(), &basis).unwrap();
        let ba = featmap::approx_kernel(b.view(), a.view(), &basis).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(ab <= 1.0 + 1e-12);
        prop_assert!((featmap::approx_kernel(a.view(), a.view(), &basis).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi2_follows_feature_permutation(
        rows in prop::collection::vec(prop::collection::vec(0u8..=255, 6), 4..30),
        perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
    ) {
        let n = rows.len();
        let x = Array2::from_shape_fn((n, 6), |(i, j)| rows[i][j]);
        let y: Vec<i8> = (0..n).map(|i| if i % 3 == 0 { 1 } else { -1 }).collect();
        let s = dataio::chi2_scores(x.view(), &y).unwrap();
        let xp = Array2::from_shape_fn((n, 6), |(i, j)| x[[i, perm[j]]]);
        let sp = dataio::chi2_scores(xp.view(), &y).unwrap();
        for j in 0..6 {
            let (a, b) = (sp[j], s[perm[j]]);
            prop_assert!(a == b || (a.is_nan() && b.is_nan()) || (a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
        // reordering points leaves scores alone
        let xr = Array2::from_shape_fn((n, 6), |(i, j)| x[[n - 1 - i, j]]);
        let yr: Vec<i8> = y.iter().rev().cloned().collect();
        let sr = dataio::chi2_scores(xr.view(), &yr).unwrap();
        for j in 0..6 {
            prop_assert!(s[j] == sr[j] || (s[j].is_nan() && sr[j].is_nan()) || (s[j] - sr[j]).abs() <= 1e-12 * s[j].abs().max(1.0));
        }
    }

    #[test]
    fn split_is_a_partition(n in 2usize..3000, seed in any::<u64>()) {
        let (train, test) = dataio::split_indices(n, seed).unwrap();
        prop_assert_eq!(train.len(), (6 * n).div_ceil(7));
        prop_assert_eq!(train.len() + test.len(), n);
        let mut all: Vec<usize> = train.iter().chain(&test).cloned().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(dataio::split_indices(n, seed).unwrap(), (train, test));
    }

    #[test]
    fn prediction_ignores_positive_rescaling(
        w in prop::collection::vec(-3.0..3.0f64, 3),
        bias in -3.0..3.0f64,
        scale in 0.01..100.0f64,
        x in prop::collection::vec(-3.0..3.0f64, 30),
    ) {
        let x = Array2::from_shape_vec((3, 10), x).unwrap();
        let mut m = model(3);
        m.weights = w.clone();
        m.bias = bias;
        let before = linclf::predict(&m, x.view()).unwrap();
        m.weights = w.iter().map(|v| v * scale).collect();
        m.bias = bias * scale;
        let after = linclf::predict(&m, x.view()).unwrap();
        // points very close to the boundary may flip through rounding
        let near = |j: usize| {
            let d = x.column(j).iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + bias;
            d.abs() < 1e-9
        };
        for j in 0..10 {
            prop_assert!(before[j] == after[j] || near(j));
        }
    }

    #[test]
    fn idx_round_trip(n in 1usize..20, pixels in prop::collection::vec(any::<u8>(), 20 * 12), labels in prop::collection::vec(0u8..10, 20)) {
        let dir = tempfile::tempdir().unwrap();
        let raw = RawDataset {
            images: Array2::from_shape_vec((n, 12), pixels[..n * 12].to_vec()).unwrap(),
            labels: labels[..n].to_vec(),
            rows: 3,
            cols: 4,
        };
        let (i, l) = (dir.path().join("img"), dir.path().join("lbl"));
        dataio::write_idx(&raw, &i, &l).unwrap();
        prop_assert_eq!(dataio::load_idx(&i, &l).unwrap(), raw);
    }
}
