//! Cross-module invariants exercised through the public API.

use magictrace::circuit::qft_swap_block_start;
use magictrace::geometry::{geodesic_perm_min, geodesic_to_space, geodesic_to_state, path_length};
use magictrace::magic::{enumerate_paulis, pauli_expectation};
use magictrace::state::C64;
use magictrace::{
    build_qft, run_trace, sre, Circuit, DistanceMode, Gate, LogBase, SreConfig, StateVector, TargetSpace,
    TraceOptions,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg(alpha: f64) -> SreConfig {
    SreConfig::new(alpha, LogBase::Two).unwrap()
}

/// Random gate drawn from every kind the simulator knows, mixing Clifford and
/// non-Clifford steps.
fn random_gate(n: usize, rng: &mut impl Rng) -> Gate {
    let q = rng.random_range(1..=n);
    let mut other = rng.random_range(1..=n);
    while n > 1 && other == q {
        other = rng.random_range(1..=n);
    }
    let angle = rng.random_range(-3.0..3.0);
    match rng.random_range(0..(if n > 1 { 13 } else { 9 })) {
        0 => Gate::H(q),
        1 => Gate::X(q),
        2 => Gate::Y(q),
        3 => Gate::Z(q),
        4 => Gate::S(q),
        5 => Gate::T(q),
        6 => Gate::Rx(q, angle),
        7 => Gate::Ry(q, angle),
        8 => Gate::Rz(q, angle),
        9 => Gate::Cnot { control: q, target: other },
        10 => Gate::Cz(q, other),
        11 => Gate::Swap(q, other),
        _ => Gate::Cphase { control: q, target: other, angle },
    }
}

#[test]
fn sre_stays_within_bounds_for_haar_states() {
    let mut worst_low = f64::INFINITY;
    for seed in 0..200u64 {
        let n = 1 + (seed % 6) as usize;
        let psi = StateVector::haar_random(n, seed).unwrap();
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            let m = sre(&psi, &cfg(alpha));
            worst_low = worst_low.min(m);
            assert!(m >= -1e-9, "seed {seed} alpha {alpha}: {m}");
            assert!(m <= n as f64 + 1e-9, "seed {seed} alpha {alpha}: {m} above {n}");
        }
    }
    assert!(worst_low.is_finite());
}

#[test]
fn zero_magic_means_stabiliser_expectations() {
    let mut candidates = Vec::new();
    for seed in 0..60u64 {
        let n = 1 + (seed % 4) as usize;
        candidates.push(StateVector::random_stabilizer(n, 3 * n, seed).unwrap());
        candidates.push(StateVector::haar_random(n, seed + 1000).unwrap());
    }
    let t = StateVector::zero(1).unwrap().apply_gates(&[Gate::H(1), Gate::T(1)]).unwrap();
    candidates.push(t);

    let mut zero_magic = 0;
    for psi in &candidates {
        if sre(psi, &cfg(2.0)) >= 1e-12 {
            continue;
        }
        zero_magic += 1;
        for p in enumerate_paulis(psi.n()) {
            let e = pauli_expectation(psi, &p).unwrap().abs();
            assert!(e < 1e-6 || (e - 1.0).abs() < 1e-6, "{} gives {e}", p.label());
        }
    }
    // Every stabiliser sample qualifies; no Haar sample or T state does.
    assert_eq!(zero_magic, 60);
}

#[test]
fn haar_magic_concentrates_near_its_maximum() {
    // For Haar states E[sum_P <P>^4] = 4d/(d+3), which puts the typical SRE2
    // at log2(d+3) - 2 bits.
    let n = 6;
    let reference = ((1u32 << n) as f64 + 3.0).log2() - 2.0;
    let values: Vec<f64> = (0..50)
        .map(|s| sre(&StateVector::haar_random(n, 7_000 + s).unwrap(), &cfg(2.0)))
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    assert!(mean > n as f64 - 2.0, "mean {mean}");
    assert!((mean - reference).abs() < 0.05, "mean {mean} vs reference {reference}");
}

#[test]
fn clifford_steps_never_change_magic() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let opts = TraceOptions { permutation_min: false, ..TraceOptions::default() };
    for _ in 0..20 {
        let n = rng.random_range(1..=4);
        let gates: Vec<Gate> = (0..30).map(|_| random_gate(n, &mut rng)).collect();
        let circuit = Circuit::with_gates(n, "random", gates).unwrap();
        let target = TargetSpace::computational(n, [0]).unwrap();
        let trace = run_trace(&circuit, &StateVector::zero(n).unwrap(), &target, &opts).unwrap();
        for r in &trace.records[1..] {
            let g = r.gate.as_ref().unwrap();
            if g.is_clifford() {
                assert!(r.d_sre.unwrap().abs() < 1e-9, "{g} changed magic by {:?}", r.d_sre);
            }
        }
    }
}

#[test]
fn qft_swap_block_is_flat_in_magic_and_relabelled_distance() {
    for n in 3..=6 {
        let x = StateVector::basis_index(n, (1 << n) - 2).unwrap();
        let qft = build_qft(n, true).unwrap();
        let target = TargetSpace::single(qft.run(&x).unwrap());
        let trace = run_trace(&qft, &x, &target, &TraceOptions::default()).unwrap();
        let start = qft_swap_block_start(n);
        let before = trace.records[start].s0_tperm_literal.unwrap();
        for r in &trace.records[start + 1..] {
            assert!(r.d_sre.unwrap().abs() < 1e-9);
            assert!((r.s0_tperm_literal.unwrap() - before).abs() < 1e-9);
        }
    }
}

#[test]
fn path_length_dominates_endpoint_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..30 {
        let n = rng.random_range(1..=4);
        let first = StateVector::haar_random(n, seed).unwrap();
        let mut snaps = vec![first];
        for _ in 0..rng.random_range(1..12) {
            let next = snaps.last().unwrap().apply_gate(&random_gate(n, &mut rng)).unwrap();
            snaps.push(next);
        }
        let len = path_length(&snaps).unwrap();
        let direct = geodesic_to_state(&snaps[0], snaps.last().unwrap()).unwrap();
        assert!(len >= direct - 1e-9, "{len} < {direct}");
    }
}

/// Dense projector onto the span of `basis`, as a row-major matrix.
fn dense_projector(basis: &[StateVector]) -> Vec<Vec<C64>> {
    let dim = basis[0].dim();
    let mut p = vec![vec![C64::new(0.0, 0.0); dim]; dim];
    for t in basis {
        for (i, row) in p.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell += t.amps()[i] * t.amps()[j].conj();
            }
        }
    }
    p
}

fn dense_expectation(p: &[Vec<C64>], psi: &StateVector) -> f64 {
    let a = psi.amps();
    let mut acc = C64::new(0.0, 0.0);
    for (i, row) in p.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            acc += a[i].conj() * cell * a[j];
        }
    }
    acc.re
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projector_matches_dense_oracle(
        n in 1usize..=4,
        mask in 1u32..u32::MAX,
        rotate in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let dim = 1usize << n;
        let indices: Vec<usize> = (0..dim).filter(|i| mask >> i & 1 == 1).collect();
        prop_assume!(!indices.is_empty());
        let mut basis: Vec<StateVector> =
            indices.iter().map(|&i| StateVector::basis_index(n, i).unwrap()).collect();
        if rotate {
            // A fixed unitary keeps the set orthonormal but off the computational axes.
            let u: Vec<Gate> = (1..=n).flat_map(|q| [Gate::Ry(q, 0.3 * q as f64), Gate::Rz(q, 1.1)]).collect();
            basis = basis.iter().map(|b| b.apply_gates(&u).unwrap()).collect();
        }
        let target = TargetSpace::from_states(basis.clone()).unwrap();
        let p = dense_projector(&basis);
        for i in 0..dim {
            for j in 0..dim {
                let sq: C64 = (0..dim).map(|k| p[i][k] * p[k][j]).sum();
                prop_assert!((sq - p[i][j]).norm() < 1e-12);
            }
        }
        let psi = StateVector::haar_random(n, seed).unwrap();
        let fast = target.verifier_expectation(&psi).unwrap();
        prop_assert!((fast - dense_expectation(&p, &psi)).abs() < 1e-12);
    }

    #[test]
    fn distances_are_ordered(n in 2usize..=4, mask in 1u32..u32::MAX, seed in any::<u64>()) {
        let dim = 1usize << n;
        let indices: Vec<usize> = (0..dim).filter(|i| mask >> i & 1 == 1).collect();
        prop_assume!(!indices.is_empty());
        let target = TargetSpace::computational(n, indices.iter().copied()).unwrap();
        let psi = StateVector::haar_random(n, seed).unwrap();
        for mode in [DistanceMode::Literal, DistanceMode::FubiniStudy] {
            let space = geodesic_to_space(&psi, &target, mode).unwrap();
            let relabelled = geodesic_perm_min(&psi, &target, mode).unwrap().distance;
            prop_assert!(relabelled <= space + 1e-12);
            if mode == DistanceMode::FubiniStudy {
                for &i in &indices {
                    let t = StateVector::basis_index(n, i).unwrap();
                    prop_assert!(space <= geodesic_to_state(&psi, &t).unwrap() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn magic_ignores_global_phase_and_relabelling(n in 1usize..=5, seed in any::<u64>(), phase in -3.0f64..3.0) {
        let psi = StateVector::haar_random(n, seed).unwrap();
        let rot = C64::from_polar(1.0, phase);
        let shifted = StateVector::from_amplitudes(psi.amps().iter().map(|a| a * rot).collect()).unwrap();
        let base = sre(&psi, &cfg(2.0));
        prop_assert!((sre(&shifted, &cfg(2.0)) - base).abs() < 1e-9);
        let reversed = psi.apply_permutation(&magictrace::QubitPermutation::reversal(n)).unwrap();
        prop_assert!((sre(&reversed, &cfg(2.0)) - base).abs() < 1e-9);
    }
}
