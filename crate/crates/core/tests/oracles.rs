//! Cross-checks of the statevector paths against dense-matrix oracles and
//! finite-difference expansions.

mod common;

use common::*;
use dqfim::ansatz::{
    apply_circuit, circuit_jacobian, AnsatzCircuit, AnsatzFamily, ParameterVector,
};
use dqfim::dla::{PauliLetter, PauliSum};
use dqfim::metric::{build_projector, compute_dqfim, dqfim_from_bundles, DataProjector};
use dqfim::rng::derive_rng;
use dqfim::sim::{raw_inner_product, sample_haar_vector, LocalGate, StateVector};
use num_complex::Complex64;

fn haar_state(n: usize, seed: u64) -> StateVector {
    let mut rng = derive_rng(seed, &[n as u64]);
    StateVector::from_amplitudes(n, sample_haar_vector(1 << n, &mut rng).unwrap()).unwrap()
}

fn random_projector(n: usize, b_l: usize, seed: u64) -> DataProjector {
    let mut rng = derive_rng(seed, &[b_l as u64]);
    let states: Vec<StateVector> = (0..b_l)
        .map(|_| {
            StateVector::from_amplitudes(n, sample_haar_vector(1 << n, &mut rng).unwrap()).unwrap()
        })
        .collect();
    build_projector(&states, 1e-10).unwrap()
}

/// `|tr(U(θ)† Π̃ U(θ'))|²` evaluated from statevectors.
fn projected_overlap_sq(
    ansatz: &AnsatzCircuit,
    theta: &ParameterVector,
    theta_prime: &ParameterVector,
    proj: &DataProjector,
) -> f64 {
    let b = proj.rank() as f64;
    let mut tr = Complex64::new(0.0, 0.0);
    for phi in proj.basis() {
        let a = apply_circuit(ansatz, theta, phi).unwrap();
        let bvec = apply_circuit(ansatz, theta_prime, phi).unwrap();
        tr += raw_inner_product(a.amplitudes(), bvec.amplitudes());
    }
    (tr / b).norm_sqr()
}

#[test]
fn sqrt_iswap_matches_matrix_exponential() {
    // exp(iπ/8(XX+YY)) via the Taylor oracle, squared onto a basis state.
    let n = 2;
    let hop = PauliSum::from_terms(
        n,
        vec![
            (dqfim::dla::PauliWord::from_letters("XX").unwrap(), 1.0),
            (dqfim::dla::PauliWord::from_letters("YY").unwrap(), 1.0),
        ],
    )
    .unwrap();
    let h = sum_dense(n, &hop) * c(0.0, std::f64::consts::FRAC_PI_8);
    let expected = matrix_exp(&h);
    let gate = gate_dense(n, &LocalGate::sqrt_iswap(0, 1));
    for i in 0..4 {
        for j in 0..4 {
            assert!((expected[(i, j)] - gate[(i, j)]).norm() < 1e-12);
        }
    }
    // Applied twice on |q0=1⟩: i·|q1=1⟩.
    let twice = &gate * &gate;
    assert!((twice[(2, 1)] - c(0.0, 1.0)).norm() < 1e-12);
}

#[test]
fn apply_circuit_matches_dense_product() {
    let mut rng = derive_rng(61, &[]);
    for family in [
        AnsatzFamily::HardwareEfficient,
        AnsatzFamily::XyPeriodic,
        AnsatzFamily::XyOpen,
        AnsatzFamily::Xxz,
        AnsatzFamily::YCz,
    ] {
        let ansatz = AnsatzCircuit::new(family, 3, 2).unwrap();
        let theta = ParameterVector::random_uniform(ansatz.total_params(), &mut rng);
        let u = circuit_unitary(&ansatz, &theta);
        let s = haar_state(3, 19);
        let fast = apply_circuit(&ansatz, &theta, &s).unwrap();
        for (r, amp) in fast.amplitudes().iter().enumerate() {
            let mut expect = c(0.0, 0.0);
            for (col, x) in s.amplitudes().iter().enumerate() {
                expect += u[(r, col)] * x;
            }
            assert!((amp - expect).norm() < 1e-12, "{family} row {r}");
        }
    }
}

#[test]
fn jacobian_matches_dense_derivative_products() {
    let mut rng = derive_rng(62, &[]);
    let ansatz = AnsatzCircuit::new(AnsatzFamily::Xxz, 2, 2).unwrap();
    let theta = ParameterVector::random_uniform(ansatz.total_params(), &mut rng);
    let s = haar_state(2, 3);
    let bundle = circuit_jacobian(&ansatz, &theta, &s).unwrap();
    for p in 0..ansatz.total_params() {
        let du = circuit_derivative(&ansatz, &theta, p);
        for (r, amp) in bundle.derivatives[p].iter().enumerate() {
            let mut expect = c(0.0, 0.0);
            for (col, x) in s.amplitudes().iter().enumerate() {
                expect += du[(r, col)] * x;
            }
            assert!((amp - expect).norm() < 1e-11, "param {p} row {r}");
        }
    }
}

#[test]
fn dqfim_equals_pure_state_qfim_from_dense_overlaps() {
    // At B_L = 1 the metric is the pure-state QFIM
    // F = 4Re(⟨∂ψ|∂ψ⟩ − ⟨∂ψ|ψ⟩⟨ψ|∂ψ⟩), assembled here from dense products.
    let mut rng = derive_rng(63, &[]);
    for family in [AnsatzFamily::HardwareEfficient, AnsatzFamily::XyPeriodic] {
        let ansatz = AnsatzCircuit::new(family, 3, 2).unwrap();
        let m = ansatz.total_params();
        let theta = ParameterVector::random_uniform(m, &mut rng);
        let psi0 = haar_state(3, 11);
        let proj = build_projector(std::slice::from_ref(&psi0), 1e-10).unwrap();
        let q = compute_dqfim(&ansatz, &theta, &proj).unwrap();

        let u = circuit_unitary(&ansatz, &theta);
        let dim = 1usize << 3;
        let apply = |mat: &CMat| -> Vec<Complex64> {
            (0..dim)
                .map(|r| {
                    (0..dim)
                        .map(|col| mat[(r, col)] * psi0.amplitudes()[col])
                        .sum()
                })
                .collect()
        };
        let psi = apply(&u);
        let derivs: Vec<Vec<Complex64>> = (0..m)
            .map(|p| apply(&circuit_derivative(&ansatz, &theta, p)))
            .collect();
        for i in 0..m {
            for j in 0..m {
                let t = raw_inner_product(&derivs[i], &derivs[j]);
                let a = raw_inner_product(&derivs[i], &psi);
                let b = raw_inner_product(&psi, &derivs[j]);
                let f = 4.0 * (t - a * b).re;
                assert!(
                    (q.matrix.get(i, j) - f).abs() < 1e-10,
                    "{family} ({i},{j}): {} vs {f}",
                    q.matrix.get(i, j)
                );
            }
        }
    }
}

#[test]
fn dqfim_matches_second_order_overlap_expansion() {
    // |tr(U†(θ) Π̃ U(θ+δ))|² = 1 − ¼ Σ Q_nm δ_n δ_m + O(δ³).
    let delta = 1e-3;
    let mut rng = derive_rng(64, &[]);
    for (family, n) in [
        (AnsatzFamily::HardwareEfficient, 2usize),
        (AnsatzFamily::Xxz, 3),
    ] {
        let ansatz = AnsatzCircuit::new(family, n, 2).unwrap();
        let m = ansatz.total_params();
        let theta = ParameterVector::random_uniform(m, &mut rng);
        let proj = random_projector(n, 2, 900 + n as u64);
        let q = compute_dqfim(&ansatz, &theta, &proj).unwrap();
        let f0 = projected_overlap_sq(&ansatz, &theta, &theta, &proj);
        assert!((f0 - 1.0).abs() < 1e-12);

        let shifted = |signs: &[(usize, f64)]| -> f64 {
            let mut tp = theta.clone();
            for &(idx, sgn) in signs {
                tp.values_mut()[idx] += sgn * delta;
            }
            projected_overlap_sq(&ansatz, &theta, &tp, &proj)
        };
        for i in 0..m {
            // Diagonal: Q_ii = −2 (f(+δ) − 2f(0) + f(−δ)) / δ².
            let fd = (shifted(&[(i, 1.0)]) - 2.0 * f0 + shifted(&[(i, -1.0)])) / (delta * delta);
            let q_fd = -2.0 * fd;
            assert!(
                (q.matrix.get(i, i) - q_fd).abs() < 1e-5,
                "{family} diag {i}: {} vs {q_fd}",
                q.matrix.get(i, i)
            );
            for j in 0..i {
                let fpp = shifted(&[(i, 1.0), (j, 1.0)]);
                let fpm = shifted(&[(i, 1.0), (j, -1.0)]);
                let fmp = shifted(&[(i, -1.0), (j, 1.0)]);
                let fmm = shifted(&[(i, -1.0), (j, -1.0)]);
                let hess = (fpp - fpm - fmp + fmm) / (4.0 * delta * delta);
                let q_fd = -2.0 * hess;
                assert!(
                    (q.matrix.get(i, j) - q_fd).abs() < 1e-5,
                    "{family} ({i},{j}): {} vs {q_fd}",
                    q.matrix.get(i, j)
                );
            }
        }
    }
}

#[test]
fn metric_is_gauge_invariant_under_global_phase() {
    let mut rng = derive_rng(65, &[]);
    let ansatz = AnsatzCircuit::new(AnsatzFamily::YCz, 3, 3).unwrap();
    let theta = ParameterVector::random_uniform(ansatz.total_params(), &mut rng);
    let proj = random_projector(3, 2, 77);
    let bundles: Vec<_> = proj
        .basis()
        .iter()
        .map(|phi| circuit_jacobian(&ansatz, &theta, phi).unwrap())
        .collect();
    let q = dqfim_from_bundles(&bundles).unwrap();

    // exp(iα)·U multiplies every basis image and derivative by the phase.
    let alpha = 1.234_f64;
    let phase = Complex64::from_polar(1.0, alpha);
    let phased: Vec<_> = bundles
        .iter()
        .map(|b| {
            let amps: Vec<Complex64> =
                b.output.amplitudes().iter().map(|a| a * phase).collect();
            dqfim::ansatz::JacobianBundle {
                output: StateVector::from_amplitudes(3, amps).unwrap(),
                derivatives: b
                    .derivatives
                    .iter()
                    .map(|d| d.iter().map(|a| a * phase).collect())
                    .collect(),
            }
        })
        .collect();
    let q_phased = dqfim_from_bundles(&phased).unwrap();
    for i in 0..q.dim() {
        for j in 0..q.dim() {
            assert!((q.get(i, j) - q_phased.get(i, j)).abs() < 1e-10);
        }
    }
}

#[test]
fn effective_dimension_respects_bound_chain() {
    // D_L ≤ min(M, unitary_bound(d, B_L), dim 𝔤) on random configurations.
    let mut rng = derive_rng(66, &[]);
    for (family, n, g, b_l) in [
        (AnsatzFamily::HardwareEfficient, 2usize, 3usize, 2usize),
        (AnsatzFamily::XyPeriodic, 3, 4, 2),
        (AnsatzFamily::YCz, 3, 3, 4),
    ] {
        let ansatz = AnsatzCircuit::new(family, n, g).unwrap();
        let theta = ParameterVector::random_uniform(ansatz.total_params(), &mut rng);
        let proj = random_projector(n, b_l, 500 + n as u64);
        let d = dqfim::metric::effective_dimension(
            &ansatz,
            &theta,
            &proj,
            dqfim::metric::RankTolerances::default(),
        )
        .unwrap();
        let gens = dqfim::ansatz::generator_set(&ansatz);
        let span = dqfim::dla::lie_closure(&gens, 1 << (2 * n), 1e-10).unwrap();
        let bound = ansatz
            .total_params()
            .min(dqfim::metric::unitary_bound(1 << n, proj.rank()))
            .min(span.dim());
        assert!(d <= bound, "{family}: D = {d} > bound {bound}");
    }
}

#[test]
fn pauli_commutator_matches_dense_oracle() {
    // Random sparse sums on up to 3 qubits against the dense [A,B]/i.
    let mut rng = derive_rng(67, &[]);
    use rand::Rng;
    for trial in 0..25 {
        let n = 1 + (trial % 3);
        let dim = 1usize << n;
        let rand_sum = |rng: &mut rand_chacha::ChaCha8Rng| -> PauliSum {
            let words = 1 + rng.gen_range(0..3);
            let terms: Vec<_> = (0..words)
                .map(|_| {
                    let letters: String = (0..n)
                        .map(|_| ['I', 'X', 'Y', 'Z'][rng.gen_range(0..4)])
                        .collect();
                    (
                        dqfim::dla::PauliWord::from_letters(&letters).unwrap(),
                        rng.gen_range(-2.0..2.0),
                    )
                })
                .collect();
            PauliSum::from_terms(n, terms).unwrap()
        };
        let a = rand_sum(&mut rng);
        let b = rand_sum(&mut rng);
        let out = dqfim::dla::pauli_commutator(&a, &b).unwrap();
        let dense_a = sum_dense(n, &a);
        let dense_b = sum_dense(n, &b);
        let comm = (&dense_a * &dense_b - &dense_b * &dense_a) * c(0.0, -1.0);
        let dense_out = sum_dense(n, &out);
        for i in 0..dim {
            for j in 0..dim {
                assert!(
                    (comm[(i, j)] - dense_out[(i, j)]).norm() < 1e-10,
                    "n={n} entry ({i},{j})"
                );
            }
        }
    }
}

#[test]
fn single_letter_generators_exist_for_all_families() {
    for family in [
        AnsatzFamily::HardwareEfficient,
        AnsatzFamily::XyPeriodic,
        AnsatzFamily::XyOpen,
        AnsatzFamily::Xxz,
        AnsatzFamily::YCz,
    ] {
        let ansatz = AnsatzCircuit::new(family, 4, 2).unwrap();
        let gens = dqfim::ansatz::generator_set(&ansatz);
        assert!(!gens.is_empty());
        let rotations = gens
            .iter()
            .filter(|g| g.terms().len() == 1 && g.terms()[0].1 == 1.0)
            .count();
        let expected = if family == AnsatzFamily::HardwareEfficient { 8 } else { 4 };
        assert_eq!(rotations, expected, "{family}");
        let _ = PauliLetter::I;
    }
}
