//! Closed forms, oracle agreements and structural properties of the converse bounds.

use proptest::prelude::*;

use qconv_core::bounds::{
    classical_converse, dual_objective_at, ea_bound, ea_bound_dual, ea_bound_opt_rho, ea_bound_opt_rho_uses,
    depolarising_exact, fano_bound, joint_state, wang_renner_chi, BoundResult, TestClass,
};
use qconv_core::hypotest::{binomial_beta, quantum_np_beta};
use qconv_core::linalg::{HermitianOperator, C64};
use qconv_core::quantum::{depolarising_channel, DensityMatrix, QuantumChannel};
use qconv_core::random::{random_channel, random_density, random_distribution, random_stochastic, rng};

fn bloch(x: f64, y: f64, z: f64) -> DensityMatrix {
    let m = qconv_core::linalg::ComplexMatrix::from_row_major(
        2,
        2,
        vec![C64::new((1.0 + z) / 2.0, 0.0), C64::new(x / 2.0, -y / 2.0), C64::new(x / 2.0, y / 2.0), C64::new((1.0 - z) / 2.0, 0.0)],
    )
    .unwrap();
    DensityMatrix::new(HermitianOperator::new(m).unwrap()).unwrap()
}

fn constant_channel() -> QuantumChannel {
    QuantumChannel::replacement(2, &bloch(0.3, -0.2, 0.5))
}

fn assert_consistent(r: &BoundResult) {
    assert!(r.beta > 0.0 && r.beta <= 1.0);
    assert!((r.bits + r.beta.log2()).abs() < 1e-9);
}

#[test]
fn identity_channel_zero_error_limits() {
    for d in [2usize, 3] {
        let ch = QuantumChannel::identity(d);
        let mu = DensityMatrix::maximally_mixed(d);
        let all = ea_bound(&ch, &mu, 0.0, TestClass::All).unwrap();
        let ppt = ea_bound(&ch, &mu, 0.0, TestClass::Ppt).unwrap();
        let log_d = (d as f64).log2();
        assert!((all.bits - 2.0 * log_d).abs() < 1e-4, "d={d} ALL {}", all.bits);
        assert!((ppt.bits - log_d).abs() < 1e-4, "d={d} PPT {}", ppt.bits);
        assert_consistent(&all);
        assert_consistent(&ppt);
    }
}

#[test]
fn depolarising_single_use_matches_the_binomial_formula() {
    let ch = depolarising_channel(2, 0.15).unwrap();
    let mu = DensityMatrix::maximally_mixed(2);
    let oracle = -binomial_beta(0.8875, 0.25, 1, 0.05).unwrap().log2_beta;
    assert!((oracle - (1.5f64).log2()).abs() < 1e-12);
    let primal = ea_bound(&ch, &mu, 0.05, TestClass::All).unwrap();
    let dual = ea_bound_dual(&ch, &mu, 0.05).unwrap();
    assert!((primal.bits - 0.58496).abs() < 1e-5);
    assert!((primal.bits - oracle).abs() < 1e-6);
    assert!((dual.bits - oracle).abs() < 1e-6);
}

#[test]
fn constant_channel_cannot_communicate() {
    let ch = constant_channel();
    let mut g = rng(20);
    let rho = random_density(&mut g, 2);
    let primal = ea_bound(&ch, &rho, 0.5, TestClass::All).unwrap();
    let dual = ea_bound_dual(&ch, &rho, 0.5).unwrap();
    assert!((primal.bits - 1.0).abs() < 1e-6);
    assert!((dual.bits - 1.0).abs() < 1e-6);
    for eps in [0.05, 0.3] {
        let opt = ea_bound_opt_rho(&ch, eps, TestClass::All).unwrap();
        assert!((opt.bits + (1.0 - eps).log2()).abs() < 1e-6);
    }
}

#[test]
fn strictly_feasible_dual_point_is_a_lower_bound() {
    let mut g = rng(21);
    let ch = random_channel(&mut g, 2, 3, 2);
    let rho = random_density(&mut g, 2);
    let (da, db) = (2, 3);
    let mu = 0.7;
    let gop = HermitianOperator::identity(db).scale(1.0 / (2.0 * db as f64));
    let a = 2.0 * mu * ch.choi().max_eigenvalue();
    let f = HermitianOperator::identity(da * db).scale(a);
    let slack = &(&HermitianOperator::identity(da).kron(&gop) + &f) - &ch.choi().scale(mu);
    assert!(slack.min_eigenvalue() > 0.0);
    assert!(gop.trace() < 1.0);
    let beta = ea_bound(&ch, &rho, 0.1, TestClass::All).unwrap().beta;
    assert!(dual_objective_at(&rho, &f, mu, 0.1) <= beta);
}

#[test]
fn joint_optimum_for_the_depolarising_channel_is_the_maximally_mixed_input() {
    let ch = depolarising_channel(2, 0.15).unwrap();
    let mu = DensityMatrix::maximally_mixed(2);
    let fixed = ea_bound(&ch, &mu, 0.05, TestClass::All).unwrap();
    let opt = ea_bound_opt_rho(&ch, 0.05, TestClass::All).unwrap();
    assert!((opt.bits - fixed.bits).abs() < 1e-6);
    assert!(opt.optimal_rho.unwrap().operator().max_abs_diff(mu.operator()) < 1e-5);
}

#[test]
fn joint_optimum_for_the_identity_channel_matches_a_bloch_grid() {
    let ch = QuantumChannel::identity(2);
    let eps = 0.05;
    let opt = ea_bound_opt_rho(&ch, eps, TestClass::All).unwrap();
    let mut best = f64::NEG_INFINITY;
    for r in [0.0, 0.3, 0.6, 0.9] {
        for (theta, phi) in [(0.0f64, 0.0f64), (1.0, 0.5), (2.0, 2.5), (std::f64::consts::PI, 0.0)] {
            let rho = bloch(r * theta.sin() * phi.cos(), r * theta.sin() * phi.sin(), r * theta.cos());
            let bits = ea_bound(&ch, &rho, eps, TestClass::All).unwrap().bits;
            assert!(bits <= opt.bits + 1e-6);
            best = best.max(bits);
        }
    }
    assert!((opt.bits - best).abs() < 1e-4);
    // maximally mixed input: accept on the projector onto Phi / 2
    assert!((opt.bits - (2.0 - (1.0 - eps).log2())).abs() < 1e-6);
}

#[test]
fn depolarising_exact_reference_values() {
    assert!((depolarising_exact(2, 0.15, 1, 0.05).unwrap().bits - 0.58496).abs() < 1e-5);
    let long = depolarising_exact(2, 0.15, 1000, 0.01).unwrap();
    assert!((long.rate() - 1.31428).abs() < 0.10, "{}", long.rate());
    for d in [2usize, 3] {
        for n in 1..=6 {
            let r = depolarising_exact(d, 0.0, n, 0.0).unwrap();
            assert!((r.bits - 2.0 * n as f64 * (d as f64).log2()).abs() < 1e-9);
        }
    }
}

#[test]
fn depolarising_joint_sdp_matches_the_exact_formula() {
    let ch = depolarising_channel(2, 0.15).unwrap();
    for (n, eps) in [(1, 0.01), (1, 0.25), (2, 0.05), (2, 0.25), (3, 0.05)] {
        let sdp = ea_bound_opt_rho_uses(&ch, n, eps, TestClass::All).unwrap();
        let exact = depolarising_exact(2, 0.15, n, eps).unwrap();
        assert!((sdp.bits - exact.bits).abs() < 1e-5, "n={n} eps={eps}: {} vs {}", sdp.bits, exact.bits);
    }
}

#[test]
fn chi_obeys_data_processing() {
    let mut g = rng(22);
    let eps = 0.1;
    for _ in 0..6 {
        let ch = random_channel(&mut g, 2, 2, 2);
        let k = 3;
        let weights = random_distribution(&mut g, k);
        let states: Vec<DensityMatrix> = (0..k).map(|_| random_density(&mut g, 2)).collect();
        let rho = DensityMatrix::mixture(&weights, &states).unwrap();
        let ensemble: Vec<(f64, DensityMatrix)> = weights.iter().copied().zip(states).collect();
        let chi = wang_renner_chi(&ensemble, &ch, eps).unwrap();
        let tau = joint_state(&ch, &rho).unwrap();
        let product = rho.transpose().kron(&ch.apply(&rho).unwrap());
        let d_all = -quantum_np_beta(&tau, &product, eps).unwrap().log2_beta;
        assert!(chi <= d_all + 1e-6, "{chi} > {d_all}");
    }
}

fn instance(seed: u64, din: usize, dout: usize) -> (QuantumChannel, DensityMatrix) {
    let mut g = rng(seed);
    let kraus = (1 + (seed % 3) as usize).max(din.div_ceil(dout));
    (random_channel(&mut g, din, dout, kraus), random_density(&mut g, din))
}

fn classical_instance(seed: u64, nx: usize, ny: usize) -> Vec<Vec<f64>> {
    random_stochastic(&mut rng(seed), ny, nx)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn ppt_never_exceeds_all(seed in any::<u64>(), din in 2usize..=3, dout in 2usize..=3) {
        let (ch, rho) = instance(seed, din, dout);
        let all = ea_bound(&ch, &rho, 0.1, TestClass::All).unwrap();
        let ppt = ea_bound(&ch, &rho, 0.1, TestClass::Ppt).unwrap();
        prop_assert!(ppt.bits <= all.bits + 1e-6);
    }

    #[test]
    fn primal_and_dual_agree(seed in any::<u64>(), din in 2usize..=3, dout in 2usize..=3) {
        let (ch, rho) = instance(seed, din, dout);
        let p = ea_bound(&ch, &rho, 0.1, TestClass::All).unwrap();
        let d = ea_bound_dual(&ch, &rho, 0.1).unwrap();
        prop_assert!((p.beta - d.beta).abs() <= 1e-6 * (1.0 + p.beta));
    }

    #[test]
    fn sigma_certifies_the_optimum(seed in any::<u64>(), din in 2usize..=3, dout in 2usize..=3) {
        let (ch, rho) = instance(seed, din, dout);
        for cls in [TestClass::All, TestClass::Ppt] {
            let r = ea_bound(&ch, &rho, 0.1, cls).unwrap();
            prop_assert!(r.diagnostics.unwrap().sigma_certificate_gap.unwrap() <= 1e-7);
        }
    }

    #[test]
    fn fano_dominates(seed in any::<u64>(), din in 2usize..=3, dout in 2usize..=3, eps in 0.01f64..0.5) {
        let (ch, rho) = instance(seed, din, dout);
        let bits = ea_bound(&ch, &rho, eps, TestClass::All).unwrap().bits;
        prop_assert!(bits <= fano_bound(&ch, &rho, eps).unwrap() + 1e-6);
    }

    #[test]
    fn beta_is_convex_in_the_input(seed in any::<u64>(), t in 0.0f64..=1.0) {
        let mut g = rng(seed);
        let ch = random_channel(&mut g, 2, 2, 2);
        let (r1, r2) = (random_density(&mut g, 2), random_density(&mut g, 2));
        let mix = DensityMatrix::mixture(&[t, 1.0 - t], &[r1.clone(), r2.clone()]).unwrap();
        let b = |r: &DensityMatrix| ea_bound(&ch, r, 0.1, TestClass::All).unwrap().beta;
        prop_assert!(b(&mix) <= t * b(&r1) + (1.0 - t) * b(&r2) + 1e-6);
    }

    #[test]
    fn beta_is_non_increasing_in_eps(seed in any::<u64>()) {
        let (ch, rho) = instance(seed, 2, 3);
        let betas: Vec<f64> = [0.01, 0.05, 0.1, 0.2, 0.4]
            .iter()
            .map(|&e| ea_bound(&ch, &rho, e, TestClass::All).unwrap().beta)
            .collect();
        for w in betas.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-8);
        }
    }

    #[test]
    fn classical_channels_agree_across_paths(seed in any::<u64>(), nx in 2usize..=3, ny in 2usize..=3) {
        let w = classical_instance(seed, nx, ny);
        let ch = QuantumChannel::classical(&w).unwrap();
        let all = ea_bound_opt_rho(&ch, 0.1, TestClass::All).unwrap();
        let ppt = ea_bound_opt_rho(&ch, 0.1, TestClass::Ppt).unwrap();
        let cl = classical_converse(&w, 0.1).unwrap();
        prop_assert!((all.bits - ppt.bits).abs() < 1e-5, "ALL {} PPT {}", all.bits, ppt.bits);
        prop_assert!((all.bits - cl.bits).abs() < 1e-5, "ALL {} classical {}", all.bits, cl.bits);
    }
}
