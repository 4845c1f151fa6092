//! Acceptance gate: runs each criterion at its stated tolerance and prints
//! one PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use qconv_cli::output::rounded;
use qconv_cli::parse_bound_csv;
use qconv_core::bounds::{
    classical_converse, depolarising_exact, ea_bound, ea_bound_dual, ea_bound_opt_rho, ea_bound_opt_rho_uses,
    fano_bound, joint_state, BoundResult, TestClass,
};
use qconv_core::hypotest::{binomial_beta, quantum_np_beta};
use qconv_core::linalg::HermitianOperator;
use qconv_core::quantum::{code_to_test, depolarising_channel, mutual_information, Code, DensityMatrix, QuantumChannel};
use rand::Rng;
use qconv_core::random::{random_channel, random_density, random_pure_state, random_stochastic, rng};

const CAPACITY: f64 = 1.31428;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

// ---- shared random instances ----

struct Instance {
    channel: QuantumChannel,
    rho: DensityMatrix,
}

fn instances() -> &'static [Instance] {
    static CELL: OnceLock<Vec<Instance>> = OnceLock::new();
    CELL.get_or_init(|| {
        (0..25u64)
            .map(|s| {
                let (din, dout) = (2 + (s % 2) as usize, 2 + ((s / 2) % 2) as usize);
                let mut g = rng(1000 + s);
                let kraus = (1 + (s % 3) as usize).max(din.div_ceil(dout));
                Instance { channel: random_channel(&mut g, din, dout, kraus), rho: random_density(&mut g, din) }
            })
            .collect()
    })
}

/// ALL-class primal results on the shared instances at eps = 0.1, solved once.
fn all_primal() -> &'static [BoundResult] {
    static CELL: OnceLock<Vec<BoundResult>> = OnceLock::new();
    CELL.get_or_init(|| {
        instances().iter().map(|i| ea_bound(&i.channel, &i.rho, 0.1, TestClass::All).expect("ALL primal")).collect()
    })
}

// ---- criteria ----

fn capacity() -> Outcome {
    let ch = depolarising_channel(2, 0.15).unwrap();
    let mu = DensityMatrix::maximally_mixed(2);
    mutual_information(&ch, &mu).unwrap();
    let start = Instant::now();
    let i = mutual_information(&ch, &mu).unwrap();
    let t = start.elapsed();
    let pass = (i - CAPACITY).abs() <= 1e-3 && within(t, Duration::from_millis(1));
    outcome(pass, format!("I = {i:.6} bits, {t:?}"))
}

fn exact_vs_sdp() -> Outcome {
    let ch = depolarising_channel(2, 0.15).unwrap();
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [1, 2] {
        for eps in [0.01, 0.05, 0.25] {
            let sdp = ea_bound_opt_rho_uses(&ch, n, eps, TestClass::All).unwrap();
            let exact = depolarising_exact(2, 0.15, n, eps).unwrap();
            worst = worst.max((sdp.bits - exact.bits).abs());
        }
    }
    let t = start.elapsed();
    let pass = worst <= 1e-5 && within(t, Duration::from_secs(30));
    outcome(pass, format!("max |SDP - exact| = {worst:.2e} bits over 6 instances, {t:?}"))
}

fn pmf(p: f64, n: usize) -> Vec<f64> {
    let mut c = 1.0;
    (0..=n)
        .map(|k| {
            if k > 0 {
                c = c * (n - k + 1) as f64 / k as f64;
            }
            c * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
        })
        .collect()
}

/// Minimum of `Q(T)` over tests accepting a subset of outcomes fully and at
/// most one more outcome partially, subject to `P(T) >= 1 - eps`.
fn exhaustive_beta(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let k = p.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << k) {
        let (mut ps, mut qs) = (0.0, 0.0);
        for i in 0..k {
            if mask >> i & 1 == 1 {
                ps += p[i];
                qs += q[i];
            }
        }
        if ps >= 1.0 - eps {
            best = best.min(qs);
            continue;
        }
        for j in (0..k).filter(|j| mask >> j & 1 == 0) {
            let gamma = (1.0 - eps - ps) / p[j];
            if p[j] > 0.0 && gamma <= 1.0 {
                best = best.min(qs + gamma * q[j]);
            }
        }
    }
    best
}

fn binomial_fidelity() -> Outcome {
    let reference = binomial_beta(0.8875, 0.25, 2, 0.05).unwrap().beta;
    let oracle = exhaustive_beta(&pmf(0.8875, 2), &pmf(0.25, 2), 0.05);
    let mut worst: f64 = 0.0;
    for (mu, lambda) in [(0.8875, 0.25), (0.6, 0.3), (0.95, 0.5), (0.7, 0.05)] {
        for n in 1..=12 {
            let (p, q) = (pmf(mu, n), pmf(lambda, n));
            for eps in [0.001, 0.01, 0.05, 0.2, 0.5, 0.9] {
                let b = binomial_beta(mu, lambda, n as u64, eps).unwrap().beta;
                worst = worst.max((b - exhaustive_beta(&p, &q, eps)).abs());
            }
        }
    }
    let pass = (reference - oracle).abs() <= 1e-10 && (reference - 0.36737).abs() < 5e-6 && worst <= 1e-10;
    outcome(
        pass,
        format!("beta = {reference:.10} (oracle {oracle:.10}); n <= 12 suite max deviation {worst:.2e}"),
    )
}

fn stein_trend() -> Outcome {
    let start = Instant::now();
    let r = depolarising_exact(2, 0.15, 1000, 0.01).unwrap();
    let t = start.elapsed();
    let rate = r.bits / 1000.0;
    let pass = (rate - CAPACITY).abs() <= 0.10 && within(t, Duration::from_secs(1));
    outcome(pass, format!("rate at n = 1000 is {rate:.5} bits/use, |rate - {CAPACITY}| = {:.4}, {t:?}", (rate - CAPACITY).abs()))
}

fn strong_duality() -> Outcome {
    let start = Instant::now();
    let primal = all_primal();
    let mut worst: f64 = 0.0;
    for (inst, p) in instances().iter().zip(primal) {
        let d = ea_bound_dual(&inst.channel, &inst.rho, 0.1).unwrap();
        worst = worst.max((p.bits - d.bits).abs() / p.bits.abs());
    }
    let t = start.elapsed();
    let pass = worst <= 1e-6 && within(t, Duration::from_secs(120));
    outcome(pass, format!("max relative primal/dual gap {worst:.2e} over 25 channels, {t:?}"))
}

fn class_hierarchy() -> Outcome {
    let mut excess = f64::NEG_INFINITY;
    for (inst, all) in instances().iter().zip(all_primal()) {
        let ppt = ea_bound(&inst.channel, &inst.rho, 0.1, TestClass::Ppt).unwrap();
        excess = excess.max(ppt.bits - all.bits);
    }
    let mut worst: f64 = 0.0;
    for s in 0..10u64 {
        let mut g = rng(2000 + s);
        let (nx, ny) = (2 + (s % 2) as usize, 2 + ((s / 2) % 2) as usize);
        let w = random_stochastic(&mut g, ny, nx);
        let ch = QuantumChannel::classical(&w).unwrap();
        let all = ea_bound_opt_rho(&ch, 0.1, TestClass::All).unwrap().bits;
        let ppt = ea_bound_opt_rho(&ch, 0.1, TestClass::Ppt).unwrap().bits;
        let cl = classical_converse(&w, 0.1).unwrap().bits;
        worst = worst.max((all - ppt).abs()).max((all - cl).abs()).max((ppt - cl).abs());
    }
    let pass = excess <= 1e-6 && worst <= 1e-5;
    outcome(pass, format!("max PPT - ALL = {excess:.2e}; classical channels max spread {worst:.2e}"))
}

fn random_povm(g: &mut impl Rng, m: usize, d: usize) -> Vec<HermitianOperator> {
    let parts: Vec<HermitianOperator> = (0..m).map(|_| random_density(g, d).into_operator()).collect();
    let mut sum = HermitianOperator::zeros(d);
    for a in &parts {
        sum = &sum + a;
    }
    let s = sum.pinv_sqrt(1e-12).to_matrix();
    parts.iter().map(|a| a.conjugate_by(&s)).collect()
}

fn meta_converse() -> Outcome {
    let (mut worst_success, mut worst_excess) = (0.0f64, f64::NEG_INFINITY);
    for c in 0..10u64 {
        let mut g = rng(3000 + c);
        let m = 2 + (c % 3) as usize;
        let inputs: Vec<DensityMatrix> = (0..m)
            .map(|_| if c % 2 == 0 { DensityMatrix::pure(&random_pure_state(&mut g, 2)).unwrap() } else { random_density(&mut g, 2) })
            .collect();
        for k in 0..5u64 {
            let dout = 2 + (k % 2) as usize;
            let ch = random_channel(&mut g, 2, dout, 1 + (k % 3) as usize);
            let code = Code::new(inputs.clone(), random_povm(&mut g, m, dout)).unwrap();
            let rho = code.average_input();
            let test = code_to_test(&code, &rho).unwrap().test;
            let joint = joint_state(&ch, &rho).unwrap();
            let success = code.success_probability(&ch).unwrap();
            worst_success = worst_success.max((test.dot(joint.operator()) - success).abs());
            let eps = 1.0 - success;
            let rho_ref = rho.transpose();
            let mut sigmas = vec![DensityMatrix::maximally_mixed(dout), ch.apply(&rho).unwrap()];
            sigmas.extend((0..3).map(|_| random_density(&mut g, dout)));
            for sigma in &sigmas {
                let beta = quantum_np_beta(&joint, &rho_ref.kron(sigma), eps).unwrap().beta;
                worst_excess = worst_excess.max(beta - 1.0 / m as f64);
            }
        }
    }
    let pass = worst_success <= 1e-10 && worst_excess <= 1e-8;
    outcome(
        pass,
        format!("max |Tr[T tau] - P_succ| = {worst_success:.2e}; max beta - 1/M = {worst_excess:.2e} over 50 code/channel pairs"),
    )
}

fn fano_and_convexity() -> Outcome {
    let mut fano_excess = f64::NEG_INFINITY;
    for (inst, all) in instances().iter().zip(all_primal()) {
        fano_excess = fano_excess.max(all.bits - fano_bound(&inst.channel, &inst.rho, 0.1).unwrap());
    }
    let mut convex_excess = f64::NEG_INFINITY;
    for s in 0..20u64 {
        let mut g = rng(4000 + s);
        let (din, dout) = (2 + (s % 2) as usize, 2);
        let ch = random_channel(&mut g, din, dout, 2);
        let (r1, r2) = (random_density(&mut g, din), random_density(&mut g, din));
        let t: f64 = g.random();
        let mix = DensityMatrix::mixture(&[t, 1.0 - t], &[r1.clone(), r2.clone()]).unwrap();
        let b = |r: &DensityMatrix| ea_bound(&ch, r, 0.1, TestClass::All).unwrap().beta;
        convex_excess = convex_excess.max(b(&mix) - (t * b(&r1) + (1.0 - t) * b(&r2)));
    }
    let pass = fano_excess <= 1e-6 && convex_excess <= 1e-6;
    outcome(pass, format!("max ALL - Fano = {fano_excess:.3e} bits; max convexity violation {convex_excess:.2e}"))
}

fn identity_closed_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut values = Vec::new();
    for d in [2usize, 3] {
        let ch = QuantumChannel::identity(d);
        let mu = DensityMatrix::maximally_mixed(d);
        let log_d = (d as f64).log2();
        let all = ea_bound(&ch, &mu, 0.0, TestClass::All).unwrap().bits;
        let ppt = ea_bound(&ch, &mu, 0.0, TestClass::Ppt).unwrap().bits;
        worst = worst.max((all - 2.0 * log_d).abs()).max((ppt - log_d).abs());
        values.push(format!("d={d}: ALL {all:.6} PPT {ppt:.6}"));
    }
    outcome(worst <= 1e-4, format!("{}; max deviation {worst:.2e}", values.join(", ")))
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("sweep_{run}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_qconv"))
            .args(["depol", "--d", "2", "--p", "0.15", "--eps", "1e-2,1e-4,1e-6", "--n", "1..1000", "--out"])
            .arg(&path)
            .status()
            .unwrap();
        assert!(status.success());
        files.push(std::fs::read(&path).unwrap());
    }
    let identical = files[0] == files[1];
    let rows = parse_bound_csv(std::str::from_utf8(&files[0]).unwrap()).unwrap();
    let mismatches = rows
        .iter()
        .filter(|row| {
            let r = depolarising_exact(2, 0.15, row.n, row.epsilon).unwrap();
            row.bound_bits != rounded(r.bits) || row.beta != rounded(r.beta) || row.rate_bits_per_use != rounded(r.rate())
        })
        .count();
    let last = rows.iter().filter(|r| r.n == 1000).map(|r| format!("{:.4}", r.rate_bits_per_use)).collect::<Vec<_>>();
    let pass = identical && rows.len() == 3000 && mismatches == 0;
    outcome(
        pass,
        format!(
            "byte-identical: {identical}; {} rows; {mismatches} re-parse mismatches; rates at n = 1000: {}",
            rows.len(),
            last.join(", ")
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("capacity reproduction", capacity),
        ("exact vs SDP oracle equivalence", exact_vs_sdp),
        ("binomial formula fidelity", binomial_fidelity),
        ("Stein trend at n = 1000", stein_trend),
        ("strong duality", strong_duality),
        ("class hierarchy", class_hierarchy),
        ("meta-converse property", meta_converse),
        ("Fano dominance and convexity", fano_and_convexity),
        ("identity-channel closed forms", identity_closed_forms),
        ("CLI determinism and round-trip", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            outcome(false, format!("panicked: {}", msg.unwrap_or_default()))
        });
        if !result.pass {
            failed += 1;
        }
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name}: {} [{:.2?}]", i + 1, result.detail, start.elapsed());
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
