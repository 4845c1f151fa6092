//! Converse bounds on the size of codes for classical communication.
//!
//! The entanglement-assisted bound is the semidefinite program in
//! `R = (rho_Abar^{1/2} (x) I) T (rho_Abar^{1/2} (x) I)`:
//!
//! ```text
//! minimize    lambda
//! subject to  Tr_Abar R <= lambda I_B
//!             Tr[R J] >= 1 - eps
//!             0 <= R <= rho_Abar (x) I_B
//! ```
//!
//! with `J` the Choi operator and `rho_Abar = rho^T`. The PPT class adds
//! `0 <= R^{T_B} <= rho_Abar (x) I_B`. The optimum `lambda` is the type-II
//! error maximized over the alternative output state, and the bound on
//! `log2 M` is `-log2 lambda`.

mod classical;
mod info;
mod storage;
mod symmetry;

pub use classical::{classical_converse, classical_converse_at};
pub use info::{fano_bound, joint_state, wang_renner_chi};
pub use storage::{minimal_storage_uses, noisy_storage_minentropy};
pub use symmetry::{average_state, verify_covariance};

use std::fmt;

use crate::error::{Error, Result};
use crate::hypotest::binomial_beta_xf;
use crate::linalg::{eigh, partial_trace, DimPair, HermitianOperator, Subsystem};
use crate::quantum::{DensityMatrix, QuantumChannel};
use crate::sdp::{self, Constraint, LinearMap, SdpProblem, SdpSolution, SdpStatus, Sense, SparseHermitian};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestClass {
    All,
    Ppt,
    Lc1,
    L,
}

impl fmt::Display for TestClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestClass::All => "ALL",
            TestClass::Ppt => "PPT",
            TestClass::Lc1 => "LC1",
            TestClass::L => "L",
        })
    }
}

/// `eps = 0` is replaced by this on the SDP path so the program stays strictly feasible.
pub const SDP_EPS_FLOOR: f64 = 1e-9;

/// Eigenvalues of `Tr_Abar R` this close to the top are merged into the optimal `sigma`.
const SIGMA_MERGE_TOL: f64 = 1e-8;

/// Solver report attached to SDP-based results.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics {
    pub status: SdpStatus,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub relative_gap: f64,
    pub max_constraint_violation: f64,
    /// `| ||Tr_Abar R||_inf - lambda |`; absent for programs without `R`.
    pub sigma_certificate_gap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundResult {
    /// Upper bound on `log2 M`, equal to `-log2_beta`.
    pub bits: f64,
    /// May underflow to 0 for long blocklengths; `log2_beta` does not.
    pub beta: f64,
    pub log2_beta: f64,
    pub epsilon: f64,
    pub test_class: TestClass,
    pub n_uses: usize,
    pub optimal_r: Option<HermitianOperator>,
    pub optimal_sigma: Option<DensityMatrix>,
    pub optimal_rho: Option<DensityMatrix>,
    pub diagnostics: Option<Diagnostics>,
}

impl BoundResult {
    fn from_log2_beta(log2_beta: f64, epsilon: f64, test_class: TestClass, n_uses: usize) -> Self {
        let log2_beta = log2_beta.min(0.0);
        Self {
            bits: -log2_beta,
            beta: log2_beta.exp2(),
            log2_beta,
            epsilon,
            test_class,
            n_uses,
            optimal_r: None,
            optimal_sigma: None,
            optimal_rho: None,
            diagnostics: None,
        }
    }

    /// `bits / n_uses`.
    pub fn rate(&self) -> f64 {
        self.bits / self.n_uses as f64
    }
}

fn check_class(cls: TestClass) -> Result<()> {
    match cls {
        TestClass::All | TestClass::Ppt => Ok(()),
        other => Err(Error::ClassNotComputable(other)),
    }
}

/// Validates `eps in [0, 1)` and applies the SDP floor.
fn sdp_eps(eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidProbability { name: "eps", value: eps });
    }
    Ok(eps.max(SDP_EPS_FLOOR))
}

/// The data every converse SDP is assembled from.
///
/// `choi` has the reference factor first (`|i>|k>` at index `i dim_out + k`)
/// and `rho_ref = rho^T` is the reference marginal of the canonical
/// purification, so `Tr[R choi]` is the acceptance probability of the test
/// behind `R` on `(id (x) E) rho_{Abar A}`.
struct ChoiSetting {
    dims: DimPair,
    choi: HermitianOperator,
    rho_ref: Option<HermitianOperator>,
}

impl ChoiSetting {
    fn new(channel: &QuantumChannel, rho: Option<&DensityMatrix>) -> Result<Self> {
        let dims = DimPair::new(channel.dim_in(), channel.dim_out())?;
        let rho_ref = match rho {
            Some(r) if r.dim() != channel.dim_in() => {
                return Err(Error::DimensionMismatch { expected: channel.dim_in(), found: r.dim() })
            }
            Some(r) => Some(r.operator().transpose()),
            None => None,
        };
        Ok(Self { dims, choi: channel.choi().clone(), rho_ref })
    }

    /// `rho_ref (x) I_B`.
    fn reference_bound(&self) -> HermitianOperator {
        let rho = self.rho_ref.as_ref().expect("fixed reference state");
        rho.kron(&HermitianOperator::identity(self.dims.b))
    }
}

struct PrimalBlocks {
    r: usize,
    lambda: usize,
    rho: Option<usize>,
}

/// The primal program; with `setting.rho_ref = None` the reference state is a variable block.
fn primal_problem(setting: &ChoiSetting, eps: f64, cls: TestClass) -> Result<(SdpProblem, PrimalBlocks)> {
    let dims = setting.dims;
    let n = dims.total();
    let mut p = SdpProblem::new();
    let r = p.add_block(n);
    let lambda = p.add_block(1);
    p.set_objective(lambda, SparseHermitian::scalar(1.0))?;
    let rho = setting.rho_ref.is_none().then(|| p.add_block(dims.a));

    let id_b = HermitianOperator::identity(dims.b);
    p.add_matrix_constraint(
        &[(r, LinearMap::PartialTraceFirst(dims), 1.0), (lambda, LinearMap::ScalarTimes(id_b.clone()), -1.0)],
        Sense::Le,
        &HermitianOperator::zeros(dims.b),
    )?;
    p.add_constraint(Constraint {
        terms: vec![(r, SparseHermitian::from_dense(&setting.choi))],
        sense: Sense::Ge,
        rhs: 1.0 - eps,
    })?;

    let upper = |p: &mut SdpProblem, map: LinearMap| -> Result<()> {
        match rho {
            Some(k) => p.add_matrix_constraint(
                &[(r, map, 1.0), (k, LinearMap::KronIdentityRight(dims.b), -1.0)],
                Sense::Le,
                &HermitianOperator::zeros(n),
            ),
            None => p.add_matrix_constraint(&[(r, map, 1.0)], Sense::Le, &setting.reference_bound()),
        }
        .map(|_| ())
    };
    upper(&mut p, LinearMap::Identity)?;
    if cls == TestClass::Ppt {
        upper(&mut p, LinearMap::PartialTransposeSecond(dims))?;
        p.add_matrix_constraint(
            &[(r, LinearMap::PartialTransposeSecond(dims), 1.0)],
            Sense::Ge,
            &HermitianOperator::zeros(n),
        )?;
    }
    if let Some(k) = rho {
        p.add_constraint(Constraint {
            terms: vec![(k, SparseHermitian::identity(dims.a))],
            sense: Sense::Eq,
            rhs: 1.0,
        })?;
    }
    Ok((p, PrimalBlocks { r, lambda, rho }))
}

fn solve_checked(problem: &SdpProblem) -> Result<(SdpSolution, f64)> {
    let sol = sdp::solve(problem)?;
    if sol.status != SdpStatus::Optimal {
        return Err(Error::Solver { status: sol.status });
    }
    let report = sdp::verify(problem, &sol);
    Ok((sol, report.max_constraint_violation))
}

fn diagnostics(sol: &SdpSolution, violation: f64, sigma_gap: Option<f64>) -> Diagnostics {
    Diagnostics {
        status: sol.status,
        iterations: sol.iterations,
        primal_objective: sol.primal_objective,
        dual_objective: sol.dual_objective,
        relative_gap: sol.relative_gap(),
        max_constraint_violation: violation,
        sigma_certificate_gap: sigma_gap,
    }
}

/// Uniform state on the top eigenspace of `Tr_Abar R`, and its top eigenvalue.
fn sigma_from_r(r: &HermitianOperator, dims: DimPair) -> Result<(DensityMatrix, f64)> {
    let marginal = partial_trace(r, dims, Subsystem::A)?;
    let e = eigh(&marginal);
    let top = e.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut acc = HermitianOperator::zeros(dims.b);
    let mut count = 0usize;
    for (k, &v) in e.values.iter().enumerate() {
        if v >= top - SIGMA_MERGE_TOL {
            acc = &acc + &HermitianOperator::projector(&e.vector(k));
            count += 1;
        }
    }
    Ok((DensityMatrix::new_unchecked(acc.scale(1.0 / count as f64)), top))
}

/// Projects a numerically PSD operator to a state.
fn to_state(op: &HermitianOperator) -> DensityMatrix {
    let clipped = op.map_spectrum(|x| x.max(0.0));
    let tr = clipped.trace();
    DensityMatrix::new_unchecked(clipped.scale(1.0 / tr))
}

fn primal_result(
    setting: &ChoiSetting,
    eps: f64,
    cls: TestClass,
    n_uses: usize,
) -> Result<BoundResult> {
    let (problem, blocks) = primal_problem(setting, sdp_eps(eps)?, cls)?;
    let (sol, violation) = solve_checked(&problem)?;
    let lambda = sol.primal_blocks[blocks.lambda].get(0, 0).re;
    let r = sol.primal_blocks[blocks.r].clone();
    let (sigma, top) = sigma_from_r(&r, setting.dims)?;
    let beta = sol.primal_objective.clamp(f64::MIN_POSITIVE, 1.0);
    let mut out = BoundResult::from_log2_beta(beta.log2(), eps, cls, n_uses);
    out.diagnostics = Some(diagnostics(&sol, violation, Some((top - lambda).abs())));
    out.optimal_rho = blocks.rho.map(|k| to_state(&sol.primal_blocks[k].transpose()));
    out.optimal_sigma = Some(sigma);
    out.optimal_r = Some(r);
    Ok(out)
}

/// `I^cls_eps(E, rho)`: the converse bound at a fixed input state.
///
/// `eps = 0` is evaluated at [`SDP_EPS_FLOOR`].
pub fn ea_bound(channel: &QuantumChannel, rho: &DensityMatrix, eps: f64, cls: TestClass) -> Result<BoundResult> {
    check_class(cls)?;
    let setting = ChoiSetting::new(channel, Some(rho))?;
    primal_result(&setting, eps, cls, 1)
}

/// As [`ea_bound`], with the input state optimized jointly.
///
/// `optimal_rho` is returned on the channel input.
pub fn ea_bound_opt_rho(channel: &QuantumChannel, eps: f64, cls: TestClass) -> Result<BoundResult> {
    check_class(cls)?;
    let setting = ChoiSetting::new(channel, None)?;
    primal_result(&setting, eps, cls, 1)
}

/// [`ea_bound`] for `E^{(x) n}`, recording `n` as the number of uses.
pub fn ea_bound_uses(channel: &QuantumChannel, n: usize, rho: &DensityMatrix, eps: f64, cls: TestClass) -> Result<BoundResult> {
    check_class(cls)?;
    let power = channel.tensor_power(n)?;
    let setting = ChoiSetting::new(&power, Some(rho))?;
    primal_result(&setting, eps, cls, n)
}

/// [`ea_bound_opt_rho`] for `E^{(x) n}`.
pub fn ea_bound_opt_rho_uses(channel: &QuantumChannel, n: usize, eps: f64, cls: TestClass) -> Result<BoundResult> {
    check_class(cls)?;
    let power = channel.tensor_power(n)?;
    let setting = ChoiSetting::new(&power, None)?;
    primal_result(&setting, eps, cls, n)
}

/// The dual program, stated for minimization:
///
/// ```text
/// minimize    Tr[F (rho_Abar (x) I)] - (1 - eps) mu
/// subject to  I_Abar (x) G + F >= mu J,  Tr G <= 1,  F, G, mu >= 0
/// ```
///
/// Blocks are `(G, F, mu)`.
fn dual_problem(setting: &ChoiSetting, eps: f64) -> Result<SdpProblem> {
    let dims = setting.dims;
    let n = dims.total();
    let mut p = SdpProblem::new();
    let g = p.add_block(dims.b);
    let f = p.add_block(n);
    let mu = p.add_block(1);
    p.set_objective(f, SparseHermitian::from_dense(&setting.reference_bound()))?;
    p.set_objective(mu, SparseHermitian::scalar(-(1.0 - eps)))?;
    p.add_matrix_constraint(
        &[
            (g, LinearMap::KronIdentityLeft(dims.a), 1.0),
            (f, LinearMap::Identity, 1.0),
            (mu, LinearMap::ScalarTimes(setting.choi.clone()), -1.0),
        ],
        Sense::Ge,
        &HermitianOperator::zeros(n),
    )?;
    p.add_constraint(Constraint { terms: vec![(g, SparseHermitian::identity(dims.b))], sense: Sense::Le, rhs: 1.0 })?;
    Ok(p)
}

/// `(1 - eps) mu - Tr[F (rho_Abar (x) I)]` at a dual point; a lower bound on `beta` when feasible.
pub fn dual_objective_at(rho: &DensityMatrix, f: &HermitianOperator, mu: f64, eps: f64) -> f64 {
    let bound = rho.operator().transpose().kron(&HermitianOperator::identity(f.dim() / rho.dim()));
    (1.0 - eps) * mu - f.dot(&bound)
}

/// The entanglement-assisted bound from the dual program.
pub fn ea_bound_dual(channel: &QuantumChannel, rho: &DensityMatrix, eps: f64) -> Result<BoundResult> {
    let setting = ChoiSetting::new(channel, Some(rho))?;
    let problem = dual_problem(&setting, sdp_eps(eps)?)?;
    let (sol, violation) = solve_checked(&problem)?;
    let value = (-sol.primal_objective).clamp(f64::MIN_POSITIVE, 1.0);
    let mut out = BoundResult::from_log2_beta(value.log2(), eps, TestClass::All, 1);
    out.diagnostics = Some(diagnostics(&sol, violation, None));
    Ok(out)
}

/// Exact `max_rho I^ALL_eps` for `n` uses of the `d`-dimensional depolarising channel.
///
/// Reduces to testing `Bin(n, 1 - p + p/d^2)` against `Bin(n, 1/d^2)`.
pub fn depolarising_exact(d: usize, p: f64, n: usize, eps: f64) -> Result<BoundResult> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("depolarising channel needs d >= 2, got {d}")));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability { name: "p", value: p });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("blocklength must be at least 1".into()));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidProbability { name: "eps", value: eps });
    }
    let d2 = (d * d) as f64;
    let (test, _) = binomial_beta_xf(1.0 - p + p / d2, 1.0 / d2, n as u64, eps)?;
    Ok(BoundResult::from_log2_beta(test.log2_beta, eps, TestClass::All, n))
}
