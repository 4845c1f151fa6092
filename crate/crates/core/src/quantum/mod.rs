//! Quantum states, channels, entropies and the code-to-test construction.

mod channel;
mod code;
mod entropy;

pub use channel::{depolarising_channel, QuantumChannel, DEFAULT_TENSOR_POWER_CAP, TP_TOL};
pub use code::{code_to_test, Code, LocalTest};
pub use entropy::{
    binary_entropy, binary_relative_entropy, mutual_information, shannon_entropy, von_neumann_entropy,
};

use crate::error::{Error, Result};
use crate::linalg::{HermitianOperator, C64};

/// Tolerance on negative eigenvalues and trace deviation of a state.
pub const STATE_TOL: f64 = 1e-10;

/// Positive semidefinite, unit-trace Hermitian operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    pub fn new(op: HermitianOperator) -> Result<Self> {
        Self::with_tolerance(op, STATE_TOL)
    }

    pub fn with_tolerance(op: HermitianOperator, tol: f64) -> Result<Self> {
        let tr = op.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = op.min_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { op })
    }

    pub(crate) fn new_unchecked(op: HermitianOperator) -> Self {
        Self { op }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self { op: HermitianOperator::identity(d).scale(1.0 / d as f64) }
    }

    pub fn from_diagonal(p: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_real_diagonal(p))
    }

    /// `|v><v|` for a unit vector.
    pub fn pure(v: &[C64]) -> Result<Self> {
        Self::new(HermitianOperator::projector(v))
    }

    pub fn basis(d: usize, k: usize) -> Self {
        let mut p = vec![0.0; d];
        p[k] = 1.0;
        Self { op: HermitianOperator::from_real_diagonal(&p) }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn into_operator(self) -> HermitianOperator {
        self.op
    }

    pub fn transpose(&self) -> Self {
        Self { op: self.op.transpose() }
    }

    pub fn kron(&self, other: &DensityMatrix) -> Self {
        Self { op: self.op.kron(&other.op) }
    }

    /// Convex combination `sum_k w_k rho_k`.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::InvalidDistribution("weights and states differ in length".into()));
        }
        let d = states[0].dim();
        let mut acc = HermitianOperator::zeros(d);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: s.dim() });
            }
            acc = &acc + &s.op.scale(*w);
        }
        Self::new(acc)
    }
}

/// `sum_{i,j} |i>|i><j|<j|` on `d x d`.
pub fn phi_operator(d: usize) -> HermitianOperator {
    let n = d * d;
    let mut m = nalgebra::DMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + i, j * d + j)] = C64::new(1.0, 0.0);
        }
    }
    HermitianOperator::symmetrized(m)
}

/// `rho^{1/2} Phi rho^{1/2}` with `rho` acting on the second factor.
///
/// The first factor is the reference copy; its marginal is `rho^T`.
pub fn canonical_purification(rho: &DensityMatrix) -> DensityMatrix {
    let d = rho.dim();
    let root = rho.op.sqrt_psd();
    let lift = HermitianOperator::identity(d).kron(&root);
    let phi = phi_operator(d);
    let m = &(&lift * &phi) * &lift.to_matrix();
    DensityMatrix::new_unchecked(HermitianOperator::hermitian_part(&m))
}
