//! Quantum Neyman-Pearson tests by spectral thresholding of `tau0 - t tau1`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{eigh, HermitianOperator, C64};
use crate::quantum::DensityMatrix;

use super::{check_eps, TestResult};

const ALPHA_BRACKET: f64 = 1e-13;
const MAX_BISECTIONS: usize = 200;
const T_CEILING: f64 = 1e12;
/// Eigenvalues within this fraction of `||tau0|| + t ||tau1||` count as crossing.
const CROSSING_REL: f64 = 1e-11;

struct Split {
    t: f64,
    vectors: DMatrix<C64>,
    values: Vec<f64>,
    /// `<v_k, tau0 v_k>` and `<v_k, tau1 v_k>` per eigenvector.
    w0: Vec<f64>,
    w1: Vec<f64>,
}

impl Split {
    fn at(tau0: &HermitianOperator, tau1: &HermitianOperator, t: f64) -> Self {
        let d = &(tau0 - &tau1.scale(t));
        let e = eigh(d);
        let v = e.vectors.into_inner();
        let weights = |tau: &HermitianOperator| -> Vec<f64> {
            let tv = tau.inner() * &v;
            (0..v.ncols()).map(|k| v.column(k).dotc(&tv.column(k)).re).collect()
        };
        Split { t, w0: weights(tau0), w1: weights(tau1), values: e.values, vectors: v }
    }

    /// Type-I error of the projector onto the strictly positive part.
    fn alpha_strict(&self) -> f64 {
        let acc: f64 = self.values.iter().zip(&self.w0).filter(|(l, _)| **l > 0.0).map(|(_, w)| w).sum();
        (1.0 - acc).max(0.0)
    }
}

/// Optimal `beta` with the optimal test operator `T`, `0 <= T <= I`.
pub fn quantum_np_test(
    tau0: &DensityMatrix,
    tau1: &DensityMatrix,
    eps: f64,
) -> Result<(TestResult, HermitianOperator)> {
    check_eps(eps)?;
    if tau0.dim() != tau1.dim() {
        return Err(Error::DimensionMismatch { expected: tau0.dim(), found: tau1.dim() });
    }
    let dim = tau0.dim();
    let (a, b) = (tau0.operator(), tau1.operator());
    if eps >= 1.0 {
        return Ok((TestResult::from_beta(0.0, f64::INFINITY, 1.0, None, 1.0), HermitianOperator::zeros(dim)));
    }

    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut alpha_lo = Split::at(a, b, lo).alpha_strict();
    let mut alpha_hi = Split::at(a, b, hi).alpha_strict();
    while alpha_hi <= eps && hi < T_CEILING {
        lo = hi;
        alpha_lo = alpha_hi;
        hi *= 4.0;
        alpha_hi = Split::at(a, b, hi).alpha_strict();
    }

    let split = if alpha_hi <= eps {
        // tau0 carries mass outside supp tau1: beta vanishes as t grows
        Split::at(a, b, hi)
    } else {
        for _ in 0..MAX_BISECTIONS {
            if alpha_hi - alpha_lo < ALPHA_BRACKET {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let am = Split::at(a, b, mid).alpha_strict();
            if am <= eps {
                lo = mid;
                alpha_lo = am;
            } else {
                hi = mid;
                alpha_hi = am;
            }
        }
        Split::at(a, b, lo)
    };

    let scale = a.max_eigenvalue().abs() + split.t * b.max_eigenvalue().abs();
    let cut = CROSSING_REL * scale.max(f64::MIN_POSITIVE);
    let (mut acc0, mut mass0) = (0.0, 0.0);
    let (mut beta_pos, mut beta_cross) = (0.0, 0.0);
    let mut weight = vec![0.0; dim];
    for k in 0..dim {
        let l = split.values[k];
        if l > cut {
            weight[k] = 1.0;
            acc0 += split.w0[k];
            beta_pos += split.w1[k];
        } else if l >= -cut {
            weight[k] = f64::NAN;
            mass0 += split.w0[k];
            beta_cross += split.w1[k];
        }
    }
    let alpha_pos = 1.0 - acc0;
    // crossing weight chosen so that the type-I error is exactly eps
    let accept_cross = if mass0 > 1e-15 { ((alpha_pos - eps) / mass0).clamp(0.0, 1.0) } else { 0.0 };
    for w in weight.iter_mut() {
        if w.is_nan() {
            *w = accept_cross;
        }
    }
    let mut beta = beta_pos + accept_cross * beta_cross;
    let mut alpha = alpha_pos - accept_cross * mass0;
    if alpha < eps - 1e-12 && alpha_hi <= eps {
        // unconstrained regime: shrink the test uniformly to use the full budget
        let kappa = ((1.0 - eps) / (1.0 - alpha)).clamp(0.0, 1.0);
        weight.iter_mut().for_each(|w| *w *= kappa);
        beta *= kappa;
        alpha = 1.0 - kappa * (1.0 - alpha);
    }

    let v = &split.vectors;
    let scaled = DMatrix::from_fn(dim, dim, |i, k| v[(i, k)] * weight[k]);
    let t = HermitianOperator::hermitian_part(&crate::linalg::ComplexMatrix::from_inner_unchecked(scaled * v.adjoint()));
    let gamma = 1.0 - accept_cross;
    Ok((TestResult::from_beta(beta, split.t, gamma, None, alpha), t))
}

/// Optimal type-II error for distinguishing two quantum states.
pub fn quantum_np_beta(tau0: &DensityMatrix, tau1: &DensityMatrix, eps: f64) -> Result<TestResult> {
    quantum_np_test(tau0, tau1, eps).map(|(r, _)| r)
}
