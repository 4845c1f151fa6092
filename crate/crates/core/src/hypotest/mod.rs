//! Neyman-Pearson hypothesis testing: classical, binomial and quantum.
//!
//! Every operation returns the smallest type-II error `beta` attainable by a
//! test whose type-I error is at most `eps`. Randomization on the boundary is
//! recorded as a weight `gamma`, never sampled.

mod binomial;
mod spectral;
mod xprec;

pub use binomial::{binomial_beta, binomial_beta_exact, ExactBinomialBeta};
pub use spectral::{quantum_np_beta, quantum_np_test};
pub(crate) use binomial::binomial_beta_xf;

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a distribution.
pub const DISTRIBUTION_TOL: f64 = 1e-12;

/// Probability vector over a finite alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalDistribution {
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(probs, DISTRIBUTION_TOL)
    }

    pub fn with_tolerance(probs: Vec<f64>, tol: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if let Some(x) = probs.iter().find(|x| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {x} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!("entries sum to {total}")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// i.i.d. product `p^{(x) n}`, outcomes in lexicographic order.
    pub fn product_power(&self, n: usize) -> Result<Self> {
        let mut acc = vec![1.0];
        for _ in 0..n {
            acc = acc.iter().flat_map(|a| self.probs.iter().map(move |p| a * p)).collect();
        }
        Self::with_tolerance(acc, 1e-10)
    }
}

/// Outcome of an optimal test.
///
/// `threshold` is the likelihood ratio (classical, binomial count for the
/// binomial path, `t` in `tau0 - t tau1` for the quantum path) at which the
/// test randomizes; `gamma` is the rejection weight on that boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct TestResult {
    pub beta: f64,
    /// `log2 beta`, exact even when `beta` underflows.
    pub log2_beta: f64,
    pub threshold: f64,
    pub gamma: f64,
    /// Outcome index (classical) or count `l` (binomial) carrying the weight.
    pub boundary: Option<usize>,
    pub alpha_achieved: f64,
}

impl TestResult {
    fn from_beta(beta: f64, threshold: f64, gamma: f64, boundary: Option<usize>, alpha: f64) -> Self {
        let beta = beta.clamp(0.0, 1.0);
        Self {
            beta,
            log2_beta: if beta > 0.0 { beta.log2() } else { f64::NEG_INFINITY },
            threshold,
            gamma: gamma.clamp(0.0, 1.0),
            boundary,
            alpha_achieved: alpha.max(0.0),
        }
    }
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidProbability { name: "eps", value: eps });
    }
    Ok(())
}

/// Exact optimal `beta` by likelihood-ratio ordering.
pub fn classical_np_beta(p0: &ClassicalDistribution, p1: &ClassicalDistribution, eps: f64) -> Result<TestResult> {
    check_eps(eps)?;
    if p0.len() != p1.len() {
        return Err(Error::DimensionMismatch { expected: p0.len(), found: p1.len() });
    }
    if eps >= 1.0 {
        return Ok(TestResult::from_beta(0.0, f64::INFINITY, 1.0, None, 1.0));
    }
    let (a, b) = (p0.probs(), p1.probs());
    let ratio = |r: usize| if b[r] == 0.0 { f64::INFINITY } else { a[r] / b[r] };
    let mut order: Vec<usize> = (0..a.len()).filter(|&r| a[r] > 0.0).collect();
    order.sort_by(|&r, &s| match ratio(s).total_cmp(&ratio(r)) {
        Ordering::Equal => r.cmp(&s),
        o => o,
    });

    // walk from the low-ratio end so the rejected mass is summed directly
    let mut rejected0 = 0.0;
    for k in (0..order.len()).rev() {
        let r = order[k];
        if rejected0 + a[r] <= eps {
            rejected0 += a[r];
            continue;
        }
        let gamma = ((eps - rejected0) / a[r]).clamp(0.0, 1.0);
        let accepted: f64 = order[..k].iter().rev().map(|&s| b[s]).sum();
        let beta = accepted + (1.0 - gamma) * b[r];
        return Ok(TestResult::from_beta(beta, ratio(r), gamma, Some(r), rejected0 + gamma * a[r]));
    }
    Ok(TestResult::from_beta(0.0, f64::INFINITY, 1.0, None, rejected0))
}
