//! Optimal tests between i.i.d. binary hypotheses.
//!
//! Under `H0` the success count is `Bin(n, mu)`, under `H1` it is
//! `Bin(n, lambda)` with `lambda <= mu`. The optimal test rejects counts below
//! `l`, accepts counts above it and rejects count `l` with weight `gamma`:
//!
//! `alpha_l = sum_{j<l} pmf_mu(j)`, `beta_l = sum_{j>=l} pmf_lambda(j)`,
//! `l = max { l : alpha_l <= eps }`, `gamma = (eps - alpha_l) / pmf_mu(l)`,
//! `beta = beta_{l+1} + (1 - gamma) pmf_lambda(l)`.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

use super::xprec::Xf;
use super::{check_eps, TestResult};

fn check_pair(mu: f64, lambda: f64, n: u64) -> Result<()> {
    for (name, v) in [("mu", mu), ("lambda", lambda)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidProbability { name, value: v });
        }
    }
    if lambda > mu {
        return Err(Error::HypothesisOrdering { mu, lambda });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("blocklength must be at least 1".into()));
    }
    Ok(())
}

/// `pmf(j)` of `Bin(n, theta)` for `j = 0..=n`.
fn pmf(theta: f64, n: u64) -> Vec<Xf> {
    let len = n as usize + 1;
    let mut out = vec![Xf::ZERO; len];
    if theta == 0.0 {
        out[0] = Xf::ONE;
        return out;
    }
    if theta == 1.0 {
        out[len - 1] = Xf::ONE;
        return out;
    }
    let q = Xf::diff_of(1.0, theta);
    let odds = Xf::from_f64(theta).div(q);
    out[0] = q.powi(n);
    for j in 0..n {
        let next = out[j as usize].mul(odds).mul_f64((n - j) as f64).div_f64((j + 1) as f64);
        out[j as usize + 1] = next;
    }
    out
}

/// Optimal type-II error, exact up to double-double rounding.
///
/// `log2_beta` stays accurate after `beta` underflows `f64`.
pub fn binomial_beta(mu: f64, lambda: f64, n: u64, eps: f64) -> Result<TestResult> {
    binomial_beta_xf(mu, lambda, n, eps).map(|(r, _)| r)
}

/// As [`binomial_beta`], also returning `beta` at full working precision.
pub(crate) fn binomial_beta_xf(mu: f64, lambda: f64, n: u64, eps: f64) -> Result<(TestResult, Xf)> {
    check_pair(mu, lambda, n)?;
    check_eps(eps)?;
    if eps >= 1.0 {
        return Ok((TestResult::from_beta(0.0, n as f64, 1.0, Some(n as usize), 1.0), Xf::ZERO));
    }
    let pm = pmf(mu, n);
    let pl = pmf(lambda, n);
    let eps_x = Xf::from_f64(eps);

    // alpha_{l+1} = alpha_l + pm[l]; stop at the first l with alpha_{l+1} > eps
    let mut alpha = Xf::ZERO;
    let mut ell = n as usize;
    for (j, p) in pm.iter().enumerate() {
        let next = alpha.add(*p);
        if !next.le(&eps_x) {
            ell = j;
            break;
        }
        alpha = next;
    }
    let mass = pm[ell];
    let (gamma, keep) = if mass.is_zero() {
        (Xf::ZERO, Xf::ONE)
    } else {
        let gamma = eps_x.sub(alpha).div(mass);
        let keep = alpha.add(mass).sub(eps_x).div(mass);
        (gamma, keep)
    };
    let mut tail = Xf::ZERO;
    for p in pl[ell + 1..].iter().rev() {
        tail = tail.add(*p);
    }
    let beta = tail.add(keep.mul(pl[ell]));
    let achieved = alpha.add(gamma.mul(mass));
    let log2_beta = if beta.is_zero() { f64::NEG_INFINITY } else { beta.log2() };
    let result = TestResult {
        beta: beta.to_f64().clamp(0.0, 1.0),
        log2_beta: log2_beta.min(0.0),
        threshold: ell as f64,
        gamma: gamma.to_f64().clamp(0.0, 1.0),
        boundary: Some(ell),
        alpha_achieved: achieved.to_f64(),
    };
    Ok((result, beta))
}

/// Exact rational evaluation of the optimal test.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactBinomialBeta {
    pub beta: BigRational,
    pub ell: u64,
    pub gamma: BigRational,
}

impl ExactBinomialBeta {
    pub fn log2_beta(&self) -> f64 {
        if self.beta.is_zero() {
            return f64::NEG_INFINITY;
        }
        log2_biguint(self.beta.numer().magnitude()) - log2_biguint(self.beta.denom().magnitude())
    }
}

/// Nearest extended-precision value of a non-negative rational.
#[cfg(test)]
pub(crate) fn rational_to_xf(x: &BigRational) -> Xf {
    let part = |v: &BigUint| {
        let shift = v.bits().saturating_sub(64);
        let top = (v >> shift).to_u64().expect("at most 64 bits");
        let hi = ((top >> 11) << 11) as f64;
        let lo = (top & 0x7ff) as f64;
        Xf::from_f64(hi).add(Xf::from_f64(lo)).ldexp(shift as i64)
    };
    if x.is_zero() {
        return Xf::ZERO;
    }
    part(x.numer().magnitude()).div(part(x.denom().magnitude()))
}

fn log2_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(64);
    let top = (x >> shift).to_f64().expect("64-bit value fits in f64");
    top.log2() + shift as f64
}

/// `C(n,j) a^j (b-a)^{n-j}` for `j = 0..=n`; `pmf(j) = term_j / b^n`.
fn integer_terms(a: &BigUint, b: &BigUint, n: u64) -> impl Iterator<Item = BigUint> {
    let (a, b) = (a.clone(), b.clone());
    let degenerate = a == b;
    let rest = if degenerate { BigUint::zero() } else { &b - &a };
    let mut current = if degenerate { BigUint::zero() } else { rest.pow(n as u32) };
    (0..=n).map(move |j| {
        if degenerate {
            return if j == n { BigUint::one() } else { BigUint::zero() };
        }
        let out = current.clone();
        if j < n {
            current = &current * (n - j) * &a / (BigUint::from(j + 1) * &rest);
        }
        out
    })
}

fn unit_fraction_parts(name: &'static str, x: &BigRational) -> Result<(BigUint, BigUint)> {
    if x.is_negative() || x > &BigRational::one() {
        return Err(Error::InvalidProbability { name, value: x.to_f64().unwrap_or(f64::NAN) });
    }
    Ok((x.numer().magnitude().clone(), x.denom().magnitude().clone()))
}

/// The same quantity in exact rational arithmetic.
///
/// Cost grows with `n log(denominator)`; intended as a reference for
/// dyadic or small-denominator parameters.
pub fn binomial_beta_exact(
    mu: &BigRational,
    lambda: &BigRational,
    n: u64,
    eps: &BigRational,
) -> Result<ExactBinomialBeta> {
    let (a, b) = unit_fraction_parts("mu", mu)?;
    let (c, d) = unit_fraction_parts("lambda", lambda)?;
    let (en, ed) = unit_fraction_parts("eps", eps)?;
    if lambda > mu {
        return Err(Error::HypothesisOrdering {
            mu: mu.to_f64().unwrap_or(f64::NAN),
            lambda: lambda.to_f64().unwrap_or(f64::NAN),
        });
    }
    if n == 0 {
        return Err(Error::InvalidArgument("blocklength must be at least 1".into()));
    }
    if eps.is_one() {
        return Ok(ExactBinomialBeta { beta: BigRational::zero(), ell: n, gamma: BigRational::one() });
    }

    // alpha_l <= eps  <=>  S_l * ed <= en * b^n
    let budget = &en * b.pow(n as u32);
    let mut prefix = BigUint::zero();
    let mut found = None;
    for (j, t) in integer_terms(&a, &b, n).enumerate() {
        let next = &prefix + &t;
        if &next * &ed > budget {
            found = Some((j as u64, t));
            break;
        }
        prefix = next;
    }
    let (ell, mass) = found.expect("alpha_{n+1} = 1 exceeds eps < 1");
    let to_int = |x: BigUint| BigInt::from(x);
    let gamma = BigRational::new(to_int(&budget - &prefix * &ed), to_int(&mass * &ed));

    let dn = d.pow(n as u32);
    let mut tail = BigUint::zero();
    let mut at_ell = BigUint::zero();
    for (j, u) in integer_terms(&c, &d, n).enumerate() {
        let j = j as u64;
        if j == ell {
            at_ell = u;
        } else if j > ell {
            tail += u;
        }
    }
    let denom = to_int(dn);
    let beta = BigRational::new(to_int(tail), denom.clone())
        + (BigRational::one() - &gamma) * BigRational::new(to_int(at_ell), denom);
    Ok(ExactBinomialBeta { beta, ell, gamma })
}
