//! Entropic quantities, all in bits.

use crate::error::{Error, Result};

use super::{canonical_purification, DensityMatrix, QuantumChannel, STATE_TOL};

/// `-sum p log2 p` with `0 log 0 = 0`; entries in `[-1e-10, 0)` count as zero.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum::<f64>()
        .max(0.0)
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let w = rho.operator().eigenvalues();
    debug_assert!(w.first().is_none_or(|&x| x >= -STATE_TOL));
    let s = shannon_entropy(&w);
    s.min((rho.dim() as f64).log2())
}

/// `h(p) = -p log2 p - (1-p) log2 (1-p)`.
pub fn binary_entropy(p: f64) -> f64 {
    shannon_entropy(&[p, 1.0 - p])
}

/// `d(p||q) = p log2(p/q) + (1-p) log2((1-p)/(1-q))`.
pub fn binary_relative_entropy(p: f64, q: f64) -> f64 {
    let term = |a: f64, b: f64| {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).log2()
        }
    };
    term(p, q) + term(1.0 - p, 1.0 - q)
}

/// `I(E, rho) = S(rho) + S(E(rho)) - S((id (x) E) rho_{Abar A})`, clamped at 0.
pub fn mutual_information(channel: &QuantumChannel, rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != channel.dim_in() {
        return Err(Error::DimensionMismatch { expected: channel.dim_in(), found: rho.dim() });
    }
    let out = channel.apply(rho)?;
    let psi = canonical_purification(rho);
    let joint = channel.apply_to_second(psi.operator(), rho.dim())?;
    let joint = DensityMatrix::new_unchecked(joint);
    let i = von_neumann_entropy(rho) + von_neumann_entropy(&out) - von_neumann_entropy(&joint);
    Ok(i.max(0.0))
}
