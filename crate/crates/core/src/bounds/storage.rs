use crate::error::{Error, Result};

use super::{depolarising_exact, BoundResult};

/// Lower bound on the adversary's min-entropy when `code_rate_bits` exceed
/// what the storage channel can carry at error `bound.epsilon`; 0 otherwise.
pub fn noisy_storage_minentropy(code_rate_bits: f64, bound: &BoundResult) -> f64 {
    if code_rate_bits > bound.bits {
        -(1.0 - bound.epsilon).log2()
    } else {
        0.0
    }
}

/// Smallest `n <= n_max` with `n rate_per_use` above the depolarising bound
/// for `n` uses, together with that bound.
pub fn minimal_storage_uses(
    d: usize,
    p: f64,
    rate_per_use: f64,
    eps: f64,
    n_max: usize,
) -> Result<Option<(usize, BoundResult)>> {
    if !(rate_per_use > 0.0) {
        return Err(Error::InvalidArgument(format!("rate per use must be positive, got {rate_per_use}")));
    }
    for n in 1..=n_max {
        let bound = depolarising_exact(d, p, n, eps)?;
        if n as f64 * rate_per_use > bound.bits {
            return Ok(Some((n, bound)));
        }
    }
    Ok(None)
}
