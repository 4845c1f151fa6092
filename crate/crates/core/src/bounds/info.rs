use crate::error::{Error, Result};
use crate::hypotest::quantum_np_beta;
use crate::linalg::HermitianOperator;
use crate::quantum::{binary_entropy, canonical_purification, mutual_information, DensityMatrix, QuantumChannel};

const ENSEMBLE_TOL: f64 = 1e-10;

/// `(id (x) E) rho_{Abar A}` for the canonical purification; its `Abar` marginal is `rho^T`.
pub fn joint_state(channel: &QuantumChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    if rho.dim() != channel.dim_in() {
        return Err(Error::DimensionMismatch { expected: channel.dim_in(), found: rho.dim() });
    }
    let psi = canonical_purification(rho);
    Ok(DensityMatrix::new_unchecked(channel.apply_to_second(psi.operator(), rho.dim())?))
}

/// `-log2 beta_eps(tau_CB || tau_C (x) tau_B)` for the classical-quantum
/// state of a fixed ensemble `{p(x), rho(x)}` sent through the channel.
pub fn wang_renner_chi(ensemble: &[(f64, DensityMatrix)], channel: &QuantumChannel, eps: f64) -> Result<f64> {
    if ensemble.is_empty() {
        return Err(Error::InvalidDistribution("empty ensemble".into()));
    }
    let total: f64 = ensemble.iter().map(|(p, _)| p).sum();
    if ensemble.iter().any(|(p, _)| !(*p >= 0.0)) || (total - 1.0).abs() > ENSEMBLE_TOL {
        return Err(Error::InvalidDistribution(format!("ensemble weights sum to {total}")));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidProbability { name: "eps", value: eps });
    }
    let k = ensemble.len();
    let dout = channel.dim_out();
    let mut joint = HermitianOperator::zeros(k * dout);
    let mut average = HermitianOperator::zeros(dout);
    for (x, (p, state)) in ensemble.iter().enumerate() {
        let out = channel.apply(state)?.into_operator().scale(*p);
        let mut tag = vec![0.0; k];
        tag[x] = 1.0;
        joint = &joint + &HermitianOperator::from_real_diagonal(&tag).kron(&out);
        average = &average + &out;
    }
    let weights: Vec<f64> = ensemble.iter().map(|(p, _)| *p).collect();
    let product = HermitianOperator::from_real_diagonal(&weights).kron(&average);
    let test = quantum_np_beta(
        &DensityMatrix::new_unchecked(joint),
        &DensityMatrix::new_unchecked(product),
        eps,
    )?;
    Ok(-test.log2_beta)
}

/// `(I(E, rho) + h(eps)) / (1 - eps)`.
pub fn fano_bound(channel: &QuantumChannel, rho: &DensityMatrix, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidProbability { name: "eps", value: eps });
    }
    Ok((mutual_information(channel, rho)? + binary_entropy(eps)) / (1.0 - eps))
}
