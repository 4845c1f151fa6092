//! Unassisted codes and the test they induce on `Abar:B`.

use crate::error::{Error, Result};
use crate::linalg::HermitianOperator;

use super::{DensityMatrix, QuantumChannel};

const POVM_TOL: f64 = 1e-10;
const PINV_CUTOFF: f64 = 1e-12;

/// An unassisted code: one input state per message and a decoding POVM.
#[derive(Clone, Debug)]
pub struct Code {
    inputs: Vec<DensityMatrix>,
    decoder: Vec<HermitianOperator>,
}

impl Code {
    pub fn new(inputs: Vec<DensityMatrix>, decoder: Vec<HermitianOperator>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::InvalidCode("a code needs at least one message".into()));
        }
        if inputs.len() != decoder.len() {
            return Err(Error::InvalidCode(format!(
                "{} input states but {} decoder elements",
                inputs.len(),
                decoder.len()
            )));
        }
        let din = inputs[0].dim();
        if inputs.iter().any(|s| s.dim() != din) {
            return Err(Error::InvalidCode("input states differ in dimension".into()));
        }
        let dout = decoder[0].dim();
        let mut sum = HermitianOperator::zeros(dout);
        for (w, d) in decoder.iter().enumerate() {
            if d.dim() != dout {
                return Err(Error::InvalidCode("decoder elements differ in dimension".into()));
            }
            let min = d.min_eigenvalue();
            if min < -POVM_TOL {
                return Err(Error::InvalidCode(format!("decoder element {w} has eigenvalue {min:.3e}")));
            }
            sum = &sum + d;
        }
        let defect = sum.max_abs_diff(&HermitianOperator::identity(dout));
        if defect > POVM_TOL {
            return Err(Error::InvalidCode(format!("decoder elements sum to I only within {defect:.3e}")));
        }
        Ok(Self { inputs, decoder })
    }

    pub fn size(&self) -> usize {
        self.inputs.len()
    }

    pub fn inputs(&self) -> &[DensityMatrix] {
        &self.inputs
    }

    pub fn decoder(&self) -> &[HermitianOperator] {
        &self.decoder
    }

    /// Average input under equiprobable messages.
    pub fn average_input(&self) -> DensityMatrix {
        let m = self.size() as f64;
        let mut acc = HermitianOperator::zeros(self.inputs[0].dim());
        for s in &self.inputs {
            acc = &acc + s.operator();
        }
        DensityMatrix::new_unchecked(acc.scale(1.0 / m))
    }

    /// Probability of correct decoding with equiprobable messages.
    pub fn success_probability(&self, channel: &QuantumChannel) -> Result<f64> {
        let mut acc = 0.0;
        for (s, d) in self.inputs.iter().zip(&self.decoder) {
            if d.dim() != channel.dim_out() {
                return Err(Error::DimensionMismatch { expected: channel.dim_out(), found: d.dim() });
            }
            acc += channel.apply(s)?.operator().dot(d);
        }
        Ok(acc / self.size() as f64)
    }
}

/// The local test `T = sum_w E(w) (x) D(w)` built from a code.
#[derive(Clone, Debug)]
pub struct LocalTest {
    /// Reference-side elements `E(w) = rho_Abar^{-1/2} rho(w)^T rho_Abar^{-1/2} / M`.
    pub reference_elements: Vec<HermitianOperator>,
    pub test: HermitianOperator,
}

/// Builds the test on `Abar (x) B` whose acceptance probability on
/// `(id (x) E) rho_{Abar A}` is the code's success probability over `E`.
pub fn code_to_test(code: &Code, rho: &DensityMatrix) -> Result<LocalTest> {
    if rho.dim() != code.inputs[0].dim() {
        return Err(Error::DimensionMismatch { expected: code.inputs[0].dim(), found: rho.dim() });
    }
    let avg = code.average_input();
    let gap = avg.operator().max_abs_diff(rho.operator());
    if gap > POVM_TOL {
        return Err(Error::InvalidCode(format!("average input differs from rho by {gap:.3e}")));
    }
    let m = code.size() as f64;
    let rho_ref = rho.operator().transpose();
    let inv_sqrt = rho_ref.pinv_sqrt(PINV_CUTOFF);
    let inv_sqrt_m = inv_sqrt.to_matrix();
    let reference_elements: Vec<HermitianOperator> = code
        .inputs
        .iter()
        .map(|s| {
            let mid = &(&inv_sqrt * &s.operator().transpose()) * &inv_sqrt_m;
            HermitianOperator::hermitian_part(&mid).scale(1.0 / m)
        })
        .collect();
    let dout = code.decoder[0].dim();
    let mut test = HermitianOperator::zeros(rho.dim() * dout);
    for (e, d) in reference_elements.iter().zip(&code.decoder) {
        test = &test + &e.kron(d);
    }
    Ok(LocalTest { reference_elements, test })
}
