use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HermitianOperator, C64};
use crate::quantum::{DensityMatrix, QuantumChannel};

const UNITARY_TOL: f64 = 1e-10;
const COVARIANCE_TOL: f64 = 1e-8;
const WEIGHT_TOL: f64 = 1e-10;

fn check_unitary(u: &ComplexMatrix, d: usize) -> Result<()> {
    if u.rows() != d || u.cols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: u.rows() });
    }
    let deviation = u.unitarity_defect();
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// `sum_g w_g U_g rho U_g^dag`.
pub fn average_state(rho: &DensityMatrix, unitaries: &[ComplexMatrix], weights: &[f64]) -> Result<DensityMatrix> {
    if unitaries.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: unitaries.len(), found: weights.len() });
    }
    let total: f64 = weights.iter().sum();
    if unitaries.is_empty() || weights.iter().any(|w| !(*w >= 0.0)) || (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::InvalidDistribution(format!("group weights sum to {total}")));
    }
    let mut acc = HermitianOperator::zeros(rho.dim());
    for (u, w) in unitaries.iter().zip(weights) {
        check_unitary(u, rho.dim())?;
        acc = &acc + &rho.operator().conjugate_by(u).scale(*w);
    }
    DensityMatrix::new(acc)
}

/// Whether `E(U X U^dag) = V E(X) V^dag` on every matrix unit `X = |i><j|`.
pub fn verify_covariance(channel: &QuantumChannel, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<bool> {
    let (din, dout) = (channel.dim_in(), channel.dim_out());
    check_unitary(u, din)?;
    check_unitary(v, dout)?;
    let (ud, vd) = (u.adjoint(), v.adjoint());
    for i in 0..din {
        for j in 0..din {
            let unit = ComplexMatrix::from_fn(din, din, |r, c| {
                if r == i && c == j {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            let lhs = channel.apply_operator(&(&(u * &unit) * &ud))?;
            let rhs = &(v * &channel.apply_operator(&unit)?) * &vd;
            if (&lhs - &rhs).max_abs() > COVARIANCE_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
