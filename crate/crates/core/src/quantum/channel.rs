use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{eigh, kron, ComplexMatrix, HermitianOperator, C64, ONE, ZERO};

use super::{phi_operator, DensityMatrix};

/// Default bound on `dim_in^n` for tensor powers.
pub const DEFAULT_TENSOR_POWER_CAP: usize = 256;

/// Trace-preservation tolerance for constructed channels.
pub const TP_TOL: f64 = 1e-10;

/// A CPTP map stored as Kraus operators (`dim_out x dim_in`) plus its Choi
/// operator `(id (x) E)(Phi)` on `Abar (x) B`, reference factor first.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
    choi: HermitianOperator,
}

impl QuantumChannel {
    pub fn from_kraus(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        Self::from_kraus_with_tol(dim_in, dim_out, kraus, TP_TOL)
    }

    pub fn from_kraus_with_tol(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidArgument("channel needs at least one Kraus operator".into()));
        }
        for k in &kraus {
            if k.rows() != dim_out {
                return Err(Error::DimensionMismatch { expected: dim_out, found: k.rows() });
            }
            if k.cols() != dim_in {
                return Err(Error::DimensionMismatch { expected: dim_in, found: k.cols() });
            }
        }
        let residual = tp_residual(dim_in, &kraus);
        if residual > tol {
            return Err(Error::NotTracePreserving { residual });
        }
        let choi = choi_from_kraus(dim_in, dim_out, &kraus);
        Ok(Self { dim_in, dim_out, kraus, choi })
    }

    /// Recovers a Kraus set from the Choi operator's spectral decomposition.
    pub fn from_choi(dim_in: usize, dim_out: usize, choi: HermitianOperator) -> Result<Self> {
        Self::from_choi_with_tol(dim_in, dim_out, choi, TP_TOL)
    }

    pub fn from_choi_with_tol(dim_in: usize, dim_out: usize, choi: HermitianOperator, tol: f64) -> Result<Self> {
        let n = dim_in * dim_out;
        if choi.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: choi.dim() });
        }
        let e = eigh(&choi);
        let top = e.values.last().copied().unwrap_or(0.0).max(0.0);
        let min = e.values.first().copied().unwrap_or(0.0);
        if min < -tol * top.max(1.0) {
            return Err(Error::NotCompletelyPositive { min_eigenvalue: min });
        }
        let mut kraus = Vec::new();
        for (k, &w) in e.values.iter().enumerate() {
            if w <= 1e-14 * top {
                continue;
            }
            let s = w.sqrt();
            let v = e.vector(k);
            // Choi vector entry at (a, b) is K[b][a]
            let op = ComplexMatrix::from_fn(dim_out, dim_in, |b, a| v[a * dim_out + b] * s);
            kraus.push(op);
        }
        Self::from_kraus_with_tol(dim_in, dim_out, kraus, tol)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_kraus(d, d, vec![ComplexMatrix::identity(d)]).expect("identity is CPTP")
    }

    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        let d = u.rows();
        Self::from_kraus(d, d, vec![u])
    }

    /// The useless channel `rho -> Tr(rho) sigma`.
    pub fn replacement(dim_in: usize, sigma: &DensityMatrix) -> Self {
        let dim_out = sigma.dim();
        let e = eigh(sigma.operator());
        let mut kraus = Vec::new();
        for (k, &w) in e.values.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            let v = e.vector(k);
            for i in 0..dim_in {
                kraus.push(ComplexMatrix::from_fn(dim_out, dim_in, |r, c| if c == i { v[r] * w.sqrt() } else { ZERO }));
            }
        }
        Self::from_kraus_with_tol(dim_in, dim_out, kraus, 1e-9).expect("replacement channel is CPTP")
    }

    /// Classical channel from a column-stochastic matrix `w[y][x]`.
    pub fn classical(w: &[Vec<f64>]) -> Result<Self> {
        let dim_out = w.len();
        let dim_in = w.first().map(|r| r.len()).unwrap_or(0);
        if dim_out == 0 || dim_in == 0 {
            return Err(Error::InvalidArgument("empty stochastic matrix".into()));
        }
        let mut kraus = Vec::new();
        for (y, row) in w.iter().enumerate() {
            if row.len() != dim_in {
                return Err(Error::DimensionMismatch { expected: dim_in, found: row.len() });
            }
            for (x, &p) in row.iter().enumerate() {
                if !(p >= 0.0) {
                    return Err(Error::InvalidProbability { name: "W(y|x)", value: p });
                }
                if p > 0.0 {
                    kraus.push(ComplexMatrix::from_fn(dim_out, dim_in, |r, c| {
                        if r == y && c == x {
                            C64::new(p.sqrt(), 0.0)
                        } else {
                            ZERO
                        }
                    }));
                }
            }
        }
        Self::from_kraus(dim_in, dim_out, kraus)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn choi(&self) -> &HermitianOperator {
        &self.choi
    }

    /// `||sum K^dag K - I||` (largest absolute eigenvalue).
    pub fn trace_preservation_residual(&self) -> f64 {
        tp_residual(self.dim_in, &self.kraus)
    }

    /// Applies the channel to an arbitrary (not necessarily Hermitian) operator.
    pub fn apply_operator(&self, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        if x.rows() != self.dim_in || x.cols() != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: x.rows() });
        }
        let mut acc = DMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            acc += k.inner() * x.inner() * k.inner().adjoint();
        }
        Ok(ComplexMatrix::from_inner_unchecked(acc))
    }

    pub fn apply_hermitian(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        let y = self.apply_operator(&x.to_matrix())?;
        Ok(HermitianOperator::hermitian_part(&y))
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::new_unchecked(self.apply_hermitian(rho.operator())?))
    }

    /// `(id (x) E)(X)` for `X` on `Abar (x) A` with `dim(Abar) = dim_ref`.
    pub fn apply_to_second(&self, x: &HermitianOperator, dim_ref: usize) -> Result<HermitianOperator> {
        let n = dim_ref * self.dim_in;
        if x.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, found: x.dim() });
        }
        let id = ComplexMatrix::identity(dim_ref);
        let mut acc = DMatrix::zeros(dim_ref * self.dim_out, dim_ref * self.dim_out);
        for k in &self.kraus {
            let lifted = kron(&id, k);
            acc += lifted.inner() * x.inner() * lifted.inner().adjoint();
        }
        Ok(HermitianOperator::symmetrized(acc))
    }

    /// Parallel composition `self (x) other`.
    pub fn tensor(&self, other: &QuantumChannel) -> Result<QuantumChannel> {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(kron(a, b));
            }
        }
        Self::from_kraus_with_tol(self.dim_in * other.dim_in, self.dim_out * other.dim_out, kraus, 1e-9)
    }

    pub fn tensor_power(&self, n: usize) -> Result<QuantumChannel> {
        self.tensor_power_with_cap(n, DEFAULT_TENSOR_POWER_CAP)
    }

    pub fn tensor_power_with_cap(&self, n: usize, cap: usize) -> Result<QuantumChannel> {
        if n == 0 {
            return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
        }
        let dim = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(self.dim_in)).unwrap_or(usize::MAX);
        if dim > cap {
            return Err(Error::SizeCapExceeded { dim, cap });
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.tensor(self)?;
        }
        Ok(out)
    }

    /// Max entrywise gap between the cached Choi operator and `(id (x) E)(Phi)`.
    pub fn choi_consistency_defect(&self) -> f64 {
        let direct = self
            .apply_to_second(&phi_operator(self.dim_in), self.dim_in)
            .expect("dimensions agree by construction");
        direct.max_abs_diff(&self.choi)
    }
}

fn tp_residual(dim_in: usize, kraus: &[ComplexMatrix]) -> f64 {
    let mut acc = DMatrix::<C64>::zeros(dim_in, dim_in);
    for k in kraus {
        acc += k.inner().adjoint() * k.inner();
    }
    for i in 0..dim_in {
        acc[(i, i)] -= ONE;
    }
    let h = HermitianOperator::symmetrized(acc);
    let w = h.eigenvalues();
    w.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

fn choi_from_kraus(dim_in: usize, dim_out: usize, kraus: &[ComplexMatrix]) -> HermitianOperator {
    let n = dim_in * dim_out;
    let mut acc = DMatrix::<C64>::zeros(n, n);
    let mut v = vec![ZERO; n];
    for k in kraus {
        for a in 0..dim_in {
            for b in 0..dim_out {
                v[a * dim_out + b] = k.get(b, a);
            }
        }
        for r in 0..n {
            if v[r] == ZERO {
                continue;
            }
            for c in 0..n {
                acc[(r, c)] += v[r] * v[c].conj();
            }
        }
    }
    HermitianOperator::symmetrized(acc)
}

/// The depolarising channel `tau -> (1-p) tau + p Tr(tau) I/d`.
///
/// Kraus set: `sqrt(1 - p + p/d^2) I` together with `sqrt(p)/d X^a Z^b` for
/// the `d^2 - 1` non-trivial Weyl operators.
pub fn depolarising_channel(d: usize, p: f64) -> Result<QuantumChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability { name: "p", value: p });
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!("depolarising channel needs d >= 2, got {d}")));
    }
    let df = d as f64;
    let omega = |k: usize| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / df);
    let mut kraus = Vec::with_capacity(d * d);
    kraus.push(ComplexMatrix::identity(d).scale(C64::new((1.0 - p + p / (df * df)).sqrt(), 0.0)));
    let w = (p / (df * df)).sqrt();
    for a in 0..d {
        for b in 0..d {
            if a == 0 && b == 0 {
                continue;
            }
            // (X^a Z^b)|j> = omega^{b j} |j + a>
            let op = ComplexMatrix::from_fn(d, d, |r, c| if r == (c + a) % d { omega(b * c % d) * w } else { ZERO });
            kraus.push(op);
        }
    }
    QuantumChannel::from_kraus(d, d, kraus)
}
