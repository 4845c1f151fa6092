//! Dense complex linear algebra for finite-dimensional quantum systems.
//!
//! Matrices are indexed so that the bipartite basis vector `|i>|k>` of a
//! `dA x dB` system sits at position `i * dB + k`. With this ordering the
//! unnormalized maximally entangled operator has ones exactly on the index
//! pairs `(i*d + i, j*d + j)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative tolerance used when validating Hermiticity.
pub const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// A dense complex matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{:?}", self.0)
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::Shape { rows, cols, entries: entries.len() });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn from_inner(m: DMatrix<C64>) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(m))
    }

    pub(crate) fn from_inner_unchecked(m: DMatrix<C64>) -> Self {
        Self(m)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    /// Row-major copy of the entries.
    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(&self.0 * s)
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise deviation of `U^dag U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        if self.rows() != self.cols() {
            return f64::INFINITY;
        }
        let g = self.0.adjoint() * &self.0;
        max_abs_diff(&g, &DMatrix::identity(self.rows(), self.rows()))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        if self.rows() != self.cols() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// A complex Hermitian matrix. Inputs are symmetrized on construction.
#[derive(Clone, PartialEq)]
pub struct HermitianOperator(DMatrix<C64>);

impl fmt::Debug for HermitianOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianOperator{:?}", self.0)
    }
}

impl HermitianOperator {
    /// Validates Hermiticity to `1e-12 * (1 + max|X|)` and symmetrizes.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::DimensionMismatch { expected: m.rows(), found: m.cols() });
        }
        let deviation = m.hermiticity_defect();
        if deviation > HERMITIAN_TOL * (1.0 + m.max_abs()) {
            return Err(Error::NonHermitian { deviation });
        }
        Ok(Self::symmetrized(m.0))
    }

    /// Takes the Hermitian part `(X + X^dag)/2` without validation.
    pub fn hermitian_part(m: &ComplexMatrix) -> Self {
        Self::symmetrized(m.0.clone())
    }

    pub(crate) fn symmetrized(m: DMatrix<C64>) -> Self {
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        Self(h)
    }

    pub fn zeros(d: usize) -> Self {
        Self(DMatrix::zeros(d, d))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(diag[i], 0.0) } else { ZERO }))
    }

    /// `|v><v|` for a column vector `v`.
    pub fn projector(v: &[C64]) -> Self {
        let n = v.len();
        Self(DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj()))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix(self.0.clone())
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// Real inner product `Re Tr(self * other)`.
    pub fn dot(&self, other: &HermitianOperator) -> f64 {
        hs_inner(&self.0, &other.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &HermitianOperator) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(&self.0 * C64::new(s, 0.0))
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    /// `U X U^dag`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Self {
        Self::symmetrized(&u.0 * &self.0 * u.0.adjoint())
    }

    pub fn kron(&self, other: &HermitianOperator) -> Self {
        Self(self.0.kronecker(&other.0))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut w: Vec<f64> = self.0.clone().symmetric_eigenvalues().iter().copied().collect();
        w.sort_by(f64::total_cmp);
        w
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Applies `f` to the spectrum: `V diag(f(w)) V^dag`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Self {
        let e = eigh(self);
        let v = &e.vectors.0;
        let n = self.dim();
        let mut scaled = v.clone();
        for (k, &w) in e.values.iter().enumerate() {
            let fw = f(w);
            for i in 0..n {
                scaled[(i, k)] *= fw;
            }
        }
        Self::symmetrized(scaled * v.adjoint())
    }

    /// Square root of the positive part.
    pub fn sqrt_psd(&self) -> Self {
        self.map_spectrum(|w| if w > 0.0 { w.sqrt() } else { 0.0 })
    }

    /// `X^{-1/2}` on the support; eigenvalues at or below `cutoff * max_eigenvalue` map to 0.
    pub fn pinv_sqrt(&self, cutoff: f64) -> Self {
        let top = self.max_eigenvalue().max(0.0);
        let floor = cutoff * top;
        self.map_spectrum(move |w| if w > floor && w > 0.0 { 1.0 / w.sqrt() } else { 0.0 })
    }

    /// Projector onto eigenvectors with eigenvalue above `cutoff * max_eigenvalue`.
    pub fn support_projector(&self, cutoff: f64) -> Self {
        let top = self.max_eigenvalue().max(0.0);
        let floor = cutoff * top;
        self.map_spectrum(move |w| if w > floor && w > 0.0 { 1.0 } else { 0.0 })
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator(&self.0 + &rhs.0)
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        HermitianOperator(&self.0 - &rhs.0)
    }
}

impl Mul for &HermitianOperator {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &HermitianOperator) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl From<HermitianOperator> for ComplexMatrix {
    fn from(h: HermitianOperator) -> Self {
        ComplexMatrix(h.0)
    }
}

/// Dimensions of a bipartite system `A:B`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimPair {
    pub a: usize,
    pub b: usize,
}

impl DimPair {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidArgument(format!("subsystem dimensions must be >= 1, got {a}x{b}")));
        }
        Ok(Self { a, b })
    }

    pub fn total(&self) -> usize {
        self.a * self.b
    }
}

/// Which factor of a bipartite system an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

fn check_bipartite(n: usize, dims: DimPair) -> Result<()> {
    if n != dims.total() {
        return Err(Error::DimensionMismatch { expected: dims.total(), found: n });
    }
    Ok(())
}

/// Traces out `traced`, returning an operator on the remaining factor.
pub fn partial_trace_matrix(x: &ComplexMatrix, dims: DimPair, traced: Subsystem) -> Result<ComplexMatrix> {
    check_bipartite(x.rows(), dims)?;
    check_bipartite(x.cols(), dims)?;
    let (da, db) = (dims.a, dims.b);
    let m = &x.0;
    let out = match traced {
        Subsystem::B => DMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()),
        Subsystem::A => DMatrix::from_fn(db, db, |k, l| (0..da).map(|i| m[(i * db + k, i * db + l)]).sum()),
    };
    Ok(ComplexMatrix(out))
}

pub fn partial_trace(x: &HermitianOperator, dims: DimPair, traced: Subsystem) -> Result<HermitianOperator> {
    let m = partial_trace_matrix(&ComplexMatrix(x.0.clone()), dims, traced)?;
    Ok(HermitianOperator::symmetrized(m.0))
}

pub fn partial_transpose_matrix(x: &ComplexMatrix, dims: DimPair, which: Subsystem) -> Result<ComplexMatrix> {
    check_bipartite(x.rows(), dims)?;
    check_bipartite(x.cols(), dims)?;
    let db = dims.b;
    let m = &x.0;
    let n = dims.total();
    let out = DMatrix::from_fn(n, n, |r, c| {
        let (i, k) = (r / db, r % db);
        let (j, l) = (c / db, c % db);
        match which {
            Subsystem::B => m[(i * db + l, j * db + k)],
            Subsystem::A => m[(j * db + k, i * db + l)],
        }
    });
    Ok(ComplexMatrix(out))
}

pub fn partial_transpose(x: &HermitianOperator, dims: DimPair, which: Subsystem) -> Result<HermitianOperator> {
    let m = partial_transpose_matrix(&ComplexMatrix(x.0.clone()), dims, which)?;
    Ok(HermitianOperator(m.0))
}

/// Spectral decomposition `X = V diag(values) V^dag`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigh {
    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        (0..self.vectors.rows()).map(|i| self.vectors.get(i, k)).collect()
    }
}

pub fn eigh(x: &HermitianOperator) -> Eigh {
    let n = x.dim();
    if n == 0 {
        return Eigh { values: vec![], vectors: ComplexMatrix::zeros(0, 0) };
    }
    let se = SymmetricEigen::new(x.0.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, c| se.eigenvectors[(i, order[c])]);
    Eigh { values, vectors: ComplexMatrix(vectors) }
}

/// Checks Hermiticity of an arbitrary matrix before decomposing it.
pub fn eigh_checked(x: &ComplexMatrix) -> Result<Eigh> {
    Ok(eigh(&HermitianOperator::new(x.clone())?))
}

pub(crate) fn hs_inner(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    // Re Tr(A B) = Re sum_ij A_ij B_ji
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..a.ncols() {
            let x = a[(i, j)];
            let y = b[(j, i)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

pub(crate) fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, rng};
    use approx::assert_abs_diff_eq;

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_basis_projectors() {
        let p0 = ComplexMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let p1 = ComplexMatrix::from_real(2, 2, &[0.0, 0.0, 0.0, 1.0]).unwrap();
        let k = kron(&p0, &p1);
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == 1 && j == 1 { 1.0 } else { 0.0 };
                assert_eq!(k.get(i, j), C64::new(expect, 0.0));
            }
        }
    }

    #[test]
    fn kron_pauli_spectrum() {
        let xx = HermitianOperator::new(kron(&pauli_x(), &pauli_x())).unwrap();
        let w = xx.eigenvalues();
        for (got, want) in w.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn shape_and_finiteness_are_validated() {
        assert!(matches!(ComplexMatrix::from_real(2, 2, &[1.0; 3]), Err(Error::Shape { .. })));
        assert!(matches!(ComplexMatrix::from_real(1, 1, &[f64::NAN]), Err(Error::NonFinite)));
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(HermitianOperator::new(m.clone()), Err(Error::NonHermitian { .. })));
        assert!(eigh_checked(&m).is_err());
    }

    #[test]
    fn partial_trace_of_phi_is_identity() {
        let phi = crate::quantum::phi_operator(2);
        let d = DimPair::new(2, 2).unwrap();
        let r = partial_trace(&phi, d, Subsystem::B).unwrap();
        assert!(r.max_abs_diff(&HermitianOperator::identity(2)) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product() {
        let mut g = rng(1);
        let rho = random_hermitian(&mut g, 3);
        let sigma = random_hermitian(&mut g, 2);
        let d = DimPair::new(3, 2).unwrap();
        let prod = rho.kron(&sigma);
        let tb = partial_trace(&prod, d, Subsystem::B).unwrap();
        assert!(tb.max_abs_diff(&rho.scale(sigma.trace())) < 1e-12);
        let ta = partial_trace(&prod, d, Subsystem::A).unwrap();
        assert!(ta.max_abs_diff(&sigma.scale(rho.trace())) < 1e-12);
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let x = HermitianOperator::identity(5);
        assert!(partial_trace(&x, DimPair::new(2, 2).unwrap(), Subsystem::A).is_err());
        assert!(partial_transpose(&x, DimPair::new(2, 2).unwrap(), Subsystem::A).is_err());
    }

    #[test]
    fn partial_transpose_of_product() {
        let mut g = rng(2);
        let rho = random_hermitian(&mut g, 2);
        let sigma = random_hermitian(&mut g, 3);
        let d = DimPair::new(2, 3).unwrap();
        let pt = partial_transpose(&rho.kron(&sigma), d, Subsystem::B).unwrap();
        assert!(pt.max_abs_diff(&rho.kron(&sigma.transpose())) < 1e-14);
        let pta = partial_transpose(&rho.kron(&sigma), d, Subsystem::A).unwrap();
        assert!(pta.max_abs_diff(&rho.transpose().kron(&sigma)) < 1e-14);
    }

    #[test]
    fn partial_transpose_of_maximally_entangled_state_is_half_swap() {
        let phi = crate::quantum::phi_operator(2).scale(0.5);
        let pt = partial_transpose(&phi, DimPair::new(2, 2).unwrap(), Subsystem::B).unwrap();
        let w = pt.eigenvalues();
        for (got, want) in w.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn eigh_diagonal_and_pauli() {
        let d = HermitianOperator::from_real_diagonal(&[3.0, 1.0, 2.0]);
        assert_eq!(eigh(&d).values, vec![1.0, 2.0, 3.0]);
        let x = HermitianOperator::new(pauli_x()).unwrap();
        let w = eigh(&x).values;
        assert_abs_diff_eq!(w[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(w[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eigh_reconstructs_random_hermitian() {
        let mut g = rng(3);
        for n in [1, 2, 5, 16, 40] {
            let x = random_hermitian(&mut g, n);
            let e = eigh(&x);
            let v = e.vectors.inner();
            let wmax = e.values.iter().map(|w| w.abs()).fold(0.0, f64::max);
            let diag = DMatrix::from_fn(n, n, |i, j| if i == j { C64::new(e.values[i], 0.0) } else { ZERO });
            let rec = v * diag * v.adjoint();
            assert!(max_abs_diff(&rec, x.inner()) <= 1e-10 * n as f64 * wmax.max(1.0));
            assert!(e.vectors.unitarity_defect() <= 1e-10);
            assert!(e.values.windows(2).all(|p| p[0] <= p[1]));
        }
    }

    #[test]
    fn eigh_is_deterministic() {
        let mut g = rng(4);
        let x = random_hermitian(&mut g, 12);
        let a = eigh(&x);
        let b = eigh(&x);
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
    }

    #[test]
    fn functional_calculus() {
        let mut g = rng(5);
        let rho = crate::random::random_density(&mut g, 4).into_operator();
        let s = rho.sqrt_psd();
        let sq = HermitianOperator::symmetrized((&s * &s).into_inner());
        assert!(sq.max_abs_diff(&rho) < 1e-12);
        let inv = rho.pinv_sqrt(1e-12);
        let prod = HermitianOperator::symmetrized((&(&inv * &rho) * &inv.to_matrix()).into_inner());
        assert!(prod.max_abs_diff(&HermitianOperator::identity(4)) < 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn partial_trace_preserves_trace(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
                let mut g = rng(seed);
                let x = random_hermitian(&mut g, da * db);
                let d = DimPair::new(da, db).unwrap();
                for t in [Subsystem::A, Subsystem::B] {
                    let r = partial_trace(&x, d, t).unwrap();
                    prop_assert!((r.trace() - x.trace()).abs() < 1e-12);
                }
            }

            #[test]
            fn partial_transpose_is_trace_preserving_involution(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
                let mut g = rng(seed);
                let x = random_hermitian(&mut g, da * db);
                let d = DimPair::new(da, db).unwrap();
                for w in [Subsystem::A, Subsystem::B] {
                    let once = partial_transpose(&x, d, w).unwrap();
                    prop_assert!(once.to_matrix().hermiticity_defect() < 1e-14);
                    prop_assert!((once.trace() - x.trace()).abs() < 1e-12);
                    let twice = partial_transpose(&once, d, w).unwrap();
                    prop_assert_eq!(twice, x.clone());
                }
            }

            #[test]
            fn kron_trace_is_product(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
                let mut g = rng(seed);
                let a = random_hermitian(&mut g, da);
                let b = random_hermitian(&mut g, db);
                prop_assert!((a.kron(&b).trace() - a.trace() * b.trace()).abs() < 1e-12);
            }

            #[test]
            fn psd_spectrum_is_nonnegative(seed in any::<u64>(), n in 1usize..10) {
                let mut g = rng(seed);
                let rho = crate::random::random_density(&mut g, n).into_operator();
                let w = rho.eigenvalues();
                let top = w[n - 1];
                prop_assert!(w[0] >= -1e-10 * top);
            }
        }
    }
}
