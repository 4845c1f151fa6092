//! Seeded random instances: states, unitaries, channels.
//!
//! Everything here is driven by a caller-supplied RNG so that test
//! fixtures and acceptance runs are reproducible.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, HermitianOperator, C64};
use crate::quantum::{DensityMatrix, QuantumChannel};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn ginibre(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Hermitian matrix with i.i.d. Gaussian entries (GUE up to scaling).
pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> HermitianOperator {
    HermitianOperator::symmetrized(ginibre(rng, n, n))
}

/// Full-rank density matrix `G G^dag / Tr(G G^dag)`.
pub fn random_density(rng: &mut impl Rng, n: usize) -> DensityMatrix {
    random_density_rank(rng, n, n)
}

pub fn random_density_rank(rng: &mut impl Rng, n: usize, rank: usize) -> DensityMatrix {
    let g = ginibre(rng, n, rank);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let op = HermitianOperator::symmetrized(m / C64::new(tr, 0.0));
    DensityMatrix::new(op).expect("Ginibre construction yields a state")
}

pub fn random_pure_state(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Isometry with orthonormal columns, `rows >= cols`.
pub fn random_isometry(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<C64> {
    assert!(rows >= cols);
    let g = ginibre(rng, rows, cols);
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    // fix column phases so the distribution is Haar
    let mut out = q.clone();
    for j in 0..cols {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..rows {
            out[(i, j)] *= phase;
        }
    }
    out
}

pub fn random_unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_inner(random_isometry(rng, n, n)).expect("finite")
}

/// Random channel with `kraus_count` Kraus operators from a Haar isometry.
pub fn random_channel(rng: &mut impl Rng, dim_in: usize, dim_out: usize, kraus_count: usize) -> QuantumChannel {
    let v = random_isometry(rng, dim_out * kraus_count, dim_in);
    let kraus = (0..kraus_count)
        .map(|k| {
            let block = v.rows(k * dim_out, dim_out).into_owned();
            ComplexMatrix::from_inner(block).expect("finite")
        })
        .collect();
    QuantumChannel::from_kraus(dim_in, dim_out, kraus).expect("isometry gives a CPTP map")
}

/// Column-stochastic matrix with `outputs` rows and `inputs` columns.
pub fn random_stochastic(rng: &mut impl Rng, outputs: usize, inputs: usize) -> Vec<Vec<f64>> {
    let mut w = vec![vec![0.0; inputs]; outputs];
    for x in 0..inputs {
        let col: Vec<f64> = (0..outputs).map(|_| rng.random::<f64>() + 0.05).collect();
        let s: f64 = col.iter().sum();
        for y in 0..outputs {
            w[y][x] = col[y] / s;
        }
    }
    w
}

pub fn random_distribution(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}
