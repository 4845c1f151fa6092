//! Semidefinite programs over complex Hermitian blocks.
//!
//! Problems are stated as
//!
//! ```text
//! minimize    sum_k Re Tr(C_k X_k)
//! subject to  sum_k Re Tr(A_ik X_k)  (=, <=, >=)  b_i
//!             X_k >= 0
//! ```
//!
//! and solved by a primal-dual interior-point method (see [`solve`]).
//! Matrix-valued constraints on linear images of the blocks are expanded into
//! scalar rows by [`SdpProblem::add_matrix_constraint`].

mod solver;
mod verify;

pub use solver::{solve, solve_with, SolverSettings};
pub use verify::{verify, VerifyReport};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{DimPair, HermitianOperator, C64};

pub type BlockId = usize;

/// Hermitian matrix stored by its upper triangle.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian {
    dim: usize,
    upper: BTreeMap<(usize, usize), C64>,
}

impl SparseHermitian {
    pub fn new(dim: usize) -> Self {
        Self { dim, upper: BTreeMap::new() }
    }

    /// Adds `v` at `(i, j)` and `conj(v)` at `(j, i)`; a diagonal `v` must be real.
    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        assert!(i < self.dim && j < self.dim, "entry ({i},{j}) outside dimension {}", self.dim);
        let (key, v) = if i <= j { ((i, j), v) } else { ((j, i), v.conj()) };
        let v = if key.0 == key.1 { C64::new(v.re, 0.0) } else { v };
        *self.upper.entry(key).or_insert(C64::new(0.0, 0.0)) += v;
    }

    pub fn with_entry(mut self, i: usize, j: usize, v: C64) -> Self {
        self.add(i, j, v);
        self
    }

    pub fn identity(dim: usize) -> Self {
        let mut s = Self::new(dim);
        for i in 0..dim {
            s.add(i, i, C64::new(1.0, 0.0));
        }
        s
    }

    /// `x` as a 1x1 block.
    pub fn scalar(x: f64) -> Self {
        Self::new(1).with_entry(0, 0, C64::new(x, 0.0))
    }

    pub fn from_dense(h: &HermitianOperator) -> Self {
        let mut s = Self::new(h.dim());
        for i in 0..h.dim() {
            for j in i..h.dim() {
                let v = h.get(i, j);
                if v != C64::new(0.0, 0.0) {
                    s.add(i, j, v);
                }
            }
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.values().all(|v| *v == C64::new(0.0, 0.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, upper: self.upper.iter().map(|(k, v)| (*k, v * s)).collect() }
    }

    /// Upper-triangle entries in row-major order.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.upper.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    /// Every stored entry including the mirrored lower triangle.
    pub fn full_entries(&self) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::with_capacity(2 * self.upper.len());
        for (&(i, j), &v) in &self.upper {
            out.push((i, j, v));
            if i != j {
                out.push((j, i, v.conj()));
            }
        }
        out
    }

    pub fn to_dense(&self) -> HermitianOperator {
        let mut m = nalgebra::DMatrix::zeros(self.dim, self.dim);
        for (i, j, v) in self.full_entries() {
            m[(i, j)] = v;
        }
        HermitianOperator::symmetrized(m)
    }

    /// `Re Tr(H X)` for a dense Hermitian `X`.
    pub fn dot(&self, x: &HermitianOperator) -> f64 {
        self.upper_entries()
            .map(|(i, j, v)| {
                let t = (v * x.get(j, i)).re;
                if i == j { t } else { 2.0 * t }
            })
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.upper_entries()
            .map(|(i, j, v)| if i == j { v.norm_sqr() } else { 2.0 * v.norm_sqr() })
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Le,
    Ge,
}

/// `sum_k Re Tr(A_k X_k)  sense  rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(BlockId, SparseHermitian)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// Hermiticity-preserving linear maps used to state matrix constraints.
#[derive(Clone, Debug, PartialEq)]
pub enum LinearMap {
    Identity,
    /// `X_{AB} -> Tr_A X`.
    PartialTraceFirst(DimPair),
    /// `X_{AB} -> Tr_B X`.
    PartialTraceSecond(DimPair),
    /// `X -> I_d (x) X`.
    KronIdentityLeft(usize),
    /// `X -> X (x) I_d`.
    KronIdentityRight(usize),
    PartialTransposeSecond(DimPair),
    /// `x (1x1) -> x M`.
    ScalarTimes(HermitianOperator),
}

impl LinearMap {
    /// Output dimension for an input block of dimension `input`.
    pub fn output_dim(&self, input: usize) -> Result<usize> {
        let check = |d: &DimPair| {
            if d.total() == input {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected: d.total(), found: input })
            }
        };
        match self {
            LinearMap::Identity => Ok(input),
            LinearMap::PartialTraceFirst(d) => check(d).map(|_| d.b),
            LinearMap::PartialTraceSecond(d) => check(d).map(|_| d.a),
            LinearMap::KronIdentityLeft(k) | LinearMap::KronIdentityRight(k) => Ok(k * input),
            LinearMap::PartialTransposeSecond(d) => check(d).map(|_| input),
            LinearMap::ScalarTimes(m) => {
                if input == 1 {
                    Ok(m.dim())
                } else {
                    Err(Error::DimensionMismatch { expected: 1, found: input })
                }
            }
        }
    }

    /// Full entry list of `L^dag(B)` for `B` given by its full entry list.
    fn adjoint_entries(&self, input: usize, b: &[(usize, usize, C64)]) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        match self {
            LinearMap::Identity => out.extend_from_slice(b),
            LinearMap::PartialTraceFirst(d) => {
                for &(p, q, v) in b {
                    out.extend((0..d.a).map(|k| (k * d.b + p, k * d.b + q, v)));
                }
            }
            LinearMap::PartialTraceSecond(d) => {
                for &(p, q, v) in b {
                    out.extend((0..d.b).map(|k| (p * d.b + k, q * d.b + k, v)));
                }
            }
            LinearMap::KronIdentityLeft(_) => {
                for &(i, j, v) in b {
                    if i / input == j / input {
                        out.push((i % input, j % input, v));
                    }
                }
            }
            LinearMap::KronIdentityRight(k) => {
                for &(i, j, v) in b {
                    if i % k == j % k {
                        out.push((i / k, j / k, v));
                    }
                }
            }
            LinearMap::PartialTransposeSecond(d) => {
                for &(i, j, v) in b {
                    let (x, y) = (i / d.b, i % d.b);
                    let (x2, y2) = (j / d.b, j % d.b);
                    out.push((x * d.b + y2, x2 * d.b + y, v));
                }
            }
            LinearMap::ScalarTimes(m) => {
                let s: f64 = b.iter().map(|&(p, q, v)| (m.get(q, p) * v).re).sum();
                out.push((0, 0, C64::new(s, 0.0)));
            }
        }
        out
    }

    /// Applies the map to a dense operator.
    pub fn apply(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        use crate::linalg::{partial_trace, partial_transpose, Subsystem};
        let out = self.output_dim(x.dim())?;
        Ok(match self {
            LinearMap::Identity => x.clone(),
            LinearMap::PartialTraceFirst(d) => partial_trace(x, *d, Subsystem::A)?,
            LinearMap::PartialTraceSecond(d) => partial_trace(x, *d, Subsystem::B)?,
            LinearMap::KronIdentityLeft(k) => HermitianOperator::identity(*k).kron(x),
            LinearMap::KronIdentityRight(k) => x.kron(&HermitianOperator::identity(*k)),
            LinearMap::PartialTransposeSecond(d) => partial_transpose(x, *d, Subsystem::B)?,
            LinearMap::ScalarTimes(m) => {
                debug_assert_eq!(out, m.dim());
                m.scale(x.get(0, 0).re)
            }
        })
    }
}

/// Full entry list of the Hermitian basis element selecting `Re Y_pq` or `Im Y_pq`.
fn basis_element(p: usize, q: usize, imaginary: bool) -> Vec<(usize, usize, C64)> {
    if p == q {
        return vec![(p, p, C64::new(1.0, 0.0))];
    }
    if imaginary {
        vec![(q, p, C64::new(0.0, -0.5)), (p, q, C64::new(0.0, 0.5))]
    } else {
        vec![(p, q, C64::new(0.5, 0.0)), (q, p, C64::new(0.5, 0.0))]
    }
}

fn sparse_from_full(dim: usize, entries: &[(usize, usize, C64)]) -> SparseHermitian {
    let mut s = SparseHermitian::new(dim);
    for &(i, j, v) in entries {
        if i <= j && v != C64::new(0.0, 0.0) {
            s.add(i, j, v);
        }
    }
    s.upper.retain(|_, v| *v != C64::new(0.0, 0.0));
    s
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SdpProblem {
    blocks: Vec<usize>,
    objective: Vec<SparseHermitian>,
    constraints: Vec<Constraint>,
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, dim: usize) -> BlockId {
        assert!(dim > 0, "blocks must have positive dimension");
        self.blocks.push(dim);
        self.objective.push(SparseHermitian::new(dim));
        self.blocks.len() - 1
    }

    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn objective(&self) -> &[SparseHermitian] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn check_block(&self, block: BlockId, dim: usize) -> Result<()> {
        match self.blocks.get(block) {
            None => Err(Error::MalformedSdp(format!("unknown block {block}"))),
            Some(&d) if d != dim => Err(Error::DimensionMismatch { expected: d, found: dim }),
            Some(_) => Ok(()),
        }
    }

    pub fn set_objective(&mut self, block: BlockId, cost: SparseHermitian) -> Result<()> {
        self.check_block(block, cost.dim())?;
        self.objective[block] = cost;
        Ok(())
    }

    /// Adds a scalar constraint and returns its row index.
    pub fn add_constraint(&mut self, c: Constraint) -> Result<usize> {
        if !c.rhs.is_finite() {
            return Err(Error::MalformedSdp("non-finite right-hand side".into()));
        }
        for (block, a) in &c.terms {
            self.check_block(*block, a.dim())?;
            if a.upper_entries().any(|(_, _, v)| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::MalformedSdp("non-finite coefficient".into()));
            }
        }
        self.constraints.push(c);
        Ok(self.constraints.len() - 1)
    }

    /// Adds `sum_k c_k L_k(X_k)  sense  rhs` as a matrix constraint.
    ///
    /// Inequalities are in the semidefinite order and introduce a slack block
    /// of the output dimension. Returns the scalar row indices, ordered by
    /// output entry `(p, q)` with `p <= q`, real part before imaginary part.
    pub fn add_matrix_constraint(
        &mut self,
        terms: &[(BlockId, LinearMap, f64)],
        sense: Sense,
        rhs: &HermitianOperator,
    ) -> Result<Vec<usize>> {
        let out = rhs.dim();
        for (block, map, _) in terms {
            let input = *self
                .blocks
                .get(*block)
                .ok_or_else(|| Error::MalformedSdp(format!("unknown block {block}")))?;
            let d = map.output_dim(input)?;
            if d != out {
                return Err(Error::DimensionMismatch { expected: out, found: d });
            }
        }
        let mut terms: Vec<(BlockId, LinearMap, f64)> = terms.to_vec();
        match sense {
            Sense::Eq => {}
            Sense::Le => terms.push((self.add_block(out), LinearMap::Identity, 1.0)),
            Sense::Ge => terms.push((self.add_block(out), LinearMap::Identity, -1.0)),
        }
        let mut rows = Vec::new();
        for p in 0..out {
            for q in p..out {
                for imaginary in [false, true] {
                    if imaginary && p == q {
                        continue;
                    }
                    let b = basis_element(p, q, imaginary);
                    let rhs_val = if imaginary { rhs.get(p, q).im } else { rhs.get(p, q).re };
                    let mut merged: BTreeMap<BlockId, Vec<(usize, usize, C64)>> = BTreeMap::new();
                    for (block, map, coef) in &terms {
                        let input = self.blocks[*block];
                        let adj = map.adjoint_entries(input, &b);
                        merged.entry(*block).or_default().extend(adj.into_iter().map(|(i, j, v)| (i, j, v * *coef)));
                    }
                    let c_terms: Vec<(BlockId, SparseHermitian)> = merged
                        .into_iter()
                        .map(|(block, e)| (block, sparse_from_full(self.blocks[block], &e)))
                        .filter(|(_, s)| !s.is_empty())
                        .collect();
                    rows.push(self.add_constraint(Constraint { terms: c_terms, sense: Sense::Eq, rhs: rhs_val })?);
                }
            }
        }
        Ok(rows)
    }

    /// `sum_k Re Tr(C_k X_k)`.
    pub fn objective_value(&self, x: &[HermitianOperator]) -> f64 {
        self.objective.iter().zip(x).map(|(c, xk)| c.dot(xk)).sum()
    }

    /// Left-hand side of constraint `i`.
    pub fn constraint_value(&self, i: usize, x: &[HermitianOperator]) -> f64 {
        self.constraints[i].terms.iter().map(|(k, a)| a.dot(&x[*k])).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IterationLimit,
}

/// Solver output. `dual_multipliers[i]` is `y_i` in the dual
/// `max b.y  s.t.  C - sum_i y_i A_i >= 0`; `y_i >= 0` for `>=` rows and
/// `y_i <= 0` for `<=` rows.
#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub primal_blocks: Vec<HermitianOperator>,
    pub dual_multipliers: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub status: SdpStatus,
    pub iterations: usize,
}

impl SdpSolution {
    pub fn relative_gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective).abs()
            / (1.0 + self.primal_objective.abs() + self.dual_objective.abs())
    }
}
