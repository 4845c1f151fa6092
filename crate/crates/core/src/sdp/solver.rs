//! Infeasible primal-dual path following (HKM direction, Mehrotra
//! predictor-corrector) on the standard form
//!
//! ```text
//! min <C, X>  s.t.  <A_i, X> = b_i,  X >= 0
//! max b.y     s.t.  Z = C - sum_i y_i A_i >= 0
//! ```
//!
//! where `<A, X> = Re Tr(A X)` and `X`, `Z` are block diagonal Hermitian.

use faer::linalg::solvers::Solve;
use faer::Mat;
use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{HermitianOperator, C64};

use super::{SdpProblem, SdpSolution, SdpStatus, Sense};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverSettings {
    pub max_iterations: usize,
    pub gap_tol: f64,
    pub feasibility_tol: f64,
    pub step_fraction: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { max_iterations: 200, gap_tol: 1e-8, feasibility_tol: 1e-8, step_fraction: 0.98 }
    }
}

/// Looser gap accepted when progress stalls; still inside the reported contract.
const STALL_GAP_TOL: f64 = 1e-7;
const INFEASIBILITY_TOL: f64 = 1e-8;
/// Stop when the best merit has not improved for this many iterations.
const NO_PROGRESS_ITERATIONS: usize = 15;
const REFINEMENT_STEPS: usize = 1;
/// Relative diagonal shift applied when the Schur complement loses definiteness.
const SCHUR_SHIFT: f64 = 1e-13;
/// After convergence, keep iterating toward this accuracy for at most
/// `POLISH_ITERATIONS` more steps so the returned point tracks the argmin closely.
const POLISH_TOL: f64 = 1e-12;
const POLISH_ITERATIONS: usize = 10;

type Entries = Vec<(usize, usize, C64)>;
type Blocks = Vec<DMatrix<C64>>;

struct StandardForm {
    dims: Vec<usize>,
    /// Number of leading blocks that belong to the caller's problem.
    user_blocks: usize,
    c: Blocks,
    /// Per row: `(block, full entry list)`.
    a: Vec<Vec<(usize, Entries)>>,
    b: Vec<f64>,
    /// Per block: rows with a non-zero coefficient on it.
    touching: Vec<Vec<usize>>,
}

impl StandardForm {
    fn build(p: &SdpProblem) -> Self {
        let mut dims = p.blocks.clone();
        let user_blocks = dims.len();
        let mut a = Vec::with_capacity(p.constraints.len());
        let mut b = Vec::with_capacity(p.constraints.len());
        for con in &p.constraints {
            let mut row: Vec<(usize, Entries)> = con
                .terms
                .iter()
                .filter(|(_, s)| !s.is_empty())
                .map(|(k, s)| (*k, s.full_entries()))
                .collect();
            // merge repeated blocks so each row lists a block once
            row.sort_by_key(|(k, _)| *k);
            let mut merged: Vec<(usize, Entries)> = Vec::new();
            for (k, e) in row {
                match merged.last_mut() {
                    Some((last, acc)) if *last == k => acc.extend(e),
                    _ => merged.push((k, e)),
                }
            }
            match con.sense {
                Sense::Eq => {}
                Sense::Le | Sense::Ge => {
                    let s = if con.sense == Sense::Le { 1.0 } else { -1.0 };
                    dims.push(1);
                    merged.push((dims.len() - 1, vec![(0, 0, C64::new(s, 0.0))]));
                }
            }
            a.push(merged);
            b.push(con.rhs);
        }
        let mut c: Blocks = dims.iter().map(|&d| DMatrix::zeros(d, d)).collect();
        for (k, obj) in p.objective.iter().enumerate() {
            for (i, j, v) in obj.full_entries() {
                c[k][(i, j)] += v;
            }
        }
        let mut touching = vec![Vec::new(); dims.len()];
        for (i, row) in a.iter().enumerate() {
            for (k, _) in row {
                touching[*k].push(i);
            }
        }
        Self { dims, user_blocks, c, a, b, touching }
    }

    fn m(&self) -> usize {
        self.b.len()
    }

    fn n(&self) -> f64 {
        self.dims.iter().sum::<usize>() as f64
    }

    fn zeros(&self) -> Blocks {
        self.dims.iter().map(|&d| DMatrix::zeros(d, d)).collect()
    }

    /// `<A_i, W>` for every row; `W` need not be Hermitian.
    fn a_op(&self, w: &[DMatrix<C64>]) -> Vec<f64> {
        self.a.iter().map(|row| row.iter().map(|(k, e)| entries_dot(e, &w[*k])).sum()).collect()
    }

    /// `sum_i y_i A_i`.
    fn at_op(&self, y: &[f64]) -> Blocks {
        let mut out = self.zeros();
        for (row, &yi) in self.a.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for (k, e) in row {
                for &(p, q, v) in e {
                    out[*k][(p, q)] += v * yi;
                }
            }
        }
        out
    }

    fn row_norm(&self, i: usize) -> f64 {
        self.a[i].iter().flat_map(|(_, e)| e.iter()).map(|(_, _, v)| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Column `j` of `M_ij = <A_i, X A_j Z^{-1}>`.
    fn schur_column(&self, j: usize, x: &[DMatrix<C64>], zi: &[DMatrix<C64>]) -> Vec<f64> {
        let mut col = vec![0.0; self.m()];
        for (k, ej) in &self.a[j] {
            let (xk, zk) = (&x[*k], &zi[*k]);
            let d = xk.nrows();
            // T = X A_j, non-zero only in the columns A_j touches
            let mut cols: Vec<usize> = ej.iter().map(|e| e.1).collect();
            cols.sort_unstable();
            cols.dedup();
            let mut t = DMatrix::<C64>::zeros(d, cols.len());
            for &(r, s, w) in ej {
                let c = cols.binary_search(&s).expect("column present");
                t.column_mut(c).axpy(w, &xk.column(r), C64::new(1.0, 0.0));
            }
            let mut zrows = DMatrix::<C64>::zeros(cols.len(), d);
            for (c, &s) in cols.iter().enumerate() {
                zrows.row_mut(c).copy_from(&zk.row(s));
            }
            let g = t * zrows;
            for &i in &self.touching[*k] {
                let ei = self.a[i].iter().find(|(kk, _)| kk == k).map(|(_, e)| e).expect("row touches block");
                col[i] += entries_dot(ei, &g);
            }
        }
        col
    }
}

/// `Re sum (p,q,v) v W[q,p]`, i.e. `Re Tr(A W)`.
fn entries_dot(e: &[(usize, usize, C64)], w: &DMatrix<C64>) -> f64 {
    e.iter().map(|&(p, q, v)| (v * w[(q, p)]).re).sum()
}

fn inner(a: &[DMatrix<C64>], b: &[DMatrix<C64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y.iter()).map(|(u, v)| (u.conj() * v).re).sum::<f64>()).sum()
}

fn frob(a: &[DMatrix<C64>]) -> f64 {
    inner(a, a).sqrt()
}

fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

fn add_scaled(a: &[DMatrix<C64>], s: f64, b: &[DMatrix<C64>]) -> Blocks {
    a.iter().zip(b).map(|(x, y)| x + y.scale(s)).collect()
}

fn inverse_pd(m: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    Cholesky::new(m.clone()).map(|c| hermitize(&c.inverse()))
}

/// Largest `a` with `X + a dX >= 0`, `f64::INFINITY` if unbounded.
fn max_step(x: &[DMatrix<C64>], dx: &[DMatrix<C64>]) -> f64 {
    let mut best = f64::INFINITY;
    for (xk, dk) in x.iter().zip(dx) {
        let lmin = if xk.nrows() == 1 {
            dk[(0, 0)].re / xk[(0, 0)].re
        } else {
            let Some(ch) = Cholesky::new(xk.clone()) else { return 0.0 };
            let l = ch.l();
            let w = l.solve_lower_triangular(dk).expect("triangular solve");
            let w = l.solve_lower_triangular(&w.adjoint()).expect("triangular solve");
            let w = hermitize(&w);
            SymmetricEigen::new(w).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
        };
        if lmin < 0.0 {
            best = best.min(-1.0 / lmin);
        }
    }
    best
}

/// Lowest-merit iterate seen so far; merit <= 1 means converged.
struct Best {
    merit: f64,
    iteration: usize,
    rel_gap: f64,
    pinf: f64,
    dinf: f64,
    x: Blocks,
    y: Vec<f64>,
}

enum FactorKind {
    Llt(faer::linalg::solvers::Llt<f64>),
    Lu(faer::linalg::solvers::PartialPivLu<f64>),
}

/// Factored Schur complement, kept with the matrix for iterative refinement.
struct Factor {
    m: Mat<f64>,
    kind: FactorKind,
}

impl Factor {
    /// Cholesky, then Cholesky with a small diagonal shift, then LU.
    fn new(m: Mat<f64>) -> Self {
        let kind = Self::factor(&m);
        Self { m, kind }
    }

    fn factor(m: &Mat<f64>) -> FactorKind {
        if let Ok(l) = m.llt(faer::Side::Lower) {
            return FactorKind::Llt(l);
        }
        let scale = (0..m.nrows()).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1.0);
        let mut shifted = m.clone();
        for i in 0..m.nrows() {
            shifted[(i, i)] += SCHUR_SHIFT * scale;
        }
        match shifted.llt(faer::Side::Lower) {
            Ok(l) => FactorKind::Llt(l),
            Err(_) => FactorKind::Lu(m.partial_piv_lu()),
        }
    }

    fn raw_solve(&self, r: &Mat<f64>) -> Mat<f64> {
        match &self.kind {
            FactorKind::Llt(l) => l.solve(r),
            FactorKind::Lu(l) => l.solve(r),
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let r = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        let mut s = self.raw_solve(&r);
        for _ in 0..REFINEMENT_STEPS {
            let residual = &r - &self.m * &s;
            s = &s + self.raw_solve(&residual);
        }
        (0..rhs.len()).map(|i| s[(i, 0)]).collect()
    }
}

struct Direction {
    dx: Blocks,
    dy: Vec<f64>,
    dz: Blocks,
}

impl Direction {
    fn is_finite(&self) -> bool {
        let blocks_finite = |b: &Blocks| b.iter().all(|m| m.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        self.dy.iter().all(|v| v.is_finite()) && blocks_finite(&self.dx) && blocks_finite(&self.dz)
    }
}

/// Solves the Newton system for `dX = H + X (sum dy_i A_i) Z^{-1}`.
fn direction(sf: &StandardForm, factor: &Factor, x: &[DMatrix<C64>], zi: &[DMatrix<C64>], rp: &[f64], rd: &[DMatrix<C64>], h: Blocks) -> Direction {
    let ah = sf.a_op(&h);
    let rhs: Vec<f64> = rp.iter().zip(&ah).map(|(r, a)| r - a).collect();
    let dy = factor.solve(&rhs);
    let aty = sf.at_op(&dy);
    let dz: Blocks = rd.iter().zip(&aty).map(|(r, a)| hermitize(&(r - a))).collect();
    let dx: Blocks = h.iter().zip(x).zip(aty.iter().zip(zi)).map(|((hk, xk), (ak, zk))| hermitize(&(hk + xk * ak * zk))).collect();
    Direction { dx, dy, dz }
}

/// Solves with default settings.
pub fn solve(problem: &SdpProblem) -> Result<SdpSolution> {
    solve_with(problem, &SolverSettings::default())
}

pub fn solve_with(problem: &SdpProblem, settings: &SolverSettings) -> Result<SdpSolution> {
    if problem.blocks.is_empty() {
        return Err(Error::MalformedSdp("problem has no variable blocks".into()));
    }
    let mut sf = StandardForm::build(problem);
    if sf.m() == 0 {
        return solve_unconstrained(problem, &sf);
    }
    // iterate on C / ||C|| so that positive rescaling of the cost leaves the path unchanged
    let c_scale = match frob(&sf.c) {
        v if v > 0.0 => v,
        _ => 1.0,
    };
    for ck in sf.c.iter_mut() {
        *ck /= C64::new(c_scale, 0.0);
    }
    let m = sf.m();
    let n = sf.n();

    let norm_b = sf.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm_c = frob(&sf.c);
    let row_norms: Vec<f64> = (0..m).map(|i| sf.row_norm(i)).collect();
    if let Some(i) = row_norms.iter().position(|&r| r == 0.0) {
        if sf.b[i] != 0.0 {
            return Ok(trivially_infeasible(problem, &sf));
        }
    }
    let tau_p = (0..m).map(|i| (1.0 + sf.b[i].abs()) / (1.0 + row_norms[i])).fold(10.0f64, |a, v| a.max(n.sqrt() * v));
    let tau_d = row_norms.iter().copied().fold(10.0f64.max(n.sqrt()).max(norm_c), f64::max);

    let mut x: Blocks = sf.dims.iter().map(|&d| DMatrix::identity(d, d).scale(tau_p)).collect();
    let mut z: Blocks = sf.dims.iter().map(|&d| DMatrix::identity(d, d).scale(tau_d)).collect();
    let mut y = vec![0.0; m];
    let mut status = SdpStatus::IterationLimit;
    let mut iterations = 0;
    let mut stalled = 0;
    let mut breakdown = false;
    let mut converged_at: Option<usize> = None;
    let mut best: Option<Best> = None;

    for it in 0..=settings.max_iterations {
        iterations = it;
        let ax = sf.a_op(&x);
        let rp: Vec<f64> = sf.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = sf.at_op(&y);
        let rd: Blocks = sf.c.iter().zip(&aty).zip(&z).map(|((c, a), zk)| c - a - zk).collect();
        let pobj = inner(&sf.c, &x);
        let dobj: f64 = sf.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let gap = inner(&x, &z);
        let mu = gap / n;
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + norm_b);
        let rd_norm = frob(&rd);
        let dinf = rd_norm / (1.0 + norm_c);
        // the same measures in the caller's units
        let rel_gap_user = c_scale * (pobj - dobj).abs() / (1.0 + c_scale * (pobj.abs() + dobj.abs()));
        let dinf_user = c_scale * rd_norm / (1.0 + c_scale * norm_c);
        let rel_gap = rel_gap.max(rel_gap_user);
        let dinf = dinf.max(dinf_user);

        let merit = (rel_gap / settings.gap_tol).max(pinf / settings.feasibility_tol).max(dinf / settings.feasibility_tol);
        let converged = merit <= 1.0;
        // converged iterates replace each other in order so polishing stays scale invariant
        if converged || best.as_ref().is_none_or(|b| merit < b.merit) {
            best = Some(Best { merit, iteration: it, rel_gap, pinf, dinf, x: x.clone(), y: y.clone() });
        }
        if converged {
            let first = *converged_at.get_or_insert(it);
            let polished = rel_gap <= POLISH_TOL && pinf <= POLISH_TOL && dinf <= POLISH_TOL;
            if polished || it - first >= POLISH_ITERATIONS || it == settings.max_iterations {
                break;
            }
        } else if converged_at.is_some() {
            // polishing lost accuracy; the best iterate is a converged one
            break;
        }
        // divergence certificates: a dual ray b.y > 0, A^T y <= 0, or a primal ray <C,X> < 0, A(X) = 0
        if it > 0 && converged_at.is_none() {
            if dobj > 0.0 && (norm_c + rd_norm) / dobj < INFEASIBILITY_TOL {
                status = SdpStatus::PrimalInfeasible;
                break;
            }
            let norm_ax = ax.iter().map(|v| v * v).sum::<f64>().sqrt();
            if pobj < 0.0 && norm_ax.max(norm_b) / -pobj < INFEASIBILITY_TOL {
                status = SdpStatus::DualInfeasible;
                break;
            }
        }
        let since_best = best.as_ref().map_or(0, |b| it - b.iteration);
        if it == settings.max_iterations || stalled >= 3 || breakdown || since_best >= NO_PROGRESS_ITERATIONS {
            break;
        }

        let Some(zi) = z.iter().map(inverse_pd).collect::<Option<Blocks>>() else { break };
        let cols: Vec<Vec<f64>> = (0..m).into_par_iter().map(|j| sf.schur_column(j, &x, &zi)).collect();
        let schur = Mat::<f64>::from_fn(m, m, |i, j| 0.5 * (cols[j][i] + cols[i][j]));
        let factor = Factor::new(schur);

        // predictor: H = -X - X Rd Z^{-1}
        let h: Blocks = x.iter().zip(&rd).zip(&zi).map(|((xk, rk), zk)| -xk - xk * rk * zk).collect();
        let pred = direction(&sf, &factor, &x, &zi, &rp, &rd, h);
        let ap = max_step(&x, &pred.dx).min(1.0);
        let ad = max_step(&z, &pred.dz).min(1.0);
        let mu_aff = inner(&add_scaled(&x, ap, &pred.dx), &add_scaled(&z, ad, &pred.dz)) / n;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // corrector: H = sigma mu Z^{-1} - X - (X Rd + dXp dZp) Z^{-1}
        let h: Blocks = x
            .iter()
            .zip(&rd)
            .zip(&zi)
            .zip(pred.dx.iter().zip(&pred.dz))
            .map(|(((xk, rk), zk), (dxk, dzk))| zk.scale(sigma * mu) - xk - (xk * rk + dxk * dzk) * zk)
            .collect();
        let dir = direction(&sf, &factor, &x, &zi, &rp, &rd, h);
        if !sigma.is_finite() || !dir.is_finite() {
            // numerical breakdown: judge the current iterate and stop
            breakdown = true;
            continue;
        }
        let ap = (settings.step_fraction * max_step(&x, &dir.dx)).min(1.0);
        let ad = (settings.step_fraction * max_step(&z, &dir.dz)).min(1.0);
        if ap < 1e-10 && ad < 1e-10 {
            stalled += 1;
        } else {
            stalled = 0;
        }
        x = add_scaled(&x, ap, &dir.dx).iter().map(hermitize).collect();
        z = add_scaled(&z, ad, &dir.dz).iter().map(hermitize).collect();
        for (yi, di) in y.iter_mut().zip(&dir.dy) {
            *yi += ad * di;
        }
    }

    let infeasible = matches!(status, SdpStatus::PrimalInfeasible | SdpStatus::DualInfeasible);
    if let (false, Some(b)) = (infeasible, best) {
        // the best iterate is accepted under the looser gap when progress ran out
        let acceptable = b.merit <= 1.0
            || (b.rel_gap <= STALL_GAP_TOL && b.pinf <= settings.feasibility_tol && b.dinf <= settings.feasibility_tol);
        if acceptable {
            status = SdpStatus::Optimal;
        }
        x = b.x;
        y = b.y;
    }
    let primal_blocks = x[..sf.user_blocks].iter().map(|b| HermitianOperator::symmetrized(b.clone())).collect();
    let y: Vec<f64> = y.iter().map(|v| v * c_scale).collect();
    Ok(SdpSolution {
        primal_blocks,
        primal_objective: c_scale * inner(&sf.c, &x),
        dual_objective: sf.b.iter().zip(&y).map(|(b, y)| b * y).sum(),
        dual_multipliers: y,
        status,
        iterations,
    })
}

/// No constraints: bounded iff every cost block is positive semidefinite.
fn solve_unconstrained(problem: &SdpProblem, sf: &StandardForm) -> Result<SdpSolution> {
    for c in &sf.c {
        if HermitianOperator::symmetrized(c.clone()).min_eigenvalue() < -1e-12 {
            return Err(Error::MalformedSdp("objective is unbounded below without constraints".into()));
        }
    }
    Ok(SdpSolution {
        primal_blocks: problem.blocks.iter().map(|&d| HermitianOperator::zeros(d)).collect(),
        dual_multipliers: vec![],
        primal_objective: 0.0,
        dual_objective: 0.0,
        status: SdpStatus::Optimal,
        iterations: 0,
    })
}

fn trivially_infeasible(problem: &SdpProblem, sf: &StandardForm) -> SdpSolution {
    SdpSolution {
        primal_blocks: problem.blocks.iter().map(|&d| HermitianOperator::zeros(d)).collect(),
        dual_multipliers: vec![0.0; sf.m()],
        primal_objective: f64::NAN,
        dual_objective: f64::INFINITY,
        status: SdpStatus::PrimalInfeasible,
        iterations: 0,
    }
}
