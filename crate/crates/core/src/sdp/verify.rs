//! Independent re-evaluation of a solution against its problem.

use crate::linalg::HermitianOperator;

use super::{SdpProblem, SdpSolution, Sense};

/// Residuals and objectives recomputed from the problem data alone.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    /// Amount by which each row misses its sense (0 when satisfied).
    pub constraint_violations: Vec<f64>,
    pub max_constraint_violation: f64,
    /// Per primal block.
    pub min_primal_eigenvalues: Vec<f64>,
    /// Per block of `C - sum_i y_i A_i`, user blocks only.
    pub min_dual_slack_eigenvalues: Vec<f64>,
    /// Largest wrong-signed multiplier on an inequality row.
    pub dual_sign_violation: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub relative_gap: f64,
    /// Human-readable description of each threshold exceeded.
    pub findings: Vec<String>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }
}

const RESIDUAL_TOL: f64 = 1e-8;
const PSD_TOL: f64 = 1e-9;
const GAP_TOL: f64 = 1e-7;

pub fn verify(problem: &SdpProblem, solution: &SdpSolution) -> VerifyReport {
    let x = &solution.primal_blocks;
    let mut findings = Vec::new();
    let constraint_violations: Vec<f64> = (0..problem.constraints.len())
        .map(|i| {
            let c = &problem.constraints[i];
            let lhs = problem.constraint_value(i, x);
            match c.sense {
                Sense::Eq => (lhs - c.rhs).abs(),
                Sense::Le => (lhs - c.rhs).max(0.0),
                Sense::Ge => (c.rhs - lhs).max(0.0),
            }
        })
        .collect();
    for (i, v) in constraint_violations.iter().enumerate() {
        if *v > RESIDUAL_TOL * (1.0 + problem.constraints[i].rhs.abs()) {
            findings.push(format!("constraint {i} violated by {v:.3e}"));
        }
    }
    let max_constraint_violation = constraint_violations.iter().copied().fold(0.0, f64::max);

    let min_primal_eigenvalues: Vec<f64> = x.iter().map(|b| b.min_eigenvalue()).collect();
    for (k, v) in min_primal_eigenvalues.iter().enumerate() {
        if *v < -PSD_TOL {
            findings.push(format!("primal block {k} has eigenvalue {v:.3e}"));
        }
    }

    let y = &solution.dual_multipliers;
    let mut slack: Vec<HermitianOperator> = problem.objective.iter().map(|c| c.to_dense()).collect();
    let mut dual_sign_violation: f64 = 0.0;
    for (i, c) in problem.constraints.iter().enumerate() {
        let yi = y.get(i).copied().unwrap_or(0.0);
        for (k, a) in &c.terms {
            slack[*k] = &slack[*k] - &a.to_dense().scale(yi);
        }
        let wrong = match c.sense {
            Sense::Eq => 0.0,
            Sense::Le => yi.max(0.0),
            Sense::Ge => (-yi).max(0.0),
        };
        dual_sign_violation = dual_sign_violation.max(wrong);
    }
    let dual_scale = 1.0 + y.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if dual_sign_violation > RESIDUAL_TOL * dual_scale {
        findings.push(format!("inequality multiplier has the wrong sign by {dual_sign_violation:.3e}"));
    }
    let min_dual_slack_eigenvalues: Vec<f64> = slack.iter().map(|s| s.min_eigenvalue()).collect();
    for (k, v) in min_dual_slack_eigenvalues.iter().enumerate() {
        if *v < -RESIDUAL_TOL * dual_scale {
            findings.push(format!("dual slack block {k} has eigenvalue {v:.3e}"));
        }
    }

    let primal_objective = problem.objective_value(x);
    let dual_objective: f64 = problem.constraints.iter().zip(y).map(|(c, yi)| c.rhs * yi).sum();
    let relative_gap = (primal_objective - dual_objective).abs() / (1.0 + primal_objective.abs() + dual_objective.abs());
    if relative_gap > GAP_TOL {
        findings.push(format!("relative duality gap {relative_gap:.3e}"));
    }
    VerifyReport {
        constraint_violations,
        max_constraint_violation,
        min_primal_eigenvalues,
        min_dual_slack_eigenvalues,
        dual_sign_violation,
        primal_objective,
        dual_objective,
        relative_gap,
        findings,
    }
}
