//! The converse for a classical channel given as a column-stochastic `w[y][x]`.
//!
//! For an input distribution `p` the bound is `-log2 max_q beta_eps(P || p x q)`
//! with `P(x, y) = p(x) W(y|x)`. The maximum over `q` goes through
//!
//! ```text
//! beta_eps(P || Q) = max_{s >= 0}  s (1 - eps) - sum (s P - Q)_+
//! ```
//!
//! where, for fixed `s`, minimizing the penalty over `q` is a separable
//! water-filling problem. The remaining function of `p` is convex and is
//! minimized by golden-section search.

use crate::error::{Error, Result};
use crate::hypotest::{classical_np_beta, ClassicalDistribution};
use crate::quantum::DensityMatrix;

use super::{BoundResult, TestClass};

const STOCHASTIC_TOL: f64 = 1e-10;
/// Largest input alphabet searched by nested golden sections (exact for convex objectives).
const NESTED_MAX_INPUTS: usize = 3;
/// Largest input alphabet searched at all; beyond it supply `p` to [`classical_converse_at`].
const MAX_INPUTS: usize = 8;
const OUTER_TOL: f64 = 1e-9;
const INNER_TOL: f64 = 1e-13;

fn validate(w: &[Vec<f64>]) -> Result<(usize, usize)> {
    let ny = w.len();
    let nx = w.first().map_or(0, |r| r.len());
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidArgument("empty stochastic matrix".into()));
    }
    for row in w {
        if row.len() != nx {
            return Err(Error::DimensionMismatch { expected: nx, found: row.len() });
        }
        if let Some(&v) = row.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidProbability { name: "W(y|x)", value: v });
        }
    }
    for x in 0..nx {
        let s: f64 = w.iter().map(|r| r[x]).sum();
        if (s - 1.0).abs() > STOCHASTIC_TOL {
            return Err(Error::InvalidDistribution(format!("column {x} of W sums to {s}")));
        }
    }
    Ok((nx, ny))
}

/// `min_q sum_{x,y} p_x (s W(y|x) - q_y)_+` over the simplex, returned as
/// `(s - value, q)`.
fn waterfill(w: &[Vec<f64>], p: &[f64], s: f64) -> (f64, Vec<f64>) {
    let ny = w.len();
    // (slope magnitude, length, y): segments of each convex, decreasing f_y
    let mut segments: Vec<(f64, f64, usize)> = Vec::new();
    for (y, row) in w.iter().enumerate() {
        let mut pts: Vec<(f64, f64)> =
            row.iter().zip(p).filter(|(v, px)| **v > 0.0 && **px > 0.0).map(|(v, px)| (s * v, *px)).collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut mass: f64 = pts.iter().map(|t| t.1).sum();
        let mut prev = 0.0;
        for (v, px) in pts {
            if v > prev {
                segments.push((mass, v - prev, y));
            }
            prev = v;
            mass -= px;
        }
    }
    segments.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.2.cmp(&b.2)));
    let mut q = vec![0.0; ny];
    let mut budget = 1.0;
    let mut gain = 0.0;
    for (slope, len, y) in segments {
        if budget <= 0.0 {
            break;
        }
        let take = len.min(budget);
        q[y] += take;
        gain += take * slope;
        budget -= take;
    }
    q[0] += budget.max(0.0);
    (gain, q)
}

/// Minimizer of a unimodal `f` on `[lo, hi]`, endpoints included.
fn golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..400 {
        if b - a <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let mid = 0.5 * (a + b);
    [(mid, f(mid)), (lo, f(lo)), (hi, f(hi))]
        .into_iter()
        .fold((f64::NAN, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best })
}

/// `max_q beta_eps(P || p x q)` and a maximizing `q`.
fn max_over_q(w: &[Vec<f64>], p: &[f64], eps: f64) -> (f64, Vec<f64>) {
    if eps == 0.0 {
        // beta_0 is the alternative mass on the support of P
        let support = |y: usize| -> f64 { w[y].iter().zip(p).filter(|(v, _)| **v > 0.0).map(|(_, px)| px).sum() };
        let (best, value) = (0..w.len()).map(|y| (y, support(y))).fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        let mut q = vec![0.0; w.len()];
        q[best] = 1.0;
        return (value, q);
    }
    // h(s) = gain(s) - eps s is concave, h(0) = 0 and h < 0 beyond 1/eps
    let h = |s: f64| waterfill(w, p, s).0 - eps * s;
    let (s, neg) = golden_min(|s| -h(s), 0.0, 1.0 / eps, INNER_TOL);
    (-neg, waterfill(w, p, s).1)
}

fn nested_min(k: usize, f: &dyn Fn(&[f64]) -> f64) -> (Vec<f64>, f64) {
    if k == 1 {
        return (vec![1.0], f(&[1.0]));
    }
    let restricted = |t: f64| {
        let g = |rest: &[f64]| {
            let mut p = Vec::with_capacity(k);
            p.push(t);
            p.extend(rest.iter().map(|r| (1.0 - t) * r));
            f(&p)
        };
        let (rest, v) = nested_min(k - 1, &g);
        let mut p = vec![t];
        p.extend(rest.iter().map(|r| (1.0 - t) * r));
        (p, v)
    };
    let (t, _) = golden_min(|t| restricted(t).1, 0.0, 1.0, OUTER_TOL);
    restricted(t)
}

/// Cyclic line searches along `e_i - e_j`; a local method for larger alphabets.
fn pairwise_min(k: usize, f: &dyn Fn(&[f64]) -> f64) -> (Vec<f64>, f64) {
    let mut p = vec![1.0 / k as f64; k];
    let mut value = f(&p);
    for _ in 0..50 {
        let before = value;
        for i in 0..k {
            for j in i + 1..k {
                let (pi, pj) = (p[i], p[j]);
                let moved = |d: f64| {
                    let mut q = p.clone();
                    q[i] = pi + d;
                    q[j] = pj - d;
                    q
                };
                let (d, v) = golden_min(|d| f(&moved(d)), -pi, pj, OUTER_TOL);
                if v < value {
                    p = moved(d);
                    p[i] = p[i].max(0.0);
                    p[j] = p[j].max(0.0);
                    value = v;
                }
            }
        }
        if before - value <= 1e-14 {
            break;
        }
    }
    (p, value)
}

fn finish(w: &[Vec<f64>], p: Vec<f64>, eps: f64) -> Result<BoundResult> {
    let (_, q) = max_over_q(w, &p, eps);
    let ny = w.len();
    let joint: Vec<f64> = p.iter().enumerate().flat_map(|(x, px)| (0..ny).map(move |y| px * w[y][x])).collect();
    let product: Vec<f64> = p.iter().flat_map(|px| q.iter().map(move |qy| px * qy)).collect();
    let test = classical_np_beta(
        &ClassicalDistribution::with_tolerance(joint, STOCHASTIC_TOL)?,
        &ClassicalDistribution::with_tolerance(product, STOCHASTIC_TOL)?,
        eps,
    )?;
    let mut out = BoundResult::from_log2_beta(test.log2_beta, eps, TestClass::All, 1);
    out.optimal_rho = Some(DensityMatrix::from_diagonal(&p)?);
    out.optimal_sigma = Some(DensityMatrix::from_diagonal(&q)?);
    Ok(out)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidProbability { name: "eps", value: eps });
    }
    Ok(())
}

/// The classical converse maximized over input distributions.
///
/// Alphabets of up to three inputs are searched exactly; up to eight inputs
/// use pairwise line searches from the uniform distribution.
pub fn classical_converse(w: &[Vec<f64>], eps: f64) -> Result<BoundResult> {
    let (nx, _) = validate(w)?;
    check_eps(eps)?;
    if nx > MAX_INPUTS {
        return Err(Error::InvalidArgument(format!(
            "input alphabet of {nx} exceeds {MAX_INPUTS}; supply an input distribution"
        )));
    }
    let objective = |p: &[f64]| max_over_q(w, p, eps).0;
    let (p, _) = if nx <= NESTED_MAX_INPUTS { nested_min(nx, &objective) } else { pairwise_min(nx, &objective) };
    finish(w, p, eps)
}

/// The classical converse at a fixed input distribution `p`.
pub fn classical_converse_at(w: &[Vec<f64>], p: &[f64], eps: f64) -> Result<BoundResult> {
    let (nx, _) = validate(w)?;
    check_eps(eps)?;
    if p.len() != nx {
        return Err(Error::DimensionMismatch { expected: nx, found: p.len() });
    }
    ClassicalDistribution::with_tolerance(p.to_vec(), STOCHASTIC_TOL)?;
    finish(w, p.to_vec(), eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_distribution, random_stochastic, rng};

    fn bsc(f: f64) -> Vec<Vec<f64>> {
        vec![vec![1.0 - f, f], vec![f, 1.0 - f]]
    }

    /// `max_q beta` by brute force over a grid of binary `q`.
    fn grid_max_q(w: &[Vec<f64>], p: &[f64], eps: f64) -> f64 {
        let joint: Vec<f64> = p.iter().enumerate().flat_map(|(x, px)| (0..2).map(move |y| px * w[y][x])).collect();
        let p0 = ClassicalDistribution::with_tolerance(joint, 1e-10).unwrap();
        (0..=2000)
            .map(|k| {
                let q = [k as f64 / 2000.0, 1.0 - k as f64 / 2000.0];
                let prod: Vec<f64> = p.iter().flat_map(|px| q.iter().map(move |qy| px * qy)).collect();
                classical_np_beta(&p0, &ClassicalDistribution::with_tolerance(prod, 1e-10).unwrap(), eps).unwrap().beta
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn waterfill_matches_the_dual_formula_at_its_q() {
        let mut g = rng(4);
        for _ in 0..20 {
            let w = random_stochastic(&mut g, 3, 3);
            let p = random_distribution(&mut g, 3);
            let s = 2.7;
            let (gain, q) = waterfill(&w, &p, s);
            let penalty: f64 =
                (0..3).flat_map(|x| (0..3).map(move |y| (x, y))).map(|(x, y)| (p[x] * (s * w[y][x] - q[y])).max(0.0)).sum();
            assert!((s - gain - penalty).abs() < 1e-12);
            assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn inner_maximum_matches_a_grid() {
        let mut g = rng(5);
        for _ in 0..5 {
            let w = random_stochastic(&mut g, 2, 2);
            let p = random_distribution(&mut g, 2);
            let (v, _) = max_over_q(&w, &p, 0.1);
            let grid = grid_max_q(&w, &p, 0.1);
            assert!(v >= grid - 1e-12);
            assert!(v - grid < 1e-3);
        }
    }

    #[test]
    fn noiseless_bit_at_zero_error_is_one_bit() {
        let res = classical_converse(&bsc(0.0), 0.0).unwrap();
        assert!((res.bits - 1.0).abs() < 1e-9);
    }

    #[test]
    fn useless_channel_gives_minus_log_one_minus_eps() {
        let w = vec![vec![0.3, 0.3, 0.3], vec![0.7, 0.7, 0.7]];
        for eps in [0.05, 0.3, 0.6] {
            let res = classical_converse(&w, eps).unwrap();
            assert!((res.bits + (1.0 - eps).log2()).abs() < 1e-9, "eps {eps}: {}", res.bits);
        }
    }

    #[test]
    fn bsc_at_uniform_input_is_the_four_point_test() {
        let w = bsc(0.11);
        let eps = 0.05;
        let joint = ClassicalDistribution::new(vec![0.445, 0.055, 0.055, 0.445]).unwrap();
        let product = ClassicalDistribution::new(vec![0.25; 4]).unwrap();
        let direct = -classical_np_beta(&joint, &product, eps).unwrap().log2_beta;
        let at = classical_converse_at(&w, &[0.5, 0.5], eps).unwrap();
        assert!((at.bits - direct).abs() < 1e-9);
        let opt = classical_converse(&w, eps).unwrap();
        assert!((opt.bits - direct).abs() < 1e-7);
    }

    #[test]
    fn optimized_input_is_no_worse_than_random_inputs() {
        let mut g = rng(6);
        for _ in 0..4 {
            let w = random_stochastic(&mut g, 3, 3);
            let opt = classical_converse(&w, 0.1).unwrap();
            for _ in 0..5 {
                let p = random_distribution(&mut g, 3);
                let at = classical_converse_at(&w, &p, 0.1).unwrap();
                assert!(opt.bits >= at.bits - 1e-9);
            }
        }
    }

    #[test]
    fn non_stochastic_input_is_rejected() {
        assert!(classical_converse(&[vec![0.5, 0.5], vec![0.4, 0.5]], 0.1).is_err());
        assert!(classical_converse(&[vec![-0.1, 0.5], vec![1.1, 0.5]], 0.1).is_err());
        assert!(classical_converse_at(&bsc(0.1), &[0.5, 0.6], 0.1).is_err());
    }
}
