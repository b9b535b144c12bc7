//! Equalized optimal-cover profiles.
//!
//! A cover profile splits a growth budget `B^(d n)` into per-scale factors
//! A_1 <= ... <= A_n with running products alpha_k = A_1 * ... * A_k. The
//! covering exponent of such a profile is the minimum of the n terms
//!
//! ```text
//!     t_k = (alpha_{k-1}^(1-s) * alpha_k^(-s))^(1/k),   k = 1..n,
//! ```
//!
//! where alpha_0 = 1 and the k = n term uses B^(-s d n) in place of
//! alpha_n^(-s). The supremum of the minimum over all admissible profiles is
//! attained when every term is equal, which pins the profile down to the
//! closed form implemented by [`equalized_cover`]; a brute-force grid search
//! certifies that optimality on small instances. Everything is carried in
//! log space because the A_k themselves overflow f64 for modest n.
//!
//! Two scalar iterations drive the equalization: h_l(s), which solves the
//! two-variable sub-problem at each depth, and f_m(s), the exponent of the
//! m-fold iterated-product potential.

use serde::Serialize;
use thiserror::Error;

use crate::numeric::parallel_max;

#[derive(Debug, Error, PartialEq)]
pub enum CoverError {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("grid of {cells} cells exceeds the budget of {budget}")]
    Budget { cells: u128, budget: u128 },
}

/// Admissible s for profile construction: the closed form has a pole at
/// s = 1/2 and the root solvers never query outside this band.
pub const S_MIN: f64 = 0.5 + 1e-6;
pub const S_MAX: f64 = 1.0 - 1e-9;

fn check_s_band(s: f64) -> Result<(), CoverError> {
    if !(S_MIN..=S_MAX).contains(&s) {
        return Err(CoverError::Domain(format!(
            "s = {s} outside ({S_MIN}, {S_MAX})"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationTable {
    pub s: f64,
    pub values: Vec<f64>,
}

/// h_1 = s, h_l = s h_{l-1} / (1 - s + l h_{l-1}).
pub fn h_iter(s: f64, len: usize) -> Result<IterationTable, CoverError> {
    if !(0.0 < s && s < 1.0) {
        return Err(CoverError::Domain(format!("s = {s} outside (0, 1)")));
    }
    if len == 0 {
        return Err(CoverError::Domain("iteration length 0".into()));
    }
    let mut values = Vec::with_capacity(len);
    let mut h = s;
    values.push(h);
    for l in 2..=len {
        h = s * h / (1.0 - s + l as f64 * h);
        values.push(h);
    }
    Ok(IterationTable { s, values })
}

/// f_1 = s, f_{k+1} = s f_k / (1 - s + f_k).
pub fn f_iter(s: f64, len: usize) -> Result<IterationTable, CoverError> {
    if !(0.0 < s && s < 1.0) {
        return Err(CoverError::Domain(format!("s = {s} outside (0, 1)")));
    }
    if len == 0 {
        return Err(CoverError::Domain("iteration length 0".into()));
    }
    let mut values = Vec::with_capacity(len);
    let mut f = s;
    values.push(f);
    for _ in 1..len {
        f = f_step(s, f);
        values.push(f);
    }
    Ok(IterationTable { s, values })
}

fn f_step(s: f64, f: f64) -> f64 {
    if f == 0.0 {
        return 0.0;
    }
    s * f / (1.0 - s + f)
}

/// f_m(s) without the open-interval guard. Root solvers evaluate the
/// iterated-product exponent across their whole bracket [0, 1.5], where the
/// denominator 1 - s + f stays positive: for s <= 1 the iterates are
/// nonnegative and bounded by s, for s > 1 they increase from s toward
/// 2s - 1, keeping 1 - s + f >= 1.
pub fn f_value(s: f64, m: usize) -> f64 {
    assert!(m >= 1, "iterated-product order must be at least 1");
    assert!((0.0..=1.5).contains(&s), "exponent s = {s} outside [0, 1.5]");
    let mut f = s;
    for _ in 1..m {
        f = f_step(s, f);
    }
    f
}

#[derive(Clone, Debug, Serialize)]
pub struct CoverProfile {
    pub n: usize,
    pub s: f64,
    pub b: f64,
    pub d: u64,
    /// log A_k for k = 1..n.
    pub log_a: Vec<f64>,
    /// log alpha_k = log A_1 + ... + log A_k.
    pub log_alpha: Vec<f64>,
}

/// The equalizing profile: log A_k = c_k log A_1 with c_k = (1 - r^k) / D,
/// r = (1-s)/s, D = 2 - 1/s, and log A_1 fixed by the budget
/// sum_k log A_k = d n log B.
pub fn equalized_cover(n: usize, s: f64, b: f64, d: u64) -> Result<CoverProfile, CoverError> {
    check_s_band(s)?;
    if !(b > 1.0) {
        return Err(CoverError::Domain(format!("B = {b} must exceed 1")));
    }
    if n == 0 || d == 0 {
        return Err(CoverError::Domain("n and d must be positive".into()));
    }
    let r = (1.0 - s) / s;
    let denom = 2.0 - 1.0 / s;
    let mut coeff = Vec::with_capacity(n);
    let mut r_pow = 1.0;
    for _ in 0..n {
        r_pow *= r;
        coeff.push((1.0 - r_pow) / denom);
    }
    let budget = d as f64 * n as f64 * b.ln();
    let log_a1 = budget / coeff.iter().sum::<f64>();
    let log_a: Vec<f64> = coeff.iter().map(|c| c * log_a1).collect();
    let mut log_alpha = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &la in &log_a {
        acc += la;
        log_alpha.push(acc);
    }
    Ok(CoverProfile { n, s, b, d, log_a, log_alpha })
}

/// The n bracketed log-terms of the covering minimum for an arbitrary
/// profile of cumulative logs (alpha_1..alpha_{n-1}; the last term uses the
/// budget directly).
fn log_terms_from_alpha(s: f64, log_budget: f64, log_alpha: &[f64], out: &mut Vec<f64>) {
    let n = log_alpha.len() + 1;
    out.clear();
    let mut prev = 0.0;
    for (k, &cur) in log_alpha.iter().enumerate() {
        out.push(((1.0 - s) * prev - s * cur) / (k + 1) as f64);
        prev = cur;
    }
    out.push(((1.0 - s) * prev - s * log_budget) / n as f64);
}

pub fn cover_log_terms(profile: &CoverProfile) -> Vec<f64> {
    let log_budget = profile.d as f64 * profile.n as f64 * profile.b.ln();
    let mut out = Vec::with_capacity(profile.n);
    log_terms_from_alpha(
        profile.s,
        log_budget,
        &profile.log_alpha[..profile.n - 1],
        &mut out,
    );
    out
}

/// min over the covering terms, as a plain value.
pub fn cover_value(profile: &CoverProfile) -> f64 {
    cover_log_terms(profile)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
        .exp()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GridOracleResult {
    pub value: f64,
    pub log_value: f64,
    /// Log-space resolution slack: grid spacing times a numerically
    /// estimated Lipschitz constant, summed over the free axes.
    pub slack_log: f64,
    pub cells: u128,
}

const GRID_CELL_BUDGET: u128 = 200_000_000;

/// Brute-force sup-min over uniform grids in log alpha_1..log alpha_{n-1}.
pub fn supremum_grid_oracle(
    n: usize,
    s: f64,
    b: f64,
    d: u64,
    grid_points: usize,
) -> Result<GridOracleResult, CoverError> {
    check_s_band(s)?;
    if !(b > 1.0) {
        return Err(CoverError::Domain(format!("B = {b} must exceed 1")));
    }
    if n == 0 || n > 4 {
        return Err(CoverError::Domain(format!("grid oracle needs 1 <= n <= 4, got {n}")));
    }
    if d == 0 || grid_points < 2 {
        return Err(CoverError::Domain("d must be positive and grid_points >= 2".into()));
    }
    let log_budget = d as f64 * n as f64 * b.ln();
    if n == 1 {
        let log_value = -s * log_budget;
        return Ok(GridOracleResult { value: log_value.exp(), log_value, slack_log: 0.0, cells: 1 });
    }
    let axes = n - 1;
    let cells = (grid_points as u128).pow(axes as u32);
    if cells > GRID_CELL_BUDGET {
        return Err(CoverError::Budget { cells, budget: GRID_CELL_BUDGET });
    }
    let h = log_budget / (grid_points - 1) as f64;

    let eval = |alpha: &[f64], terms: &mut Vec<f64>| -> f64 {
        log_terms_from_alpha(s, log_budget, alpha, terms);
        terms.iter().copied().fold(f64::INFINITY, f64::min)
    };

    // Max over the grid; the outermost axis is parallelized and f64::max is
    // order-independent, so the result does not depend on worker count.
    let log_value = parallel_max(0..grid_points, |i0, terms: &mut (Vec<f64>, Vec<f64>)| {
        let (alpha, scratch) = terms;
        alpha.clear();
        alpha.resize(axes, 0.0);
        alpha[0] = i0 as f64 * h;
        let mut best = f64::NEG_INFINITY;
        let mut idx = vec![0usize; axes - 1];
        loop {
            for (j, &ij) in idx.iter().enumerate() {
                alpha[j + 1] = ij as f64 * h;
            }
            best = best.max(eval(alpha, scratch));
            let mut carry = axes - 1;
            loop {
                if carry == 0 {
                    return best;
                }
                carry -= 1;
                idx[carry] += 1;
                if idx[carry] < grid_points {
                    break;
                }
                idx[carry] = 0;
            }
        }
    });

    // Lipschitz estimate from central differences on a coarse subgrid.
    let mut slack_log = 0.0;
    let coarse = 17usize;
    let hc = log_budget / (coarse - 1) as f64;
    let mut terms = Vec::new();
    for axis in 0..axes {
        let mut lipschitz: f64 = 0.0;
        let mut idx = vec![0usize; axes];
        loop {
            let mut alpha: Vec<f64> = idx.iter().map(|&i| i as f64 * hc).collect();
            let base = alpha[axis];
            alpha[axis] = (base + 0.5 * hc).min(log_budget);
            let up = eval(&alpha, &mut terms);
            alpha[axis] = (base - 0.5 * hc).max(0.0);
            let down = eval(&alpha, &mut terms);
            lipschitz = lipschitz.max((up - down).abs() / (alpha[axis] - (base + 0.5 * hc).min(log_budget)).abs());
            let mut carry = axes;
            loop {
                if carry == 0 {
                    break;
                }
                carry -= 1;
                idx[carry] += 1;
                if idx[carry] < coarse {
                    break;
                }
                idx[carry] = 0;
            }
            if idx.iter().all(|&i| i == 0) {
                break;
            }
        }
        slack_log += lipschitz * h;
    }

    Ok(GridOracleResult { value: log_value.exp(), log_value, slack_log, cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s_grid() -> Vec<f64> {
        (0..=8).map(|i| 0.55 + 0.05 * i as f64).collect()
    }

    #[test]
    fn h_seed_and_frozen_value() {
        for &s in &[0.2, 0.5, 0.9] {
            assert_eq!(h_iter(s, 1).unwrap().values, vec![s]);
        }
        let h2 = h_iter(0.5, 2).unwrap().values[1];
        assert!((h2 - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn h_strictly_decreasing() {
        for s in (1..20).map(|i| i as f64 / 20.0) {
            let t = h_iter(s, 50).unwrap();
            for w in t.values.windows(2) {
                assert!(w[1] < w[0], "s = {s}: {:?}", w);
            }
            assert!(t.values.iter().all(|&v| v > 0.0 && v <= s));
        }
    }

    #[test]
    fn f_seed_square_and_frozen_value() {
        for &s in &[0.3, 0.6, 0.85] {
            let t = f_iter(s, 3).unwrap();
            assert_eq!(t.values[0], s);
            assert!((t.values[1] - s * s).abs() < 1e-15);
        }
        let f3 = f_iter(0.5, 3).unwrap().values[2];
        assert!((f3 - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn f_converges_to_fixed_point() {
        for &s in &s_grid() {
            let t = f_iter(s, 400).unwrap();
            let target = 2.0 * s - 1.0;
            // Strictly decreasing until the fixed point is reached to
            // rounding noise, then pinned there.
            for w in t.values.windows(2) {
                if w[0] - target > 1e-9 {
                    assert!(w[1] < w[0], "s = {s}: {} -> {}", w[0], w[1]);
                } else {
                    assert!((w[1] - target).abs() <= 1e-9);
                }
            }
            assert!(t.values.iter().all(|&v| v > 0.0 && v <= s));
            let last = *t.values.last().unwrap();
            assert!(
                (last - target).abs() < 1e-9,
                "s = {s}: {last} vs {target}"
            );
        }
    }

    #[test]
    fn f_value_total_on_bracket() {
        assert_eq!(f_value(0.0, 7), 0.0);
        assert_eq!(f_value(1.0, 7), 1.0);
        for &s in &[0.25, 0.6, 1.0, 1.3, 1.5] {
            for m in 1..=30 {
                let v = f_value(s, m);
                assert!(v.is_finite(), "s = {s}, m = {m}");
            }
        }
        for &s in &s_grid() {
            let t = f_iter(s, 12).unwrap();
            for (m, &v) in t.values.iter().enumerate() {
                assert_eq!(f_value(s, m + 1), v);
            }
        }
    }

    #[test]
    fn two_term_profile_solved_by_hand() {
        // n=2, s=3/4: r = 1/3, D = 2/3, c = (1, 4/3), so
        // logA_1 = 2 log2 / (7/3) = (6/7) log2 and logA_2 = (8/7) log2.
        let p = equalized_cover(2, 0.75, 2.0, 1).unwrap();
        let l2 = std::f64::consts::LN_2;
        assert!((p.log_a[0] - 6.0 * l2 / 7.0).abs() < 1e-12);
        assert!((p.log_a[1] - 8.0 * l2 / 7.0).abs() < 1e-12);
        assert!((p.log_alpha[1] - 2.0 * l2).abs() < 1e-12, "A_1 A_2 = B^2");
    }

    #[test]
    fn budget_and_monotonicity_invariants() {
        for &s in &s_grid() {
            for n in [1usize, 2, 3, 7, 30] {
                let p = equalized_cover(n, s, 3.0, 2).unwrap();
                let budget = 2.0 * n as f64 * 3f64.ln();
                assert!((p.log_alpha[n - 1] - budget).abs() < 1e-9 * budget);
                for w in p.log_a.windows(2) {
                    assert!(w[1] >= w[0], "profile must be nondecreasing");
                }
                assert!(p.log_a[0] > 0.0);
            }
        }
    }

    #[test]
    fn per_step_recursion_holds() {
        // s logA_{k+1} = s logA_1 + (1-s) logA_k.
        for &s in &s_grid() {
            let p = equalized_cover(30, s, 2.0, 1).unwrap();
            for k in 0..29 {
                let lhs = s * p.log_a[k + 1];
                let rhs = s * p.log_a[0] + (1.0 - s) * p.log_a[k];
                assert!((lhs - rhs).abs() < 1e-9, "s = {s}, k = {k}");
            }
        }
    }

    #[test]
    fn product_relation_holds() {
        // (A_1...A_k)^(1-2s) = A_1^(-sk) A_k^(1-s) in log space.
        for &s in &s_grid() {
            let p = equalized_cover(30, s, 2.0, 1).unwrap();
            for k in 0..30 {
                let lhs = (1.0 - 2.0 * s) * p.log_alpha[k];
                let rhs = -s * (k + 1) as f64 * p.log_a[0] + (1.0 - s) * p.log_a[k];
                assert!((lhs - rhs).abs() < 1e-9, "s = {s}, k = {k}");
            }
        }
    }

    #[test]
    fn equalized_terms_are_all_equal() {
        for &s in &s_grid() {
            for n in [2usize, 3, 5, 11] {
                let p = equalized_cover(n, s, 4.0, 1).unwrap();
                let terms = cover_log_terms(&p);
                let first = terms[0];
                for &t in &terms {
                    assert!((t - first).abs() < 1e-9, "s = {s}, n = {n}: {terms:?}");
                }
                assert!((first + s * p.log_a[0]).abs() < 1e-9, "value is A_1^(-s)");
            }
        }
    }

    #[test]
    fn perturbing_a_free_coordinate_decreases_the_min() {
        let p = equalized_cover(4, 0.7, 2.0, 1).unwrap();
        let log_budget = 4.0 * 2f64.ln();
        let mut terms = Vec::new();
        log_terms_from_alpha(0.7, log_budget, &p.log_alpha[..3], &mut terms);
        let base = terms.iter().copied().fold(f64::INFINITY, f64::min);
        for k in 0..3 {
            for delta in [-0.1, 0.1] {
                let mut alpha = p.log_alpha[..3].to_vec();
                alpha[k] += delta;
                log_terms_from_alpha(0.7, log_budget, &alpha, &mut terms);
                let perturbed = terms.iter().copied().fold(f64::INFINITY, f64::min);
                assert!(perturbed < base - 1e-3, "k = {k}, delta = {delta}");
            }
        }
    }

    #[test]
    fn single_scale_value_is_closed_form() {
        let p = equalized_cover(1, 0.8, 2.0, 3).unwrap();
        assert!((cover_value(&p) - 2f64.powf(-0.8 * 3.0)).abs() < 1e-12);
        let g = supremum_grid_oracle(1, 0.8, 2.0, 3, 10).unwrap();
        assert!((g.value - cover_value(&p)).abs() < 1e-12);
    }

    #[test]
    fn grid_oracle_certifies_equalization() {
        let cases = [(2usize, 0.7, 2.0, 1u64, 400usize, 1e-2), (3, 0.8, 4.0, 2, 100, 5e-2)];
        for (n, s, b, d, points, tol) in cases {
            let eq = equalized_cover(n, s, b, d).unwrap();
            let eq_value = cover_value(&eq);
            let g = supremum_grid_oracle(n, s, b, d, points).unwrap();
            assert!(
                g.log_value <= eq_value.ln() + 1e-9,
                "grid max cannot beat the supremum"
            );
            assert!((g.value - eq_value).abs() <= tol, "n = {n}: {} vs {eq_value}", g.value);
            assert!(g.log_value >= eq_value.ln() - g.slack_log - 1e-9);
        }
    }

    #[test]
    fn first_scale_approaches_its_limit() {
        // logA_1(n) -> (2 - 1/s) d log B, gap shrinking in n (roughly like
        // 1/n, so it is still visible at n = 40).
        for &s in &[0.6, 0.8] {
            let limit = (2.0 - 1.0 / s) * 2f64.ln();
            let mut prev_gap = f64::INFINITY;
            for n in [5usize, 10, 20, 40] {
                let p = equalized_cover(n, s, 2.0, 1).unwrap();
                let gap = (p.log_a[0] - limit).abs();
                assert!(gap < prev_gap, "s = {s}, n = {n}");
                prev_gap = gap;
            }
            assert!(prev_gap < 2e-2);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(equalized_cover(3, 0.5, 2.0, 1), Err(CoverError::Domain(_))));
        assert!(matches!(equalized_cover(3, 1.0, 2.0, 1), Err(CoverError::Domain(_))));
        assert!(matches!(equalized_cover(3, 0.7, 1.0, 1), Err(CoverError::Domain(_))));
        assert!(matches!(equalized_cover(0, 0.7, 2.0, 1), Err(CoverError::Domain(_))));
        assert!(matches!(supremum_grid_oracle(5, 0.7, 2.0, 1, 10), Err(CoverError::Domain(_))));
        assert!(matches!(h_iter(1.0, 3), Err(CoverError::Domain(_))));
        assert!(matches!(f_iter(0.0, 3), Err(CoverError::Domain(_))));
    }

    #[test]
    fn h2_solves_the_two_variable_subproblem() {
        // sup over alpha_1 of min(alpha_1^(-s), (alpha_1^(1-s) alpha_2^(-s))^(1/2))
        // equals alpha_2^(-h_2(s)).
        for &s in &[0.55, 0.7, 0.9] {
            let h2 = h_iter(s, 2).unwrap().values[1];
            for &la2 in &[0.5, 1.0, 3.0, 8.0] {
                let mut best = f64::NEG_INFINITY;
                let steps = 200_000;
                for i in 0..=steps {
                    let la1 = la2 * i as f64 / steps as f64;
                    let t1 = -s * la1;
                    let t2 = ((1.0 - s) * la1 - s * la2) / 2.0;
                    best = best.max(t1.min(t2));
                }
                assert!(
                    (best - (-h2 * la2)).abs() < 1e-4,
                    "s = {s}, log alpha_2 = {la2}: {best} vs {}",
                    -h2 * la2
                );
            }
        }
    }
}
