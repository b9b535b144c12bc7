//! Cylinder sums by transfer-operator iteration.
//!
//! The weighted operator for a digit set A acts on functions over [0,1] by
//!
//! ```text
//!     (L g)(x) = sum over a in A of (a + x)^(-2s) g(1/(a + x)),
//! ```
//!
//! and m-fold iteration starting from g = 1, evaluated at x = 0, reproduces
//! the length-m cylinder sum exactly: the m-fold branch compositions have
//! derivative 1/(q_{m-1} x + q_m)^2. Functions are represented by their
//! values on a Chebyshev-Lobatto grid and the application of L collapses to
//! one dense matrix, so the cost is polynomial in the degree and linear in m
//! instead of exponential. The degree is doubled until two consecutive grids
//! agree to the requested tolerance.

use super::{Alphabet, PressureError, SumMethod, SumResult};

/// Lobatto points (1 - cos(pi j / n)) / 2 for j = 0..=n; the first is 0,
/// which is where the iterated function is read off.
fn lobatto_nodes(n: usize) -> Vec<f64> {
    (0..=n)
        .map(|j| 0.5 * (1.0 - (std::f64::consts::PI * j as f64 / n as f64).cos()))
        .collect()
}

/// Row of cardinal interpolation weights at the point y: out[k] is the value
/// of the k-th barycentric basis function for the Lobatto grid.
fn cardinal_row(nodes: &[f64], y: f64, out: &mut [f64]) {
    let n = nodes.len() - 1;
    for (k, node) in nodes.iter().enumerate() {
        if y == *node {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[k] = 1.0;
            return;
        }
    }
    let mut den = 0.0;
    for (k, node) in nodes.iter().enumerate() {
        let mut w = if k % 2 == 0 { 1.0 } else { -1.0 };
        if k == 0 || k == n {
            w *= 0.5;
        }
        let c = w / (y - node);
        out[k] = c;
        den += c;
    }
    out.iter_mut().for_each(|v| *v /= den);
}

fn value_at_degree(alphabet: &Alphabet, m: usize, s: f64, n: usize) -> f64 {
    let nodes = lobatto_nodes(n);
    let dim = n + 1;
    let mut matrix = vec![0.0f64; dim * dim];
    let mut row = vec![0.0f64; dim];
    for a in alphabet.iter() {
        let a = a as f64;
        for (j, xj) in nodes.iter().enumerate() {
            let weight = (a + xj).powf(-2.0 * s);
            cardinal_row(&nodes, 1.0 / (a + xj), &mut row);
            let out_row = &mut matrix[j * dim..(j + 1) * dim];
            for k in 0..dim {
                out_row[k] += weight * row[k];
            }
        }
    }
    let mut g = vec![1.0f64; dim];
    let mut next = vec![0.0f64; dim];
    for _ in 0..m {
        for j in 0..dim {
            let r = &matrix[j * dim..(j + 1) * dim];
            next[j] = r.iter().zip(&g).map(|(t, v)| t * v).sum();
        }
        std::mem::swap(&mut g, &mut next);
    }
    g[0]
}

pub fn cylinder_sum_operator(
    alphabet: &Alphabet,
    m: usize,
    s: f64,
    start_degree: usize,
    tol: f64,
    max_degree: usize,
) -> Result<SumResult, PressureError> {
    if !s.is_finite() || s < 0.0 {
        return Err(PressureError::Domain(format!("exponent s = {s}")));
    }
    if m == 0 {
        return Ok(SumResult {
            value: 1.0,
            log_value: 0.0,
            method: SumMethod::OperatorIteration,
            certified_rel_error: 0.0,
        });
    }
    let mut degree = start_degree.max(8);
    let mut prev = value_at_degree(alphabet, m, s, degree);
    let mut last_step = f64::INFINITY;
    while degree * 2 <= max_degree {
        degree *= 2;
        let cur = value_at_degree(alphabet, m, s, degree);
        last_step = (cur - prev).abs() / cur.abs().max(f64::MIN_POSITIVE);
        if last_step <= tol {
            return Ok(SumResult {
                value: cur,
                log_value: cur.ln(),
                method: SumMethod::OperatorIteration,
                certified_rel_error: last_step.max(1e-14),
            });
        }
        prev = cur;
    }
    Err(PressureError::NonConvergence { last_step })
}
