//! Small numeric helpers shared across modules: compensated summation,
//! logarithms of big integers, and geometric-sequence extrapolation.

use num::bigint::BigUint;
use num::traits::ToPrimitive;

/// Neumaier-compensated accumulator. Adding the same values in the same
/// order always produces the same bits, and the compensation keeps the
/// result within a few ulps of the exact sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompSum {
    sum: f64,
    comp: f64,
}

impl CompSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another accumulator in, preserving determinism as long as the
    /// merge order is fixed by the caller.
    pub fn merge(&mut self, other: CompSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sums a slice in fixed-size chunks: each chunk is accumulated left to
/// right, chunk totals are folded in chunk order. The chunking is part of
/// the definition of the result, so parallel callers that evaluate chunks
/// independently and fold them in order reproduce the sequential bits.
pub const SUM_CHUNK: usize = 4096;

pub fn chunked_sum(values: &[f64]) -> f64 {
    chunked_sum_map(values, |v| v)
}

/// Same contract as [`chunked_sum`] with a per-element transform applied on
/// the fly, so large term vectors never need to be materialized.
pub fn chunked_sum_map<F>(values: &[f64], f: F) -> f64
where
    F: Fn(f64) -> f64 + Sync,
{
    use rayon::prelude::*;
    let partials: Vec<CompSum> = values
        .par_chunks(SUM_CHUNK)
        .map(|chunk| {
            let mut acc = CompSum::new();
            for &v in chunk {
                acc.add(f(v));
            }
            acc
        })
        .collect();
    let mut total = CompSum::new();
    for p in partials {
        total.merge(p);
    }
    total.value()
}

/// Parallel max of `f` over an index range. Reusable per-thread scratch is
/// handed to `f`; the reduction is a plain f64 max, which is associative and
/// commutative, so the result does not depend on the work split.
pub fn parallel_max<T, F>(range: std::ops::Range<usize>, f: F) -> f64
where
    T: Default + Send,
    F: Fn(usize, &mut T) -> f64 + Sync + Send,
{
    use rayon::prelude::*;
    range
        .into_par_iter()
        .map_init(T::default, |scratch, i| f(i, scratch))
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

/// Natural log of a positive big integer, accurate to a few ulps: the top
/// 53 bits give the mantissa, the discarded bits contribute an exponent.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 53 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_f64().expect("53-bit prefix fits");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Relative-error style bound for `ln_biguint` (absolute error on the log).
pub fn ln_biguint_abs_error(ln_value: f64) -> f64 {
    (1.0 + ln_value.abs()) * 4.0 * f64::EPSILON
}

/// Aitken Δ² extrapolation of a geometrically converging sequence from its
/// last three terms. Returns `None` when the second difference is too small
/// to divide by, which callers treat as "already converged".
pub fn aitken(s0: f64, s1: f64, s2: f64) -> Option<f64> {
    let d1 = s2 - s1;
    let d2 = s2 - 2.0 * s1 + s0;
    let scale = s0.abs().max(s1.abs()).max(s2.abs()).max(1e-300);
    if d2.abs() <= 1e-12 * scale {
        return None;
    }
    let out = s2 - d1 * d1 / d2;
    if out.is_finite() {
        Some(out)
    } else {
        None
    }
}
