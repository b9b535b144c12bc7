//! Exhaustive cylinder sums from exact continuant tables.

use num::BigUint;

use super::{Alphabet, PressureError, SumMethod, SumResult};
use crate::numeric::{chunked_sum_map, ln_biguint, ln_biguint_abs_error};

/// ln q_m(w) for every word w in A^m, in canonical order: depth-first with
/// digits increasing at each position, i.e. lexicographic in the digit
/// sequences. The table for m = 0 is the single entry ln q(empty) = 0.
pub fn log_continuant_table(
    alphabet: &Alphabet,
    m: usize,
    budget: u128,
) -> Result<Vec<f64>, PressureError> {
    let needed = alphabet
        .word_count(m)
        .ok_or(PressureError::BudgetExceeded { needed: u128::MAX, budget })?;
    if needed > budget {
        return Err(PressureError::BudgetExceeded { needed, budget });
    }
    let mut out = Vec::with_capacity(needed as usize);
    let digits = alphabet.digits();
    descend(&digits, m, &BigUint::from(0u32), &BigUint::from(1u32), &mut out);
    Ok(out)
}

fn descend(digits: &[u64], left: usize, q_prev: &BigUint, q: &BigUint, out: &mut Vec<f64>) {
    if left == 0 {
        out.push(ln_biguint(q));
        return;
    }
    for &a in digits {
        let q_next = a * q + q_prev;
        descend(digits, left - 1, q, &q_next, out);
    }
}

/// Evaluates sum of exp(-2s * lq) over a log table, returning the sum and an
/// absolute error bound that accounts for the table entries' own rounding.
/// The summation order and chunking are fixed, so the result is reproducible
/// bit for bit regardless of thread count.
pub fn sum_from_log_table(table: &[f64], s: f64) -> (f64, f64) {
    let value = chunked_sum_map(table, |lq| (-2.0 * s * lq).exp());
    let err = chunked_sum_map(table, |lq| {
        let term = (-2.0 * s * lq).exp();
        term * (2.0 * s * ln_biguint_abs_error(lq) + 4.0 * f64::EPSILON)
    });
    (value, err)
}

pub fn cylinder_sum_enum(
    alphabet: &Alphabet,
    m: usize,
    s: f64,
    budget: u128,
) -> Result<SumResult, PressureError> {
    if !s.is_finite() || s < 0.0 {
        return Err(PressureError::Domain(format!("exponent s = {s}")));
    }
    let table = log_continuant_table(alphabet, m, budget)?;
    let (value, err) = sum_from_log_table(&table, s);
    Ok(SumResult {
        value,
        log_value: value.ln(),
        method: SumMethod::Enumeration,
        certified_rel_error: err / value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::convergents;
    use crate::cf::Word;

    #[test]
    fn table_matches_direct_recurrence() {
        let a = Alphabet::explicit(vec![1, 3]).unwrap();
        let table = log_continuant_table(&a, 3, 1 << 20).unwrap();
        assert_eq!(table.len(), 8);
        // Odometer over {1,3}^3 in the same lexicographic order.
        let mut expected = Vec::new();
        for &x in &[1u64, 3] {
            for &y in &[1u64, 3] {
                for &z in &[1u64, 3] {
                    let w = Word::new(vec![x, y, z]).unwrap();
                    let q = convergents(&w).last().unwrap().q().clone();
                    expected.push(ln_biguint(&q));
                }
            }
        }
        assert_eq!(table, expected);
    }

    #[test]
    fn empty_word_table() {
        let a = Alphabet::range(5).unwrap();
        assert_eq!(log_continuant_table(&a, 0, 10).unwrap(), vec![0.0]);
    }

    #[test]
    fn budget_is_enforced() {
        let a = Alphabet::range(10).unwrap();
        let err = log_continuant_table(&a, 5, 99_999).unwrap_err();
        assert_eq!(
            err,
            PressureError::BudgetExceeded { needed: 100_000, budget: 99_999 }
        );
    }

    #[test]
    fn sum_over_pairs_from_first_principles() {
        // {1,2}^2 has continuants q([a,b]) = a*b + 1: 2, 3, 3, 5.
        let a = Alphabet::explicit(vec![1, 2]).unwrap();
        let s = 0.7;
        let got = cylinder_sum_enum(&a, 2, s, 100).unwrap();
        let expected = 2f64.powf(-2.0 * s)
            + 2.0 * 3f64.powf(-2.0 * s)
            + 5f64.powf(-2.0 * s);
        assert!((got.value - expected).abs() <= 1e-14 * expected);
        assert!(got.certified_rel_error < 1e-12);
        assert_eq!(got.method, SumMethod::Enumeration);
    }

    #[test]
    fn single_digit_alphabet_gives_fibonacci_power() {
        // Words of all ones: q_5 = 8, so the sum is 8^(-2s).
        let a = Alphabet::range(1).unwrap();
        let got = cylinder_sum_enum(&a, 5, 0.6, 10).unwrap();
        let expected = 8f64.powf(-1.2);
        assert!((got.value - expected).abs() <= 1e-15);
    }

    #[test]
    fn zero_exponent_counts_words() {
        let a = Alphabet::range(3).unwrap();
        let got = cylinder_sum_enum(&a, 4, 0.0, 100).unwrap();
        assert_eq!(got.value, 81.0);
    }
}
