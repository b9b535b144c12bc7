//! Finite-level pressure sums and the root solvers built on them.
//!
//! The central quantity is the cylinder sum over all words of a fixed
//! length with digits in a finite alphabet,
//!
//! ```text
//!     S(A, m, s) = sum over w in A^m of q_m(w)^(-2s),
//! ```
//!
//! computed either by exhaustive enumeration (exact denominators, logs
//! accumulated with compensated summation in a fixed order) or by iterating
//! the weighted transfer operator on a Chebyshev grid, which costs
//! polynomially in m instead of |A|^m. A defect function compares the sum
//! against a growth penalty `B^(coeff(s) * n)`; its sign change in s is the
//! finite-level dimension value, and Aitken extrapolation in word length and
//! alphabet size estimates the limit.

mod enumerate;
mod operator;
mod solver;

pub use enumerate::{cylinder_sum_enum, log_continuant_table, sum_from_log_table};
pub use operator::cylinder_sum_operator;
pub use solver::{
    EstimateDiagnostics, PerAlphabetLimit, Potential, PressureEstimate, PressureQuery,
    PressureSolver, SolverConfig, TableauCell,
};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PressureError {
    #[error("alphabet must be a non-empty set of positive digits")]
    EmptyAlphabet,
    #[error("alphabet contains digit 0")]
    ZeroAlphabetDigit,
    #[error("enumeration over {needed} words exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("operator iteration did not converge in degree (last relative step {last_step:e})")]
    NonConvergence { last_step: f64 },
    #[error("defect has no sign change on [{lo}, {hi}] (values {f_lo:e}, {f_hi:e})")]
    BracketFailure { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("growth base B must satisfy B > 1 for root finding (got {b})")]
    BadBase { b: f64 },
    #[error("parameter out of domain: {0}")]
    Domain(String),
}

/// A finite set of admissible partial quotients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Alphabet {
    /// {1, 2, ..., M}.
    Range(u64),
    /// Explicit sorted digit set.
    Explicit(Vec<u64>),
}

impl Alphabet {
    pub fn range(max: u64) -> Result<Self, PressureError> {
        if max == 0 {
            return Err(PressureError::EmptyAlphabet);
        }
        Ok(Alphabet::Range(max))
    }

    pub fn explicit(mut digits: Vec<u64>) -> Result<Self, PressureError> {
        if digits.is_empty() {
            return Err(PressureError::EmptyAlphabet);
        }
        if digits.iter().any(|&a| a == 0) {
            return Err(PressureError::ZeroAlphabetDigit);
        }
        digits.sort_unstable();
        digits.dedup();
        Ok(Alphabet::Explicit(digits))
    }

    pub fn len(&self) -> usize {
        match self {
            Alphabet::Range(m) => *m as usize,
            Alphabet::Explicit(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Digits in increasing order; this order fixes every traversal.
    pub fn iter(&self) -> Box<dyn Iterator<Item = u64> + '_> {
        match self {
            Alphabet::Range(m) => Box::new(1..=*m),
            Alphabet::Explicit(d) => Box::new(d.iter().copied()),
        }
    }

    pub fn digits(&self) -> Vec<u64> {
        self.iter().collect()
    }

    /// |A|^m, or None on overflow past u128.
    pub fn word_count(&self, m: usize) -> Option<u128> {
        let base = self.len() as u128;
        let mut out: u128 = 1;
        for _ in 0..m {
            out = out.checked_mul(base)?;
        }
        Some(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SumMethod {
    Enumeration,
    OperatorIteration,
}

/// A cylinder sum together with how it was produced and a conservative
/// relative error bound for the floating-point evaluation.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SumResult {
    pub value: f64,
    pub log_value: f64,
    pub method: SumMethod,
    pub certified_rel_error: f64,
}
