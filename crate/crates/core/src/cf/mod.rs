//! Exact continued-fraction arithmetic.
//!
//! Everything here is big-integer or big-rational; no floating point. A
//! *word* is a finite block of partial quotients, a *cylinder* is the set of
//! points whose expansion starts with a given word, and a *fundamental
//! interval* is the union of the closures of a word's one-digit extensions
//! over a contiguous digit range.

mod convergents;
mod expand;
mod interval;

pub use convergents::{convergents, ConvergentState};
pub use expand::{expand_rational, rational_digits, Enclosure};
pub use interval::{cylinder, fundamental_interval, CylinderInterval, FundamentalInterval};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CfError {
    #[error("partial quotients must be positive (digit at position {position} is zero)")]
    ZeroDigit { position: usize },
    #[error("cylinder of the empty word is the whole unit interval; give at least one digit")]
    EmptyWord,
    #[error("digit range [{lo}, {hi}] is empty")]
    EmptyRange { lo: u64, hi: u64 },
    #[error("input must lie in (0, 1]")]
    OutOfRange,
    #[error("enclosure endpoints must satisfy 0 < lo <= hi <= 1")]
    BadEnclosure,
    #[error("enclosure only certifies {certified} digits, {requested} requested")]
    PrecisionExhausted { certified: usize, requested: usize },
    #[error("certified digit exceeds u64 range")]
    DigitOverflow,
    #[error("index gap d must be positive")]
    ZeroGap,
}

/// A finite block of partial quotients, all >= 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Word(Vec<u64>);

impl Word {
    pub fn new(digits: Vec<u64>) -> Result<Self, CfError> {
        if let Some(position) = digits.iter().position(|&a| a == 0) {
            return Err(CfError::ZeroDigit { position });
        }
        Ok(Word(digits))
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn digits(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The word with one more digit appended.
    pub fn extended(&self, a: u64) -> Result<Self, CfError> {
        if a == 0 {
            return Err(CfError::ZeroDigit { position: self.0.len() });
        }
        let mut d = self.0.clone();
        d.push(a);
        Ok(Word(d))
    }
}

impl std::fmt::Display for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

/// The arithmetic progression of indices `f(n) = d*n + t` that selects which
/// partial quotients enter a product of length n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LinearIndex {
    d: u64,
    t: u64,
}

impl LinearIndex {
    pub fn new(d: u64, t: u64) -> Result<Self, CfError> {
        if d == 0 {
            return Err(CfError::ZeroGap);
        }
        Ok(LinearIndex { d, t })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    /// f(n) = d*n + t.
    pub fn apply(&self, n: u64) -> u64 {
        self.d * n + self.t
    }
}

impl Default for LinearIndex {
    fn default() -> Self {
        LinearIndex { d: 1, t: 0 }
    }
}
