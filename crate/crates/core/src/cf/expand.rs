//! Expansion of exact rationals and of reals given by rational enclosures.
//!
//! A rational's digits come from the Euclidean algorithm, which produces the
//! canonical expansion (final digit >= 2 except for the single-digit word of
//! x = 1/a, and x = 1 -> [1]). A real known only as an interval [lo, hi]
//! yields a digit exactly when the whole interval lies in one cylinder,
//! which happens exactly when the canonical expansions of both endpoints
//! agree through that digit; beyond the agreement the digits are not
//! certified and expansion stops.

use super::{CfError, Word};
use num::bigint::BigUint;
use num::rational::BigRational;
use num::traits::{Signed, ToPrimitive, Zero};

/// Streaming canonical digits of a rational in (0, 1].
pub struct RationalDigits {
    // Invariant: x = num/den with 0 < num <= den; den = 0 marks exhaustion.
    den: BigUint,
    num: BigUint,
}

impl RationalDigits {
    fn new_parts(num: BigUint, den: BigUint) -> Self {
        RationalDigits { den, num }
    }
}

impl Iterator for RationalDigits {
    type Item = Result<u64, CfError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.num.is_zero() {
            return None;
        }
        let (quot, rem) = num::integer::div_rem(self.den.clone(), self.num.clone());
        self.den = std::mem::replace(&mut self.num, rem);
        Some(quot.to_u64().ok_or(CfError::DigitOverflow))
    }
}

// Range tests on numerator and denominator only. Ratio's Ord recurses once
// per shared quotient of the two operands, which overflows the stack when
// enclosure endpoints agree to thousands of digits.
fn in_unit_interval(x: &BigRational) -> bool {
    x.numer().is_positive() && x.numer() <= x.denom()
}

/// Digit stream of a rational, validating 0 < x <= 1.
pub fn rational_digits(x: &BigRational) -> Result<RationalDigits, CfError> {
    if !in_unit_interval(x) {
        return Err(CfError::OutOfRange);
    }
    let num = x.numer().to_biguint().expect("positive");
    let den = x.denom().to_biguint().expect("positive");
    Ok(RationalDigits::new_parts(num, den))
}

/// Full canonical expansion of a rational, truncated at `max_digits`.
/// Terminating expansions return the complete (possibly shorter) word.
pub fn expand_rational(x: &BigRational, max_digits: usize) -> Result<Word, CfError> {
    let mut digits = Vec::new();
    for d in rational_digits(x)?.take(max_digits) {
        digits.push(d?);
    }
    Ok(Word::new(digits).expect("euclidean digits are positive"))
}

/// A real number pinned down to an exact rational interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Enclosure {
    lo: BigRational,
    hi: BigRational,
}

impl Enclosure {
    pub fn new(lo: BigRational, hi: BigRational) -> Result<Self, CfError> {
        if !in_unit_interval(&lo)
            || !in_unit_interval(&hi)
            || lo.numer() * hi.denom() > hi.numer() * lo.denom()
        {
            return Err(CfError::BadEnclosure);
        }
        Ok(Enclosure { lo, hi })
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    /// The digits shared by every point of the enclosure, at most `cap` of
    /// them. Stops at the first position where the endpoint expansions
    /// disagree or where one endpoint's expansion terminates.
    pub fn certified_prefix(&self, cap: usize) -> Vec<u64> {
        certified_common_digits(
            rational_digits(&self.lo).expect("validated"),
            rational_digits(&self.hi).expect("validated"),
            cap,
        )
    }

    /// Exactly `n` certified digits or a precision-exhausted error.
    pub fn expand(&self, n: usize) -> Result<Word, CfError> {
        let digits = self.certified_prefix(n);
        if digits.len() < n {
            return Err(CfError::PrecisionExhausted {
                certified: digits.len(),
                requested: n,
            });
        }
        Ok(Word::new(digits).expect("certified digits are positive"))
    }
}

pub(crate) fn certified_common_digits(
    mut lo: RationalDigits,
    mut hi: RationalDigits,
    cap: usize,
) -> Vec<u64> {
    let mut out = Vec::new();
    while out.len() < cap {
        match (lo.next(), hi.next()) {
            (Some(Ok(a)), Some(Ok(b))) if a == b => out.push(a),
            _ => break,
        }
    }
    out
}
