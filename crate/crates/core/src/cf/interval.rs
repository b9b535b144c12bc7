//! Cylinders and fundamental intervals as exact rational intervals.

use super::{CfError, ConvergentState, Word};
use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;

fn ratio(n: BigUint, d: BigUint) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// The set of points whose expansion starts with a fixed word. For a word of
/// even length it is [p/q, (p+p')/(q+q')), for odd length ((p+p')/(q+q'), p/q];
/// either way the closed end is the word's own value p/q.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderInterval {
    word: Word,
    lo: BigRational,
    hi: BigRational,
    /// true when the left endpoint belongs to the cylinder (even word length).
    lo_closed: bool,
    q: BigUint,
    q_prev: BigUint,
}

impl CylinderInterval {
    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn lo_closed(&self) -> bool {
        self.lo_closed
    }

    pub fn hi_closed(&self) -> bool {
        !self.lo_closed
    }

    /// Exact length 1/(q_n (q_n + q_{n-1})).
    pub fn length(&self) -> BigRational {
        let d = &self.q * (&self.q + &self.q_prev);
        ratio(BigUint::from(1u32), d)
    }

    /// Closure containment test, the useful notion for nesting checks since
    /// boundary points carry no measure.
    pub fn closure_contains(&self, other: &CylinderInterval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Whether a point lies in the half-open interval with the stated ends.
    pub fn contains(&self, x: &BigRational) -> bool {
        let above = if self.lo_closed { *x >= self.lo } else { *x > self.lo };
        let below = if self.lo_closed { *x < self.hi } else { *x <= self.hi };
        above && below
    }
}

pub fn cylinder(word: &Word) -> Result<CylinderInterval, CfError> {
    if word.is_empty() {
        return Err(CfError::EmptyWord);
    }
    let mut state = ConvergentState::initial();
    for &a in word.digits() {
        state.push(a)?;
    }
    let value = ratio(state.p().clone(), state.q().clone());
    let mediant = ratio(
        state.p() + state.p_prev(),
        state.q() + state.q_prev(),
    );
    let even = word.len() % 2 == 0;
    let (lo, hi) = if even {
        (value, mediant)
    } else {
        (mediant, value)
    };
    debug_assert!(lo < hi);
    Ok(CylinderInterval {
        word: word.clone(),
        lo,
        hi,
        lo_closed: even,
        q: state.q().clone(),
        q_prev: state.q_prev().clone(),
    })
}

/// Union of the closures of the one-digit extensions of `base` with next
/// digit running over [lo_digit, hi_digit]. Always a closed interval: the
/// extensions are adjacent and share endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct FundamentalInterval {
    base: Word,
    next_lo: u64,
    next_hi: u64,
    lo: BigRational,
    hi: BigRational,
    q: BigUint,
    q_prev: BigUint,
}

impl FundamentalInterval {
    pub fn base(&self) -> &Word {
        &self.base
    }

    pub fn digit_range(&self) -> (u64, u64) {
        (self.next_lo, self.next_hi)
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    /// Exact length (hi - lo + 1) / (((hi+1) q + q') (lo q + q')) where q, q'
    /// are the base word's last two denominators.
    pub fn length(&self) -> BigRational {
        let count = BigUint::from(self.next_hi - self.next_lo + 1);
        let far = (BigUint::from(self.next_hi) + 1u32) * &self.q + &self.q_prev;
        let near = BigUint::from(self.next_lo) * &self.q + &self.q_prev;
        ratio(count, far * near)
    }
}

pub fn fundamental_interval(
    base: &Word,
    next_lo: u64,
    next_hi: u64,
) -> Result<FundamentalInterval, CfError> {
    if next_lo == 0 {
        return Err(CfError::ZeroDigit { position: base.len() });
    }
    if next_hi < next_lo {
        return Err(CfError::EmptyRange { lo: next_lo, hi: next_hi });
    }
    let mut state = ConvergentState::initial();
    for &a in base.digits() {
        state.push(a)?;
    }
    // Endpoints are the values of base extended by next_lo and by next_hi + 1.
    let end_near = {
        let d = BigUint::from(next_lo);
        ratio(&d * state.p() + state.p_prev(), &d * state.q() + state.q_prev())
    };
    let end_far = {
        let d = BigUint::from(next_hi) + BigUint::from(1u32);
        ratio(&d * state.p() + state.p_prev(), &d * state.q() + state.q_prev())
    };
    let (lo, hi) = if end_near < end_far {
        (end_near, end_far)
    } else {
        (end_far, end_near)
    };
    debug_assert!(lo < hi);
    Ok(FundamentalInterval {
        base: base.clone(),
        next_lo,
        next_hi,
        lo,
        hi,
        q: state.q().clone(),
        q_prev: state.q_prev().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn word(digits: &[u64]) -> Word {
        Word::new(digits.to_vec()).unwrap()
    }

    #[test]
    fn cylinder_of_single_digits() {
        // floor(1/x) = 1 exactly on (1/2, 1]; = 2 exactly on (1/3, 1/2].
        let c1 = cylinder(&word(&[1])).unwrap();
        assert_eq!((c1.lo(), c1.hi()), (&rat(1, 2), &rat(1, 1)));
        assert!(!c1.lo_closed() && c1.hi_closed());

        let c2 = cylinder(&word(&[2])).unwrap();
        assert_eq!((c2.lo(), c2.hi()), (&rat(1, 3), &rat(1, 2)));
        assert!(!c2.lo_closed());
        assert!(c2.contains(&rat(1, 2)));
        assert!(!c2.contains(&rat(1, 3)));
    }

    #[test]
    fn cylinder_even_length_is_left_closed() {
        let c = cylinder(&word(&[1, 1])).unwrap();
        assert_eq!((c.lo(), c.hi()), (&rat(1, 2), &rat(2, 3)));
        assert!(c.lo_closed() && !c.hi_closed());
    }

    #[test]
    fn cylinder_length_formula() {
        // [2]: 1/(q(q+q')) = 1/(2*3) = 1/6 = |1/2 - 1/3|.
        let c = cylinder(&word(&[2])).unwrap();
        assert_eq!(c.length(), rat(1, 6));
        assert_eq!(c.length(), c.hi() - c.lo());
        let c = cylinder(&word(&[3, 2, 5])).unwrap();
        assert_eq!(c.length(), c.hi() - c.lo());
    }

    #[test]
    fn empty_word_is_rejected() {
        assert_eq!(cylinder(&Word::empty()), Err(CfError::EmptyWord));
    }

    #[test]
    fn fundamental_interval_root_range() {
        // Base empty word, digits 1..=M: length M/(M+1).
        let j = fundamental_interval(&Word::empty(), 1, 5).unwrap();
        assert_eq!(j.length(), rat(5, 6));
        assert_eq!(j.lo(), &rat(1, 6));
        assert_eq!(j.hi(), &rat(1, 1));
    }

    #[test]
    fn fundamental_interval_matches_cylinder_union() {
        // Base (1), digits 2..4: spans the closures of [1,2], [1,3], [1,4].
        let base = word(&[1]);
        let j = fundamental_interval(&base, 2, 4).unwrap();
        let mut lo: Option<BigRational> = None;
        let mut hi: Option<BigRational> = None;
        let mut total = rat(0, 1);
        for a in 2..=4u64 {
            let c = cylinder(&base.extended(a).unwrap()).unwrap();
            total += c.length();
            lo = Some(match lo {
                None => c.lo().clone(),
                Some(v) => v.min(c.lo().clone()),
            });
            hi = Some(match hi {
                None => c.hi().clone(),
                Some(v) => v.max(c.hi().clone()),
            });
        }
        // Adjacent cylinders share closure endpoints, so the union is an
        // interval and lengths add up.
        assert_eq!(j.lo(), &lo.unwrap());
        assert_eq!(j.hi(), &hi.unwrap());
        assert_eq!(j.length(), total);
        assert_eq!(j.length(), j.hi() - j.lo());
    }

    #[test]
    fn fundamental_interval_rejects_bad_ranges() {
        assert!(matches!(
            fundamental_interval(&Word::empty(), 0, 3),
            Err(CfError::ZeroDigit { .. })
        ));
        assert_eq!(
            fundamental_interval(&Word::empty(), 4, 2),
            Err(CfError::EmptyRange { lo: 4, hi: 2 })
        );
    }
}
