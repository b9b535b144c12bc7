//! Convergent recurrences. With seeds p0 = 0, q0 = 1, p_{-1} = 1, q_{-1} = 0,
//! pushing digit a maps (p', p) to (p, a*p + p') and likewise for q. The
//! determinant p_n q_{n-1} - p_{n-1} q_n alternates between -1 and +1.

use super::{CfError, Word};
use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvergentState {
    p_prev: BigUint,
    p: BigUint,
    q_prev: BigUint,
    q: BigUint,
    len: usize,
}

impl ConvergentState {
    /// State before any digit: (p_{-1}, p_0) = (1, 0), (q_{-1}, q_0) = (0, 1).
    pub fn initial() -> Self {
        ConvergentState {
            p_prev: BigUint::from(1u32),
            p: BigUint::from(0u32),
            q_prev: BigUint::from(0u32),
            q: BigUint::from(1u32),
            len: 0,
        }
    }

    pub fn push(&mut self, a: u64) -> Result<(), CfError> {
        if a == 0 {
            return Err(CfError::ZeroDigit { position: self.len });
        }
        let a = BigUint::from(a);
        let p_next = &a * &self.p + &self.p_prev;
        let q_next = &a * &self.q + &self.q_prev;
        self.p_prev = std::mem::replace(&mut self.p, p_next);
        self.q_prev = std::mem::replace(&mut self.q, q_next);
        self.len += 1;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn p_prev(&self) -> &BigUint {
        &self.p_prev
    }

    pub fn q_prev(&self) -> &BigUint {
        &self.q_prev
    }

    /// p_n / q_n as an exact rational (0/1 for the empty word).
    pub fn value(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.p.clone()),
            BigInt::from(self.q.clone()),
        )
    }

    /// p_n q_{n-1} - p_{n-1} q_n; always (-1)^(n+1) with these seeds.
    pub fn determinant(&self) -> BigInt {
        BigInt::from(&self.p * &self.q_prev) - BigInt::from(&self.p_prev * &self.q)
    }
}

/// States after each prefix of the word: the k-th entry holds (p_k, q_k).
pub fn convergents(word: &Word) -> Vec<ConvergentState> {
    let mut state = ConvergentState::initial();
    let mut out = Vec::with_capacity(word.len());
    for &a in word.digits() {
        state.push(a).expect("word digits are positive");
        out.push(state.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::traits::ToPrimitive;

    fn state_of(digits: &[u64]) -> ConvergentState {
        let mut s = ConvergentState::initial();
        for &a in digits {
            s.push(a).unwrap();
        }
        s
    }

    #[test]
    fn seeds_are_standard() {
        let s = ConvergentState::initial();
        assert_eq!(s.p().to_u64(), Some(0));
        assert_eq!(s.q().to_u64(), Some(1));
        assert_eq!(s.p_prev().to_u64(), Some(1));
        assert_eq!(s.q_prev().to_u64(), Some(0));
    }

    #[test]
    fn pi_tail_word_denominators() {
        // [7, 15, 1]: q_1 = 7, q_2 = 106, q_3 = 113, with p_3/q_3 = 16/113.
        let w = Word::new(vec![7, 15, 1]).unwrap();
        let states = convergents(&w);
        let qs: Vec<u64> = states.iter().map(|s| s.q().to_u64().unwrap()).collect();
        assert_eq!(qs, vec![7, 106, 113]);
        assert_eq!(states[2].p().to_u64(), Some(16));
    }

    #[test]
    fn all_ones_gives_fibonacci() {
        // q_n for [1,1,...,1] is the Fibonacci number F_{n+1}: 1,2,3,5,8,...
        let s = state_of(&[1, 1, 1, 1, 1]);
        assert_eq!(s.q().to_u64(), Some(8));
        assert_eq!(s.q_prev().to_u64(), Some(5));
    }

    #[test]
    fn determinant_alternates() {
        // p_1 q_0 - p_0 q_1 = 1, and each push flips the sign: (-1)^(n+1).
        let mut s = ConvergentState::initial();
        for (i, a) in [3u64, 7, 15, 1, 292, 1, 1].iter().enumerate() {
            s.push(*a).unwrap();
            let n = i + 1;
            let expect = if n % 2 == 0 { -1 } else { 1 };
            assert_eq!(s.determinant().to_i64(), Some(expect), "n = {n}");
        }
    }

    #[test]
    fn value_of_word() {
        let s = state_of(&[2, 2]);
        // [2,2] = 1/(2 + 1/2) = 2/5.
        assert_eq!(s.value(), BigRational::new(2.into(), 5.into()));
    }
}
