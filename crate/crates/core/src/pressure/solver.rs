//! Defect evaluation, bisection roots, and two-axis extrapolation.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use super::enumerate::{log_continuant_table, sum_from_log_table};
use super::operator::cylinder_sum_operator;
use super::{Alphabet, PressureError, SumMethod, SumResult};
use crate::cf::LinearIndex;
use crate::cover::f_value;
use crate::numeric::aitken;

#[derive(Clone, Debug, Serialize)]
pub struct SolverConfig {
    /// Hard cap on words enumerated for a single sum.
    pub enum_budget: u128,
    /// Word counts up to this build a cached log-continuant table; above it
    /// the operator method is used.
    pub table_cap: u128,
    pub operator_start_degree: usize,
    pub operator_max_degree: usize,
    pub operator_tol: f64,
    pub bisect_tol: f64,
    /// Upper end of the root bracket; the defect is already negative at
    /// s = 1 for any B > 1, so this only needs headroom above 1.
    pub bracket_max: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            enum_budget: 10_000_000,
            table_cap: 2_000_000,
            operator_start_degree: 16,
            operator_max_degree: 1024,
            operator_tol: 1e-11,
            bisect_tol: 1e-12,
            bracket_max: 1.5,
        }
    }
}

/// Which partition sum and growth penalty the defect compares.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Potential {
    /// Words of length f(n) = d n + t against B^((2s-1) d n). Note t enters
    /// the word length but not the penalty exponent.
    GapProduct { index: LinearIndex },
    /// Words of length n against B^(f_m(s) n).
    IteratedProduct { m: usize },
}

impl Potential {
    pub fn word_length(&self, n: u64) -> u64 {
        match self {
            Potential::GapProduct { index } => index.apply(n),
            Potential::IteratedProduct { .. } => n,
        }
    }

    fn growth_coeff(&self, s: f64, n: u64) -> f64 {
        match self {
            Potential::GapProduct { index } => (2.0 * s - 1.0) * index.d() as f64 * n as f64,
            Potential::IteratedProduct { m } => f_value(s, *m) * n as f64,
        }
    }
}

/// One defect evaluation: alphabet, depth, growth base, index map, and the
/// exponent s being probed.
#[derive(Clone, Debug, Serialize)]
pub struct PressureQuery {
    pub alphabet: Alphabet,
    pub n: u64,
    pub b: f64,
    pub index: LinearIndex,
    pub s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableauCell {
    pub alphabet_max: u64,
    pub n: u64,
    pub word_length: u64,
    pub root: f64,
    pub method: SumMethod,
}

#[derive(Clone, Debug, Serialize)]
pub struct PerAlphabetLimit {
    pub alphabet_max: u64,
    pub limit: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateDiagnostics {
    pub tableau: Vec<TableauCell>,
    pub per_alphabet: Vec<PerAlphabetLimit>,
    pub alphabet_residual: f64,
    /// Roots must not decrease when the alphabet grows (set inclusion);
    /// false flags a numerical problem.
    pub monotone_in_alphabet: bool,
    /// Whether each fixed-alphabet row is monotone in n. Informational: no
    /// direction is guaranteed.
    pub monotone_in_n: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PressureEstimate {
    pub value: f64,
    /// Heuristic band from the extrapolation residuals; not a certified
    /// error bound.
    pub uncertainty: f64,
    pub diagnostics: EstimateDiagnostics,
}

pub struct PressureSolver {
    cfg: SolverConfig,
    tables: Mutex<BTreeMap<(Alphabet, usize), Arc<Vec<f64>>>>,
}

impl Default for PressureSolver {
    fn default() -> Self {
        PressureSolver::new(SolverConfig::default())
    }
}

impl PressureSolver {
    pub fn new(cfg: SolverConfig) -> Self {
        PressureSolver { cfg, tables: Mutex::new(BTreeMap::new()) }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    fn method_for(&self, alphabet: &Alphabet, len: usize) -> SumMethod {
        match alphabet.word_count(len) {
            Some(c) if c <= self.cfg.table_cap => SumMethod::Enumeration,
            _ => SumMethod::OperatorIteration,
        }
    }

    fn table(&self, alphabet: &Alphabet, len: usize) -> Result<Arc<Vec<f64>>, PressureError> {
        let key = (alphabet.clone(), len);
        let mut cache = self.tables.lock().expect("table cache poisoned");
        if let Some(t) = cache.get(&key) {
            return Ok(Arc::clone(t));
        }
        let t = Arc::new(log_continuant_table(alphabet, len, self.cfg.enum_budget)?);
        cache.insert(key, Arc::clone(&t));
        Ok(t)
    }

    /// Cylinder sum routed by size: cached enumeration when the word count
    /// is small, operator iteration otherwise.
    pub fn sum(&self, alphabet: &Alphabet, len: usize, s: f64) -> Result<SumResult, PressureError> {
        match self.method_for(alphabet, len) {
            SumMethod::Enumeration => {
                let table = self.table(alphabet, len)?;
                let (value, err) = sum_from_log_table(&table, s);
                Ok(SumResult {
                    value,
                    log_value: value.ln(),
                    method: SumMethod::Enumeration,
                    certified_rel_error: err / value,
                })
            }
            SumMethod::OperatorIteration => cylinder_sum_operator(
                alphabet,
                len,
                s,
                self.cfg.operator_start_degree,
                self.cfg.operator_tol,
                self.cfg.operator_max_degree,
            ),
        }
    }

    fn log_defect(
        &self,
        alphabet: &Alphabet,
        potential: Potential,
        n: u64,
        b: f64,
        s: f64,
    ) -> Result<f64, PressureError> {
        let len = potential.word_length(n) as usize;
        let sum = self.sum(alphabet, len, s)?;
        Ok(sum.log_value - potential.growth_coeff(s, n) * b.ln())
    }

    /// (cylinder sum) * B^(-(2s-1) d n) - 1; strictly decreasing in s.
    pub fn defect(&self, query: &PressureQuery) -> Result<f64, PressureError> {
        if !(query.b > 1.0) {
            return Err(PressureError::BadBase { b: query.b });
        }
        if !(0.0 < query.s && query.s <= 1.0) {
            return Err(PressureError::Domain(format!(
                "query exponent s = {} outside (0, 1]",
                query.s
            )));
        }
        if query.n == 0 {
            return Err(PressureError::Domain("depth n must be positive".into()));
        }
        let pot = Potential::GapProduct { index: query.index };
        Ok(self
            .log_defect(&query.alphabet, pot, query.n, query.b, query.s)?
            .exp_m1())
    }

    /// Bisection root of the defect on [0, bracket_max].
    pub fn potential_root(
        &self,
        alphabet: &Alphabet,
        potential: Potential,
        n: u64,
        b: f64,
        tol: f64,
    ) -> Result<f64, PressureError> {
        if !(b > 1.0) {
            return Err(PressureError::BadBase { b });
        }
        if !(tol > 0.0) || n == 0 {
            return Err(PressureError::Domain("need tol > 0 and n >= 1".into()));
        }
        let mut lo = 0.0f64;
        let mut hi = self.cfg.bracket_max;
        let f_lo = self.log_defect(alphabet, potential, n, b, lo)?;
        let f_hi = self.log_defect(alphabet, potential, n, b, hi)?;
        if f_lo < 0.0 || f_hi >= 0.0 {
            return Err(PressureError::BracketFailure { lo, hi, f_lo, f_hi });
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.log_defect(alphabet, potential, n, b, mid)? >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    pub fn s_b_finite(
        &self,
        alphabet_max: u64,
        n: u64,
        b: f64,
        index: LinearIndex,
        tol: f64,
    ) -> Result<f64, PressureError> {
        let alphabet = Alphabet::range(alphabet_max)?;
        self.potential_root(&alphabet, Potential::GapProduct { index }, n, b, tol)
    }

    /// Tableau of roots over alphabets {1..a} x depths 1..n_max, extrapolated
    /// first in n within each alphabet, then in alphabet size.
    pub fn potential_estimate(
        &self,
        potential: Potential,
        b: f64,
        alphabet_max: u64,
        n_max: u64,
        tol: f64,
    ) -> Result<PressureEstimate, PressureError> {
        if alphabet_max == 0 || n_max == 0 {
            return Err(PressureError::Domain("need alphabet_max >= 1, n_max >= 1".into()));
        }
        let mut tableau = Vec::new();
        let mut per_alphabet = Vec::new();
        let mut limits = Vec::new();
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for a_max in 1..=alphabet_max {
            let alphabet = Alphabet::range(a_max)?;
            let mut roots = Vec::with_capacity(n_max as usize);
            for n in 1..=n_max {
                let root = self.potential_root(&alphabet, potential, n, b, tol)?;
                let word_length = potential.word_length(n);
                tableau.push(TableauCell {
                    alphabet_max: a_max,
                    n,
                    word_length,
                    root,
                    method: self.method_for(&alphabet, word_length as usize),
                });
                roots.push(root);
            }
            let (limit, residual) = extrapolate(&roots);
            per_alphabet.push(PerAlphabetLimit { alphabet_max: a_max, limit, residual });
            limits.push(limit);
            rows.push(roots);
        }
        let (value, alphabet_residual) = extrapolate(&limits);
        let n_residual = per_alphabet.last().map(|p| p.residual).unwrap_or(0.0);
        let uncertainty = n_residual + alphabet_residual + tol;

        let slack = 1e-9;
        let n_cols = n_max as usize;
        let monotone_in_alphabet = (0..n_cols).all(|j| {
            rows.windows(2).all(|w| w[1][j] >= w[0][j] - slack)
        });
        let monotone_in_n = rows.iter().all(|row| {
            row.windows(2).all(|w| w[1] >= w[0] - slack)
                || row.windows(2).all(|w| w[1] <= w[0] + slack)
        });

        Ok(PressureEstimate {
            value,
            uncertainty,
            diagnostics: EstimateDiagnostics {
                tableau,
                per_alphabet,
                alphabet_residual,
                monotone_in_alphabet,
                monotone_in_n,
            },
        })
    }

    pub fn s_b_estimate(
        &self,
        b: f64,
        index: LinearIndex,
        alphabet_max: u64,
        n_max: u64,
        tol: f64,
    ) -> Result<PressureEstimate, PressureError> {
        if alphabet_max < 2 || n_max < 2 {
            return Err(PressureError::Domain(
                "estimate needs alphabet_max >= 2 and n_max >= 2".into(),
            ));
        }
        self.potential_estimate(Potential::GapProduct { index }, b, alphabet_max, n_max, tol)
    }
}

/// Extrapolation only makes sense while the window differences contract;
/// small depths show parity oscillations in log q_n that send the geometric
/// model the wrong way.
fn guarded_aitken(s0: f64, s1: f64, s2: f64) -> Option<f64> {
    let d0 = s1 - s0;
    let d1 = s2 - s1;
    if d1.abs() >= d0.abs() {
        return None;
    }
    aitken(s0, s1, s2)
}

/// Limit of a sequence by geometric-model extrapolation of the last three
/// terms, stabilized against the window one step earlier. The residual is
/// the size of the final correction plus the window sensitivity; when the
/// true tail is slower than geometric this is the scale of the remaining
/// error, not a bound below it.
fn extrapolate(seq: &[f64]) -> (f64, f64) {
    match seq.len() {
        0 => (f64::NAN, f64::INFINITY),
        1 => (seq[0], 0.0),
        2 => (seq[1], (seq[1] - seq[0]).abs()),
        len => {
            let last = seq[len - 1];
            let cur = guarded_aitken(seq[len - 3], seq[len - 2], last);
            let prev = if len >= 4 {
                guarded_aitken(seq[len - 4], seq[len - 3], seq[len - 2])
            } else {
                None
            };
            match (cur, prev) {
                (Some(a), Some(p)) => (a, (a - last).abs() + (a - p).abs()),
                (Some(a), None) => (a, 2.0 * (a - last).abs()),
                (None, _) => {
                    let d1 = (last - seq[len - 2]).abs();
                    let d0 = (seq[len - 2] - seq[len - 3]).abs();
                    (last, d0 + d1)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(d: u64, t: u64) -> LinearIndex {
        LinearIndex::new(d, t).unwrap()
    }

    fn solver() -> PressureSolver {
        PressureSolver::default()
    }

    #[test]
    fn closed_form_root_five_sixteenths() {
        // Single-word alphabet {1}: q_5 = 8 = 2^3, so the defect vanishes at
        // 2s*3 log2 + (2s-1)*5 log2 = 0, i.e. s = 5/16.
        let s = solver();
        let root = s.s_b_finite(1, 5, 2.0, idx(1, 0), 1e-12).unwrap();
        assert!((root - 5.0 / 16.0).abs() < 1e-10, "{root}");
    }

    #[test]
    fn closed_form_root_general_single_word() {
        // Alphabet {1}, n=7, d=2, t=1: word length 15, q_15 = Fib(16) = 987,
        // root solves 2s ln 987 = (1-2s) * 14 ln 3... rearranged below.
        let s = solver();
        let root = s.s_b_finite(1, 7, 3.0, idx(2, 1), 1e-12).unwrap();
        let expected = 14.0 * 3f64.ln() / (2.0 * 987f64.ln() + 28.0 * 3f64.ln());
        assert!((root - expected).abs() < 1e-10, "{root} vs {expected}");
    }

    #[test]
    fn defect_values_and_monotonicity() {
        let s = solver();
        let q = |sv: f64| PressureQuery {
            alphabet: Alphabet::range(1).unwrap(),
            n: 5,
            b: 2.0,
            index: idx(1, 0),
            s: sv,
        };
        // At s = 1/2 the penalty term vanishes: defect = 1/8 - 1.
        let at_half = s.defect(&q(0.5)).unwrap();
        assert!((at_half - (1.0 / 8.0 - 1.0)).abs() < 1e-12);
        let at_root = s.defect(&q(5.0 / 16.0)).unwrap();
        assert!(at_root.abs() < 1e-9);
        let mut prev = f64::INFINITY;
        for i in 1..=20 {
            let v = s.defect(&q(i as f64 / 20.0)).unwrap();
            assert!(v < prev, "defect must strictly decrease");
            prev = v;
        }
    }

    #[test]
    fn defect_domain_checks() {
        let s = solver();
        let mut q = PressureQuery {
            alphabet: Alphabet::range(2).unwrap(),
            n: 3,
            b: 1.0,
            index: idx(1, 0),
            s: 0.7,
        };
        assert!(matches!(s.defect(&q), Err(PressureError::BadBase { .. })));
        q.b = 2.0;
        q.s = 1.2;
        assert!(matches!(s.defect(&q), Err(PressureError::Domain(_))));
    }

    #[test]
    fn root_decreasing_in_base() {
        let s = solver();
        let roots: Vec<f64> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&b| s.s_b_finite(2, 3, b, idx(1, 0), 1e-12).unwrap())
            .collect();
        assert!(roots[0] > roots[1] && roots[1] > roots[2], "{roots:?}");
    }

    #[test]
    fn root_increasing_in_alphabet() {
        let s = solver();
        let mut prev = 0.0;
        for m in 1..=6 {
            let root = s.s_b_finite(m, 3, 2.0, idx(1, 0), 1e-12).unwrap();
            assert!(root > prev, "alphabet {{1..{m}}}: {root} <= {prev}");
            prev = root;
        }
    }

    #[test]
    fn roots_stay_in_expected_band() {
        let s = solver();
        for (m, n) in [(1u64, 3u64), (4, 4), (8, 6)] {
            for &b in &[1.1, 64.0] {
                let root = s.s_b_finite(m, n, b, idx(1, 0), 1e-10).unwrap();
                assert!(root > 0.0 && root < 1.2, "m={m} n={n} b={b}: {root}");
            }
        }
        // Multi-digit alphabets keep the root above 1/2 even for large B.
        let r = s.s_b_finite(2, 4, 64.0, idx(1, 0), 1e-10).unwrap();
        assert!(r > 0.5, "{r}");
    }

    #[test]
    fn operator_route_agrees_with_enumeration_route() {
        let enum_solver = solver();
        let op_solver = PressureSolver::new(SolverConfig {
            table_cap: 0,
            ..SolverConfig::default()
        });
        for &(m, n) in &[(3u64, 4u64), (2, 5)] {
            let a = enum_solver.s_b_finite(m, n, 2.0, idx(1, 0), 1e-12).unwrap();
            let b = op_solver.s_b_finite(m, n, 2.0, idx(1, 0), 1e-12).unwrap();
            assert!((a - b).abs() < 1e-9, "m={m} n={n}: {a} vs {b}");
        }
    }

    #[test]
    fn longer_gaps_raise_the_root_at_fixed_growth() {
        // Hold B^d fixed at 4 and increase d: the penalty exponent per word
        // length shrinks, so the root climbs.
        let s = solver();
        let mut prev = 0.0;
        for d in 1..=3u64 {
            let b = 4f64.powf(1.0 / d as f64);
            let root = s.s_b_finite(3, 4, b, idx(d, 0), 1e-12).unwrap();
            assert!(root > prev, "d={d}: {root} <= {prev}");
            prev = root;
        }
    }

    #[test]
    fn iterated_product_roots_rise_with_order() {
        // f_m decreases with m, so the growth penalty weakens and the root
        // increases.
        let s = solver();
        let a = Alphabet::range(3).unwrap();
        let mut prev = 0.0;
        for m in 1..=5 {
            let root = s
                .potential_root(&a, Potential::IteratedProduct { m }, 5, 2.0, 1e-12)
                .unwrap();
            assert!(root > prev, "m={m}: {root} <= {prev}");
            prev = root;
        }
    }

    #[test]
    fn single_branch_estimate_approaches_known_limit() {
        // Alphabet {1}: roots are n lnB / (2 ln q_n + 2 n lnB) with
        // q_n the Fibonacci continuants, so the n-limit is
        // lnB / (2 ln phi + 2 lnB).
        let s = solver();
        let est = s
            .potential_estimate(Potential::GapProduct { index: idx(1, 0) }, 2.0, 1, 12, 1e-12)
            .unwrap();
        let phi = 0.5 * (1.0 + 5f64.sqrt());
        let limit = 2f64.ln() / (2.0 * phi.ln() + 2.0 * 2f64.ln());
        assert!(
            (est.value - limit).abs() <= est.uncertainty + 2e-3,
            "{} vs {limit} (band {})",
            est.value,
            est.uncertainty
        );
        assert!(est.uncertainty < 2e-2);
    }

    #[test]
    fn estimate_diagnostics_have_expected_shape() {
        let s = solver();
        let est = s.s_b_estimate(2.0, idx(1, 0), 3, 4, 1e-10).unwrap();
        assert_eq!(est.diagnostics.tableau.len(), 12);
        assert_eq!(est.diagnostics.per_alphabet.len(), 3);
        assert!(est.diagnostics.monotone_in_alphabet);
        assert!(est.value > 0.5 && est.value < 1.0, "{}", est.value);
        assert!(est.uncertainty > 0.0);
        assert!(matches!(
            s.s_b_estimate(1.0, idx(1, 0), 3, 4, 1e-10),
            Err(PressureError::BadBase { .. })
        ));
        assert!(matches!(
            s.s_b_estimate(2.0, idx(1, 0), 1, 4, 1e-10),
            Err(PressureError::Domain(_))
        ));
    }

    #[test]
    fn estimates_track_base_trend() {
        let s = solver();
        let values: Vec<f64> = [1.5, 8.0, 64.0]
            .iter()
            .map(|&b| s.s_b_estimate(b, idx(1, 0), 4, 4, 1e-10).unwrap().value)
            .collect();
        assert!(values[0] > values[1] && values[1] > values[2], "{values:?}");
        assert!(values.iter().all(|&v| v > 0.5 && v < 1.0), "{values:?}");
    }

    #[test]
    fn extrapolate_handles_short_and_flat_sequences() {
        assert_eq!(extrapolate(&[0.4]), (0.4, 0.0));
        let (v, r) = extrapolate(&[0.4, 0.5]);
        assert_eq!(v, 0.5);
        assert!((r - 0.1).abs() < 1e-15);
        let (v, _) = extrapolate(&[0.5, 0.5, 0.5, 0.5]);
        assert_eq!(v, 0.5);
        // Exactly geometric: limit recovered to near machine precision.
        let seq: Vec<f64> = (1..=6).map(|k| 0.7 + 0.3 * 0.5f64.powi(k)).collect();
        let (v, r) = extrapolate(&seq);
        assert!((v - 0.7).abs() < 1e-12);
        assert!(r < 0.02);
    }
}
