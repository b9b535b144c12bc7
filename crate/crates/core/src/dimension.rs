//! Growth-rate case analysis.
//!
//! A rate function psi and an index map f(n) = d n + t define a limsup set
//! whose dimension depends on psi only through two growth exponents,
//!
//! ```text
//!     log B = liminf log psi(n) / (d n),
//!     log b = liminf log log psi(n) / (d n^2),
//! ```
//!
//! and the dimension is 1 when B = 1, the pressure-equation root when
//! 1 < B < infinity, 1/(1+b) when B is infinite with b finite, and 0 when b
//! is infinite too. Closed-form descriptors yield exact exponents; sampled
//! tables yield finite-horizon estimates with a running-min trace, never a
//! certified limit.

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::cf::LinearIndex;
use crate::pressure::{Potential, PressureError, PressureEstimate, PressureSolver};

#[derive(Debug, Error)]
pub enum DimensionError {
    #[error("cannot parse rate descriptor: {0}")]
    Parse(String),
    #[error("rate table problem: {0}")]
    Table(String),
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error(transparent)]
    Solver(#[from] PressureError),
}

/// Rate function descriptor. The `exp` and `dexp` forms depend on the index
/// gap d; `n` below is the argument of psi.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum PsiSpec {
    /// c * n^k.
    Poly { c: f64, k: f64 },
    /// beta^(d n).
    Exp { beta: f64 },
    /// e^(beta^(d n^2)).
    DoubleExp { beta: f64 },
    /// Sampled values psi(1), psi(2), ...
    Table { values: Vec<f64> },
}

impl PsiSpec {
    /// Grammar: `poly(c,k)`, `exp(beta)`, `dexp(beta)`, `table:<path>`.
    pub fn parse(text: &str) -> Result<Self, DimensionError> {
        let text = text.trim();
        if let Some(path) = text.strip_prefix("table:") {
            return Self::from_table_file(Path::new(path.trim()));
        }
        let open = text
            .find('(')
            .ok_or_else(|| DimensionError::Parse(format!("expected name(args) in {text:?}")))?;
        if !text.ends_with(')') {
            return Err(DimensionError::Parse(format!("missing closing paren in {text:?}")));
        }
        let name = &text[..open];
        let args: Vec<f64> = text[open + 1..text.len() - 1]
            .split(',')
            .map(|a| {
                a.trim()
                    .parse::<f64>()
                    .map_err(|_| DimensionError::Parse(format!("bad number {a:?} in {text:?}")))
            })
            .collect::<Result<_, _>>()?;
        match (name, args.as_slice()) {
            ("poly", [c, k]) => {
                if !(c.is_finite() && k.is_finite() && *c >= 1.0 && *k >= 0.0) {
                    return Err(DimensionError::Parse(format!(
                        "poly needs c >= 1 (so psi >= 1 everywhere) and k >= 0, got ({c}, {k})"
                    )));
                }
                Ok(PsiSpec::Poly { c: *c, k: *k })
            }
            ("exp", [beta]) => {
                if !(beta.is_finite() && *beta >= 1.0) {
                    return Err(DimensionError::Parse(format!(
                        "exp needs beta >= 1 (so psi >= 1 everywhere), got {beta}"
                    )));
                }
                Ok(PsiSpec::Exp { beta: *beta })
            }
            ("dexp", [beta]) => {
                if !(beta.is_finite() && *beta > 0.0) {
                    return Err(DimensionError::Parse(format!("dexp needs beta > 0, got {beta}")));
                }
                Ok(PsiSpec::DoubleExp { beta: *beta })
            }
            _ => Err(DimensionError::Parse(format!("unknown descriptor {text:?}"))),
        }
    }

    /// Loads a CSV of rows `n,psi(n)`; `#`-lines and one non-numeric header
    /// are tolerated. Rows must fill 1..=N without gaps or repeats.
    pub fn from_table_file(path: &Path) -> Result<Self, DimensionError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| DimensionError::Table(format!("{}: {e}", path.display())))?;
        let mut rows = Vec::new();
        let mut header_forgiven = false;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(2, ',');
            let n_txt = parts.next().unwrap_or("").trim();
            let v_txt = parts.next().unwrap_or("").trim();
            match (n_txt.parse::<u64>(), v_txt.parse::<f64>()) {
                (Ok(n), Ok(v)) => rows.push((n, v)),
                _ if rows.is_empty() && !header_forgiven => header_forgiven = true,
                _ => {
                    return Err(DimensionError::Table(format!(
                        "line {}: expected `n,psi`, got {line:?}",
                        i + 1
                    )))
                }
            }
        }
        Self::from_rows(rows)
    }

    pub fn from_rows(mut rows: Vec<(u64, f64)>) -> Result<Self, DimensionError> {
        if rows.is_empty() {
            return Err(DimensionError::Table("no rows".into()));
        }
        rows.sort_by_key(|r| r.0);
        let mut values = Vec::with_capacity(rows.len());
        for (expected, (n, v)) in rows.iter().enumerate() {
            if *n != expected as u64 + 1 {
                return Err(DimensionError::Table(format!(
                    "rows must cover n = 1..=N contiguously; expected n = {}, got {n}",
                    expected + 1
                )));
            }
            if !(v.is_finite() && *v >= 1.0) {
                return Err(DimensionError::Table(format!("psi({n}) = {v} must be >= 1")));
            }
            values.push(*v);
        }
        Ok(PsiSpec::Table { values })
    }

    /// psi(n), or None when a table does not reach n.
    pub fn eval(&self, n: u64, d: u64) -> Option<f64> {
        let nf = n as f64;
        match self {
            PsiSpec::Poly { c, k } => Some(c * nf.powf(*k)),
            PsiSpec::Exp { beta } => Some(beta.powf(d as f64 * nf)),
            PsiSpec::DoubleExp { beta } => Some(beta.powf(d as f64 * nf * nf).exp()),
            PsiSpec::Table { values } => values.get(n as usize - 1).copied(),
        }
    }
}

impl std::fmt::Display for PsiSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PsiSpec::Poly { c, k } => write!(f, "poly({c},{k})"),
            PsiSpec::Exp { beta } => write!(f, "exp({beta})"),
            PsiSpec::DoubleExp { beta } => write!(f, "dexp({beta})"),
            PsiSpec::Table { values } => write!(f, "table[{} rows]", values.len()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthSpec {
    pub psi: PsiSpec,
    pub index: LinearIndex,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TracePoint {
    pub n: u64,
    /// min over m in [n, N] of log psi(m) / (d m).
    pub base_quotient: f64,
    /// Same for log log psi(m) / (d m^2); None when every m in the tail has
    /// psi(m) <= e.
    pub double_quotient: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Exponents {
    /// B; infinite when the base quotient diverges.
    pub base: f64,
    /// b; consulted only when `base` is infinite. NaN when no sample in the
    /// window had psi(n) > e.
    pub double_base: f64,
    pub horizon: u64,
    /// Running suffix minima, emitted so a user can judge stabilization.
    pub trace: Vec<TracePoint>,
    /// Window samples with psi(n) <= e, skipped in the double quotient.
    pub skipped_double: u64,
    /// True when the exponents come from a closed-form descriptor rather
    /// than a finite-horizon scan.
    pub exact: bool,
}

/// Growth exponents of a rate function: exact for closed-form descriptors,
/// min over n in [N/2, N] of the defining quotients for tables.
pub fn exponents_from_psi(spec: &GrowthSpec, horizon: u64) -> Result<Exponents, DimensionError> {
    if horizon < 10 {
        return Err(DimensionError::Domain(format!("horizon {horizon} < 10")));
    }
    let exact = |base: f64, double_base: f64| Exponents {
        base,
        double_base,
        horizon: 0,
        trace: Vec::new(),
        skipped_double: 0,
        exact: true,
    };
    let values = match &spec.psi {
        PsiSpec::Poly { .. } => return Ok(exact(1.0, 1.0)),
        PsiSpec::Exp { beta } => return Ok(exact(*beta, 1.0)),
        PsiSpec::DoubleExp { beta } => {
            return Ok(if *beta > 1.0 {
                exact(f64::INFINITY, *beta)
            } else {
                exact(1.0, 1.0)
            })
        }
        PsiSpec::Table { values } => values,
    };
    if (values.len() as u64) < horizon {
        return Err(DimensionError::Domain(format!(
            "table has {} rows, horizon {horizon} requested",
            values.len()
        )));
    }
    let n_max = horizon as usize;
    let d = spec.index.d() as f64;
    let mut trace = vec![
        TracePoint { n: 0, base_quotient: f64::INFINITY, double_quotient: None };
        n_max
    ];
    let mut base_min = f64::INFINITY;
    let mut double_min: Option<f64> = None;
    for n in (1..=n_max).rev() {
        let lpsi = values[n - 1].ln();
        base_min = base_min.min(lpsi / (d * n as f64));
        if lpsi > 1.0 {
            let q = lpsi.ln() / (d * (n * n) as f64);
            double_min = Some(double_min.map_or(q, |m: f64| m.min(q)));
        }
        trace[n - 1] = TracePoint {
            n: n as u64,
            base_quotient: base_min,
            double_quotient: double_min,
        };
    }
    let window_start = horizon.div_ceil(2) as usize;
    let at = &trace[window_start - 1];
    let skipped_double = (window_start..=n_max)
        .filter(|&n| values[n - 1].ln() <= 1.0)
        .count() as u64;
    Ok(Exponents {
        base: at.base_quotient.exp(),
        double_base: at.double_quotient.map_or(f64::NAN, f64::exp),
        horizon,
        trace,
        skipped_double,
        exact: false,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DimensionCase {
    BaseOne,
    BaseFinite,
    BaseInfiniteDoubleFinite,
    DoubleInfinite,
}

#[derive(Clone, Debug, Serialize)]
pub enum DimensionDetail {
    ClosedForm,
    Estimate(PressureEstimate),
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionResult {
    pub case: DimensionCase,
    pub value: f64,
    pub detail: DimensionDetail,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EstimateParams {
    pub alphabet_max: u64,
    pub n_max: u64,
    pub tol: f64,
}

impl Default for EstimateParams {
    fn default() -> Self {
        EstimateParams { alphabet_max: 6, n_max: 8, tol: 1e-10 }
    }
}

fn dispatch(
    base: f64,
    double_base: f64,
    solve: impl FnOnce() -> Result<PressureEstimate, PressureError>,
) -> Result<DimensionResult, DimensionError> {
    if base < 1.0 || base.is_nan() {
        return Err(DimensionError::Domain(format!("base exponent B = {base}")));
    }
    if base == 1.0 {
        return Ok(DimensionResult {
            case: DimensionCase::BaseOne,
            value: 1.0,
            detail: DimensionDetail::ClosedForm,
        });
    }
    if base.is_finite() {
        let est = solve()?;
        return Ok(DimensionResult {
            case: DimensionCase::BaseFinite,
            value: est.value,
            detail: DimensionDetail::Estimate(est),
        });
    }
    if double_base.is_nan() {
        return Err(DimensionError::Domain(
            "base is infinite but the double exponent is unavailable".into(),
        ));
    }
    if double_base.is_finite() {
        Ok(DimensionResult {
            case: DimensionCase::BaseInfiniteDoubleFinite,
            value: 1.0 / (1.0 + double_base),
            detail: DimensionDetail::ClosedForm,
        })
    } else {
        Ok(DimensionResult {
            case: DimensionCase::DoubleInfinite,
            value: 0.0,
            detail: DimensionDetail::ClosedForm,
        })
    }
}

/// Dimension of the gap-product limsup set for the given exponents.
pub fn dim_ef(
    exponents: &Exponents,
    index: LinearIndex,
    solver: &PressureSolver,
    params: &EstimateParams,
) -> Result<DimensionResult, DimensionError> {
    dispatch(exponents.base, exponents.double_base, || {
        solver
            .s_b_estimate(exponents.base, index, params.alphabet_max, params.n_max, params.tol)
            .map_err(Into::into)
    })
}

/// Dimension with the m-fold iterated-product potential; finite base only.
pub fn dim_em(
    base: f64,
    m: usize,
    solver: &PressureSolver,
    params: &EstimateParams,
) -> Result<DimensionResult, DimensionError> {
    if m == 0 {
        return Err(DimensionError::Domain("iterated-product order m = 0".into()));
    }
    if !(base > 1.0 && base.is_finite()) {
        return Err(DimensionError::Domain(format!(
            "iterated-product case needs 1 < B < infinity, got {base}"
        )));
    }
    dispatch(base, f64::NAN, || {
        solver.potential_estimate(
            Potential::IteratedProduct { m },
            base,
            params.alphabet_max,
            params.n_max,
            params.tol,
        )
    })
}

/// Single-quotient variant: the m = 1 potential for finite base, and the
/// same closed cases as dim_ef at the extremes.
pub fn dim_e1(
    base: f64,
    double_base: f64,
    solver: &PressureSolver,
    params: &EstimateParams,
) -> Result<DimensionResult, DimensionError> {
    dispatch(base, double_base, || {
        solver.potential_estimate(
            Potential::IteratedProduct { m: 1 },
            base,
            params.alphabet_max,
            params.n_max,
            params.tol,
        )
    })
}
