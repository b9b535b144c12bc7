//! Monte Carlo and desk-scale exhaustive experiments.
//!
//! Samples are uniform reals drawn as exact dyadic enclosures and expanded
//! with certified digits, so no statistic is contaminated by floating-point
//! digit corruption. Every experiment is deterministic given its seed: the
//! per-sample generator is derived from (seed, sample index), and reductions
//! use order-fixed summation, so thread count never changes a report.

mod experiments;
mod sampler;

pub use experiments::{
    cantor_geometry_check, geometric_mean_experiment, lemma51_ratio, limsup_event_frequency,
    mixed_geometric_mean, EventKind, RangeProfile, KHINTCHINE_CONSTANT,
};
pub use sampler::{derive_rng, dyadic_enclosure, sample_digits, SampleConfig};

use serde::Serialize;
use thiserror::Error;

use crate::cf::CfError;
use crate::numeric::CompSum;

#[derive(Debug, Error)]
pub enum EmpiricsError {
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("enumeration needs {needed} items, budget is {budget}")]
    Budget { needed: u128, budget: u128 },
    #[error("independent recomputation disagreed: {0}")]
    CrossCheck(String),
    #[error(transparent)]
    Cf(#[from] CfError),
}

/// Five-number summary plus mean and sample standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub count: u64,
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

impl Summary {
    pub fn from_values(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let mut sum = CompSum::default();
        for &v in values {
            sum.add(v);
        }
        let mean = sum.value() / values.len() as f64;
        let mut dev = CompSum::default();
        for &v in values {
            dev.add((v - mean) * (v - mean));
        }
        let sd = if values.len() > 1 {
            (dev.value() / (values.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let quantile = |p: f64| -> f64 {
            let pos = p * (sorted.len() - 1) as f64;
            let i = pos.floor() as usize;
            let frac = pos - i as f64;
            if i + 1 < sorted.len() {
                sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
            } else {
                sorted[i]
            }
        };
        Some(Summary {
            count: values.len() as u64,
            mean,
            sd,
            min: sorted[0],
            q1: quantile(0.25),
            median: quantile(0.5),
            q3: quantile(0.75),
            max: *sorted.last().unwrap(),
        })
    }
}

/// Common shape for every experiment's output. `metrics` carries named
/// scalar results beyond the main statistic; `pass` is None for exploratory
/// runs that have no target.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub statistic: String,
    pub sampling: Option<SampleConfig>,
    pub discarded: u64,
    pub parameters: Vec<(String, String)>,
    pub summary: Option<Summary>,
    pub metrics: Vec<(String, f64)>,
    pub target: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}
