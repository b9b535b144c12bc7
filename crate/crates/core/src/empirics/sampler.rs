//! Uniform sampling of reals as exact dyadic enclosures.
//!
//! A sample is k / 2^P with k uniform in [1, 2^P - 1], carried as the
//! enclosure [k/2^P, (k+1)/2^P]. Digits are taken from the enclosure's
//! certified common prefix; a sample whose prefix is too short is discarded,
//! never patched with floating point.

use num::bigint::BigUint;
use num::rational::BigRational;
use num::traits::One;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use super::EmpiricsError;
use crate::cf::Enclosure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub samples: u64,
    pub digits_per_sample: u64,
    pub precision_bits: u64,
}

impl SampleConfig {
    /// Precision defaults to 4 bits per digit plus headroom; typical
    /// expansions consume about 1.72 bits per digit, so discards are rare.
    pub fn new(seed: u64, samples: u64, digits_per_sample: u64) -> Self {
        SampleConfig {
            seed,
            samples,
            digits_per_sample,
            precision_bits: 4 * digits_per_sample + 512,
        }
    }

    pub fn with_precision(mut self, precision_bits: u64) -> Self {
        self.precision_bits = precision_bits;
        self
    }

    pub fn validate(&self) -> Result<(), EmpiricsError> {
        if self.samples == 0 || self.digits_per_sample == 0 {
            return Err(EmpiricsError::Domain(
                "need samples >= 1 and digits_per_sample >= 1".into(),
            ));
        }
        if self.precision_bits < 8 {
            return Err(EmpiricsError::Domain("precision under 8 bits".into()));
        }
        Ok(())
    }
}

fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for one sample, a pure function of (seed, index) so samples can
/// be produced in any order on any number of threads.
pub fn derive_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut state = seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix_next(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// [k/2^P, (k+1)/2^P] with k uniform in [1, 2^P - 1].
pub fn dyadic_enclosure(rng: &mut ChaCha8Rng, precision_bits: u64) -> Enclosure {
    let bytes = precision_bits.div_ceil(8) as usize;
    let excess = (bytes as u64 * 8 - precision_bits) as u32;
    let mut buf = vec![0u8; bytes];
    let den: BigUint = BigUint::one() << precision_bits;
    loop {
        rng.fill_bytes(&mut buf);
        *buf.last_mut().expect("precision validated nonzero") &= 0xFF >> excess;
        let k = BigUint::from_bytes_le(&buf);
        if k.bits() == 0 {
            continue;
        }
        let lo = BigRational::new(k.clone().into(), den.clone().into());
        let hi = BigRational::new((k + BigUint::one()).into(), den.into());
        return Enclosure::new(lo, hi).expect("dyadic interval inside (0, 1]");
    }
}

/// Certified digit prefix of sample `index`, or None when fewer than
/// `digits` could be certified at the configured precision.
pub fn sample_digits(config: &SampleConfig, index: u64, digits: usize) -> Option<Vec<u64>> {
    let mut rng = derive_rng(config.seed, index);
    let enclosure = dyadic_enclosure(&mut rng, config.precision_bits);
    let prefix = enclosure.certified_prefix(digits);
    (prefix.len() >= digits).then_some(prefix)
}
