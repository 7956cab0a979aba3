//! Exact finite-blocklength evaluation of the random-binning construction.
//!
//! Sequences over an alphabet of size `a` are indexed in base `a` with the
//! first symbol most significant. Every quantity is computed by exact
//! enumeration; nothing is sampled except the binning itself.

mod feasibility;
mod full;
mod protocol;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::{compose, JointDist, ProbError};
use crate::region::{RegionError, SchemeParams};

pub use feasibility::{
    rate_feasibility, scan_rate_polytope, BinRateDomain, ConstraintSlack, FeasibilityReport, RateEntropies,
};
pub use full::{full_space, full_space_tv, EncoderForm, FullSpace, FullTuple};
pub use protocol::{
    build_protocols, check_budget, finite_n_performance, security_gap, sw_decode, tv_protocols, DecodeOutcome, DecoderInput,
    FinitePerformance, ProtocolPair,
};

/// Largest enumerated product space, in bits.
pub const SEQUENCE_BUDGET_BITS: f64 = 24.0;
/// Largest number of common-randomness values `|F1||K||F2|`.
pub const RANDOMNESS_BUDGET: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum OsrbError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("invalid binning configuration: {0}")]
    InvalidConfig(String),
    #[error("enumeration budget exceeded: {what} needs {needed}, limit is {limit}")]
    BudgetExceeded { what: String, needed: String, limit: String },
}

pub type Result<T> = std::result::Result<T, OsrbError>;

/// Blocklength and binning rates in bits per symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinningConfig {
    pub n: usize,
    /// `M1`, a bin index of `V^n`
    pub r1: f64,
    /// `M2`, a bin index of `U^n`
    pub r2: f64,
    /// `F1`, shared randomness binning `V^n`
    pub rt1: f64,
    /// `F2`, shared randomness binning `U^n`
    pub rt2: f64,
    /// Secret key `K`, binning `V^n`
    pub r0: f64,
    /// Key part `K'` that is also revealed to the eavesdropper. Zero unless the
    /// key rate is below the threshold of [`key_regime_selector`].
    #[serde(default)]
    pub r0_revealed: f64,
}

impl BinningConfig {
    pub fn new(n: usize, r1: f64, r2: f64, rt1: f64, rt2: f64, r0: f64) -> Self {
        Self { n, r1, r2, rt1, rt2, r0, r0_revealed: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(OsrbError::InvalidConfig("blocklength must be >= 1".into()));
        }
        let rates = [
            ("r1", self.r1),
            ("r2", self.r2),
            ("rt1", self.rt1),
            ("rt2", self.rt2),
            ("r0", self.r0),
            ("r0_revealed", self.r0_revealed),
        ];
        for (name, r) in rates {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(OsrbError::InvalidConfig(format!("rate {name} = {r} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    /// `2^floor(n rate)`, at least 1.
    pub fn bins(&self, rate: f64) -> u64 {
        // the small offset keeps exact products like 4 * 0.75 from flooring down
        let bits = (self.n as f64 * rate + 1e-9).floor();
        if bits >= 63.0 {
            u64::MAX
        } else {
            1u64 << (bits as u32)
        }
    }

    pub fn n_m1(&self) -> u64 {
        self.bins(self.r1)
    }
    pub fn n_m2(&self) -> u64 {
        self.bins(self.r2)
    }
    pub fn n_f1(&self) -> u64 {
        self.bins(self.rt1)
    }
    pub fn n_f2(&self) -> u64 {
        self.bins(self.rt2)
    }
    pub fn n_k(&self) -> u64 {
        self.bins(self.r0)
    }
    pub fn n_k_revealed(&self) -> u64 {
        self.bins(self.r0_revealed)
    }
    /// Size of the full key `(K, K')`.
    pub fn n_kbar(&self) -> u64 {
        self.n_k().saturating_mul(self.n_k_revealed())
    }
    /// Number of `(F1, K, K', F2)` values.
    pub fn n_randomness(&self) -> u64 {
        self.n_f1().saturating_mul(self.n_kbar()).saturating_mul(self.n_f2())
    }
}

/// One draw of the five binnings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinningRealization {
    pub seed: u64,
    /// Indexed by `v^n`.
    pub m1: Vec<u32>,
    pub f1: Vec<u32>,
    /// Full key index `k + |K| k'`.
    pub kbar: Vec<u32>,
    /// Indexed by `u^n`.
    pub m2: Vec<u32>,
    pub f2: Vec<u32>,
}

impl BinningRealization {
    /// Independent uniform bin indices for every `v^n` and `u^n`, drawn in the
    /// order `m1, f1, kbar` over `v^n`, then `m2, f2` over `u^n`.
    pub fn draw(config: &BinningConfig, v_size: usize, u_size: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        let sv = seq_count(v_size, config.n)?;
        let su = seq_count(u_size, config.n)?;
        for (what, count) in [("m1", config.n_m1()), ("m2", config.n_m2()), ("kbar", config.n_kbar())] {
            if count > u64::from(u32::MAX) {
                return Err(OsrbError::BudgetExceeded {
                    what: format!("{what} bin count"),
                    needed: count.to_string(),
                    limit: u32::MAX.to_string(),
                });
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |len: usize, bins: u64| -> Vec<u32> { (0..len).map(|_| rng.gen_range(0..bins) as u32).collect() };
        let m1 = draw(sv, config.n_m1());
        let f1 = draw(sv, config.n_f1());
        let kbar = draw(sv, config.n_kbar());
        let m2 = draw(su, config.n_m2());
        let f2 = draw(su, config.n_f2());
        Ok(Self { seed, m1, f1, kbar, m2, f2 })
    }
}

/// `a^n`, guarded against overflow.
pub(crate) fn seq_count(a: usize, n: usize) -> Result<usize> {
    u32::try_from(n)
        .ok()
        .and_then(|n| a.checked_pow(n))
        .filter(|&c| c <= 1 << 30)
        .ok_or_else(|| OsrbError::BudgetExceeded {
            what: "sequence count".into(),
            needed: format!("{a}^{n}"),
            limit: "2^30".into(),
        })
}

/// Symbols of sequence `s`, first symbol first.
pub(crate) fn digits(mut s: usize, a: usize, n: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for i in (0..n).rev() {
        d[i] = s % a;
        s /= a;
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KeyRegime {
    /// The key covers the whole second-level description.
    High,
    /// Part of the key must be treated as public.
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRegimeReport {
    pub regime: KeyRegime,
    /// `I(X;V|Y,U)`
    pub threshold: f64,
}

/// `High` when `key_rate > I(X;V|Y,U)`, `Low` otherwise.
pub fn key_regime_selector(source: &JointDist, scheme: &SchemeParams, key_rate: f64) -> Result<KeyRegimeReport> {
    let joint = compose(source, scheme.vx(), scheme.uv())?;
    let threshold = joint.cond_mutual_info(&["X"], &["V"], &["Y", "U"])?;
    let regime = if key_rate > threshold { KeyRegime::High } else { KeyRegime::Low };
    Ok(KeyRegimeReport { regime, threshold })
}
