use serde::{Deserialize, Serialize};

use super::{BinningConfig, Result};
use crate::prob::{compose, JointDist};
use crate::region::SchemeParams;

const STEP: f64 = 0.01;

/// Conditional entropies that enter the binning constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEntropies {
    pub h_v_given_x: f64,
    pub h_u_given_x: f64,
    pub h_uv_given_x: f64,
    pub h_v_given_yu: f64,
    pub h_u_given_v: f64,
    pub h_uv_given_y: f64,
    pub h_v_given_xu: f64,
    pub i_xv_given_yu: f64,
    pub i_xv_given_y: f64,
}

impl RateEntropies {
    pub fn from_joint(joint: &JointDist) -> Result<Self> {
        Ok(Self {
            h_v_given_x: joint.cond_entropy(&["V"], &["X"])?,
            h_u_given_x: joint.cond_entropy(&["U"], &["X"])?,
            h_uv_given_x: joint.cond_entropy(&["U", "V"], &["X"])?,
            h_v_given_yu: joint.cond_entropy(&["V"], &["Y", "U"])?,
            h_u_given_v: joint.cond_entropy(&["U"], &["V"])?,
            h_uv_given_y: joint.cond_entropy(&["U", "V"], &["Y"])?,
            h_v_given_xu: joint.cond_entropy(&["V"], &["X", "U"])?,
            i_xv_given_yu: joint.cond_mutual_info(&["X"], &["V"], &["Y", "U"])?,
            i_xv_given_y: joint.cond_mutual_info(&["X"], &["V"], &["Y"])?,
        })
    }

    pub fn from_scheme(source: &JointDist, scheme: &SchemeParams) -> Result<Self> {
        Self::from_joint(&compose(source, scheme.vx(), scheme.uv())?)
    }

    /// Slack of the seven constraints at rates `(r0, r1, r2, rt1, rt2)`.
    /// Positive slack means the strict inequality holds.
    pub fn seven(&self, r0: f64, r1: f64, r2: f64, rt1: f64, rt2: f64) -> [ConstraintSlack; 7] {
        let e = self;
        [
            ConstraintSlack::below("R0 + Rt1 < H(V|X)", r0 + rt1, e.h_v_given_x),
            ConstraintSlack::below("Rt2 < H(U|X)", rt2, e.h_u_given_x),
            ConstraintSlack::below("R0 + Rt1 + Rt2 < H(U,V|X)", r0 + rt1 + rt2, e.h_uv_given_x),
            ConstraintSlack::above("R0 + R1 + Rt1 > H(V|Y,U)", r0 + r1 + rt1, e.h_v_given_yu),
            ConstraintSlack::above("R2 + Rt2 > H(U|V)", r2 + rt2, e.h_u_given_v),
            ConstraintSlack::above("R0 + R1 + Rt1 + R2 + Rt2 > H(U,V|Y)", r0 + r1 + rt1 + r2 + rt2, e.h_uv_given_y),
            ConstraintSlack::below("R1 + Rt1 < H(V|X,U)", r1 + rt1, e.h_v_given_xu),
        ]
    }

    /// The pair left after eliminating the four binning rates.
    pub fn final_pair(&self, rate: f64, key_rate: f64) -> [ConstraintSlack; 2] {
        [
            ConstraintSlack::above("R0 > I(X;V|Y,U)", key_rate, self.i_xv_given_yu),
            ConstraintSlack::above("R > I(X;V|Y)", rate, self.i_xv_given_y),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSlack {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

impl ConstraintSlack {
    fn below(name: &str, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), lhs, rhs, slack: rhs - lhs }
    }

    fn above(name: &str, lhs: f64, rhs: f64) -> Self {
        Self { name: name.into(), lhs, rhs, slack: lhs - rhs }
    }

    pub fn holds(&self) -> bool {
        self.slack > 0.0
    }
}

/// Range of the shared-randomness rates `Rt1`, `Rt2` in the polytope scan.
///
/// `Signed` is the domain under which the seven constraints project exactly
/// onto the final pair. With `NonNegative` the projection is smaller whenever
/// `H(V|X)` or `H(V|X,U)` is small.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BinRateDomain {
    #[default]
    Signed,
    NonNegative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub entropies: RateEntropies,
    /// Sum-rate `R1 + R2` of the configuration.
    pub rate: f64,
    /// Key binning rate, including a revealed key part.
    pub key_rate: f64,
    pub seven: Vec<ConstraintSlack>,
    pub final_pair: Vec<ConstraintSlack>,
    pub seven_hold: bool,
    pub final_holds: bool,
    /// `(R1, R2, Rt1, Rt2)` on the 0.01 grid meeting all seven constraints at
    /// the configuration's `(R, R0)`, if any.
    pub polytope_witness: Option<[f64; 4]>,
    pub violated: Vec<String>,
}

pub fn rate_feasibility(source: &JointDist, scheme: &SchemeParams, config: &BinningConfig) -> Result<FeasibilityReport> {
    config.validate()?;
    let entropies = RateEntropies::from_scheme(source, scheme)?;
    let key_rate = config.r0 + config.r0_revealed;
    let rate = config.r1 + config.r2;
    let seven = entropies.seven(key_rate, config.r1, config.r2, config.rt1, config.rt2).to_vec();
    let final_pair = entropies.final_pair(rate, key_rate).to_vec();
    let violated = seven.iter().chain(&final_pair).filter(|c| !c.holds()).map(|c| c.name.clone()).collect();
    let log_v = (scheme.v_size() as f64).log2();
    let log_u = (scheme.u_size() as f64).log2();
    Ok(FeasibilityReport {
        seven_hold: seven.iter().all(ConstraintSlack::holds),
        final_holds: final_pair.iter().all(ConstraintSlack::holds),
        polytope_witness: scan_rate_polytope(&entropies, rate, key_rate, log_v + log_u, BinRateDomain::Signed),
        entropies,
        rate,
        key_rate,
        seven,
        final_pair,
        violated,
    })
}

/// Searches `(R1, R2, Rt1, Rt2)` with `R1 + R2 = rate`, `R1, R2 >= 0` on a
/// 0.01 grid for a point meeting all seven constraints.
///
/// `R2` and `Rt1` are scanned; `Rt2` enters four constraints as an open
/// interval, and the smallest grid multiple inside it is taken directly.
/// `Rt1` ranges over `[-L, L]` with `L = rate + key_rate + log_alphabets + 1`,
/// which covers every constraint's entropy range.
pub fn scan_rate_polytope(
    e: &RateEntropies,
    rate: f64,
    key_rate: f64,
    log_alphabets: f64,
    domain: BinRateDomain,
) -> Option<[f64; 4]> {
    if rate < 0.0 {
        return None;
    }
    let limit = rate + key_rate + log_alphabets + 1.0;
    let l_steps = (limit / STEP).ceil() as i64;
    let rt1_lo = match domain {
        BinRateDomain::Signed => -l_steps,
        BinRateDomain::NonNegative => 0,
    };
    let r2_steps = (rate / STEP + 1e-9).floor() as i64;
    let r0 = key_rate;
    for i in 0..=r2_steps {
        let r2 = (i as f64 * STEP).min(rate);
        let r1 = rate - r2;
        for j in rt1_lo..=l_steps {
            let rt1 = j as f64 * STEP;
            if !(r0 + rt1 < e.h_v_given_x && r0 + r1 + rt1 > e.h_v_given_yu && r1 + rt1 < e.h_v_given_xu) {
                continue;
            }
            let hi = e.h_u_given_x.min(e.h_uv_given_x - r0 - rt1);
            let mut lo = (e.h_u_given_v - r2).max(e.h_uv_given_y - r0 - r1 - rt1 - r2);
            let mut k = (lo / STEP).floor() as i64 + 1;
            if domain == BinRateDomain::NonNegative {
                lo = lo.max(-STEP);
                k = k.max(0);
            }
            let mut rt2 = k as f64 * STEP;
            // guard against k * STEP rounding back onto the open bound
            if rt2 <= lo {
                rt2 = (k + 1) as f64 * STEP;
            }
            if rt2 < hi {
                let witness = [r1, r2, rt1, rt2];
                debug_assert!(e.seven(r0, r1, r2, rt1, rt2).iter().all(ConstraintSlack::holds));
                return Some(witness);
            }
        }
    }
    None
}
