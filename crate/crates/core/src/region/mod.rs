//! Bound functionals of the achievable region and the search over auxiliary schemes.
//!
//! A scheme is a pair of test channels `p(v|x)`, `p(u|v)` plus a deterministic
//! reconstruction map `x̂(y, v)`. For a source `p(x,y,z)` and key rate `R0` it
//! certifies every tuple `(R, R0, D, Δ)` with
//!
//! ```text
//! R >= I(X;V|Y)
//! Δ <= min{ I(Y;V|U) - I(Z;V|U) + H(X|Z,V) + R0, H(X|Z,U) }
//! D >= E d(X, x̂(Y,V))
//! ```

mod fast;
pub(crate) mod optimize;
pub(crate) mod search;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prob::{compose, Alphabet, CondChannel, DistortionMeasure, JointDist, ProbError};

pub(crate) use fast::SourceModel;
pub use optimize::{
    cardinality_saturation_check, is_achievable, key_profile, max_equivocation, region_sweep,
    Achievability, CardinalityReport, KeyProfile, SaturationAxis, SearchConfig, SearchMode,
    SearchOutcome, SweepAxis, SweepPoint,
};

/// Slack used for every `>=` / `<=` comparison against the region.
pub const ACHIEVABILITY_SLACK: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RegionError {
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("search space too large: {0}")]
    SearchTooLarge(String),
}

pub type Result<T> = std::result::Result<T, RegionError>;

/// Test channels and reconstruction map of one auxiliary-variable scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeParams {
    vx: CondChannel,
    uv: CondChannel,
    /// `recon[y * |V| + v]` is the reconstruction symbol index.
    recon: Vec<usize>,
}

/// Plain matrix form of a scheme, used for JSON files and CSV digests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeMatrices {
    pub vx: Vec<Vec<f64>>,
    pub uv: Vec<Vec<f64>>,
    /// Rows indexed by `y`, columns by `v`. Optional in input files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recon: Option<Vec<Vec<usize>>>,
}

impl SchemeParams {
    pub fn new(vx: CondChannel, uv: CondChannel, recon: Vec<usize>) -> Result<Self> {
        let single = |ch: &CondChannel, from: &str, to: &str| {
            ch.from_vars().len() == 1
                && ch.to_vars().len() == 1
                && ch.from_vars()[0].name() == from
                && ch.to_vars()[0].name() == to
        };
        if !single(&vx, "X", "V") {
            return Err(RegionError::InvalidScheme("first channel must map X to V".into()));
        }
        if !single(&uv, "V", "U") {
            return Err(RegionError::InvalidScheme("second channel must map V to U".into()));
        }
        if vx.to_vars()[0] != uv.from_vars()[0] {
            return Err(RegionError::InvalidScheme("V alphabets of the two channels differ".into()));
        }
        let nv = vx.to_size();
        if recon.is_empty() || recon.len() % nv != 0 {
            return Err(RegionError::InvalidScheme(format!(
                "reconstruction map has {} entries, not a multiple of |V| = {nv}",
                recon.len()
            )));
        }
        Ok(Self { vx, uv, recon })
    }

    /// Builds a scheme over `x_alphabet` with indexed `V` and `U` alphabets.
    pub fn from_matrices(
        x_alphabet: &Alphabet,
        vx: &[Vec<f64>],
        uv: &[Vec<f64>],
        recon: Vec<usize>,
    ) -> Result<Self> {
        let nv = vx.first().map_or(0, Vec::len);
        let nu = uv.first().map_or(0, Vec::len);
        let v = Alphabet::indexed("V", nv)?;
        let u = Alphabet::indexed("U", nu)?;
        let vx = CondChannel::from_rows(x_alphabet.renamed("X"), v.clone(), vx)?;
        let uv = CondChannel::from_rows(v, u, uv)?;
        Self::new(vx, uv, recon)
    }

    /// Same channels, with the reconstruction map chosen by [`optimal_reconstruction`].
    pub fn with_optimal_recon(
        source: &JointDist,
        vx: CondChannel,
        uv: CondChannel,
        d: &DistortionMeasure,
    ) -> Result<Self> {
        let recon = optimal_reconstruction(source, &vx, d)?;
        Self::new(vx, uv, recon)
    }

    pub fn vx(&self) -> &CondChannel {
        &self.vx
    }

    pub fn uv(&self) -> &CondChannel {
        &self.uv
    }

    pub fn recon(&self) -> &[usize] {
        &self.recon
    }

    pub fn v_size(&self) -> usize {
        self.vx.to_size()
    }

    pub fn u_size(&self) -> usize {
        self.uv.to_size()
    }

    /// `|U| <= |X| + 4` and `|V| <= (|X| + 3)(|X| + 4)`.
    pub fn within_cardinality_bounds(&self) -> bool {
        let nx = self.vx.from_size();
        self.u_size() <= nx + 4 && self.v_size() <= (nx + 3) * (nx + 4)
    }

    pub fn to_matrices(&self) -> SchemeMatrices {
        let nv = self.v_size();
        SchemeMatrices {
            vx: self.vx.rows(),
            uv: self.uv.rows(),
            recon: Some(self.recon.chunks(nv).map(<[usize]>::to_vec).collect()),
        }
    }

    /// Rebuilds a scheme from matrix form; a missing map is filled optimally.
    pub fn from_scheme_matrices(
        source: &JointDist,
        d: &DistortionMeasure,
        m: &SchemeMatrices,
    ) -> Result<Self> {
        let x = source.alphabet("X")?.clone();
        match &m.recon {
            Some(rows) => Self::from_matrices(&x, &m.vx, &m.uv, rows.iter().flatten().copied().collect()),
            None => {
                let probe = Self::from_matrices(&x, &m.vx, &m.uv, vec![0; m.vx.first().map_or(1, Vec::len)])?;
                Self::with_optimal_recon(source, probe.vx, probe.uv, d)
            }
        }
    }
}

/// One tuple `(R, R0, D, Δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionPoint {
    pub rate: f64,
    pub key_rate: f64,
    pub distortion: f64,
    pub equivocation: f64,
}

/// The component terms behind a [`BoundEvaluation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundDiagnostics {
    /// `I(X;V|Y)`
    pub i_xv_given_y: f64,
    /// `I(Y;V|U)`
    pub i_yv_given_u: f64,
    /// `I(Z;V|U)`
    pub i_zv_given_u: f64,
    /// `H(X|Z,V)`
    pub h_x_given_zv: f64,
    /// `H(X|Z,U)`
    pub h_x_given_zu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEvaluation {
    pub rate_min: f64,
    pub equiv_max: f64,
    pub distortion: f64,
    pub diagnostics: BoundDiagnostics,
}

impl BoundEvaluation {
    /// Whether the scheme behind this evaluation certifies `point`.
    pub fn certifies(&self, point: &RegionPoint) -> bool {
        point.rate >= self.rate_min - ACHIEVABILITY_SLACK
            && point.distortion >= self.distortion - ACHIEVABILITY_SLACK
            && point.equivocation <= self.equiv_max + ACHIEVABILITY_SLACK
    }
}

fn check_source(source: &JointDist, d: &DistortionMeasure) -> Result<()> {
    if source.names() != ["X", "Y", "Z"] {
        return Err(RegionError::InvalidParameter(format!(
            "source must be over (X, Y, Z), got {:?}",
            source.names()
        )));
    }
    if d.source_alphabet().symbols() != source.alphabet("X")?.symbols() {
        return Err(RegionError::InvalidParameter(
            "distortion measure is defined on a different source alphabet".into(),
        ));
    }
    Ok(())
}

fn check_key_rate(key_rate: f64) -> Result<()> {
    if !key_rate.is_finite() || key_rate < 0.0 {
        return Err(RegionError::InvalidParameter(format!("key rate {key_rate} must be finite and >= 0")));
    }
    Ok(())
}

/// Evaluates the three bound functionals of `scheme` on `source`.
///
/// This is the reference route through [`compose`] and generic entropies; the
/// search uses a specialised evaluator that is tested against it.
pub fn evaluate_bounds(
    source: &JointDist,
    scheme: &SchemeParams,
    d: &DistortionMeasure,
    key_rate: f64,
) -> Result<BoundEvaluation> {
    check_source(source, d)?;
    check_key_rate(key_rate)?;
    let ny = source.alphabet("Y")?.len();
    let nv = scheme.v_size();
    if scheme.recon.len() != ny * nv {
        return Err(RegionError::InvalidScheme(format!(
            "reconstruction map has {} entries, expected |Y||V| = {}",
            scheme.recon.len(),
            ny * nv
        )));
    }
    let nxh = d.recon_alphabet().len();
    if let Some(bad) = scheme.recon.iter().find(|&&s| s >= nxh) {
        return Err(RegionError::InvalidScheme(format!("reconstruction symbol {bad} out of range")));
    }

    let joint = compose(source, &scheme.vx, &scheme.uv)?;
    let diagnostics = BoundDiagnostics {
        i_xv_given_y: joint.cond_mutual_info(&["X"], &["V"], &["Y"])?,
        i_yv_given_u: joint.cond_mutual_info(&["Y"], &["V"], &["U"])?,
        i_zv_given_u: joint.cond_mutual_info(&["Z"], &["V"], &["U"])?,
        h_x_given_zv: joint.cond_entropy(&["X"], &["Z", "V"])?,
        h_x_given_zu: joint.cond_entropy(&["X"], &["Z", "U"])?,
    };
    let first = diagnostics.i_yv_given_u - diagnostics.i_zv_given_u + diagnostics.h_x_given_zv + key_rate;
    let equiv_max = first.min(diagnostics.h_x_given_zu);

    let pxyv = joint.marginalize(&["X", "Y", "V"])?;
    let nx = source.alphabet("X")?.len();
    let mut distortion = 0.0;
    for x in 0..nx {
        for y in 0..ny {
            for v in 0..nv {
                distortion += pxyv.get(&[x, y, v]) * d.get(x, scheme.recon[y * nv + v]);
            }
        }
    }
    Ok(BoundEvaluation { rate_min: diagnostics.i_xv_given_y, equiv_max, distortion, diagnostics })
}

/// Index of the smallest cost; costs within `1e-15` of the minimum count as
/// ties and resolve to the lowest index.
pub(crate) fn argmin_lowest(costs: impl IntoIterator<Item = f64>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in costs.into_iter().enumerate() {
        if c < best.1 - 1e-15 {
            best = (i, c);
        }
    }
    best
}

/// Bayes reconstruction `x̂(y,v) = argmin_x̂ sum_x p(x|y,v) d(x,x̂)`.
///
/// Pairs with `p(y,v) = 0` map to symbol 0.
pub fn optimal_reconstruction(
    source: &JointDist,
    vx: &CondChannel,
    d: &DistortionMeasure,
) -> Result<Vec<usize>> {
    check_source(source, d)?;
    let pxyv = source.extend(vx)?.marginalize(&["X", "Y", "V"])?;
    let sizes = pxyv.sizes();
    let (nx, ny, nv) = (sizes[0], sizes[1], sizes[2]);
    let nxh = d.recon_alphabet().len();
    let mut recon = vec![0; ny * nv];
    for y in 0..ny {
        for v in 0..nv {
            let pyv: f64 = (0..nx).map(|x| pxyv.get(&[x, y, v])).sum();
            if pyv <= 0.0 {
                continue;
            }
            let costs = (0..nxh).map(|xh| (0..nx).map(|x| pxyv.get(&[x, y, v]) * d.get(x, xh)).sum::<f64>());
            recon[y * nv + v] = argmin_lowest(costs).0;
        }
    }
    Ok(recon)
}
