//! JSON input files.
//!
//! A source file names its alphabets and lists `p(x,y,z)` in row-major
//! `X, Y, Z` order:
//!
//! ```json
//! {
//!   "alphabets": { "X": ["0", "1"], "Y": ["0", "1"], "Z": ["0", "1"] },
//!   "pmf": [0.3375, 0.1125, 0.0375, 0.0125, 0.0125, 0.0375, 0.1125, 0.3375]
//! }
//! ```
//!
//! `Y` and `Z` may be omitted (singleton alphabets). `Xhat` and a
//! `distortion` matrix (rows `X`, columns `Xhat`) are optional; without them
//! Hamming distortion on `X` is used.

use std::path::Path;

use equiregion::region::SchemeMatrices;
use equiregion::{Alphabet, DistortionMeasure, JointDist, SchemeParams};
use serde::Deserialize;

use crate::CliError;

/// Tolerance on the total mass of `pmf`.
pub const PMF_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Alphabets {
    #[serde(rename = "X")]
    x: Vec<String>,
    #[serde(rename = "Y", default)]
    y: Option<Vec<String>>,
    #[serde(rename = "Z", default)]
    z: Option<Vec<String>>,
    #[serde(rename = "Xhat", default)]
    xhat: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceFile {
    alphabets: Alphabets,
    pmf: Vec<f64>,
    #[serde(default)]
    distortion: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub struct SourceSpec {
    pub joint: JointDist,
    pub distortion: DistortionMeasure,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn alphabet(name: &str, symbols: Option<Vec<String>>) -> Result<Alphabet, CliError> {
    match symbols {
        None => Ok(Alphabet::singleton(name)),
        Some(s) => Alphabet::new(name, s).map_err(|e| CliError::Validation(format!("alphabets.{name}: {e}"))),
    }
}

pub fn parse_source(text: &str) -> Result<SourceSpec, CliError> {
    let file: SourceFile = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("source: {e}")))?;
    let x = alphabet("X", Some(file.alphabets.x))?;
    let y = alphabet("Y", file.alphabets.y)?;
    let z = alphabet("Z", file.alphabets.z)?;

    let expected = x.len() * y.len() * z.len();
    if file.pmf.len() != expected {
        return Err(CliError::Validation(format!(
            "pmf: {} entries, expected |X||Y||Z| = {expected}",
            file.pmf.len()
        )));
    }
    if let Some((i, p)) = file.pmf.iter().enumerate().find(|(_, p)| !(p.is_finite() && **p >= 0.0)) {
        return Err(CliError::Validation(format!("pmf: entry {i} is {p}, expected a non-negative number")));
    }
    let sum: f64 = file.pmf.iter().sum();
    if (sum - 1.0).abs() > PMF_SUM_TOLERANCE {
        return Err(CliError::Validation(format!("pmf: entries sum to {sum}, expected 1 within {PMF_SUM_TOLERANCE:e}")));
    }
    let joint = JointDist::from_weights(vec![x.clone(), y, z], file.pmf)
        .map_err(|e| CliError::Validation(format!("pmf: {e}")))?;

    let xhat = match file.alphabets.xhat {
        None => x.renamed("Xhat"),
        Some(s) => alphabet("Xhat", Some(s))?,
    };
    let distortion = match file.distortion {
        Some(rows) => {
            if rows.len() != x.len() || rows.iter().any(|r| r.len() != xhat.len()) {
                return Err(CliError::Validation(format!(
                    "distortion: expected a {} x {} matrix",
                    x.len(),
                    xhat.len()
                )));
            }
            let table: Vec<f64> = rows.into_iter().flatten().collect();
            if let Some(v) = table.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(CliError::Validation(format!("distortion: entry {v} is not a non-negative number")));
            }
            DistortionMeasure::new(x.clone(), xhat, table).map_err(|e| CliError::Validation(format!("distortion: {e}")))?
        }
        None if xhat.symbols() == x.symbols() => DistortionMeasure::hamming(&x),
        None => {
            return Err(CliError::Validation(
                "distortion: required when the Xhat alphabet differs from X".into(),
            ))
        }
    };
    Ok(SourceSpec { joint, distortion })
}

pub fn load_source(path: &Path) -> Result<SourceSpec, CliError> {
    parse_source(&read(path)?).map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Scheme files hold `{"vx": [[..]], "uv": [[..]], "recon": [[..]]}`;
/// `recon` (rows `y`, columns `v`) is optional.
pub fn load_scheme(path: &Path, source: &SourceSpec) -> Result<SchemeParams, CliError> {
    let m: SchemeMatrices = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Validation(format!("{}: scheme: {e}", path.display())))?;
    SchemeParams::from_scheme_matrices(&source.joint, &source.distortion, &m)
        .map_err(|e| CliError::Validation(format!("{}: scheme: {e}", path.display())))
}
