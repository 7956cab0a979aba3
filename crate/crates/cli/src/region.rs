use std::path::PathBuf;

use clap::Args;
use equiregion::region::SweepAxis;
use equiregion::{region_sweep, SchemeParams, SearchOutcome};

use crate::output::{csv_writer, finish, num, parse_grid, write_row};
use crate::source::load_source;
use crate::{CliError, SearchArgs};

pub const HEADER: [&str; 8] = ["R", "R0", "D", "Delta", "status", "R_scheme", "D_scheme", "scheme-digest"];

#[derive(Debug, Args)]
pub struct RegionArgs {
    /// Source file (JSON).
    #[arg(long)]
    pub source: PathBuf,
    /// Key rate in bits per symbol.
    #[arg(long, default_value_t = 0.0)]
    pub r0: f64,
    /// Single rate cap.
    #[arg(long, conflicts_with = "rate_grid")]
    pub rate_cap: Option<f64>,
    /// Rate caps as start:stop:step (default 0:log2|X|:0.1).
    #[arg(long, conflicts_with = "dist_grid")]
    pub rate_grid: Option<String>,
    /// Single distortion cap (default: the largest distortion value).
    #[arg(long, conflicts_with = "dist_grid")]
    pub dist_cap: Option<f64>,
    /// Distortion caps as start:stop:step; sweeps distortion at a fixed rate cap.
    #[arg(long)]
    pub dist_grid: Option<String>,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Output CSV (default stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Self-contained JSON form of a witness scheme.
pub fn digest(scheme: &SchemeParams) -> String {
    serde_json::to_string(&scheme.to_matrices()).expect("matrices serialize")
}

pub fn default_rate_grid(nx: usize) -> Vec<f64> {
    let top = (nx as f64).log2();
    let steps = (top / 0.1 + 1e-9).floor() as usize;
    (0..=steps).map(|i| i as f64 * 0.1).collect()
}

fn non_negative(flag: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("--{flag}: expected a non-negative number, got {v}")))
    }
}

pub fn run(a: &RegionArgs) -> Result<(), CliError> {
    let spec = load_source(&a.source)?;
    let key_rate = non_negative("r0", a.r0)?;
    let nx = spec.joint.sizes()[0];
    let axis = match &a.dist_grid {
        Some(g) => SweepAxis::Distortion {
            caps: parse_grid("dist-grid", g)?,
            key_rate,
            rate_cap: non_negative("rate-cap", a.rate_cap.unwrap_or((nx as f64).log2()))?,
        },
        None => SweepAxis::Rate {
            caps: match (&a.rate_grid, a.rate_cap) {
                (Some(g), _) => parse_grid("rate-grid", g)?,
                (None, Some(r)) => vec![non_negative("rate-cap", r)?],
                (None, None) => default_rate_grid(nx),
            },
            key_rate,
            dist_cap: non_negative("dist-cap", a.dist_cap.unwrap_or(spec.distortion.max_value()))?,
        },
    };
    let points = region_sweep(&spec.joint, &spec.distortion, &axis, &a.search.config())?;

    let mut w = csv_writer(a.out.as_ref())?;
    write_row(&mut w, &HEADER.map(String::from))?;
    for p in &points {
        let q = &p.point;
        let row = match &p.outcome {
            SearchOutcome::Achieved { equivocation, scheme, bounds, .. } => [
                num(q.rate),
                num(q.key_rate),
                num(q.distortion),
                num(*equivocation),
                "ok".into(),
                num(bounds.rate_min),
                num(bounds.distortion),
                digest(scheme),
            ],
            SearchOutcome::Infeasible => [
                num(q.rate),
                num(q.key_rate),
                num(q.distortion),
                String::new(),
                "infeasible".into(),
                String::new(),
                String::new(),
                String::new(),
            ],
        };
        write_row(&mut w, &row)?;
    }
    finish(w)
}
