use std::path::PathBuf;

use clap::{Args, ValueEnum};
use equiregion::region::{SweepAxis, SweepPoint};
use equiregion::special::{lossless_region, no_key_region, no_si_region};
use equiregion::{region_sweep, DistortionMeasure, SearchConfig};

use crate::output::{csv_writer, finish, num, parse_grid, parse_list, write_row};
use crate::region::default_rate_grid;
use crate::source::{load_source, SourceSpec};
use crate::{CliError, SearchArgs};

pub const HEADER: [&str; 6] = ["R", "R0", "D", "Delta_corollary", "Delta_general", "diff"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Zero Hamming distortion, swept over key rates.
    Lossless,
    /// No key, swept over rate or distortion caps.
    Nokey,
    /// Singleton decoder side information, swept over distortion caps.
    Nosi,
}

impl Kind {
    /// Largest accepted gap between the two boundaries.
    pub fn tolerance(self) -> f64 {
        match self {
            Self::Nokey => 1e-9,
            Self::Lossless | Self::Nosi => 0.02,
        }
    }
}

#[derive(Debug, Args)]
pub struct CorollaryArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub source: PathBuf,
    /// Key rates as a comma list or start:stop:step.
    #[arg(long, default_value = "0")]
    pub r0: String,
    #[arg(long, conflicts_with = "rate_grid")]
    pub rate_cap: Option<f64>,
    /// Rate caps for nokey (default 0:log2|X|:0.1).
    #[arg(long)]
    pub rate_grid: Option<String>,
    #[arg(long, conflicts_with = "dist_grid")]
    pub dist_cap: Option<f64>,
    /// Distortion caps for nosi (default ten steps up to the largest distortion).
    #[arg(long)]
    pub dist_grid: Option<String>,
    #[command(flatten)]
    pub search: SearchArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn is_hamming(spec: &SourceSpec) -> Result<bool, CliError> {
    let x = spec.joint.alphabet("X")?;
    let d = &spec.distortion;
    Ok(d.recon_alphabet().symbols() == x.symbols() && d.table() == DistortionMeasure::hamming(x).table())
}

fn default_dist_grid(d_max: f64) -> Vec<f64> {
    if d_max == 0.0 {
        return vec![0.0];
    }
    (0..=10).map(|i| d_max * i as f64 / 10.0).collect()
}

/// Corollary and general boundaries, matched point by point.
fn boundaries(a: &CorollaryArgs, spec: &SourceSpec) -> Result<Vec<(SweepPoint, SweepPoint)>, CliError> {
    let (source, d) = (&spec.joint, &spec.distortion);
    let keys = parse_list("r0", &a.r0)?;
    if keys.iter().any(|&k| k < 0.0) {
        return Err(CliError::Validation("--r0: key rates must be non-negative".into()));
    }
    let search = a.search.config();
    let nx = source.sizes()[0];
    let log_x = (nx as f64).log2();
    let pairs = match a.kind {
        Kind::Lossless => {
            if !is_hamming(spec)? {
                return Err(CliError::Validation("distortion: the lossless boundary needs Hamming distortion".into()));
            }
            let pinned = SearchConfig { pin_v_identity: true, ..search.clone() };
            let lossless = lossless_region(source, &keys, &pinned)?;
            let axis = SweepAxis::KeyRate { key_rates: keys, rate_cap: lossless.rate_min + 1e-9, dist_cap: 0.0 };
            let general = region_sweep(source, d, &axis, &search)?;
            lossless.points.into_iter().zip(general).collect()
        }
        Kind::Nokey => {
            if keys != [0.0] {
                return Err(CliError::Validation("--r0: the key-free boundary is evaluated at key rate 0".into()));
            }
            let axis = match &a.dist_grid {
                Some(g) => SweepAxis::Distortion {
                    caps: parse_grid("dist-grid", g)?,
                    key_rate: 0.0,
                    rate_cap: a.rate_cap.unwrap_or(log_x),
                },
                None => SweepAxis::Rate {
                    caps: match (&a.rate_grid, a.rate_cap) {
                        (Some(g), _) => parse_grid("rate-grid", g)?,
                        (None, Some(r)) => vec![r],
                        (None, None) => default_rate_grid(nx),
                    },
                    key_rate: 0.0,
                    dist_cap: a.dist_cap.unwrap_or(d.max_value()),
                },
            };
            let corollary = no_key_region(source, d, &axis, &search)?;
            let general = region_sweep(source, d, &axis, &search)?;
            corollary.into_iter().zip(general).collect()
        }
        Kind::Nosi => {
            if source.alphabet("Y")?.len() != 1 {
                return Err(CliError::Validation("alphabets.Y: the no-side-information boundary needs |Y| = 1".into()));
            }
            if a.rate_grid.is_some() {
                return Err(CliError::Validation("--rate-grid: nosi sweeps distortion; use --dist-grid".into()));
            }
            let caps = match (&a.dist_grid, a.dist_cap) {
                (Some(g), _) => parse_grid("dist-grid", g)?,
                (None, Some(c)) => vec![c],
                (None, None) => default_dist_grid(d.max_value()),
            };
            // witnesses use V = (Xhat, U), so the general search gets the same |V|
            let nu = search.u_size.unwrap_or(nx);
            let nxh = d.recon_alphabet().len();
            let general_search = SearchConfig { v_size: Some(nxh * nu), u_size: Some(nu), ..search.clone() };
            let mut pairs = Vec::new();
            for &key_rate in &keys {
                let axis = SweepAxis::Distortion { caps: caps.clone(), key_rate, rate_cap: a.rate_cap.unwrap_or(log_x) };
                let corollary = no_si_region(source, d, &axis, &search)?;
                let general = region_sweep(source, d, &axis, &general_search)?;
                pairs.extend(corollary.into_iter().zip(general));
            }
            pairs
        }
    };
    Ok(pairs)
}

/// Absolute gap, infinite when only one side is feasible, NaN when neither is.
fn gap(a: f64, b: f64) -> f64 {
    match (a.is_nan(), b.is_nan()) {
        (false, false) => (a - b).abs(),
        (true, true) => f64::NAN,
        _ => f64::INFINITY,
    }
}

pub fn run(a: &CorollaryArgs) -> Result<(), CliError> {
    let spec = load_source(&a.source)?;
    let pairs = boundaries(a, &spec)?;

    let mut w = csv_writer(a.out.as_ref())?;
    write_row(&mut w, &HEADER.map(String::from))?;
    let mut worst: f64 = 0.0;
    for (c, g) in &pairs {
        let p = &c.point;
        let diff = gap(p.equivocation, g.point.equivocation);
        if !diff.is_nan() {
            worst = worst.max(diff);
        }
        let row = [p.rate, p.key_rate, p.distortion, p.equivocation, g.point.equivocation, diff];
        write_row(&mut w, &row.map(|v| if v.is_infinite() { "inf".into() } else { num(v) }))?;
    }
    finish(w)?;

    let tol = a.kind.tolerance();
    let pass = worst <= tol;
    let summary = format!(
        "points: {}\nmax difference: {worst:.3e}\ntolerance: {tol:e}\nresult: {}",
        pairs.len(),
        if pass { "PASS" } else { "FAIL" }
    );
    if a.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Check(format!("corollary and general boundaries differ by {worst:.3e}")))
    }
}
