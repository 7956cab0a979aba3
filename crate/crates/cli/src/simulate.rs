use std::path::PathBuf;

use clap::Args;
use equiregion::osrb::{
    build_protocols, check_budget, finite_n_performance, rate_feasibility, security_gap, tv_protocols, BinningConfig,
    BinningRealization,
};
use rayon::prelude::*;

use crate::output::{csv_writer, finish, num, write_row};
use crate::source::{load_scheme, load_source};
use crate::CliError;

pub const HEADER: [&str; 17] = [
    "seed",
    "n",
    "r1",
    "r2",
    "rt1",
    "rt2",
    "r0",
    "r0_revealed",
    "feasible",
    "eliminated_pair",
    "violated",
    "tv",
    "security_gap",
    "decode_error",
    "distortion",
    "equivocation",
    "zero_mass_events",
];

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub source: PathBuf,
    /// Scheme file (JSON) with `vx`, `uv` and optionally `recon`.
    #[arg(long)]
    pub scheme: PathBuf,
    /// Comma-separated blocklengths.
    #[arg(long, value_delimiter = ',', default_value = "2,4")]
    pub n: Vec<usize>,
    /// Number of binning realizations per blocklength.
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    /// First realization seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub r1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r2: f64,
    #[arg(long, default_value_t = 0.0)]
    pub rt1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub rt2: f64,
    /// Secret key rate.
    #[arg(long, default_value_t = 0.0)]
    pub r0: f64,
    /// Key rate that is also revealed to the eavesdropper.
    #[arg(long, default_value_t = 0.0)]
    pub r0_revealed: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(a: &SimulateArgs) -> Result<(), CliError> {
    let spec = load_source(&a.source)?;
    let scheme = load_scheme(&a.scheme, &spec)?;
    if a.n.is_empty() || a.n.contains(&0) {
        return Err(CliError::Validation("--n: blocklengths must be positive".into()));
    }
    let configs: Vec<BinningConfig> = a
        .n
        .iter()
        .map(|&n| {
            let c = BinningConfig { r0_revealed: a.r0_revealed, ..BinningConfig::new(n, a.r1, a.r2, a.rt1, a.rt2, a.r0) };
            c.validate().map(|_| c)
        })
        .collect::<Result<_, _>>()?;
    for c in &configs {
        check_budget(&spec.joint, &scheme, c)?;
    }
    let report = rate_feasibility(&spec.joint, &scheme, &configs[0])?;
    let verdict = [
        report.seven_hold.to_string(),
        report.final_holds.to_string(),
        report.violated.join("; "),
    ];

    let jobs: Vec<(BinningConfig, u64)> =
        configs.iter().flat_map(|c| (a.seed..a.seed + a.seeds).map(move |s| (*c, s))).collect();
    let rows: Vec<Result<Vec<String>, CliError>> = jobs
        .par_iter()
        .map(|(c, seed)| {
            let real = BinningRealization::draw(c, scheme.v_size(), scheme.u_size(), *seed)?;
            let pair = build_protocols(&spec.joint, &scheme, c, &real)?;
            let perf = finite_n_performance(&pair, &spec.distortion)?;
            let mut row = vec![seed.to_string(), c.n.to_string()];
            row.extend([c.r1, c.r2, c.rt1, c.rt2, c.r0, c.r0_revealed].map(num));
            row.extend(verdict.iter().cloned());
            row.extend([tv_protocols(&pair), security_gap(&pair), pair.decode_error(), perf.distortion, perf.equivocation].map(num));
            row.push(pair.zero_mass_events().to_string());
            Ok(row)
        })
        .collect();
    // first failure in job order, so the message does not depend on scheduling
    let rows: Vec<Vec<String>> = rows.into_iter().collect::<Result<_, _>>()?;

    let mut w = csv_writer(a.out.as_ref())?;
    write_row(&mut w, &HEADER.map(String::from))?;
    for row in &rows {
        write_row(&mut w, row)?;
    }
    finish(w)
}
