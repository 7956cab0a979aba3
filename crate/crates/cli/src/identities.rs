use std::path::PathBuf;

use clap::{Args, ValueEnum};
use equiregion::prob::{compose, random_channel, random_pmf};
use equiregion::special::{lemma1_identities, LemmaForms};
use equiregion::{Alphabet, JointDist};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::output::{csv_writer, finish, num, write_row};
use crate::CliError;

pub const SPREAD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Random source and test channels, alphabets of size 2 to 4.
    Random,
    /// Constant `U` and `V`.
    Degenerate,
    /// A random joint over all five variables, with no Markov structure.
    Corrupt,
}

#[derive(Debug, Args)]
pub struct IdentitiesArgs {
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Random)]
    pub mode: Mode,
    /// Per-trial CSV of the four forms.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn alpha(name: &str, n: usize) -> Alphabet {
    Alphabet::indexed(name, n).expect("non-empty alphabet")
}

fn trial(seed: u64, index: u64, mode: Mode) -> Result<([usize; 5], LemmaForms), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut sizes = [0usize; 5];
    for s in &mut sizes {
        *s = rng.gen_range(2..=4);
    }
    if mode == Mode::Degenerate {
        sizes[3] = 1;
        sizes[4] = 1;
    }
    let [nx, ny, nz, nv, nu] = sizes;
    let base = [alpha("X", nx), alpha("Y", ny), alpha("Z", nz)];
    let joint = match mode {
        Mode::Random | Mode::Degenerate => {
            let source = JointDist::from_weights(base.to_vec(), random_pmf(&mut rng, nx * ny * nz))
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let vx = random_channel(&mut rng, alpha("X", nx), alpha("V", nv));
            let uv = random_channel(&mut rng, alpha("V", nv), alpha("U", nu));
            compose(&source, &vx, &uv)
        }
        Mode::Corrupt => {
            let vars = [base.to_vec(), vec![alpha("V", nv), alpha("U", nu)]].concat();
            JointDist::from_weights(vars, random_pmf(&mut rng, nx * ny * nz * nv * nu))
        }
    }
    .map_err(|e| CliError::Validation(e.to_string()))?;
    let forms = lemma1_identities(&joint)?;
    Ok((sizes, forms))
}

pub fn run(a: &IdentitiesArgs) -> Result<(), CliError> {
    let results: Vec<_> = (0..a.trials)
        .into_par_iter()
        .map(|i| trial(a.seed, i, a.mode))
        .collect::<Result<_, _>>()?;

    if a.out.is_some() {
        let mut w = csv_writer(a.out.as_ref())?;
        let header = ["trial", "nx", "ny", "nz", "nv", "nu", "form_a", "form_b", "form_c", "form_d", "spread"];
        write_row(&mut w, &header.map(String::from))?;
        for (i, (s, f)) in results.iter().enumerate() {
            let mut row = vec![i.to_string()];
            row.extend(s.iter().map(usize::to_string));
            row.extend([f.form_a, f.form_b, f.form_c, f.form_d, f.spread()].map(num));
            write_row(&mut w, &row)?;
        }
        finish(w)?;
    }

    let (worst_trial, worst) = results
        .iter()
        .enumerate()
        .map(|(i, (_, f))| (i, f.spread()))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    let pass = worst <= SPREAD_TOLERANCE;
    println!("trials: {}", a.trials);
    println!("worst spread: {worst:.3e} (trial {worst_trial})");
    println!("tolerance: {SPREAD_TOLERANCE:e}");
    println!("result: {}", if pass { "PASS" } else { "FAIL" });
    if pass {
        Ok(())
    } else {
        Err(CliError::Check(format!("worst spread {worst:.3e} exceeds {SPREAD_TOLERANCE:e}")))
    }
}
