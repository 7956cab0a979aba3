//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use equiregion::osrb::{
    build_protocols, full_space, full_space_tv, scan_rate_polytope, security_gap, tv_protocols, BinRateDomain,
    BinningConfig, BinningRealization, EncoderForm, RateEntropies,
};
use equiregion::prob::{compose, random_channel, random_pmf};
use equiregion::region::{cardinality_saturation_check, key_profile, SaturationAxis, SearchMode, SweepAxis};
use equiregion::special::{drop_decoder_side_info, lemma1_identities, lossless_region, no_key_region, no_si_region};
use equiregion::{
    evaluate_bounds, max_equivocation, region_sweep, Alphabet, CondChannel, DistortionMeasure, JointDist,
    SchemeParams, SearchConfig, SearchOutcome,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn alpha(name: &str, n: usize) -> Alphabet {
    Alphabet::indexed(name, n).unwrap()
}

fn bin(name: &str) -> Alphabet {
    alpha(name, 2)
}

fn hamming() -> DistortionMeasure {
    DistortionMeasure::hamming(&bin("X"))
}

fn dsbs(py: f64, pz: f64) -> JointDist {
    let mut w = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                let a = if x == y { 1.0 - py } else { py };
                let b = if x == z { 1.0 - pz } else { pz };
                w.push(0.5 * a * b);
            }
        }
    }
    JointDist::new(vec![bin("X"), bin("Y"), bin("Z")], w).unwrap()
}

fn random_source(rng: &mut ChaCha8Rng, nx: usize, ny: usize, nz: usize) -> JointDist {
    let vars = vec![alpha("X", nx), alpha("Y", ny), alpha("Z", nz)];
    JointDist::from_weights(vars, random_pmf(rng, nx * ny * nz)).unwrap()
}

fn random_scheme(rng: &mut ChaCha8Rng, nx: usize, ny: usize, nv: usize, nu: usize) -> SchemeParams {
    let vx = random_channel(rng, alpha("X", nx), alpha("V", nv));
    let uv = random_channel(rng, alpha("V", nv), alpha("U", nu));
    let recon = (0..ny * nv).map(|_| rng.gen_range(0..nx)).collect();
    SchemeParams::new(vx, uv, recon).unwrap()
}

/// `V = (X xor Bern(0.25), W)` with a fair bit `W`, `U = V' xor Bern(0.05)`, `x̂ = V'`.
fn padded_scheme() -> SchemeParams {
    let vx: Vec<Vec<f64>> =
        (0..2).map(|x| (0..4).map(|v| if v / 2 == x { 0.375 } else { 0.125 }).collect()).collect();
    let uv: Vec<Vec<f64>> = (0..4).map(|v| (0..2).map(|u| if u == v / 2 { 0.95 } else { 0.05 }).collect()).collect();
    SchemeParams::from_matrices(&bin("X"), &vx, &uv, vec![0, 0, 1, 1, 0, 0, 1, 1]).unwrap()
}

/// Entropies of `p(x,y,z,v,u)` from explicit nested loops.
struct ScalarOracle {
    mass: Vec<([usize; 5], f64)>,
}

impl ScalarOracle {
    fn new(source: &JointDist, scheme: &SchemeParams) -> Self {
        let s = source.sizes();
        let mut mass = Vec::new();
        for x in 0..s[0] {
            for y in 0..s[1] {
                for z in 0..s[2] {
                    for v in 0..scheme.v_size() {
                        for u in 0..scheme.u_size() {
                            let p = source.get(&[x, y, z]) * scheme.vx().row(x)[v] * scheme.uv().row(v)[u];
                            mass.push(([x, y, z, v, u], p));
                        }
                    }
                }
            }
        }
        Self { mass }
    }

    fn h(&self, coords: &[usize]) -> f64 {
        let mut m: HashMap<Vec<usize>, f64> = HashMap::new();
        for (k, p) in &self.mass {
            *m.entry(coords.iter().map(|&c| k[c]).collect()).or_insert(0.0) += p;
        }
        m.values().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
    }

    fn cond_h(&self, a: &[usize], c: &[usize]) -> f64 {
        self.h(&[a, c].concat()) - self.h(c)
    }

    fn cond_i(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        self.h(&[a, c].concat()) + self.h(&[b, c].concat()) - self.h(&[a, b, c].concat()) - self.h(c)
    }
}

const X: usize = 0;
const Y: usize = 1;
const Z: usize = 2;
const V: usize = 3;
const U: usize = 4;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_lemma_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n: Vec<usize> = (0..5).map(|_| rng.gen_range(2..=4)).collect();
        let source = random_source(&mut rng, n[0], n[1], n[2]);
        let scheme = random_scheme(&mut rng, n[0], n[1], n[3], n[4]);
        let joint = compose(&source, scheme.vx(), scheme.uv()).unwrap();
        worst = worst.max(lemma1_identities(&joint).unwrap().spread());
    }
    ensure(worst <= 1e-10, || format!("worst spread {worst:.3e} > 1e-10"))?;
    Ok(format!("1000 joints, worst spread {worst:.2e} <= 1e-10"))
}

fn c2_shannon_cipher() -> Check {
    let source = JointDist::uniform(vec![bin("X"), Alphabet::singleton("Y"), Alphabet::singleton("Z")]).unwrap();
    let mut worst: f64 = 0.0;
    let mut u_gain: f64 = 0.0;
    for k in [0.0, 0.25, 0.5, 1.0, 2.0] {
        let with_u = SearchConfig { u_size: Some(2), ..SearchConfig::default() };
        let flat = SearchConfig { u_size: Some(1), ..SearchConfig::default() };
        let a = max_equivocation(&source, &hamming(), 1.0, k, 0.0, &with_u).unwrap();
        let b = max_equivocation(&source, &hamming(), 1.0, k, 0.0, &flat).unwrap();
        let (Some(a), Some(b)) = (a.equivocation(), b.equivocation()) else {
            return Err(format!("R0 = {k}: infeasible"));
        };
        worst = worst.max((a - k.min(1.0)).abs());
        u_gain = u_gain.max(a - b);
    }
    ensure(worst <= 1e-6, || format!("max |Delta - min(R0, 1)| = {worst:.3e}"))?;
    ensure(u_gain <= 1e-6, || format!("non-constant U gains {u_gain:.3e}"))?;
    Ok(format!("max |Delta - min(R0,1)| = {worst:.2e}; |U|=2 gains {u_gain:.1e} over constant U"))
}

fn c3_corollaries() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = hamming();
    let search = SearchConfig::default();
    let mut worst = [0.0f64; 3];
    let keys: Vec<f64> = (0..=5).map(|i| i as f64 * 0.2).collect();
    for _ in 0..5 {
        let source = dsbs(rng.gen_range(0.05..0.45), rng.gen_range(0.05..0.45));

        let pinned = SearchConfig { pin_v_identity: true, ..search.clone() };
        let lossless = lossless_region(&source, &keys, &pinned).unwrap();
        let axis = SweepAxis::KeyRate { key_rates: keys.clone(), rate_cap: lossless.rate_min + 1e-9, dist_cap: 0.0 };
        let general = region_sweep(&source, &d, &axis, &search).unwrap();
        for (a, b) in lossless.points.iter().zip(&general) {
            worst[0] = worst[0].max(gap(a.point.equivocation, b.point.equivocation));
        }

        let axis = SweepAxis::Rate { caps: vec![0.1, 0.3, 0.5, 0.7, 1.0], key_rate: 0.0, dist_cap: 0.1 };
        let a = no_key_region(&source, &d, &axis, &search).unwrap();
        let b = region_sweep(&source, &d, &axis, &search).unwrap();
        for (p, q) in a.iter().zip(&b) {
            worst[1] = worst[1].max(gap(p.point.equivocation, q.point.equivocation));
        }

        let no_si = drop_decoder_side_info(&source).unwrap();
        let axis = SweepAxis::Distortion { caps: vec![0.05, 0.1, 0.2, 0.3], key_rate: 0.2, rate_cap: 1.0 };
        let a = no_si_region(&no_si, &d, &axis, &search).unwrap();
        let general = SearchConfig { v_size: Some(4), u_size: Some(2), ..search.clone() };
        let b = region_sweep(&no_si, &d, &axis, &general).unwrap();
        for (p, q) in a.iter().zip(&b) {
            worst[2] = worst[2].max(gap(p.point.equivocation, q.point.equivocation));
        }
    }
    ensure(worst.iter().all(|&w| w <= 0.02), || format!("max gaps (lossless, nokey, nosi) = {worst:.4?}"))?;
    Ok(format!("5 sources, max gaps lossless {:.1e}, nokey {:.1e}, nosi {:.1e} <= 0.02", worst[0], worst[1], worst[2]))
}

fn gap(a: f64, b: f64) -> f64 {
    match (a.is_nan(), b.is_nan()) {
        (false, false) => (a - b).abs(),
        (true, true) => 0.0,
        _ => f64::INFINITY,
    }
}

fn c4_key_rate_shape() -> Check {
    let d = hamming();
    let step = 0.1;
    let keys: Vec<f64> = (0..=15).map(|i| i as f64 * step).collect();
    let cases = [(0.1, 0.3, 0.4, 0.1), (0.25, 0.15, 0.5, 0.15), (0.4, 0.1, 1.0, 0.0), (0.2, 0.05, 1.0, 0.1)];
    let mut sweeps = 0;
    for (py, pz, rate_cap, dist_cap) in cases {
        let source = dsbs(py, pz);
        let h = source.cond_entropy(&["X"], &["Z"]).unwrap();
        let axis = SweepAxis::KeyRate { key_rates: keys.clone(), rate_cap, dist_cap };
        let pts = region_sweep(&source, &d, &axis, &SearchConfig::default()).unwrap();
        let e: Vec<f64> = pts.iter().map(|p| p.point.equivocation).collect();
        ensure(e.iter().all(|v| v.is_finite() && *v <= h + 1e-10), || format!("DSBS({py},{pz}): {e:?} vs H(X|Z) {h}"))?;
        for w in e.windows(2) {
            let inc = w[1] - w[0];
            ensure(inc >= 0.0 && inc <= step + 1e-6, || format!("DSBS({py},{pz}): increment {inc}"))?;
        }
        sweeps += 1;
    }

    // the plateau of a fixed scheme with layered key use
    let source = dsbs(0.4, 0.1);
    let vx = CondChannel::identity(bin("X"), "V").unwrap();
    let uv = CondChannel::bsc(bin("V"), "U", 0.2).unwrap();
    let scheme = SchemeParams::new(vx, uv, vec![0, 1, 0, 1]).unwrap();
    let pstep = 0.05;
    let pkeys: Vec<f64> = (0..=24).map(|i| i as f64 * pstep).collect();
    let prof = key_profile(&source, &scheme, &d, &pkeys).unwrap();
    let inc: Vec<f64> = prof.combined.windows(2).map(|w| w[1] - w[0]).collect();
    ensure(inc.iter().all(|&i| i >= 0.0 && i <= pstep + 1e-6), || format!("profile increments {inc:?}"))?;
    let at = inc.windows(2).position(|w| w[0] == 0.0 && w[1] > 0.0);
    let Some(at) = at else { return Err("no flat-then-rising step in the key profile".into()) };
    Ok(format!(
        "{sweeps} sweeps monotone with slope <= 1 and below H(X|Z); plateau ends at R0 = {:.2}",
        pkeys[at + 1]
    ))
}

fn c5_fourier_motzkin() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut agree = 0;
    for _ in 0..50 {
        let (nx, ny, nz) = (rng.gen_range(2..=3), rng.gen_range(1..=3), rng.gen_range(1..=3));
        let (nv, nu) = (rng.gen_range(1..=4), rng.gen_range(1..=3));
        let source = random_source(&mut rng, nx, ny, nz);
        let scheme = random_scheme(&mut rng, nx, ny, nv, nu);
        let e = RateEntropies::from_scheme(&source, &scheme).unwrap();
        let offset = |rng: &mut ChaCha8Rng| {
            let m = rng.gen_range(0.05..0.5);
            if rng.gen_bool(0.5) {
                m
            } else {
                -m
            }
        };
        let r0 = (e.i_xv_given_yu + offset(&mut rng)).max(0.0);
        let r = (e.i_xv_given_y + offset(&mut rng)).max(0.0);
        let eliminated = e.final_pair(r, r0).iter().all(|c| c.holds());
        let witness = scan_rate_polytope(&e, r, r0, ((nv * nu) as f64).log2(), BinRateDomain::Signed);
        let witness_ok = witness.map_or(true, |[r1, r2, rt1, rt2]| e.seven(r0, r1, r2, rt1, rt2).iter().all(|c| c.holds()));
        if eliminated == witness.is_some() && witness_ok {
            agree += 1;
        }
    }
    ensure(agree == 50, || format!("{agree}/50 agree"))?;
    Ok("50/50 instances agree".into())
}

fn c6_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for nx in 2..=3 {
        for ny in 2..=3 {
            for nz in 2..=3 {
                for nv in 2..=3 {
                    for nu in 2..=3 {
                        let source = random_source(&mut rng, nx, ny, nz);
                        let scheme = random_scheme(&mut rng, nx, ny, nv, nu);
                        let b = evaluate_bounds(&source, &scheme, &DistortionMeasure::hamming(&alpha("X", nx)), 0.3)
                            .unwrap();
                        let o = ScalarOracle::new(&source, &scheme);
                        let g = &b.diagnostics;
                        let pairs = [
                            (g.i_xv_given_y, o.cond_i(&[X], &[V], &[Y])),
                            (g.i_yv_given_u, o.cond_i(&[Y], &[V], &[U])),
                            (g.i_zv_given_u, o.cond_i(&[Z], &[V], &[U])),
                            (g.h_x_given_zv, o.cond_h(&[X], &[Z, V])),
                            (g.h_x_given_zu, o.cond_h(&[X], &[Z, U])),
                        ];
                        for (a, b) in pairs {
                            worst = worst.max((a - b).abs());
                        }
                        count += 1;
                    }
                }
            }
        }
    }
    ensure(worst <= 1e-12, || format!("worst diagnostic error {worst:.3e}"))?;

    let mut refined_ok = 0;
    for _ in 0..4 {
        let source = random_source(&mut rng, 2, 2, 2);
        let search = SearchConfig { grid: 6, u_size: Some(2), mode: SearchMode::Exhaustive, ..SearchConfig::default() };
        let bare = SearchConfig { refine_levels: 0, ..search.clone() };
        let a = max_equivocation(&source, &hamming(), 0.3, 0.2, 0.2, &search).unwrap();
        let b = max_equivocation(&source, &hamming(), 0.3, 0.2, 0.2, &bare).unwrap();
        match (&a, b.equivocation()) {
            (SearchOutcome::Achieved { equivocation, .. }, Some(base)) => {
                ensure(*equivocation >= base, || format!("refined {equivocation} < grid {base}"))?
            }
            (SearchOutcome::Infeasible, None) => {}
            _ => return Err("refined and grid searches disagree on feasibility".into()),
        }
        refined_ok += 1;
    }
    Ok(format!("{count} instances, worst error {worst:.1e} <= 1e-12; refinement >= exhaustive grid on {refined_ok}/4"))
}

fn digits(mut s: usize, a: usize, n: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for i in (0..n).rev() {
        d[i] = s % a;
        s /= a;
    }
    d
}

fn c7_protocol_exactness() -> Check {
    let source = dsbs(0.05, 0.3);
    let scheme = padded_scheme();
    let mut worst: f64 = 0.0;
    for n in [1usize, 2, 4] {
        let c = BinningConfig::new(n, 0.5, 1.5, 0.0, 0.0, 1.0);
        let real = BinningRealization::draw(&c, 4, 2, 3).unwrap();
        let pair = build_protocols(&source, &scheme, &c, &real).unwrap();
        let got = pair.protocol_a_sequence_marginal();
        let [sx, sy, sz, sv, su] = pair.sequence_counts();
        let mut idx = 0;
        for x in 0..sx {
            for y in 0..sy {
                for z in 0..sz {
                    for v in 0..sv {
                        for u in 0..su {
                            let (xd, yd, zd) = (digits(x, 2, n), digits(y, 2, n), digits(z, 2, n));
                            let (vd, ud) = (digits(v, 4, n), digits(u, 2, n));
                            let want: f64 = (0..n)
                                .map(|i| {
                                    source.get(&[xd[i], yd[i], zd[i]])
                                        * scheme.vx().row(xd[i])[vd[i]]
                                        * scheme.uv().row(vd[i])[ud[i]]
                                })
                                .product();
                            worst = worst.max((got[idx] - want).abs());
                            idx += 1;
                        }
                    }
                }
            }
        }
    }
    ensure(worst <= 1e-15, || format!("sequence marginal error {worst:.3e}"))?;

    let source = dsbs(0.1, 0.3);
    let vx = CondChannel::bsc(bin("X"), "V", 0.25).unwrap();
    let uv = CondChannel::bsc(bin("V"), "U", 0.3).unwrap();
    let scheme = SchemeParams::new(vx, uv, vec![0, 1, 0, 1]).unwrap();
    let mut tv_err: f64 = 0.0;
    for n in [1usize, 2] {
        let c = BinningConfig::new(n, 0.5, 1.0, 0.5, 0.5, 0.5);
        for seed in 0..8 {
            let real = BinningRealization::draw(&c, 2, 2, seed).unwrap();
            let pair = build_protocols(&source, &scheme, &c, &real).unwrap();
            let fs = full_space(&pair, EncoderForm::JointPosterior).unwrap();
            tv_err = tv_err.max((full_space_tv(&fs) - tv_protocols(&pair)).abs());
        }
    }
    ensure(tv_err <= 1e-12, || format!("reduced vs full-space TV error {tv_err:.3e}"))?;
    Ok(format!("product error {worst:.1e} at n=1,2,4; TV identity error {tv_err:.1e} <= 1e-12 at n=1,2"))
}

fn c8_trends() -> Check {
    let source = dsbs(0.05, 0.3);
    let scheme = padded_scheme();
    let seeds = 20u64;
    let mean = |n: usize| {
        let c = BinningConfig::new(n, 0.5, 1.5, 0.0, 0.0, 1.0);
        let mut m = [0.0; 3];
        for seed in 0..seeds {
            let real = BinningRealization::draw(&c, 4, 2, seed).unwrap();
            let p = build_protocols(&source, &scheme, &c, &real).unwrap();
            m[0] += tv_protocols(&p) / seeds as f64;
            m[1] += security_gap(&p) / seeds as f64;
            m[2] += p.decode_error() / seeds as f64;
        }
        m
    };
    let (two, four) = (mean(2), mean(4));
    let names = ["tv", "security gap", "decode error"];
    for k in 0..3 {
        ensure(four[k] < two[k], || format!("{} does not drop: n=2 {:.4}, n=4 {:.4}", names[k], two[k], four[k]))?;
    }
    Ok(format!(
        "{seeds} seeds, n=2 -> 4: tv {:.3} -> {:.3}, gap {:.3} -> {:.3}, decode error {:.3} -> {:.3}",
        two[0], four[0], two[1], four[1], two[2], four[2]
    ))
}

fn c9_cardinality() -> Check {
    let source = dsbs(0.25, 0.15);
    let axis = SaturationAxis { rate_cap: 0.5, dist_cap: 0.15, key_rates: (0..=10).map(|i| i as f64 * 0.1).collect() };
    let search = SearchConfig { allow_oversize: true, ..SearchConfig::default() };
    let r = cardinality_saturation_check(&source, &hamming(), &axis, (2, 6), (2, 7), &search).unwrap();
    ensure(r.small.iter().all(Option::is_some), || "some sweep point is infeasible".into())?;
    ensure(r.max_improvement <= 0.02, || format!("|U| 6 -> 7 improves by {:.4}", r.max_improvement))?;
    Ok(format!("|U| 6 -> 7 over {} key rates, max improvement {:.1e} <= 0.02", r.key_rates.len(), r.max_improvement))
}

fn bin_path() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_equiregion"))
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run_cli(args: &[&str], threads: &str, out: &Path) -> (Output, Vec<u8>) {
    let _ = std::fs::remove_file(out);
    let mut full: Vec<&str> = args.to_vec();
    let out_s = out.to_str().unwrap();
    full.extend(["--out", out_s]);
    let o = Command::new(bin_path()).args(&full).env("EQUIREGION_THREADS", threads).output().unwrap();
    let file = std::fs::read(out).unwrap_or_default();
    (o, file)
}

fn c10_determinism() -> Check {
    let dir = std::env::temp_dir().join(format!("equiregion-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let dsbs = data("dsbs.json");
    let dsbs = dsbs.to_str().unwrap();
    let no_si = data("no_si.json");
    let shared = data("shared_si.json");
    let scheme = data("padded_scheme.json");
    let commands: Vec<Vec<&str>> = vec![
        vec!["region", "--source", dsbs, "--r0", "0.2", "--dist-cap", "0.03", "--seed", "4"],
        vec!["region", "--source", dsbs, "--r0", "0.2", "--rate-cap", "0.4", "--dist-grid", "0:0.1:0.02", "--mode", "local"],
        vec!["identities", "--trials", "300", "--seed", "7"],
        vec![
            "simulate", "--source", dsbs, "--scheme", scheme.to_str().unwrap(), "--n", "2,3", "--seeds", "6", "--r1",
            "0.5", "--r2", "1.5", "--r0", "1",
        ],
        vec!["corollary", "lossless", "--source", shared.to_str().unwrap(), "--r0", "0:1:0.25"],
        vec!["corollary", "nokey", "--source", dsbs, "--dist-cap", "0.03"],
        vec!["corollary", "nosi", "--source", no_si.to_str().unwrap(), "--r0", "0.2"],
    ];
    for (i, args) in commands.iter().enumerate() {
        let out = dir.join(format!("run{i}.csv"));
        let runs: Vec<(Output, Vec<u8>)> = ["1", "1", "4"].iter().map(|t| run_cli(args, t, &out)).collect();
        let first = &runs[0];
        ensure(first.0.status.success(), || format!("{} exited with {:?}", args.join(" "), first.0.status))?;
        ensure(!first.1.is_empty(), || format!("{}: empty output", args[0]))?;
        for r in &runs[1..] {
            let same = r.0.status.code() == first.0.status.code()
                && r.0.stdout == first.0.stdout
                && r.0.stderr == first.0.stderr
                && r.1 == first.1;
            ensure(same, || format!("`{}` output differs between runs", args.join(" ")))?;
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} commands byte-identical across 3 runs (1, 1, 4 threads)", commands.len()))
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Check); 10] = [
        (1, "lemma identities", Duration::from_secs(10), c1_lemma_identities),
        (2, "shannon cipher", Duration::from_secs(60), c2_shannon_cipher),
        (3, "corollary cross-validation", Duration::from_secs(600), c3_corollaries),
        (4, "key-rate shape", Duration::from_secs(600), c4_key_rate_shape),
        (5, "fourier-motzkin", Duration::from_secs(300), c5_fourier_motzkin),
        (6, "oracle equivalence", Duration::from_secs(600), c6_oracle),
        (7, "protocol exactness", Duration::from_secs(600), c7_protocol_exactness),
        (8, "binning trends", Duration::from_secs(900), c8_trends),
        (9, "cardinality saturation", Duration::from_secs(600), c9_cardinality),
        (10, "determinism", Duration::from_secs(600), c10_determinism),
    ];
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let elapsed = start.elapsed();
        let result = result.and_then(|m| {
            if elapsed <= limit {
                Ok(m)
            } else {
                Err(format!("{m}; took {elapsed:.1?}, limit {limit:?}"))
            }
        });
        match result {
            Ok(m) => println!("PASS criterion {id:>2} {name}: {m} ({elapsed:.2?})"),
            Err(m) => {
                failed += 1;
                println!("FAIL criterion {id:>2} {name}: {m} ({elapsed:.2?})");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
