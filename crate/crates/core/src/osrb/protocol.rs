use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{digits, seq_count, BinningConfig, BinningRealization, OsrbError, Result, RANDOMNESS_BUDGET, SEQUENCE_BUDGET_BITS};
use crate::prob::{compose, entropy_of, DistortionMeasure, JointDist};
use crate::region::SchemeParams;

/// Largest `|X^n| |F|` table, and largest fallback workload.
const TABLE_BUDGET: u64 = 1 << 26;

/// Protocol A and Protocol B for one realized binning, held in factored form.
///
/// Protocol A draws `(x^n, y^n, z^n, v^n, u^n)` i.i.d. and computes all bin
/// indices from the sequences. Protocol B draws `(F1, K, F2)` uniformly and
/// encodes with the Protocol A posterior of `(u^n, v^n)` given `(x^n, F)`.
/// Both share the decoder. `F` stands for `(F1, Kbar, F2)` with index
/// `f1 + |F1| (kbar + |Kbar| f2)`.
#[derive(Debug, Clone)]
pub struct ProtocolPair {
    pub(super) config: BinningConfig,
    pub(super) realization: BinningRealization,
    pub(super) n: usize,
    /// Single-letter sizes `(X, Y, Z, V, U)`.
    pub(super) sizes: [usize; 5],
    /// Sequence counts `(X^n, Y^n, Z^n, V^n, U^n)`.
    pub(super) counts: [usize; 5],
    /// Single-letter `p(x,y,z,v,u)`, row-major in that order.
    pub(super) single: Vec<f64>,
    pub(super) recon: Vec<usize>,
    px: Vec<f64>,
    pxy: Vec<f64>,
    pxz: Vec<f64>,
    pyv: Vec<f64>,
    pub(super) pvx: Vec<f64>,
    pub(super) puv: Vec<f64>,
    pub(super) n_m1: u64,
    pub(super) n_m2: u64,
    pub(super) n_f1: u64,
    pub(super) n_kbar: u64,
    pub(super) n_f2: u64,
    pub(super) n_f: u64,
    /// `P_A(F = f | x^n)`, indexed `[x * n_f + f]`.
    t: Vec<f64>,
    /// Per `y^n`: `(V^n bin key, U^n bin key) -> (u^n, v^n)`.
    decoder: Vec<HashMap<(u64, u64), (u32, u32)>>,
    zero_mass: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecoderInput {
    pub y: usize,
    pub m1: u64,
    pub m2: u64,
    pub f1: u64,
    pub f2: u64,
    /// Full key index `k + |K| k'`.
    pub kbar: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecodeOutcome {
    Decoded { u: usize, v: usize },
    /// No `(u^n, v^n)` matches all five bin values.
    Failure,
}

impl DecodeOutcome {
    /// The decoded pair, with the all-zero sequences standing in on failure.
    pub fn or_zero(self) -> (usize, usize) {
        match self {
            DecodeOutcome::Decoded { u, v } => (u, v),
            DecodeOutcome::Failure => (0, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FinitePerformance {
    /// `E d(X^n, Xhat^n) / n` under Protocol B.
    pub distortion: f64,
    /// `H(X^n | Z^n, M1, M2, F1, F2, K') / n` under Protocol B.
    pub equivocation: f64,
}

/// `mat` is `rows x cols` row-major; returns its `n`-fold Kronecker power.
fn kron_power(mat: &[f64], rows: usize, cols: usize, n: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    let (mut r, mut c) = (1, 1);
    for _ in 0..n {
        let mut next = vec![0.0; r * rows * c * cols];
        for i in 0..r {
            for j in 0..c {
                let a = out[i * c + j];
                if a == 0.0 {
                    continue;
                }
                for k in 0..rows {
                    let base = (i * rows + k) * c * cols + j * cols;
                    for l in 0..cols {
                        next[base + l] = a * mat[k * cols + l];
                    }
                }
            }
        }
        out = next;
        r *= rows;
        c *= cols;
    }
    out
}

fn budget(what: &str, needed: impl ToString, limit: impl ToString) -> OsrbError {
    OsrbError::BudgetExceeded { what: what.into(), needed: needed.to_string(), limit: limit.to_string() }
}

/// Rejects a configuration whose exact evaluation would exceed the
/// enumeration budgets, before any realization is drawn.
pub fn check_budget(source: &JointDist, scheme: &SchemeParams, config: &BinningConfig) -> Result<()> {
    config.validate()?;
    let s = source.sizes();
    if s.len() != 3 {
        return Err(OsrbError::InvalidConfig("source must be a joint over (X, Y, Z)".into()));
    }
    check_sizes([s[0], s[1], s[2], scheme.v_size(), scheme.u_size()], config)
}

fn check_sizes(sizes: [usize; 5], config: &BinningConfig) -> Result<()> {
    let bits = config.n as f64 * sizes.iter().map(|&s| (s as f64).log2()).sum::<f64>();
    if bits > SEQUENCE_BUDGET_BITS + 1e-9 {
        return Err(budget("sequence tuples (bits)", format!("{bits:.3}"), SEQUENCE_BUDGET_BITS));
    }
    let n_f = config.n_randomness();
    if n_f > RANDOMNESS_BUDGET {
        return Err(budget("common randomness values", n_f, RANDOMNESS_BUDGET));
    }
    let sx = seq_count(sizes[0], config.n)? as u64;
    if sx.saturating_mul(n_f) > TABLE_BUDGET {
        return Err(budget("|X^n| |F| table", sx.saturating_mul(n_f), TABLE_BUDGET));
    }
    Ok(())
}

pub fn build_protocols(
    source: &JointDist,
    scheme: &SchemeParams,
    config: &BinningConfig,
    realization: &BinningRealization,
) -> Result<ProtocolPair> {
    config.validate()?;
    let joint = compose(source, scheme.vx(), scheme.uv())?;
    if joint.names() != ["X", "Y", "Z", "V", "U"] {
        return Err(OsrbError::InvalidConfig("source must be a joint over (X, Y, Z)".into()));
    }
    let sizes: [usize; 5] = joint.sizes().try_into().expect("five variables");
    let [nx, ny, nz, nv, nu] = sizes;
    let n = config.n;
    check_sizes(sizes, config)?;
    let n_f = config.n_randomness();
    let counts = sizes.map(|s| seq_count(s, n)).map(|c| c.expect("within sequence budget"));
    let [sx, sy, _, sv, su] = counts;
    if scheme.recon().len() != ny * nv {
        return Err(OsrbError::InvalidConfig(format!(
            "reconstruction map has {} entries, expected |Y||V| = {}",
            scheme.recon().len(),
            ny * nv
        )));
    }
    let r = realization;
    if r.m1.len() != sv || r.f1.len() != sv || r.kbar.len() != sv || r.m2.len() != su || r.f2.len() != su {
        return Err(OsrbError::InvalidConfig("realization does not cover every sequence".into()));
    }
    let in_range = |idx: &[u32], bins: u64| idx.iter().all(|&i| u64::from(i) < bins);
    if !(in_range(&r.m1, config.n_m1())
        && in_range(&r.f1, config.n_f1())
        && in_range(&r.kbar, config.n_kbar())
        && in_range(&r.m2, config.n_m2())
        && in_range(&r.f2, config.n_f2()))
    {
        return Err(OsrbError::InvalidConfig("realization index outside its bin range".into()));
    }

    let single = joint.mass().to_vec();
    let px1 = source.marginalize(&["X"])?.mass().to_vec();
    let pxy1 = source.marginalize(&["X", "Y"])?.mass().to_vec();
    let pxz1 = source.marginalize(&["X", "Z"])?.mass().to_vec();
    let pyv1 = joint.marginalize(&["Y", "V"])?.mass().to_vec();
    let mut pair = ProtocolPair {
        config: *config,
        realization: realization.clone(),
        n,
        sizes,
        counts,
        single,
        recon: scheme.recon().to_vec(),
        px: kron_power(&px1, 1, nx, n),
        pxy: kron_power(&pxy1, nx, ny, n),
        pxz: kron_power(&pxz1, nx, nz, n),
        pyv: kron_power(&pyv1, ny, nv, n),
        pvx: kron_power(scheme.vx().kernel(), nx, nv, n),
        puv: kron_power(scheme.uv().kernel(), nv, nu, n),
        n_m1: config.n_m1(),
        n_m2: config.n_m2(),
        n_f1: config.n_f1(),
        n_kbar: config.n_kbar(),
        n_f2: config.n_f2(),
        n_f,
        t: Vec::new(),
        decoder: Vec::new(),
        zero_mass: 0,
    };
    pair.t = pair.randomness_posterior();
    pair.zero_mass = (0..sx)
        .filter(|&x| pair.px[x] > 0.0)
        .map(|x| pair.t_row(x).iter().filter(|&&t| t == 0.0).count())
        .sum();
    pair.decoder = (0..sy).into_par_iter().map(|y| pair.decoder_table(y)).collect();
    Ok(pair)
}

impl ProtocolPair {
    pub fn config(&self) -> &BinningConfig {
        &self.config
    }

    pub fn realization(&self) -> &BinningRealization {
        &self.realization
    }

    /// Sequence counts `(X^n, Y^n, Z^n, V^n, U^n)`.
    pub fn sequence_counts(&self) -> [usize; 5] {
        self.counts
    }

    /// Number of `(x^n, F)` with `p(x^n) > 0` that Protocol A never produces.
    /// Protocol B encodes uniformly over `(u^n, v^n)` in those events.
    pub fn zero_mass_events(&self) -> usize {
        self.zero_mass
    }

    pub(super) fn v_key(&self, v: usize) -> u64 {
        let r = &self.realization;
        u64::from(r.m1[v]) + self.n_m1 * (u64::from(r.f1[v]) + self.n_f1 * u64::from(r.kbar[v]))
    }

    pub(super) fn u_key(&self, u: usize) -> u64 {
        u64::from(self.realization.m2[u]) + self.n_m2 * u64::from(self.realization.f2[u])
    }

    pub(super) fn f_index(&self, v: usize, u: usize) -> usize {
        let r = &self.realization;
        let f = u64::from(r.f1[v]) + self.n_f1 * (u64::from(r.kbar[v]) + self.n_kbar * u64::from(r.f2[u]));
        f as usize
    }

    /// `(f1, kbar, f2)` of a randomness index.
    pub(super) fn f_parts(&self, f: usize) -> (u64, u64, u64) {
        let f = f as u64;
        (f % self.n_f1, (f / self.n_f1) % self.n_kbar, f / (self.n_f1 * self.n_kbar))
    }

    fn t_row(&self, x: usize) -> &[f64] {
        let nf = self.n_f as usize;
        &self.t[x * nf..(x + 1) * nf]
    }

    fn randomness_posterior(&self) -> Vec<f64> {
        let [sx, _, _, sv, su] = self.counts;
        let nf = self.n_f as usize;
        let mut t = vec![0.0; sx * nf];
        t.par_chunks_mut(nf).enumerate().for_each(|(x, row)| {
            for v in 0..sv {
                let pv = self.pvx[x * sv + v];
                if pv == 0.0 {
                    continue;
                }
                for u in 0..su {
                    let w = pv * self.puv[v * su + u];
                    if w > 0.0 {
                        row[self.f_index(v, u)] += w;
                    }
                }
            }
        });
        t
    }

    fn decoder_table(&self, y: usize) -> HashMap<(u64, u64), (u32, u32)> {
        let [_, ny, _, nv, nu] = self.sizes;
        let [_, _, _, sv, su] = self.counts;
        let n = self.n;
        let letters = ny * nv * nu;
        // single-letter p(y,v,u), which is p(y,v) p(u|v) under the Markov chain
        let mut q = vec![0.0; letters];
        for (i, m) in self.single.iter().enumerate() {
            let u = i % nu;
            let v = (i / nu) % nv;
            let y = (i / (nu * nv * self.sizes[2])) % ny;
            q[(y * nv + v) * nu + u] += m;
        }
        let yd = digits(y, ny, n);
        let vds: Vec<Vec<usize>> = (0..sv).map(|v| digits(v, nv, n)).collect();
        let mut best: HashMap<(u64, u64), (f64, u32, u32)> = HashMap::new();
        let mut counts = vec![0i32; letters];
        for u in 0..su {
            let ud = digits(u, nu, n);
            let uk = self.u_key(u);
            for (v, vd) in vds.iter().enumerate() {
                counts.iter_mut().for_each(|c| *c = 0);
                for i in 0..n {
                    counts[(yd[i] * nv + vd[i]) * nu + ud[i]] += 1;
                }
                // product over letter types in a fixed order, so sequences that
                // are permutations of each other score identically
                let score = counts.iter().zip(&q).filter(|(&c, _)| c > 0).map(|(&c, &p)| p.powi(c)).product::<f64>();
                best.entry((self.v_key(v), uk))
                    .and_modify(|e| {
                        if score > e.0 {
                            *e = (score, u as u32, v as u32);
                        }
                    })
                    .or_insert((score, u as u32, v as u32));
            }
        }
        best.into_iter().map(|(k, (_, u, v))| (k, (u, v))).collect()
    }

    pub(super) fn decode_keys(&self, y: usize, v_key: u64, u_key: u64) -> DecodeOutcome {
        match self.decoder[y].get(&(v_key, u_key)) {
            Some(&(u, v)) => DecodeOutcome::Decoded { u: u as usize, v: v as usize },
            None => DecodeOutcome::Failure,
        }
    }

    /// `(1/n) sum_i d(x_i, xhat(y_i, v_i))`.
    pub(super) fn seq_distortion(&self, d: &DistortionMeasure, x: &[usize], y: &[usize], v: &[usize]) -> f64 {
        let nv = self.sizes[3];
        let total: f64 = (0..self.n).map(|i| d.get(x[i], self.recon[y[i] * nv + v[i]])).sum();
        total / self.n as f64
    }

    /// Reconstruction sequence index for `(y^n, v^n)`, base `|Xhat|`.
    pub(super) fn recon_index(&self, y: &[usize], v: &[usize], nxh: usize) -> usize {
        let nv = self.sizes[3];
        (0..self.n).fold(0, |acc, i| acc * nxh + self.recon[y[i] * nv + v[i]])
    }

    /// Block error probability `P_A[(Uhat^n, Vhat^n) != (U^n, V^n)]`.
    pub fn decode_error(&self) -> f64 {
        let [_, sy, _, sv, su] = self.counts;
        let errs: Vec<f64> = (0..sy)
            .into_par_iter()
            .map(|y| {
                let mut e = 0.0;
                for v in 0..sv {
                    let pyv = self.pyv[y * sv + v];
                    if pyv == 0.0 {
                        continue;
                    }
                    let vk = self.v_key(v);
                    for u in 0..su {
                        let w = pyv * self.puv[v * su + u];
                        if w > 0.0 && self.decode_keys(y, vk, self.u_key(u)) != (DecodeOutcome::Decoded { u, v }) {
                            e += w;
                        }
                    }
                }
                e
            })
            .collect();
        errs.iter().sum()
    }

    /// `p(x^n, y^n, z^n, v^n, u^n)` under Protocol A, row-major in that order.
    pub fn protocol_a_sequence_marginal(&self) -> Vec<f64> {
        let [nx, ny, nz, nv, nu] = self.sizes;
        let [sx, sy, sz, sv, su] = self.counts;
        let n = self.n;
        let pxyz1: Vec<f64> = self.single.chunks(nv * nu).map(|c| c.iter().sum()).collect();
        // columns of the power interleave (y_i, z_i); map them to (y^n, z^n)
        let letters = kron_power(&pxyz1, nx, ny * nz, n);
        let remap: Vec<usize> = (0..sy * sz)
            .map(|c| {
                let d = digits(c, ny * nz, n);
                let y = d.iter().fold(0, |a, &l| a * ny + l / nz);
                let z = d.iter().fold(0, |a, &l| a * nz + l % nz);
                y * sz + z
            })
            .collect();
        let syz = sy * sz;
        let mut out = vec![0.0; sx * syz * sv * su];
        out.par_chunks_mut(syz * sv * su).enumerate().for_each(|(x, block)| {
            for (c, &yz) in remap.iter().enumerate() {
                let a = letters[x * syz + c];
                if a == 0.0 {
                    continue;
                }
                for v in 0..sv {
                    let b = a * self.pvx[x * sv + v];
                    for u in 0..su {
                        block[(yz * sv + v) * su + u] = b * self.puv[v * su + u];
                    }
                }
            }
        });
        out
    }

    /// `P_A(F)` and `P_B(F)` are compared through `P(x^n) P(F|x^n)`; this is
    /// the Protocol A marginal `P_A(x^n, F)`, indexed `[x * |F| + f]`.
    pub fn protocol_a_randomness_joint(&self) -> Vec<f64> {
        let nf = self.n_f as usize;
        self.t.iter().enumerate().map(|(i, t)| self.px[i / nf] * t).collect()
    }
}

/// Runs the Slepian-Wolf decoder: the most likely `(u^n, v^n)` under
/// Protocol A given `y^n` among the pairs matching all five bin values. Ties go
/// to the smallest `u^n`, then the smallest `v^n`.
pub fn sw_decode(pair: &ProtocolPair, input: &DecoderInput) -> Result<DecodeOutcome> {
    let in_range = input.y < pair.counts[1]
        && input.m1 < pair.n_m1
        && input.m2 < pair.n_m2
        && input.f1 < pair.n_f1
        && input.f2 < pair.n_f2
        && input.kbar < pair.n_kbar;
    if !in_range {
        return Err(OsrbError::InvalidConfig(format!("decoder input out of range: {input:?}")));
    }
    let v_key = input.m1 + pair.n_m1 * (input.f1 + pair.n_f1 * input.kbar);
    let u_key = input.m2 + pair.n_m2 * input.f2;
    Ok(pair.decode_keys(input.y, v_key, u_key))
}

/// `||P_A - P_B||_1` on `(X^n, Y^n, Z^n, F1, F2, K)`, which equals the
/// distance between the full joints.
pub fn tv_protocols(pair: &ProtocolPair) -> f64 {
    let nf = pair.n_f as usize;
    let uniform = 1.0 / nf as f64;
    let per_x: Vec<f64> = (0..pair.counts[0])
        .into_par_iter()
        .map(|x| pair.px[x] * pair.t_row(x).iter().map(|t| (t - uniform).abs()).sum::<f64>())
        .collect();
    per_x.iter().sum()
}

/// `||P_A(x^n, z^n, u^n, m1, f1) - p(x^n, z^n, u^n) / (|M1| |F1|)||_1`.
pub fn security_gap(pair: &ProtocolPair) -> f64 {
    let [sx, _, _, sv, su] = pair.counts;
    let cells = pair.n_m1 * pair.n_f1;
    let r = &pair.realization;
    let per_x: Vec<f64> = (0..sx)
        .into_par_iter()
        .map(|x| {
            if pair.px[x] == 0.0 {
                return 0.0;
            }
            let mut total = 0.0;
            let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
            for u in 0..su {
                acc.clear();
                let mut pu = 0.0;
                for v in 0..sv {
                    let w = pair.pvx[x * sv + v] * pair.puv[v * su + u];
                    if w > 0.0 {
                        *acc.entry(u64::from(r.m1[v]) + pair.n_m1 * u64::from(r.f1[v])).or_default() += w;
                        pu += w;
                    }
                }
                if pu == 0.0 {
                    continue;
                }
                let c = pu / cells as f64;
                let touched: f64 = acc.values().map(|a| (a - c).abs()).sum();
                total += touched + (cells - acc.len() as u64) as f64 * c;
            }
            pair.px[x] * total
        })
        .collect();
    per_x.iter().sum()
}

/// Exact distortion and equivocation of Protocol B, where the decoder sees the
/// shared randomness and the eavesdropper sees `(Z^n, M1, M2, F1, F2, K')`.
pub fn finite_n_performance(pair: &ProtocolPair, d: &DistortionMeasure) -> Result<FinitePerformance> {
    let [nx, ny, _, nv, _] = pair.sizes;
    let [sx, sy, sz, sv, su] = pair.counts;
    let n = pair.n;
    if d.source_alphabet().len() != nx {
        return Err(OsrbError::InvalidConfig("distortion measure does not match the source alphabet".into()));
    }
    let nxh = d.recon_alphabet().len();
    if pair.recon.iter().any(|&r| r >= nxh) {
        return Err(OsrbError::InvalidConfig("reconstruction symbol outside the distortion alphabet".into()));
    }
    let nf = pair.n_f as usize;
    let r = &pair.realization;

    // bin populations for the uniform fallback
    let population = |idx: &[u32]| -> Vec<(u64, f64)> {
        let mut m: BTreeMap<u64, usize> = BTreeMap::new();
        idx.iter().for_each(|&i| *m.entry(u64::from(i)).or_default() += 1);
        m.into_iter().map(|(k, c)| (k, c as f64 / idx.len() as f64)).collect()
    };
    let cv = population(&r.m1);
    let cu = population(&r.m2);
    let fallback_work = (pair.zero_mass as u64).saturating_mul((cv.len() * cu.len()) as u64).saturating_mul(sy as u64);
    if fallback_work > TABLE_BUDGET {
        return Err(budget("uniform-fallback workload", fallback_work, TABLE_BUDGET));
    }

    let xds: Vec<Vec<usize>> = (0..sx).map(|x| digits(x, nx, n)).collect();
    let yds: Vec<Vec<usize>> = (0..sy).map(|y| digits(y, ny, n)).collect();
    let vds: Vec<Vec<usize>> = (0..sv).map(|v| digits(v, nv, n)).collect();
    let n_k = pair.config.n_k();
    let public = |m1: u64, m2: u64, f1: u64, f2: u64, kbar: u64| -> u128 {
        let k_rev = kbar / n_k;
        let mut o = u128::from(k_rev);
        for (val, size) in [(f2, pair.n_f2), (f1, pair.n_f1), (m2, pair.n_m2), (m1, pair.n_m1)] {
            o = o * u128::from(size) + u128::from(val);
        }
        o
    };

    struct PerX {
        distortion: f64,
        public: BTreeMap<u128, f64>,
    }
    let per_x: Vec<PerX> = (0..sx)
        .into_par_iter()
        .map(|x| {
            let mut out = PerX { distortion: 0.0, public: BTreeMap::new() };
            if pair.px[x] == 0.0 {
                return out;
            }
            let t = pair.t_row(x);
            let xd = &xds[x];
            for v in 0..sv {
                let pv = pair.pvx[x * sv + v];
                if pv == 0.0 {
                    continue;
                }
                let vk = pair.v_key(v);
                for u in 0..su {
                    let w = pv * pair.puv[v * su + u];
                    if w == 0.0 {
                        continue;
                    }
                    let f = pair.f_index(v, u);
                    let w = w / (nf as f64 * t[f]);
                    let uk = pair.u_key(u);
                    let (f1, kbar, f2) = pair.f_parts(f);
                    *out.public.entry(public(u64::from(r.m1[v]), u64::from(r.m2[u]), f1, f2, kbar)).or_default() += w;
                    for y in 0..sy {
                        let pxy = pair.pxy[x * sy + y];
                        if pxy > 0.0 {
                            let (_, vh) = pair.decode_keys(y, vk, uk).or_zero();
                            out.distortion += pxy * w * pair.seq_distortion(d, xd, &yds[y], &vds[vh]);
                        }
                    }
                }
            }
            for f in (0..nf).filter(|&f| t[f] == 0.0) {
                let (f1, kbar, f2) = pair.f_parts(f);
                for &(a, ca) in &cv {
                    for &(b, cb) in &cu {
                        let w = ca * cb / nf as f64;
                        *out.public.entry(public(a, b, f1, f2, kbar)).or_default() += w;
                        let vk = a + pair.n_m1 * (f1 + pair.n_f1 * kbar);
                        let uk = b + pair.n_m2 * f2;
                        for y in 0..sy {
                            let pxy = pair.pxy[x * sy + y];
                            if pxy > 0.0 {
                                let (_, vh) = pair.decode_keys(y, vk, uk).or_zero();
                                out.distortion += pxy * w * pair.seq_distortion(d, xd, &yds[y], &vds[vh]);
                            }
                        }
                    }
                }
            }
            out
        })
        .collect();

    let distortion = per_x.iter().map(|p| p.distortion).sum::<f64>();
    let h_xz = entropy_of(&pair.pxz);
    let h_o_given_x: f64 = per_x
        .iter()
        .enumerate()
        .map(|(x, p)| pair.px[x] * entropy_of(&p.public.values().copied().collect::<Vec<_>>()))
        .sum();
    let mut z_public: BTreeMap<u128, Vec<f64>> = BTreeMap::new();
    for (x, p) in per_x.iter().enumerate() {
        for (&o, &w) in &p.public {
            let row = z_public.entry(o).or_insert_with(|| vec![0.0; sz]);
            for (z, slot) in row.iter_mut().enumerate() {
                *slot += pair.pxz[x * sz + z] * w;
            }
        }
    }
    let h_zo = entropy_of(&z_public.into_values().flatten().collect::<Vec<_>>());
    let equivocation = ((h_xz + h_o_given_x - h_zo) / n as f64).max(0.0);
    Ok(FinitePerformance { distortion, equivocation })
}
