use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::protocol::ProtocolPair;
use super::{digits, OsrbError, Result};

/// Largest blocklength materialized in full.
pub const FULL_SPACE_MAX_N: usize = 2;
const FULL_SPACE_BUDGET: u64 = 1 << 24;

/// How Protocol B's encoder is derived from Protocol A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncoderForm {
    /// `P_A(u^n, v^n | x^n, f1, kbar, f2)`.
    JointPosterior,
    /// `P_A(v^n | x^n, f1, kbar) P_A(u^n | v^n, f2)`.
    Factored,
}

/// One point of the full protocol space. Sequences are base-alphabet indices;
/// `xhat` is indexed base `max(recon) + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FullTuple {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub u: usize,
    pub v: usize,
    pub m1: u64,
    pub m2: u64,
    pub f1: u64,
    pub f2: u64,
    pub kbar: u64,
    pub uhat: usize,
    pub vhat: usize,
    pub xhat: usize,
}

#[derive(Debug, Clone)]
pub struct FullSpace {
    pub a: BTreeMap<FullTuple, f64>,
    pub b: BTreeMap<FullTuple, f64>,
    /// `(x^n, F)` with `p(x^n) > 0` where the encoder fell back to uniform.
    pub zero_mass_events: usize,
}

impl FullSpace {
    /// Sum of `f` over `a` or `b`, grouped by `key`.
    pub fn marginal<K: Ord>(map: &BTreeMap<FullTuple, f64>, key: impl Fn(&FullTuple) -> K) -> BTreeMap<K, f64> {
        let mut out = BTreeMap::new();
        for (t, &m) in map {
            *out.entry(key(t)).or_insert(0.0) += m;
        }
        out
    }
}

/// Materializes both protocols over every variable, without using the
/// reduced tables of the pair. Only for `n <= 2`.
pub fn full_space(pair: &ProtocolPair, form: EncoderForm) -> Result<FullSpace> {
    let n = pair.n;
    if n > FULL_SPACE_MAX_N {
        return Err(OsrbError::BudgetExceeded {
            what: "full-space blocklength".into(),
            needed: n.to_string(),
            limit: FULL_SPACE_MAX_N.to_string(),
        });
    }
    let [nx, ny, nz, nv, nu] = pair.sizes;
    let [sx, sy, sz, sv, su] = pair.counts;
    let work = (sx * sy * sz * sv * su) as u64 * pair.n_f;
    if work > FULL_SPACE_BUDGET {
        return Err(OsrbError::BudgetExceeded {
            what: "full-space tuples".into(),
            needed: work.to_string(),
            limit: FULL_SPACE_BUDGET.to_string(),
        });
    }
    let nxh = pair.recon.iter().max().map_or(1, |m| m + 1);
    let r = &pair.realization;
    let xd: Vec<_> = (0..sx).map(|s| digits(s, nx, n)).collect();
    let yd: Vec<_> = (0..sy).map(|s| digits(s, ny, n)).collect();
    let zd: Vec<_> = (0..sz).map(|s| digits(s, nz, n)).collect();
    let vd: Vec<_> = (0..sv).map(|s| digits(s, nv, n)).collect();
    let ud: Vec<_> = (0..su).map(|s| digits(s, nu, n)).collect();
    let letter = |x: usize, y: usize, z: usize, v: usize, u: usize| pair.single[(((x * ny + y) * nz + z) * nv + v) * nu + u];

    let tuple = |x, y, z, u, v, f1: u64, kbar: u64, f2: u64| {
        let m1 = u64::from(r.m1[v]);
        let m2 = u64::from(r.m2[u]);
        let v_key = m1 + pair.n_m1 * (f1 + pair.n_f1 * kbar);
        let u_key = m2 + pair.n_m2 * f2;
        let (uhat, vhat) = pair.decode_keys(y, v_key, u_key).or_zero();
        let xhat = pair.recon_index(&yd[y], &vd[vhat], nxh);
        FullTuple { x, y, z, u, v, m1, m2, f1, f2, kbar, uhat, vhat, xhat }
    };

    let mut a = BTreeMap::new();
    for x in 0..sx {
        for y in 0..sy {
            for z in 0..sz {
                for v in 0..sv {
                    for u in 0..su {
                        let m: f64 = (0..n).map(|i| letter(xd[x][i], yd[y][i], zd[z][i], vd[v][i], ud[u][i])).product();
                        if m > 0.0 {
                            let t = tuple(x, y, z, u, v, u64::from(r.f1[v]), u64::from(r.kbar[v]), u64::from(r.f2[u]));
                            *a.entry(t).or_insert(0.0) += m;
                        }
                    }
                }
            }
        }
    }

    // Protocol A marginals that define the encoder
    let p_xyz = FullSpace::marginal(&a, |t| (t.x, t.y, t.z));
    let p_x = FullSpace::marginal(&a, |t| t.x);
    let q_xf = FullSpace::marginal(&a, |t| (t.x, t.f1, t.kbar, t.f2));
    let q_xfuv = FullSpace::marginal(&a, |t| (t.x, t.f1, t.kbar, t.f2, t.u, t.v));
    let q_xk = FullSpace::marginal(&a, |t| (t.x, t.f1, t.kbar));
    let q_xkv = FullSpace::marginal(&a, |t| (t.x, t.f1, t.kbar, t.v));
    let q_vf2 = FullSpace::marginal(&a, |t| (t.v, t.f2));
    let q_vf2u = FullSpace::marginal(&a, |t| (t.v, t.f2, t.u));

    let nf = pair.n_f as usize;
    let mut b = BTreeMap::new();
    let mut zero_mass_events = 0;
    for x in 0..sx {
        if get(&p_x, x) == 0.0 {
            continue;
        }
        for f in 0..nf {
            let (f1, kbar, f2) = pair.f_parts(f);
            // encoder row over (u, v)
            let mut enc = vec![0.0; su * sv];
            match form {
                EncoderForm::JointPosterior => {
                    let q = get(&q_xf, (x, f1, kbar, f2));
                    if q == 0.0 {
                        zero_mass_events += 1;
                        enc.iter_mut().for_each(|e| *e = 1.0 / (su * sv) as f64);
                    } else {
                        for u in 0..su {
                            for v in 0..sv {
                                enc[u * sv + v] = get(&q_xfuv, (x, f1, kbar, f2, u, v)) / q;
                            }
                        }
                    }
                }
                EncoderForm::Factored => {
                    let qk = get(&q_xk, (x, f1, kbar));
                    if qk == 0.0 || get(&q_xf, (x, f1, kbar, f2)) == 0.0 {
                        zero_mass_events += 1;
                    }
                    for v in 0..sv {
                        let pv = if qk == 0.0 { 1.0 / sv as f64 } else { get(&q_xkv, (x, f1, kbar, v)) / qk };
                        if pv == 0.0 {
                            continue;
                        }
                        let qv = get(&q_vf2, (v, f2));
                        for u in 0..su {
                            let pu = if qv == 0.0 { 1.0 / su as f64 } else { get(&q_vf2u, (v, f2, u)) / qv };
                            enc[u * sv + v] = pv * pu;
                        }
                    }
                }
            }
            for y in 0..sy {
                for z in 0..sz {
                    let p = get(&p_xyz, (x, y, z));
                    if p == 0.0 {
                        continue;
                    }
                    for u in 0..su {
                        for v in 0..sv {
                            let e = enc[u * sv + v];
                            if e > 0.0 {
                                *b.entry(tuple(x, y, z, u, v, f1, kbar, f2)).or_insert(0.0) += p * e / nf as f64;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(FullSpace { a, b, zero_mass_events })
}

fn get<K: Ord>(m: &BTreeMap<K, f64>, k: K) -> f64 {
    m.get(&k).copied().unwrap_or(0.0)
}

/// `||P_A - P_B||_1` over the full space.
pub fn full_space_tv(space: &FullSpace) -> f64 {
    let mut total = 0.0;
    for (t, &pa) in &space.a {
        total += (pa - space.b.get(t).copied().unwrap_or(0.0)).abs();
    }
    for (t, &pb) in &space.b {
        if !space.a.contains_key(t) {
            total += pb;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::osrb::{build_protocols, security_gap, tv_protocols, BinningConfig, BinningRealization};
    use crate::prob::{Alphabet, CondChannel, JointDist};
    use crate::region::SchemeParams;

    fn bin(name: &str) -> Alphabet {
        Alphabet::indexed(name, 2).unwrap()
    }

    fn pair(seed: u64, config: &BinningConfig) -> ProtocolPair {
        let source = JointDist::new(
            vec![bin("X"), bin("Y"), bin("Z")],
            vec![0.3, 0.05, 0.1, 0.02, 0.04, 0.12, 0.07, 0.3],
        )
        .unwrap();
        let vx = CondChannel::from_rows(bin("X"), bin("V"), &[vec![0.8, 0.2], vec![0.3, 0.7]]).unwrap();
        let uv = CondChannel::from_rows(bin("V"), bin("U"), &[vec![0.6, 0.4], vec![0.1, 0.9]]).unwrap();
        let scheme = SchemeParams::new(vx, uv, vec![0, 1, 1, 1]).unwrap();
        let real = BinningRealization::draw(config, 2, 2, seed).unwrap();
        build_protocols(&source, &scheme, config, &real).unwrap()
    }

    #[test]
    fn both_protocols_normalized() {
        let config = BinningConfig::new(2, 0.5, 0.5, 0.5, 0.5, 0.5);
        for seed in 0..4 {
            let fs = full_space(&pair(seed, &config), EncoderForm::JointPosterior).unwrap();
            let sa: f64 = fs.a.values().sum();
            let sb: f64 = fs.b.values().sum();
            assert!((sa - 1.0).abs() < 1e-12, "{sa}");
            assert!((sb - 1.0).abs() < 1e-12, "{sb}");
        }
    }

    #[test]
    fn reduced_tv_matches_full_space() {
        let config = BinningConfig::new(2, 0.5, 0.5, 0.5, 0.5, 0.5);
        for seed in 0..6 {
            let p = pair(seed, &config);
            let fs = full_space(&p, EncoderForm::JointPosterior).unwrap();
            assert!((full_space_tv(&fs) - tv_protocols(&p)).abs() < 1e-12);
        }
    }

    #[test]
    fn protocol_b_randomness_is_uniform() {
        let config = BinningConfig::new(2, 0.5, 0.5, 0.5, 1.0, 0.5);
        let p = pair(3, &config);
        for form in [EncoderForm::JointPosterior, EncoderForm::Factored] {
            let fs = full_space(&p, form).unwrap();
            let m = FullSpace::marginal(&fs.b, |t| (t.f1, t.kbar, t.f2));
            assert_eq!(m.len() as u64, p.n_f);
            assert!(m.values().all(|w| (w - 1.0 / p.n_f as f64).abs() < 1e-12));
        }
    }

    #[test]
    fn security_gap_matches_full_space() {
        let config = BinningConfig::new(2, 0.5, 0.5, 0.5, 0.5, 0.5);
        for seed in 0..6 {
            let p = pair(seed, &config);
            let fs = full_space(&p, EncoderForm::JointPosterior).unwrap();
            let cells = (p.n_m1 * p.n_f1) as f64;
            let xzu = FullSpace::marginal(&fs.a, |t| (t.x, t.z, t.u));
            let joint = FullSpace::marginal(&fs.a, |t| (t.x, t.z, t.u, t.m1, t.f1));
            let mut gap = 0.0;
            for (&(x, z, u), &m) in &xzu {
                for m1 in 0..p.n_m1 {
                    for f1 in 0..p.n_f1 {
                        gap += (joint.get(&(x, z, u, m1, f1)).copied().unwrap_or(0.0) - m / cells).abs();
                    }
                }
            }
            assert!((gap - security_gap(&p)).abs() < 1e-12, "{gap} vs {}", security_gap(&p));
        }
    }

    #[test]
    fn factored_encoder_breaks_reduction() {
        let config = BinningConfig::new(2, 0.5, 0.5, 0.5, 0.5, 0.5);
        let gaps: Vec<f64> = (0..6)
            .map(|seed| {
                let p = pair(seed, &config);
                let fs = full_space(&p, EncoderForm::Factored).unwrap();
                assert!((fs.b.values().sum::<f64>() - 1.0).abs() < 1e-12);
                (full_space_tv(&fs) - tv_protocols(&p)).abs()
            })
            .collect();
        assert!(gaps.iter().any(|&g| g > 1e-6), "{gaps:?}");
    }

    #[test]
    fn n_three_is_rejected() {
        let config = BinningConfig::new(3, 0.0, 0.0, 0.0, 0.0, 0.0);
        let source = JointDist::uniform(vec![bin("X"), bin("Y"), bin("Z")]).unwrap();
        let vx = CondChannel::identity(bin("X"), "V").unwrap();
        let uv = CondChannel::identity(bin("V"), "U").unwrap();
        let scheme = SchemeParams::new(vx, uv, vec![0, 1, 0, 1]).unwrap();
        let real = BinningRealization::draw(&config, 2, 2, 0).unwrap();
        let p = build_protocols(&source, &scheme, &config, &real).unwrap();
        assert!(full_space(&p, EncoderForm::JointPosterior).is_err());
    }
}
