#![allow(dead_code)]

use std::collections::HashMap;

use equiregion::prob::{random_channel, random_pmf};
use equiregion::{Alphabet, CondChannel, JointDist, SchemeParams};
use rand::Rng;

pub fn alpha(name: &str, n: usize) -> Alphabet {
    Alphabet::indexed(name, n).unwrap()
}

pub fn bin(name: &str) -> Alphabet {
    alpha(name, 2)
}

/// Uniform binary X, `Y = X xor Bern(py)`, `Z = X xor Bern(pz)`.
pub fn dsbs(py: f64, pz: f64) -> JointDist {
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

/// Uniform binary X with singleton Y and `Z = X xor Bern(pz)`.
pub fn no_si_source(pz: f64) -> JointDist {
    let w = vec![0.5 * (1.0 - pz), 0.5 * pz, 0.5 * pz, 0.5 * (1.0 - pz)];
    JointDist::new(vec![bin("X"), Alphabet::singleton("Y"), bin("Z")], w).unwrap()
}

pub fn bsc_scheme(pv: f64, pu: f64, recon: Vec<usize>) -> SchemeParams {
    let vx = CondChannel::bsc(bin("X"), "V", pv).unwrap();
    let uv = CondChannel::bsc(bin("V"), "U", pu).unwrap();
    SchemeParams::new(vx, uv, recon).unwrap()
}

pub fn random_source<R: Rng>(rng: &mut R, nx: usize, ny: usize, nz: usize) -> JointDist {
    let vars = vec![alpha("X", nx), alpha("Y", ny), alpha("Z", nz)];
    JointDist::from_weights(vars, random_pmf(rng, nx * ny * nz)).unwrap()
}

pub fn random_scheme<R: Rng>(rng: &mut R, nx: usize, ny: usize, nv: usize, nu: usize) -> SchemeParams {
    let vx = random_channel(rng, alpha("X", nx), alpha("V", nv));
    let uv = random_channel(rng, alpha("V", nv), alpha("U", nu));
    let recon = (0..ny * nv).map(|_| rng.gen_range(0..nx)).collect();
    SchemeParams::new(vx, uv, recon).unwrap()
}

/// `p(x,y,z,v,u)` built with explicit nested loops, keyed by the symbol tuple.
pub struct ScalarJoint {
    pub mass: HashMap<[usize; 5], f64>,
}

impl ScalarJoint {
    pub fn new(source: &JointDist, scheme: &SchemeParams) -> Self {
        let s = source.sizes();
        let (nv, nu) = (scheme.v_size(), scheme.u_size());
        let mut mass = HashMap::new();
        for x in 0..s[0] {
            for y in 0..s[1] {
                for z in 0..s[2] {
                    for v in 0..nv {
                        for u in 0..nu {
                            let p = source.get(&[x, y, z])
                                * scheme.vx().row(x)[v]
                                * scheme.uv().row(v)[u];
                            mass.insert([x, y, z, v, u], p);
                        }
                    }
                }
            }
        }
        Self { mass }
    }

    /// Entropy of the listed coordinates (0 = X, 1 = Y, 2 = Z, 3 = V, 4 = U).
    pub fn h(&self, coords: &[usize]) -> f64 {
        let mut marg: HashMap<Vec<usize>, f64> = HashMap::new();
        for (k, &p) in &self.mass {
            *marg.entry(coords.iter().map(|&c| k[c]).collect()).or_insert(0.0) += p;
        }
        marg.values().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
    }

    pub fn cond_h(&self, a: &[usize], c: &[usize]) -> f64 {
        let ac: Vec<usize> = a.iter().chain(c).copied().collect();
        self.h(&ac) - self.h(c)
    }

    pub fn cond_i(&self, a: &[usize], b: &[usize], c: &[usize]) -> f64 {
        let ac: Vec<usize> = a.iter().chain(c).copied().collect();
        let bc: Vec<usize> = b.iter().chain(c).copied().collect();
        let abc: Vec<usize> = a.iter().chain(b).chain(c).copied().collect();
        self.h(&ac) + self.h(&bc) - self.h(&abc) - self.h(c)
    }
}

pub const X: usize = 0;
pub const Y: usize = 1;
pub const Z: usize = 2;
pub const V: usize = 3;
pub const U: usize = 4;
