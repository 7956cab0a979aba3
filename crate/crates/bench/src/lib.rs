//! Fixtures shared by the benchmarks under `benches/`.

use equiregion::{Alphabet, DistortionMeasure, JointDist, SchemeParams};

pub fn bin(name: &str) -> Alphabet {
    Alphabet::indexed(name, 2).expect("non-empty alphabet")
}

/// Doubly symmetric binary source: `Y = X xor Bern(py)`, `Z = X xor Bern(pz)`.
pub fn dsbs(py: f64, pz: f64) -> JointDist {
    let mut w = Vec::with_capacity(8);
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                let a = if x == y { 1.0 - py } else { py };
                let b = if x == z { 1.0 - pz } else { pz };
                w.push(0.5 * a * b);
            }
        }
    }
    JointDist::new(vec![bin("X"), bin("Y"), bin("Z")], w).expect("valid pmf")
}

pub fn hamming() -> DistortionMeasure {
    DistortionMeasure::hamming(&bin("X"))
}

/// `V = (X xor Bern(0.25), W)` with a fair bit `W`, `U = V' xor Bern(0.05)`, `x̂ = V'`.
pub fn padded_scheme() -> SchemeParams {
    let vx: Vec<Vec<f64>> =
        (0..2).map(|x| (0..4).map(|v| if v / 2 == x { 0.375 } else { 0.125 }).collect()).collect();
    let uv: Vec<Vec<f64>> = (0..4).map(|v| (0..2).map(|u| if u == v / 2 { 0.95 } else { 0.05 }).collect()).collect();
    SchemeParams::from_matrices(&bin("X"), &vx, &uv, vec![0, 0, 1, 1, 0, 0, 1, 1]).expect("valid scheme")
}
