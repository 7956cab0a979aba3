//! Closed forms for special cases: the identities between equivalent
//! expressions of the equivocation bound, and the lossless, key-free and
//! no-side-information boundaries.

use serde::{Deserialize, Serialize};

use crate::prob::{clamp_info, entropy_of, Alphabet, DistortionMeasure, JointDist};
use crate::region::optimize::{self, Objective, Query};
use crate::region::search::{self, GridProblem, KernelShape};
use crate::region::{
    evaluate_bounds, RegionError, RegionPoint, Result, SchemeParams, SearchConfig, SearchOutcome, SweepAxis,
    SweepPoint,
};

/// Four expressions that coincide on every joint with `U - V - X - (Y, Z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemmaForms {
    /// `I(Y;V|U) - I(Z;V|U) + H(X|Z,V)`
    pub form_a: f64,
    /// `H(X|Z,U) - I(X;V|Y,U)`
    pub form_b: f64,
    /// `H(X|Z) - I(X;V|Y) + I(Z;U) - I(Y;U)`
    pub form_c: f64,
    /// `H(X|Y,V) + I(X;Y|U) - I(X;Z|U)`
    pub form_d: f64,
}

impl LemmaForms {
    /// Largest pairwise difference among the four forms.
    pub fn spread(&self) -> f64 {
        let v = [self.form_a, self.form_b, self.form_c, self.form_d];
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    }
}

pub fn lemma1_identities(joint: &JointDist) -> Result<LemmaForms> {
    for name in ["U", "V", "X", "Y", "Z"] {
        joint.position(name)?;
    }
    let j = joint;
    Ok(LemmaForms {
        form_a: j.cond_mutual_info(&["Y"], &["V"], &["U"])? - j.cond_mutual_info(&["Z"], &["V"], &["U"])?
            + j.cond_entropy(&["X"], &["Z", "V"])?,
        form_b: j.cond_entropy(&["X"], &["Z", "U"])? - j.cond_mutual_info(&["X"], &["V"], &["Y", "U"])?,
        form_c: j.cond_entropy(&["X"], &["Z"])? - j.cond_mutual_info(&["X"], &["V"], &["Y"])?
            + j.mutual_info(&["Z"], &["U"])?
            - j.mutual_info(&["Y"], &["U"])?,
        form_d: j.cond_entropy(&["X"], &["Y", "V"])? + j.cond_mutual_info(&["X"], &["Y"], &["U"])?
            - j.cond_mutual_info(&["X"], &["Z"], &["U"])?,
    })
}

/// Lossless boundary under Hamming distortion.
#[derive(Debug, Clone, PartialEq)]
pub struct LosslessBoundary {
    /// `H(X|Y)`
    pub rate_min: f64,
    /// One point per key rate, at rate `rate_min` and distortion 0.
    pub points: Vec<SweepPoint>,
}

/// Searches `p(u|x)` directly for `min{I(X;Y|U) - I(X;Z|U) + R0, H(X|Z,U)}`.
struct LosslessProblem {
    nx: usize,
    ny: usize,
    nz: usize,
    nu: usize,
    pxyz: Vec<f64>,
    key_rates: Vec<f64>,
    inner: Vec<KernelShape>,
}

#[derive(Debug, Clone, Copy)]
struct LosslessTerms {
    first: f64,
    h_x_given_zu: f64,
}

impl GridProblem for LosslessProblem {
    type Outer = ();
    type Inner = LosslessTerms;

    fn outer_shapes(&self) -> &[KernelShape] {
        &[]
    }
    fn inner_shapes(&self) -> &[KernelShape] {
        &self.inner
    }
    fn num_queries(&self) -> usize {
        self.key_rates.len()
    }
    fn prepare(&self, _outer: &[Vec<f64>]) {}
    fn violation(&self, _outer: &(), _query: usize) -> f64 {
        0.0
    }
    fn evaluate(&self, _outer: &(), inner: &[Vec<f64>]) -> LosslessTerms {
        let (nx, ny, nz, nu) = (self.nx, self.ny, self.nz, self.nu);
        let ux = &inner[0];
        let mut pu = vec![0.0; nu];
        let mut pxu = vec![0.0; nx * nu];
        let mut pyu = vec![0.0; ny * nu];
        let mut pzu = vec![0.0; nz * nu];
        let mut pxyu = vec![0.0; nx * ny * nu];
        let mut pxzu = vec![0.0; nx * nz * nu];
        for x in 0..nx {
            for y in 0..ny {
                for z in 0..nz {
                    let p = self.pxyz[(x * ny + y) * nz + z];
                    for u in 0..nu {
                        let q = p * ux[x * nu + u];
                        pu[u] += q;
                        pxu[x * nu + u] += q;
                        pyu[y * nu + u] += q;
                        pzu[z * nu + u] += q;
                        pxyu[(x * ny + y) * nu + u] += q;
                        pxzu[(x * nz + z) * nu + u] += q;
                    }
                }
            }
        }
        let (h_u, h_xu, h_xzu, h_zu) = (entropy_of(&pu), entropy_of(&pxu), entropy_of(&pxzu), entropy_of(&pzu));
        let i_xy_u = clamp_info(h_xu + entropy_of(&pyu) - entropy_of(&pxyu) - h_u);
        let i_xz_u = clamp_info(h_xu + h_zu - h_xzu - h_u);
        LosslessTerms { first: i_xy_u - i_xz_u, h_x_given_zu: clamp_info(h_xzu - h_zu) }
    }
    fn value(&self, _outer: &(), t: &LosslessTerms, q: usize) -> f64 {
        (t.first + self.key_rates[q]).min(t.h_x_given_zu)
    }
    fn starts(&self, _grid: u32) -> Vec<Vec<Vec<f64>>> {
        let (nx, nu) = (self.nx, self.nu);
        let mut constant = vec![0.0; nx * nu];
        let mut copy = vec![0.0; nx * nu];
        for x in 0..nx {
            constant[x * nu] = 1.0;
            copy[x * nu + x % nu] = 1.0;
        }
        vec![vec![constant], vec![copy]]
    }
}

/// Lossless boundary from a search over `p(u|x)`, with `|U|` from `search.u_size`.
pub fn lossless_region(source: &JointDist, key_rates: &[f64], search: &SearchConfig) -> Result<LosslessBoundary> {
    let x = source.alphabet("X")?.clone();
    let d = DistortionMeasure::hamming(&x);
    let sizes = source.sizes();
    let (nx, ny, nz) = (sizes[0], sizes[1], sizes[2]);
    let (_, nu) = SearchConfig { pin_v_identity: true, ..search.clone() }.sizes(nx)?;
    let rate_min = source.cond_entropy(&["X"], &["Y"])?;
    let queries: Vec<Query> = SweepAxis::KeyRate { key_rates: key_rates.to_vec(), rate_cap: rate_min, dist_cap: 0.0 }.queries()?;
    let inner = vec![KernelShape { rows: nx, cols: nu }];
    let problem = LosslessProblem {
        nx,
        ny,
        nz,
        nu,
        pxyz: source.mass().to_vec(),
        key_rates: key_rates.to_vec(),
        inner: inner.clone(),
    };
    let cfg = search.engine(search::grid_size(&inner, search.grid))?;
    let results = search::run(&problem, &cfg, &[]);
    let identity: Vec<Vec<f64>> = (0..nx).map(|r| (0..nx).map(|c| f64::from(u8::from(r == c))).collect()).collect();
    let points = queries
        .iter()
        .zip(results)
        .map(|(q, (cand, grid_value))| {
            let cand = cand.expect("lossless search has no constraints");
            let uv: Vec<Vec<f64>> = cand.kernels[0].chunks(nu).map(<[f64]>::to_vec).collect();
            let recon: Vec<usize> = (0..ny).flat_map(|_| 0..nx).collect();
            let scheme = SchemeParams::from_matrices(&x, &identity, &uv, recon)?;
            let bounds = evaluate_bounds(source, &scheme, &d, q.key_rate)?;
            let point = RegionPoint { rate: rate_min, key_rate: q.key_rate, distortion: 0.0, equivocation: cand.value };
            let outcome = SearchOutcome::Achieved {
                equivocation: cand.value,
                grid_value: grid_value.unwrap_or(cand.value),
                scheme,
                bounds,
            };
            Ok(SweepPoint { point, outcome })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LosslessBoundary { rate_min, points })
}

/// Boundary without a key, maximising `I(Y;V|U) - I(Z;V|U) + H(X|Z,V)`.
///
/// The key rate of `axis` must be zero.
pub fn no_key_region(
    source: &JointDist,
    d: &DistortionMeasure,
    axis: &SweepAxis,
    search: &SearchConfig,
) -> Result<Vec<SweepPoint>> {
    let queries = axis.queries()?;
    if queries.iter().any(|q| q.key_rate != 0.0) {
        return Err(RegionError::InvalidParameter("the key-free boundary needs key rate 0".into()));
    }
    let outcomes = optimize::solve_queries(source, d, queries.clone(), search, Objective::KeyFree, &[])?;
    Ok(queries
        .iter()
        .zip(outcomes)
        .map(|(q, outcome)| SweepPoint {
            point: RegionPoint {
                rate: q.rate_cap,
                key_rate: 0.0,
                distortion: q.dist_cap,
                equivocation: outcome.equivocation().unwrap_or(f64::NAN),
            },
            outcome,
        })
        .collect())
}

/// Searches `p(x̂,u|x)` for the boundary without decoder side information.
struct NoSiProblem {
    nx: usize,
    nz: usize,
    nxh: usize,
    nu: usize,
    pxz: Vec<f64>,
    dist: Vec<f64>,
    queries: Vec<Query>,
    outer: Vec<KernelShape>,
}

#[derive(Debug, Clone, Copy)]
struct NoSiTerms {
    rate: f64,
    distortion: f64,
    /// `H(X|Z,X̂,U) - I(Z;X̂|U)`
    first: f64,
    h_x_given_zu: f64,
}

impl GridProblem for NoSiProblem {
    type Outer = NoSiTerms;
    type Inner = ();

    fn outer_shapes(&self) -> &[KernelShape] {
        &self.outer
    }
    fn inner_shapes(&self) -> &[KernelShape] {
        &[]
    }
    fn num_queries(&self) -> usize {
        self.queries.len()
    }
    fn prepare(&self, outer: &[Vec<f64>]) -> NoSiTerms {
        let (nx, nz, nxh, nu) = (self.nx, self.nz, self.nxh, self.nu);
        let k = &outer[0];
        let cols = nxh * nu;
        let mut px = vec![0.0; nx];
        let mut pw = vec![0.0; cols];
        let mut pxw = vec![0.0; nx * cols];
        let mut pu = vec![0.0; nu];
        let mut pzu = vec![0.0; nz * nu];
        let mut pzw = vec![0.0; nz * cols];
        let mut pxzu = vec![0.0; nx * nz * nu];
        let mut pxzw = vec![0.0; nx * nz * cols];
        let mut distortion = 0.0;
        for x in 0..nx {
            for z in 0..nz {
                let p = self.pxz[x * nz + z];
                px[x] += p;
                for w in 0..cols {
                    let q = p * k[x * cols + w];
                    if q == 0.0 {
                        continue;
                    }
                    let (xh, u) = (w / nu, w % nu);
                    pw[w] += q;
                    pxw[x * cols + w] += q;
                    pu[u] += q;
                    pzu[z * nu + u] += q;
                    pzw[z * cols + w] += q;
                    pxzu[(x * nz + z) * nu + u] += q;
                    pxzw[(x * nz + z) * cols + w] += q;
                    distortion += q * self.dist[x * nxh + xh];
                }
            }
        }
        let h_u = entropy_of(&pu);
        let h_zu = entropy_of(&pzu);
        let h_w = entropy_of(&pw);
        let h_zw = entropy_of(&pzw);
        // I(Z;X̂|U) = H(Z,U) + H(X̂,U) - H(Z,X̂,U) - H(U)
        let i_zxh_u = clamp_info(h_zu + h_w - h_zw - h_u);
        NoSiTerms {
            rate: clamp_info(entropy_of(&px) + h_w - entropy_of(&pxw)),
            distortion,
            first: clamp_info(entropy_of(&pxzw) - h_zw) - i_zxh_u,
            h_x_given_zu: clamp_info(entropy_of(&pxzu) - h_zu),
        }
    }
    fn violation(&self, t: &NoSiTerms, q: usize) -> f64 {
        optimize::violation(t.rate, t.distortion, &self.queries[q])
    }
    fn evaluate(&self, _outer: &NoSiTerms, _inner: &[Vec<f64>]) {}
    fn value(&self, t: &NoSiTerms, _inner: &(), q: usize) -> f64 {
        (t.first + self.queries[q].key_rate).min(t.h_x_given_zu)
    }
    fn starts(&self, _grid: u32) -> Vec<Vec<Vec<f64>>> {
        // x̂ = x with U constant, and everything constant
        let cols = self.nxh * self.nu;
        let mut copy = vec![0.0; self.nx * cols];
        let mut constant = vec![0.0; self.nx * cols];
        for x in 0..self.nx {
            copy[x * cols + (x % self.nxh) * self.nu] = 1.0;
            constant[x * cols] = 1.0;
        }
        vec![vec![copy], vec![constant]]
    }
}

/// Boundary for a source with a singleton `Y` alphabet, searched over `p(x̂,u|x)`.
///
/// Each witness is returned as a general scheme with `V = (X̂, U)`.
pub fn no_si_region(
    source: &JointDist,
    d: &DistortionMeasure,
    axis: &SweepAxis,
    search: &SearchConfig,
) -> Result<Vec<SweepPoint>> {
    if source.alphabet("Y")?.len() != 1 {
        return Err(RegionError::InvalidParameter("no-side-information boundary needs |Y| = 1".into()));
    }
    let queries = axis.queries()?;
    let model = crate::region::SourceModel::new(source, d)?;
    let (nx, nz, nxh) = (model.nx, model.nz, model.nxh);
    let nu = search.u_size.unwrap_or(nx);
    if nu == 0 || (!search.allow_oversize && nu > nx + 4) {
        return Err(RegionError::InvalidParameter(format!("|U| = {nu} is outside 1..={}", nx + 4)));
    }
    let outer = vec![KernelShape { rows: nx, cols: nxh * nu }];
    let problem = NoSiProblem {
        nx,
        nz,
        nxh,
        nu,
        pxz: model.pxz.clone(),
        dist: model.dist.clone(),
        queries: queries.clone(),
        outer: outer.clone(),
    };
    let cfg = search.engine(search::grid_size(&outer, search.grid))?;
    let results = search::run(&problem, &cfg, &[]);
    let x = source.alphabet("X")?;
    let nv = nxh * nu;
    let uv: Vec<Vec<f64>> = (0..nv).map(|w| (0..nu).map(|u| f64::from(u8::from(w % nu == u))).collect()).collect();
    let recon: Vec<usize> = (0..nv).map(|w| w / nu).collect();
    queries
        .iter()
        .zip(results)
        .map(|(q, (cand, grid_value))| {
            let outcome = match cand {
                None => SearchOutcome::Infeasible,
                Some(cand) => {
                    let vx: Vec<Vec<f64>> = cand.kernels[0].chunks(nv).map(<[f64]>::to_vec).collect();
                    let scheme = SchemeParams::from_matrices(x, &vx, &uv, recon.clone())?;
                    let bounds = evaluate_bounds(source, &scheme, d, q.key_rate)?;
                    SearchOutcome::Achieved {
                        equivocation: cand.value,
                        grid_value: grid_value.unwrap_or(cand.value),
                        scheme,
                        bounds,
                    }
                }
            };
            Ok(SweepPoint {
                point: RegionPoint {
                    rate: q.rate_cap,
                    key_rate: q.key_rate,
                    distortion: q.dist_cap,
                    equivocation: outcome.equivocation().unwrap_or(f64::NAN),
                },
                outcome,
            })
        })
        .collect()
}

/// `Y` replaced by a singleton alphabet.
pub fn drop_decoder_side_info(source: &JointDist) -> Result<JointDist> {
    let xz = source.marginalize(&["X", "Z"])?;
    let vars = vec![source.alphabet("X")?.clone(), Alphabet::singleton("Y"), source.alphabet("Z")?.clone()];
    Ok(JointDist::new(vars, xz.mass().to_vec())?)
}
