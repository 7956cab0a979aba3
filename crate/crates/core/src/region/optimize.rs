use serde::{Deserialize, Serialize};

use crate::prob::{CondChannel, DistortionMeasure, JointDist};

use super::fast::{SourceModel, UPart, VPart};
use super::search::{self, Candidate, EngineConfig, GridProblem, KernelShape};
use super::{
    check_key_rate, check_source, evaluate_bounds, BoundEvaluation, RegionError, RegionPoint, Result,
    SchemeParams, ACHIEVABILITY_SLACK,
};

/// How the grid stage is run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SearchMode {
    /// Enumerate when the grid has at most `max_grid_points` points, else local search.
    Auto,
    /// Always enumerate the full grid.
    Exhaustive,
    /// Always use multi-start local search.
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Simplex coordinates are multiples of `1/grid`.
    pub grid: u32,
    /// `|V|`; defaults to `|X|`.
    pub v_size: Option<usize>,
    /// `|U|`; defaults to `|X|`.
    pub u_size: Option<usize>,
    /// Number of step halvings in the continuous refinement; 0 disables it.
    pub refine_levels: u32,
    /// Move budget per refinement level.
    pub refine_moves: usize,
    pub mode: SearchMode,
    pub max_grid_points: u64,
    /// Random starting points for local search, on top of the structured ones.
    pub restarts: usize,
    pub seed: u64,
    /// Fix `p(v|x)` to the identity (lossless schemes).
    pub pin_v_identity: bool,
    /// Accept alphabet sizes beyond the cardinality bounds.
    pub allow_oversize: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            grid: 8,
            v_size: None,
            u_size: None,
            refine_levels: 6,
            refine_moves: 200,
            mode: SearchMode::Auto,
            max_grid_points: 4_000_000,
            restarts: 12,
            seed: 0,
            pin_v_identity: false,
            allow_oversize: false,
        }
    }
}

/// Enumeration beyond this many points is refused even in exhaustive mode.
const HARD_GRID_LIMIT: u128 = 2_000_000_000;

impl SearchConfig {
    pub(crate) fn engine(&self, total_grid: u128) -> Result<EngineConfig> {
        if self.grid == 0 {
            return Err(RegionError::InvalidParameter("grid resolution must be >= 1".into()));
        }
        if self.mode == SearchMode::Exhaustive && total_grid > HARD_GRID_LIMIT {
            return Err(RegionError::SearchTooLarge(format!(
                "{total_grid} grid points exceed the enumeration limit {HARD_GRID_LIMIT}"
            )));
        }
        Ok(EngineConfig {
            grid: self.grid,
            max_grid_points: match self.mode {
                SearchMode::Exhaustive => u64::MAX,
                _ => self.max_grid_points,
            },
            force_local: self.mode == SearchMode::Local,
            restarts: self.restarts,
            seed: self.seed,
            refine_levels: self.refine_levels,
            refine_moves: self.refine_moves,
        })
    }

    /// Resolved `(|V|, |U|)` for a source alphabet of size `nx`.
    pub fn sizes(&self, nx: usize) -> Result<(usize, usize)> {
        let nv = if self.pin_v_identity { nx } else { self.v_size.unwrap_or(nx) };
        let nu = self.u_size.unwrap_or(nx);
        if nv == 0 || nu == 0 {
            return Err(RegionError::InvalidParameter("auxiliary alphabets must be non-empty".into()));
        }
        if self.pin_v_identity && self.v_size.is_some_and(|v| v != nx) {
            return Err(RegionError::InvalidParameter("pinned V = X needs |V| = |X|".into()));
        }
        if !self.allow_oversize && (nu > nx + 4 || nv > (nx + 3) * (nx + 4)) {
            return Err(RegionError::InvalidParameter(format!(
                "|V| = {nv}, |U| = {nu} exceed the cardinality bounds for |X| = {nx}"
            )));
        }
        Ok((nv, nu))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Query {
    pub rate_cap: f64,
    pub dist_cap: f64,
    pub key_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Objective {
    /// `min{first + R0, H(X|Z,U)}`
    Full,
    /// The key-free first term alone.
    KeyFree,
}

pub(crate) struct BoundProblem<'a> {
    pub model: &'a SourceModel,
    pub nv: usize,
    pub nu: usize,
    pub pinned_vx: Option<Vec<f64>>,
    pub queries: Vec<Query>,
    pub objective: Objective,
    outer: Vec<KernelShape>,
    inner: Vec<KernelShape>,
}

impl<'a> BoundProblem<'a> {
    pub fn new(model: &'a SourceModel, nv: usize, nu: usize, pin_identity: bool, queries: Vec<Query>, objective: Objective) -> Self {
        let pinned_vx = pin_identity.then(|| {
            let mut k = vec![0.0; model.nx * nv];
            for x in 0..model.nx {
                k[x * nv + x] = 1.0;
            }
            k
        });
        let outer = if pin_identity { vec![] } else { vec![KernelShape { rows: model.nx, cols: nv }] };
        let inner = vec![KernelShape { rows: nv, cols: nu }];
        Self { model, nv, nu, pinned_vx, queries, objective, outer, inner }
    }

    fn vx_of<'k>(&'k self, kernels: &'k [Vec<f64>]) -> &'k [f64] {
        match &self.pinned_vx {
            Some(k) => k,
            None => &kernels[0],
        }
    }

    fn uv_of<'k>(&self, kernels: &'k [Vec<f64>]) -> &'k [f64] {
        &kernels[self.outer.len()]
    }

    fn grid_total(&self, g: u32) -> u128 {
        let shapes: Vec<_> = self.outer.iter().chain(&self.inner).copied().collect();
        search::grid_size(&shapes, g)
    }
}

pub(crate) fn violation(rate: f64, dist: f64, q: &Query) -> f64 {
    let r = rate - q.rate_cap - ACHIEVABILITY_SLACK;
    let d = dist - q.dist_cap - ACHIEVABILITY_SLACK;
    r.max(0.0) + d.max(0.0)
}

impl GridProblem for BoundProblem<'_> {
    type Outer = VPart;
    type Inner = UPart;

    fn outer_shapes(&self) -> &[KernelShape] {
        &self.outer
    }
    fn inner_shapes(&self) -> &[KernelShape] {
        &self.inner
    }
    fn num_queries(&self) -> usize {
        self.queries.len()
    }
    fn prepare(&self, outer: &[Vec<f64>]) -> VPart {
        self.model.v_part(self.vx_of(outer), self.nv)
    }
    fn violation(&self, v: &VPart, q: usize) -> f64 {
        violation(v.rate_min, v.distortion, &self.queries[q])
    }
    fn evaluate(&self, v: &VPart, inner: &[Vec<f64>]) -> UPart {
        self.model.u_part(v, &inner[0], self.nu)
    }
    fn value(&self, v: &VPart, u: &UPart, q: usize) -> f64 {
        match self.objective {
            Objective::Full => u.equivocation(v, self.queries[q].key_rate),
            Objective::KeyFree => u.first_term(v),
        }
    }

    fn starts(&self, _grid: u32) -> Vec<Vec<Vec<f64>>> {
        let (nx, nv, nu) = (self.model.nx, self.nv, self.nu);
        let spread = |rows: usize, cols: usize| {
            let mut k = vec![0.0; rows * cols];
            for r in 0..rows {
                k[r * cols + r % cols] = 1.0;
            }
            k
        };
        let constant = |rows: usize, cols: usize| {
            let mut k = vec![0.0; rows * cols];
            for r in 0..rows {
                k[r * cols] = 1.0;
            }
            k
        };
        let vxs = if self.pinned_vx.is_some() { vec![None] } else { vec![Some(spread(nx, nv)), Some(constant(nx, nv))] };
        let mut out = Vec::new();
        for vx in &vxs {
            for uv in [constant(nv, nu), spread(nv, nu)] {
                let mut k: Vec<Vec<f64>> = vx.iter().cloned().collect();
                k.push(uv);
                out.push(k);
            }
        }
        out
    }
}

/// Result of one boundary query.
#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Achieved {
        /// Best equivocation bound found, after refinement.
        equivocation: f64,
        /// Best value on the quantized grid alone.
        grid_value: f64,
        scheme: SchemeParams,
        bounds: BoundEvaluation,
    },
    /// No searched scheme meets the rate and distortion caps.
    Infeasible,
}

impl SearchOutcome {
    pub fn equivocation(&self) -> Option<f64> {
        match self {
            Self::Achieved { equivocation, .. } => Some(*equivocation),
            Self::Infeasible => None,
        }
    }

    pub fn scheme(&self) -> Option<&SchemeParams> {
        match self {
            Self::Achieved { scheme, .. } => Some(scheme),
            Self::Infeasible => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Self::Achieved { .. })
    }
}

pub(crate) fn candidate_scheme(
    source: &JointDist,
    p: &BoundProblem<'_>,
    cand: &Candidate,
) -> Result<SchemeParams> {
    let x = source.alphabet("X")?;
    let to_rows = |k: &[f64], cols: usize| k.chunks(cols).map(<[f64]>::to_vec).collect::<Vec<_>>();
    let vx = to_rows(p.vx_of(&cand.kernels), p.nv);
    let uv = to_rows(p.uv_of(&cand.kernels), p.nu);
    let recon = p.model.v_part(p.vx_of(&cand.kernels), p.nv).recon;
    SchemeParams::from_matrices(x, &vx, &uv, recon)
}

fn check_caps(q: &Query) -> Result<()> {
    for (name, v) in [("rate cap", q.rate_cap), ("distortion cap", q.dist_cap)] {
        if !(v >= 0.0) {
            return Err(RegionError::InvalidParameter(format!("{name} {v} must be >= 0")));
        }
    }
    check_key_rate(q.key_rate)
}

/// Runs a batch of queries through one shared search.
pub(crate) fn solve_queries(
    source: &JointDist,
    d: &DistortionMeasure,
    queries: Vec<Query>,
    search: &SearchConfig,
    objective: Objective,
    seeds: &[SchemeParams],
) -> Result<Vec<SearchOutcome>> {
    check_source(source, d)?;
    queries.iter().try_for_each(check_caps)?;
    let model = SourceModel::new(source, d)?;
    let (nv, nu) = search.sizes(model.nx)?;
    let problem = BoundProblem::new(&model, nv, nu, search.pin_v_identity, queries, objective);
    let cfg = search.engine(problem.grid_total(search.grid))?;
    let seed_kernels: Vec<Vec<Vec<f64>>> = seeds
        .iter()
        .filter_map(|s| embed_seed(s, &problem))
        .collect();
    let results = search::run(&problem, &cfg, &seed_kernels);
    let mut outcomes = results
        .into_iter()
        .enumerate()
        .map(|(q, (cand, grid_value))| {
            let Some(cand) = cand else { return Ok(SearchOutcome::Infeasible) };
            let scheme = candidate_scheme(source, &problem, &cand)?;
            let bounds = evaluate_bounds(source, &scheme, d, problem.queries[q].key_rate)?;
            let equivocation = match objective {
                Objective::Full => bounds.equiv_max,
                Objective::KeyFree => cand.value,
            };
            Ok(SearchOutcome::Achieved {
                equivocation,
                grid_value: grid_value.unwrap_or(f64::NEG_INFINITY),
                scheme,
                bounds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if objective == Objective::Full {
        rescore_witnesses(source, d, &problem.queries, &mut outcomes)?;
    }
    Ok(outcomes)
}

/// Scores every witness at every feasible query with [`evaluate_bounds`], so
/// reported values are comparable across queries. The search ranks with a
/// faster model whose last bits can differ.
fn rescore_witnesses(
    source: &JointDist,
    d: &DistortionMeasure,
    queries: &[Query],
    outcomes: &mut [SearchOutcome],
) -> Result<()> {
    let mut witnesses: Vec<SchemeParams> = Vec::new();
    for s in outcomes.iter().filter_map(SearchOutcome::scheme) {
        if !witnesses.contains(s) {
            witnesses.push(s.clone());
        }
    }
    if witnesses.len() < 2 {
        return Ok(());
    }
    for (q, out) in queries.iter().zip(outcomes.iter_mut()) {
        let SearchOutcome::Achieved { equivocation, grid_value, .. } = out else { continue };
        let (mut best, grid_value) = (*equivocation, *grid_value);
        for w in &witnesses {
            let b = evaluate_bounds(source, w, d, q.key_rate)?;
            let fits = b.rate_min <= q.rate_cap + ACHIEVABILITY_SLACK && b.distortion <= q.dist_cap + ACHIEVABILITY_SLACK;
            if fits && b.equiv_max > best {
                best = b.equiv_max;
                *out = SearchOutcome::Achieved { equivocation: best, grid_value, scheme: w.clone(), bounds: b };
            }
        }
    }
    Ok(())
}

/// Pads a smaller scheme with zero-probability symbols so it fits the problem.
fn embed_seed(s: &SchemeParams, p: &BoundProblem<'_>) -> Option<Vec<Vec<f64>>> {
    let (snv, snu) = (s.v_size(), s.u_size());
    if snv > p.nv || snu > p.nu || s.vx().from_size() != p.model.nx {
        return None;
    }
    let mut vx = vec![0.0; p.model.nx * p.nv];
    for x in 0..p.model.nx {
        vx[x * p.nv..x * p.nv + snv].copy_from_slice(s.vx().row(x));
    }
    let mut uv = vec![0.0; p.nv * p.nu];
    for v in 0..p.nv {
        if v < snv {
            uv[v * p.nu..v * p.nu + snu].copy_from_slice(s.uv().row(v));
        } else {
            uv[v * p.nu] = 1.0;
        }
    }
    if let Some(pinned) = &p.pinned_vx {
        if *pinned != vx {
            return None;
        }
        return Some(vec![uv]);
    }
    Some(vec![vx, uv])
}

/// Best equivocation bound subject to `I(X;V|Y) <= rate_cap` and distortion `<= dist_cap`.
///
/// The value is a lower bound on the true boundary; it is exact on the grid
/// when the grid stage enumerates.
pub fn max_equivocation(
    source: &JointDist,
    d: &DistortionMeasure,
    rate_cap: f64,
    key_rate: f64,
    dist_cap: f64,
    search: &SearchConfig,
) -> Result<SearchOutcome> {
    let q = Query { rate_cap, dist_cap, key_rate };
    Ok(solve_queries(source, d, vec![q], search, Objective::Full, &[])?.remove(0))
}

/// The swept coordinate of a [`region_sweep`]; the others are held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SweepAxis {
    Rate { caps: Vec<f64>, key_rate: f64, dist_cap: f64 },
    Distortion { caps: Vec<f64>, key_rate: f64, rate_cap: f64 },
    KeyRate { key_rates: Vec<f64>, rate_cap: f64, dist_cap: f64 },
}

impl SweepAxis {
    pub(crate) fn queries(&self) -> Result<Vec<Query>> {
        let (values, make): (&[f64], Box<dyn Fn(f64) -> Query>) = match self {
            Self::Rate { caps, key_rate, dist_cap } => {
                let (k, dc) = (*key_rate, *dist_cap);
                (caps, Box::new(move |r| Query { rate_cap: r, dist_cap: dc, key_rate: k }))
            }
            Self::Distortion { caps, key_rate, rate_cap } => {
                let (k, rc) = (*key_rate, *rate_cap);
                (caps, Box::new(move |dc| Query { rate_cap: rc, dist_cap: dc, key_rate: k }))
            }
            Self::KeyRate { key_rates, rate_cap, dist_cap } => {
                let (rc, dc) = (*rate_cap, *dist_cap);
                (key_rates, Box::new(move |k| Query { rate_cap: rc, dist_cap: dc, key_rate: k }))
            }
        };
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(RegionError::InvalidParameter("sweep grid must be strictly increasing".into()));
        }
        Ok(values.iter().map(|&v| make(v)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    /// Caps of the query; `equivocation` is NaN when infeasible.
    pub point: RegionPoint,
    pub outcome: SearchOutcome,
}

fn to_points(queries: &[Query], outcomes: Vec<SearchOutcome>) -> Vec<SweepPoint> {
    queries
        .iter()
        .zip(outcomes)
        .map(|(q, outcome)| SweepPoint {
            point: RegionPoint {
                rate: q.rate_cap,
                key_rate: q.key_rate,
                distortion: q.dist_cap,
                equivocation: outcome.equivocation().unwrap_or(f64::NAN),
            },
            outcome,
        })
        .collect()
}

/// Boundary along one axis, in input order. Every witness found is re-scored
/// at every point, so the output is monotone in the swept cap and, along the
/// key-rate axis, rises by at most the key-rate increment.
pub fn region_sweep(
    source: &JointDist,
    d: &DistortionMeasure,
    axis: &SweepAxis,
    search: &SearchConfig,
) -> Result<Vec<SweepPoint>> {
    let queries = axis.queries()?;
    let outcomes = solve_queries(source, d, queries.clone(), search, Objective::Full, &[])?;
    Ok(to_points(&queries, outcomes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Achievability {
    pub achievable: bool,
    pub witness: Option<SchemeParams>,
    pub bounds: Option<BoundEvaluation>,
}

/// Membership test for a tuple, with `1e-9` slack on every inequality.
pub fn is_achievable(
    source: &JointDist,
    d: &DistortionMeasure,
    point: &RegionPoint,
    search: &SearchConfig,
) -> Result<Achievability> {
    let fields = [point.rate, point.key_rate, point.distortion, point.equivocation];
    if fields.iter().any(|v| !v.is_finite()) {
        return Err(RegionError::InvalidParameter("region point fields must be finite".into()));
    }
    let no = Achievability { achievable: false, witness: None, bounds: None };
    if point.rate < 0.0 || point.distortion < 0.0 {
        return Ok(no);
    }
    match max_equivocation(source, d, point.rate, point.key_rate, point.distortion, search)? {
        SearchOutcome::Achieved { scheme, bounds, .. } if bounds.certifies(point) => {
            Ok(Achievability { achievable: true, witness: Some(scheme), bounds: Some(bounds) })
        }
        _ => Ok(no),
    }
}

/// Key-rate profile of a fixed scheme.
///
/// `with_u` is the scheme's own bound. `without_u` uses the same `V` with a
/// constant `U`. Time sharing is not applied; `combined` is the pointwise
/// maximum of the two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyProfile {
    pub key_rates: Vec<f64>,
    pub with_u: Vec<f64>,
    pub without_u: Vec<f64>,
    pub combined: Vec<f64>,
    /// Key rates where `combined` changes slope:
    /// `I(X;V|Y,U)`, that plus `[I(Z;U) - I(Y;U)]^+`, and `I(X;V|Y)`.
    pub knees: [f64; 3],
}

pub fn key_profile(
    source: &JointDist,
    scheme: &SchemeParams,
    d: &DistortionMeasure,
    key_rates: &[f64],
) -> Result<KeyProfile> {
    key_rates.iter().try_for_each(|&k| check_key_rate(k))?;
    let v = scheme.vx().to_vars()[0].clone();
    let u1 = crate::prob::Alphabet::singleton("U");
    let flat = SchemeParams::new(scheme.vx().clone(), CondChannel::constant(v, u1, 0)?, scheme.recon().to_vec())?;
    let with_u: Vec<f64> = key_rates
        .iter()
        .map(|&k| evaluate_bounds(source, scheme, d, k).map(|b| b.equiv_max))
        .collect::<Result<_>>()?;
    let without_u: Vec<f64> = key_rates
        .iter()
        .map(|&k| evaluate_bounds(source, &flat, d, k).map(|b| b.equiv_max))
        .collect::<Result<_>>()?;
    let combined = with_u.iter().zip(&without_u).map(|(a, b)| a.max(*b)).collect();

    let joint = crate::prob::compose(source, scheme.vx(), scheme.uv())?;
    let i_xv_yu = joint.cond_mutual_info(&["X"], &["V"], &["Y", "U"])?;
    let gap = (joint.mutual_info(&["Z"], &["U"])? - joint.mutual_info(&["Y"], &["U"])?).max(0.0);
    let i_xv_y = joint.cond_mutual_info(&["X"], &["V"], &["Y"])?;
    Ok(KeyProfile {
        key_rates: key_rates.to_vec(),
        with_u,
        without_u,
        combined,
        knees: [i_xv_yu, i_xv_yu + gap, i_xv_y],
    })
}

/// Fixed caps for a saturation comparison, swept over key rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationAxis {
    pub rate_cap: f64,
    pub dist_cap: f64,
    pub key_rates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardinalityReport {
    pub key_rates: Vec<f64>,
    pub small_sizes: (usize, usize),
    pub large_sizes: (usize, usize),
    /// `None` where no scheme of that size meets the caps.
    pub small: Vec<Option<f64>>,
    pub large: Vec<Option<f64>>,
    /// `large - small` where both are feasible.
    pub improvements: Vec<Option<f64>>,
    pub max_improvement: f64,
}

/// Compares the searched boundary at `(|V|, |U|)` = `small` against `large`.
///
/// The larger search is seeded with the smaller witnesses, padded with
/// unused symbols, so it never reports less than the smaller one.
pub fn cardinality_saturation_check(
    source: &JointDist,
    d: &DistortionMeasure,
    axis: &SaturationAxis,
    small: (usize, usize),
    large: (usize, usize),
    search: &SearchConfig,
) -> Result<CardinalityReport> {
    let queries = SweepAxis::KeyRate {
        key_rates: axis.key_rates.clone(),
        rate_cap: axis.rate_cap,
        dist_cap: axis.dist_cap,
    }
    .queries()?;
    let sized = |(nv, nu): (usize, usize)| SearchConfig {
        v_size: Some(nv),
        u_size: Some(nu),
        allow_oversize: true,
        ..search.clone()
    };
    let small_out = solve_queries(source, d, queries.clone(), &sized(small), Objective::Full, &[])?;
    let seeds: Vec<SchemeParams> = small_out.iter().filter_map(|o| o.scheme().cloned()).collect();
    let large_out = solve_queries(source, d, queries, &sized(large), Objective::Full, &seeds)?;
    let small_v: Vec<Option<f64>> = small_out.iter().map(SearchOutcome::equivocation).collect();
    let large_v: Vec<Option<f64>> = large_out.iter().map(SearchOutcome::equivocation).collect();
    let improvements: Vec<Option<f64>> = small_v
        .iter()
        .zip(&large_v)
        .map(|(s, l)| Some(l.as_ref()? - s.as_ref()?))
        .collect();
    let max_improvement = improvements.iter().flatten().fold(0.0f64, |a, &b| a.max(b));
    Ok(CardinalityReport {
        key_rates: axis.key_rates.clone(),
        small_sizes: small,
        large_sizes: large,
        small: small_v,
        large: large_v,
        improvements,
        max_improvement,
    })
}
