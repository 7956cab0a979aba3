//! Search over tuples of stochastic matrices.
//!
//! A problem splits its matrices into an outer group, prepared once, and an
//! inner group scored against the prepared state. Several queries (e.g. the
//! points of a sweep) share one pass over the grid.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Improvements smaller than this are not taken by the local moves.
const MIN_GAIN: f64 = 1e-12;
const CHUNK: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct KernelShape {
    pub rows: usize,
    pub cols: usize,
}

pub(crate) trait GridProblem: Sync {
    type Outer: Send + Sync;
    type Inner;

    fn outer_shapes(&self) -> &[KernelShape];
    fn inner_shapes(&self) -> &[KernelShape];
    fn num_queries(&self) -> usize;
    fn prepare(&self, outer: &[Vec<f64>]) -> Self::Outer;
    /// Zero when the prepared state meets the constraints of `query`.
    fn violation(&self, outer: &Self::Outer, query: usize) -> f64;
    fn evaluate(&self, outer: &Self::Outer, inner: &[Vec<f64>]) -> Self::Inner;
    fn value(&self, outer: &Self::Outer, inner: &Self::Inner, query: usize) -> f64;

    /// Hand-picked starting points for the local search.
    fn starts(&self, _grid: u32) -> Vec<Vec<Vec<f64>>> {
        Vec::new()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Candidate {
    /// Outer matrices followed by inner matrices, each row-major.
    pub kernels: Vec<Vec<f64>>,
    pub violation: f64,
    pub value: f64,
}

impl Candidate {
    pub fn feasible(&self) -> bool {
        self.violation == 0.0
    }

    /// Feasible candidates rank by value, infeasible ones by violation.
    fn key(&self) -> f64 {
        if self.feasible() {
            self.value
        } else {
            -1e6 - self.violation
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct EngineConfig {
    pub grid: u32,
    pub max_grid_points: u64,
    pub force_local: bool,
    pub restarts: usize,
    pub seed: u64,
    pub refine_levels: u32,
    pub refine_moves: usize,
}

/// All points of the `cols`-simplex with coordinates in `{0, 1/g, ..., 1}`,
/// starting from the unit vector on symbol 0.
pub(crate) fn compositions(cols: usize, g: u32) -> Vec<Vec<f64>> {
    fn rec(left: u32, rest: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rest == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in (0..=left).rev() {
            cur.push(k);
            rec(left - k, rest - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(g, cols.max(1), &mut Vec::new(), &mut out);
    out.into_iter().map(|c| c.into_iter().map(|k| f64::from(k) / f64::from(g)).collect()).collect()
}

fn binomial(n: u64, k: u64) -> u128 {
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * u128::from(n - i) / u128::from(i + 1);
    }
    r
}

/// Number of grid points over `shapes`, saturating at `u128::MAX`.
pub(crate) fn grid_size(shapes: &[KernelShape], g: u32) -> u128 {
    let mut total: u128 = 1;
    for s in shapes {
        let per_row = binomial(u64::from(g) + s.cols as u64 - 1, s.cols as u64 - 1);
        for _ in 0..s.rows {
            total = total.saturating_mul(per_row);
        }
    }
    total
}

struct Grid {
    shapes: Vec<KernelShape>,
    rows: Vec<Vec<Vec<f64>>>,
    count: u64,
}

impl Grid {
    fn new(shapes: &[KernelShape], g: u32) -> Self {
        let rows: Vec<_> = shapes.iter().map(|s| compositions(s.cols, g)).collect();
        let count = u64::try_from(grid_size(shapes, g)).unwrap_or(u64::MAX);
        Self { shapes: shapes.to_vec(), rows, count }
    }

    fn blank(&self) -> Vec<Vec<f64>> {
        self.shapes.iter().map(|s| vec![0.0; s.rows * s.cols]).collect()
    }

    /// Writes grid point `index` into `out`; the last row varies fastest.
    fn decode(&self, mut index: u64, out: &mut [Vec<f64>]) {
        for (k, s) in self.shapes.iter().enumerate().rev() {
            let n = self.rows[k].len() as u64;
            for r in (0..s.rows).rev() {
                let row = &self.rows[k][(index % n) as usize];
                index /= n;
                out[k][r * s.cols..(r + 1) * s.cols].copy_from_slice(row);
            }
        }
    }
}

/// Best value per query and the grid indices achieving it.
type ChunkBest = Vec<Option<(f64, u64, u64)>>;

fn merge(into: &mut ChunkBest, other: ChunkBest) {
    for (a, b) in into.iter_mut().zip(other) {
        if let Some(b) = b {
            if a.map_or(true, |a| b.0 > a.0) {
                *a = Some(b);
            }
        }
    }
}

/// Exact optimum over the grid for every query. Ties go to the lowest index.
pub(crate) fn exhaustive<P: GridProblem>(p: &P, g: u32) -> Vec<Option<Candidate>> {
    let outer = Grid::new(p.outer_shapes(), g);
    let inner = Grid::new(p.inner_shapes(), g);
    let nq = p.num_queries();
    let chunks = outer.count.div_ceil(CHUNK);
    let per_chunk: Vec<ChunkBest> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut best: ChunkBest = vec![None; nq];
            let mut ok = Vec::with_capacity(nq);
            let mut ob = outer.blank();
            let mut ib = inner.blank();
            for oi in c * CHUNK..((c + 1) * CHUNK).min(outer.count) {
                outer.decode(oi, &mut ob);
                let prep = p.prepare(&ob);
                ok.clear();
                ok.extend((0..nq).filter(|&q| p.violation(&prep, q) == 0.0));
                if ok.is_empty() {
                    continue;
                }
                for ii in 0..inner.count {
                    inner.decode(ii, &mut ib);
                    let ev = p.evaluate(&prep, &ib);
                    for &q in &ok {
                        let v = p.value(&prep, &ev, q);
                        if best[q].map_or(true, |b| v > b.0) {
                            best[q] = Some((v, oi, ii));
                        }
                    }
                }
            }
            best
        })
        .collect();
    let mut best: ChunkBest = vec![None; nq];
    for chunk in per_chunk {
        merge(&mut best, chunk);
    }
    best.into_iter()
        .map(|b| {
            b.map(|(value, oi, ii)| {
                let mut ob = outer.blank();
                let mut ib = inner.blank();
                outer.decode(oi, &mut ob);
                inner.decode(ii, &mut ib);
                ob.extend(ib);
                Candidate { kernels: ob, violation: 0.0, value }
            })
        })
        .collect()
}

/// Scores one full parameter tuple at `query`.
pub(crate) fn score<P: GridProblem>(p: &P, kernels: &[Vec<f64>], query: usize) -> Candidate {
    let split = p.outer_shapes().len();
    let prep = p.prepare(&kernels[..split]);
    score_prepared(p, &prep, kernels, query)
}

fn score_prepared<P: GridProblem>(p: &P, prep: &P::Outer, kernels: &[Vec<f64>], query: usize) -> Candidate {
    let split = p.outer_shapes().len();
    let violation = p.violation(prep, query);
    let value = if violation == 0.0 {
        p.value(prep, &p.evaluate(prep, &kernels[split..]), query)
    } else {
        f64::NEG_INFINITY
    };
    Candidate { kernels: kernels.to_vec(), violation, value }
}

/// Best-improvement local search moving up to `step` mass between two entries
/// of a row. Stops when no move gains more than [`MIN_GAIN`].
pub(crate) fn climb<P: GridProblem>(p: &P, query: usize, start: Candidate, step: f64, max_moves: usize) -> Candidate {
    let shapes: Vec<KernelShape> = p.outer_shapes().iter().chain(p.inner_shapes()).copied().collect();
    let split = p.outer_shapes().len();
    let mut cur = start;
    for _ in 0..max_moves {
        let mut best: Option<Candidate> = None;
        let prep = p.prepare(&cur.kernels[..split]);
        for (k, s) in shapes.iter().enumerate() {
            for r in 0..s.rows {
                for i in 0..s.cols {
                    let have = cur.kernels[k][r * s.cols + i];
                    if have <= 0.0 {
                        continue;
                    }
                    let amount = step.min(have);
                    for j in (0..s.cols).filter(|&j| j != i) {
                        let mut kernels = cur.kernels.clone();
                        kernels[k][r * s.cols + i] = if amount == have { 0.0 } else { have - amount };
                        kernels[k][r * s.cols + j] += amount;
                        let cand = if k < split {
                            score(p, &kernels, query)
                        } else {
                            score_prepared(p, &prep, &kernels, query)
                        };
                        if best.as_ref().map_or(true, |b| cand.key() > b.key()) {
                            best = Some(cand);
                        }
                    }
                }
            }
        }
        match best {
            Some(b) if b.key() > cur.key() + MIN_GAIN => cur = b,
            _ => break,
        }
    }
    cur
}

/// Continuous refinement from `start` with step sizes `1/(g 2^k)`.
pub(crate) fn refine<P: GridProblem>(p: &P, query: usize, start: Candidate, cfg: &EngineConfig) -> Candidate {
    let mut cur = start;
    for level in 1..=cfg.refine_levels {
        let step = 1.0 / (f64::from(cfg.grid) * f64::from(1u32 << level.min(30)));
        cur = climb(p, query, cur, step, cfg.refine_moves);
    }
    cur
}

fn random_grid_point<R: Rng>(rng: &mut R, shapes: &[KernelShape], g: u32) -> Vec<Vec<f64>> {
    shapes
        .iter()
        .map(|s| {
            let mut m = vec![0.0; s.rows * s.cols];
            for r in 0..s.rows {
                let mut counts = vec![0u32; s.cols];
                for _ in 0..g {
                    counts[rng.gen_range(0..s.cols)] += 1;
                }
                for (c, k) in counts.into_iter().enumerate() {
                    m[r * s.cols + c] = f64::from(k) / f64::from(g);
                }
            }
            m
        })
        .collect()
}

/// Multi-start grid hill climbing for one query.
fn local_search<P: GridProblem>(p: &P, query: usize, starts: &[Vec<Vec<f64>>], cfg: &EngineConfig) -> Candidate {
    let step = 1.0 / f64::from(cfg.grid);
    let results: Vec<Candidate> = starts
        .par_iter()
        .map(|s| climb(p, query, score(p, s, query), step, usize::MAX))
        .collect();
    let mut best = results[0].clone();
    for c in results.into_iter().skip(1) {
        if c.key() > best.key() {
            best = c;
        }
    }
    best
}

pub(crate) fn uses_exhaustive<P: GridProblem>(p: &P, cfg: &EngineConfig) -> bool {
    let shapes: Vec<KernelShape> = p.outer_shapes().iter().chain(p.inner_shapes()).copied().collect();
    !cfg.force_local && grid_size(&shapes, cfg.grid) <= u128::from(cfg.max_grid_points)
}

/// Grid stage for every query. `None` marks a query with no feasible point found.
pub(crate) fn grid_stage<P: GridProblem>(p: &P, cfg: &EngineConfig) -> Vec<Option<Candidate>> {
    if uses_exhaustive(p, cfg) {
        return exhaustive(p, cfg.grid);
    }
    let shapes: Vec<KernelShape> = p.outer_shapes().iter().chain(p.inner_shapes()).copied().collect();
    let mut starts = p.starts(cfg.grid);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.restarts {
        starts.push(random_grid_point(&mut rng, &shapes, cfg.grid));
    }
    if starts.is_empty() {
        starts.push(random_grid_point(&mut rng, &shapes, cfg.grid));
    }
    (0..p.num_queries())
        .map(|q| Some(local_search(p, q, &starts, cfg)).filter(Candidate::feasible))
        .collect()
}

/// Re-scores every witness at every query and keeps the best per query.
pub(crate) fn cross_pollinate<P: GridProblem>(p: &P, found: &mut [Option<Candidate>]) {
    let witnesses: Vec<Vec<Vec<f64>>> = found.iter().flatten().map(|c| c.kernels.clone()).collect();
    let split = p.outer_shapes().len();
    let prepared: Vec<P::Outer> = witnesses.par_iter().map(|w| p.prepare(&w[..split])).collect();
    found.par_iter_mut().enumerate().for_each(|(q, slot)| {
        for (w, prep) in witnesses.iter().zip(&prepared) {
            let c = score_prepared(p, prep, w, q);
            if c.feasible() && slot.as_ref().map_or(true, |s| c.value > s.value) {
                *slot = Some(c);
            }
        }
    });
}

/// Grid stage, refinement, then cross-pollination with the results and with
/// any externally supplied `seeds`.
pub(crate) fn run<P: GridProblem>(
    p: &P,
    cfg: &EngineConfig,
    seeds: &[Vec<Vec<f64>>],
) -> Vec<(Option<Candidate>, Option<f64>)> {
    let grid = grid_stage(p, cfg);
    let grid_values: Vec<Option<f64>> = grid.iter().map(|c| c.as_ref().map(|c| c.value)).collect();
    let mut found: Vec<Option<Candidate>> = grid
        .into_par_iter()
        .enumerate()
        .map(|(q, c)| c.map(|c| refine(p, q, c, cfg)))
        .collect();
    for (q, slot) in found.iter_mut().enumerate() {
        for s in seeds {
            let c = score(p, s, q);
            if c.feasible() && slot.as_ref().map_or(true, |b| c.value > b.value) {
                *slot = Some(c);
            }
        }
    }
    if found.len() > 1 {
        cross_pollinate(p, &mut found);
    }
    found.into_iter().zip(grid_values).collect()
}
