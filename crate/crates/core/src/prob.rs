//! Exact arithmetic on finite joint distributions.
//!
//! Everything here works on dense row-major tensors: the first variable of a
//! [`JointDist`] is the most significant axis. All information quantities are
//! in bits and use the conventions `0 log 0 = 0` and `0 log(0/q) = 0`.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on the total mass of a distribution and on channel rows.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Negative information values above `-CLAMP_TOL` are reported as zero.
pub const CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error("alphabet `{0}` has no symbols")]
    EmptyAlphabet(String),
    #[error("alphabet `{name}` repeats symbol `{symbol}`")]
    DuplicateSymbol { name: String, symbol: String },
    #[error("variable `{0}` appears more than once")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("tensor has {actual} entries, expected {expected}")]
    ShapeMismatch { expected: usize, actual: usize },
    #[error("entry {index} is {value}, expected a finite non-negative number")]
    InvalidMass { index: usize, value: f64 },
    #[error("masses sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },
    #[error("channel row {row} sums to {sum}, expected 1")]
    RowNotNormalized { row: usize, sum: f64 },
    #[error("alphabet mismatch for `{name}`: {detail}")]
    AlphabetMismatch { name: String, detail: String },
    #[error("variable groups overlap on `{0}`")]
    OverlappingGroups(String),
}

pub type Result<T> = std::result::Result<T, ProbError>;

/// A named finite alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    name: String,
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(name: impl Into<String>, symbols: Vec<S>) -> Result<Self> {
        let name = name.into();
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(ProbError::EmptyAlphabet(name));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(ProbError::DuplicateSymbol { name, symbol: s.clone() });
            }
        }
        Ok(Self { name, symbols })
    }

    /// Alphabet with symbols `"0"`, `"1"`, ...
    pub fn indexed(name: impl Into<String>, size: usize) -> Result<Self> {
        Self::new(name, (0..size).map(|i| i.to_string()).collect())
    }

    pub fn singleton(name: impl Into<String>) -> Self {
        Self { name: name.into(), symbols: vec!["-".to_string()] }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self { name: name.into(), symbols: self.symbols.clone() }
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }
}

pub(crate) fn strides(sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![1; sizes.len()];
    for i in (0..sizes.len().saturating_sub(1)).rev() {
        out[i] = out[i + 1] * sizes[i + 1];
    }
    out
}

fn check_masses(values: &[f64]) -> Result<f64> {
    let mut sum = 0.0;
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(ProbError::InvalidMass { index, value });
        }
        sum += value;
    }
    Ok(sum)
}

fn check_unique_names(vars: &[Alphabet]) -> Result<()> {
    for (i, a) in vars.iter().enumerate() {
        if vars[..i].iter().any(|b| b.name == a.name) {
            return Err(ProbError::DuplicateVariable(a.name.clone()));
        }
    }
    Ok(())
}

/// `-sum p log2 p` over a mass vector, skipping zeros.
pub(crate) fn entropy_of(mass: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in mass {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

pub(crate) fn clamp_info(value: f64) -> f64 {
    if value < 0.0 && value > -CLAMP_TOL {
        0.0
    } else {
        value
    }
}

/// Binary entropy function in bits.
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of(&[p, 1.0 - p])
}

/// A normalized probability tensor over an ordered tuple of named alphabets.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    vars: Vec<Alphabet>,
    mass: Vec<f64>,
}

impl JointDist {
    pub fn new(vars: Vec<Alphabet>, mass: Vec<f64>) -> Result<Self> {
        let dist = Self::unchecked_shape(vars, mass)?;
        let sum = check_masses(&dist.mass)?;
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ProbError::NotNormalized { sum });
        }
        Ok(dist)
    }

    /// Builds a distribution from non-negative weights, dividing by their total.
    pub fn from_weights(vars: Vec<Alphabet>, weights: Vec<f64>) -> Result<Self> {
        let mut dist = Self::unchecked_shape(vars, weights)?;
        let sum = check_masses(&dist.mass)?;
        if sum <= 0.0 {
            return Err(ProbError::NotNormalized { sum });
        }
        dist.mass.iter_mut().for_each(|m| *m /= sum);
        Ok(dist)
    }

    fn unchecked_shape(vars: Vec<Alphabet>, mass: Vec<f64>) -> Result<Self> {
        check_unique_names(&vars)?;
        let expected: usize = vars.iter().map(Alphabet::len).product();
        if mass.len() != expected {
            return Err(ProbError::ShapeMismatch { expected, actual: mass.len() });
        }
        Ok(Self { vars, mass })
    }

    pub fn uniform(vars: Vec<Alphabet>) -> Result<Self> {
        let len: usize = vars.iter().map(Alphabet::len).product();
        Self::from_weights(vars, vec![1.0; len])
    }

    pub fn point_mass(vars: Vec<Alphabet>, index: &[usize]) -> Result<Self> {
        let sizes: Vec<usize> = vars.iter().map(Alphabet::len).collect();
        if index.len() != sizes.len() || index.iter().zip(&sizes).any(|(i, s)| i >= s) {
            return Err(ProbError::ShapeMismatch { expected: sizes.len(), actual: index.len() });
        }
        let flat = index.iter().zip(strides(&sizes)).map(|(i, s)| i * s).sum::<usize>();
        let mut mass = vec![0.0; sizes.iter().product()];
        mass[flat] = 1.0;
        Self::new(vars, mass)
    }

    pub fn variables(&self) -> &[Alphabet] {
        &self.vars
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(Alphabet::name).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.vars.iter().map(Alphabet::len).collect()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| ProbError::UnknownVariable(name.to_string()))
    }

    pub fn alphabet(&self, name: &str) -> Result<&Alphabet> {
        Ok(&self.vars[self.position(name)?])
    }

    /// Mass at a multi-index given in variable order.
    pub fn get(&self, index: &[usize]) -> f64 {
        let flat: usize = index.iter().zip(strides(&self.sizes())).map(|(i, s)| i * s).sum();
        self.mass[flat]
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(names.len());
        for name in names {
            let p = self.position(name)?;
            if out.contains(&p) {
                return Err(ProbError::DuplicateVariable(name.to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Sums the tensor down onto the axes in `keep`, in that order.
    fn marginal_mass(&self, keep: &[usize]) -> Vec<f64> {
        let sizes = self.sizes();
        let out_sizes: Vec<usize> = keep.iter().map(|&p| sizes[p]).collect();
        let out_strides = strides(&out_sizes);
        let mut axis_stride = vec![0usize; sizes.len()];
        for (k, &p) in keep.iter().enumerate() {
            axis_stride[p] = out_strides[k];
        }
        let mut out = vec![0.0; out_sizes.iter().product()];
        let mut idx = vec![0usize; sizes.len()];
        let mut out_i = 0usize;
        for &m in &self.mass {
            out[out_i] += m;
            for ax in (0..sizes.len()).rev() {
                idx[ax] += 1;
                out_i += axis_stride[ax];
                if idx[ax] < sizes[ax] {
                    break;
                }
                out_i -= axis_stride[ax] * sizes[ax];
                idx[ax] = 0;
            }
        }
        out
    }

    /// Marginal over `keep`, with variables in the order given.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointDist> {
        let pos = self.positions(keep)?;
        let vars = pos.iter().map(|&p| self.vars[p].clone()).collect();
        Ok(JointDist { vars, mass: self.marginal_mass(&pos) })
    }

    /// Joint entropy `H(vars)` in bits.
    pub fn entropy(&self, vars: &[&str]) -> Result<f64> {
        let mut pos = self.positions(vars)?;
        if pos.is_empty() {
            return Ok(0.0);
        }
        // canonical axis order keeps H symmetric bit-for-bit
        pos.sort_unstable();
        Ok(entropy_of(&self.marginal_mass(&pos)))
    }

    /// `H(a | c)`.
    pub fn cond_entropy(&self, a: &[&str], c: &[&str]) -> Result<f64> {
        check_disjoint(a, c)?;
        let ac: Vec<&str> = a.iter().chain(c).copied().collect();
        Ok(clamp_info(self.entropy(&ac)? - self.entropy(c)?))
    }

    /// `I(a; b | c) = H(a|c) - H(a|b,c)`; `c` may be empty.
    pub fn cond_mutual_info(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
        check_disjoint(a, b)?;
        check_disjoint(a, c)?;
        check_disjoint(b, c)?;
        let ac: Vec<&str> = a.iter().chain(c).copied().collect();
        let bc: Vec<&str> = b.iter().chain(c).copied().collect();
        let abc: Vec<&str> = a.iter().chain(b).chain(c).copied().collect();
        let value = self.entropy(&ac)? + self.entropy(&bc)? - self.entropy(&abc)? - self.entropy(c)?;
        Ok(clamp_info(value))
    }

    pub fn mutual_info(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        self.cond_mutual_info(a, b, &[])
    }

    /// Norm-1 distance `sum |p - q|`, in `[0, 2]`.
    pub fn tv_distance(&self, other: &JointDist) -> Result<f64> {
        if self.vars != other.vars {
            let name = self
                .vars
                .iter()
                .zip(&other.vars)
                .find(|(a, b)| a != b)
                .map(|(a, _)| a.name.clone())
                .unwrap_or_default();
            return Err(ProbError::AlphabetMismatch {
                name,
                detail: "distributions are over different variables".into(),
            });
        }
        Ok(self.mass.iter().zip(&other.mass).map(|(p, q)| (p - q).abs()).sum())
    }

    /// Appends the outputs of `channel`, drawn conditionally on its inputs.
    pub fn extend(&self, channel: &CondChannel) -> Result<JointDist> {
        let mut from_pos = Vec::with_capacity(channel.from.len());
        for a in &channel.from {
            let p = self.position(&a.name)?;
            if self.vars[p] != *a {
                return Err(ProbError::AlphabetMismatch {
                    name: a.name.clone(),
                    detail: format!(
                        "channel expects {} symbols, distribution has {}",
                        a.len(),
                        self.vars[p].len()
                    ),
                });
            }
            from_pos.push(p);
        }
        let mut vars = self.vars.clone();
        vars.extend(channel.to.iter().cloned());
        check_unique_names(&vars)?;

        let sizes = self.sizes();
        let st = strides(&sizes);
        let from_sizes: Vec<usize> = channel.from.iter().map(Alphabet::len).collect();
        let from_st = strides(&from_sizes);
        let out_len = channel.to_size();
        let mut mass = Vec::with_capacity(self.mass.len() * out_len);
        for (flat, &m) in self.mass.iter().enumerate() {
            let row: usize = from_pos
                .iter()
                .zip(&from_st)
                .map(|(&p, &s)| (flat / st[p]) % sizes[p] * s)
                .sum();
            mass.extend(channel.row(row).iter().map(|k| m * k));
        }
        Ok(JointDist { vars, mass })
    }
}

fn check_disjoint(a: &[&str], b: &[&str]) -> Result<()> {
    match a.iter().find(|n| b.contains(n)) {
        Some(n) => Err(ProbError::OverlappingGroups(n.to_string())),
        None => Ok(()),
    }
}

/// A conditional PMF from one tuple of variables to another.
#[derive(Debug, Clone, PartialEq)]
pub struct CondChannel {
    from: Vec<Alphabet>,
    to: Vec<Alphabet>,
    kernel: Vec<f64>,
}

impl CondChannel {
    /// `kernel[row * to_size + col]` with rows indexed by the conditioning tuple.
    pub fn new(from: Vec<Alphabet>, to: Vec<Alphabet>, kernel: Vec<f64>) -> Result<Self> {
        let mut all = from.clone();
        all.extend(to.iter().cloned());
        check_unique_names(&all)?;
        let rows: usize = from.iter().map(Alphabet::len).product();
        let cols: usize = to.iter().map(Alphabet::len).product();
        if kernel.len() != rows * cols {
            return Err(ProbError::ShapeMismatch { expected: rows * cols, actual: kernel.len() });
        }
        check_masses(&kernel)?;
        for (row, chunk) in kernel.chunks(cols).enumerate() {
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return Err(ProbError::RowNotNormalized { row, sum });
            }
        }
        Ok(Self { from, to, kernel })
    }

    /// Single-input, single-output channel from explicit rows.
    pub fn from_rows(from: Alphabet, to: Alphabet, rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() != from.len() {
            return Err(ProbError::ShapeMismatch { expected: from.len(), actual: rows.len() });
        }
        let kernel = rows.iter().flatten().copied().collect();
        Self::new(vec![from], vec![to], kernel)
    }

    /// Copies the input symbol index into an output alphabet of the same size.
    pub fn identity(from: Alphabet, to_name: &str) -> Result<Self> {
        let n = from.len();
        let to = from.renamed(to_name);
        let kernel = (0..n * n).map(|i| if i / n == i % n { 1.0 } else { 0.0 }).collect();
        Self::new(vec![from], vec![to], kernel)
    }

    /// Always emits `symbol`.
    pub fn constant(from: Alphabet, to: Alphabet, symbol: usize) -> Result<Self> {
        let cols = to.len();
        let kernel = (0..from.len() * cols).map(|i| if i % cols == symbol { 1.0 } else { 0.0 }).collect();
        Self::new(vec![from], vec![to], kernel)
    }

    /// Binary symmetric channel with crossover `p` on a binary input.
    pub fn bsc(from: Alphabet, to_name: &str, p: f64) -> Result<Self> {
        if from.len() != 2 {
            return Err(ProbError::AlphabetMismatch {
                name: from.name.clone(),
                detail: "binary symmetric channel needs a binary input".into(),
            });
        }
        let to = from.renamed(to_name);
        Self::new(vec![from], vec![to], vec![1.0 - p, p, p, 1.0 - p])
    }

    pub fn from_vars(&self) -> &[Alphabet] {
        &self.from
    }

    pub fn to_vars(&self) -> &[Alphabet] {
        &self.to
    }

    pub fn from_size(&self) -> usize {
        self.from.iter().map(Alphabet::len).product()
    }

    pub fn to_size(&self) -> usize {
        self.to.iter().map(Alphabet::len).product()
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let cols = self.to_size();
        &self.kernel[row * cols..(row + 1) * cols]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.kernel.chunks(self.to_size()).map(<[f64]>::to_vec).collect()
    }
}

/// Builds `p(x,y,z) p(v|x) p(u|v)` over `(X, Y, Z, V, U)`.
///
/// The Markov chain `U -> V -> X -> (Y, Z)` holds by construction.
pub fn compose(base: &JointDist, vx: &CondChannel, uv: &CondChannel) -> Result<JointDist> {
    for name in ["X", "Y", "Z"] {
        base.position(name)?;
    }
    base.extend(vx)?.extend(uv)
}

/// Per-letter distortion `d(x, x̂)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionMeasure {
    source: Alphabet,
    recon: Alphabet,
    table: Vec<f64>,
}

impl DistortionMeasure {
    pub fn new(source: Alphabet, recon: Alphabet, table: Vec<f64>) -> Result<Self> {
        let expected = source.len() * recon.len();
        if table.len() != expected {
            return Err(ProbError::ShapeMismatch { expected, actual: table.len() });
        }
        check_masses(&table)?;
        Ok(Self { source, recon, table })
    }

    /// `d(x, x̂) = 1{x != x̂}` with the reconstruction alphabet named `Xhat`.
    pub fn hamming(source: &Alphabet) -> Self {
        let n = source.len();
        let table = (0..n * n).map(|i| if i / n == i % n { 0.0 } else { 1.0 }).collect();
        Self { source: source.clone(), recon: source.renamed("Xhat"), table }
    }

    pub fn source_alphabet(&self) -> &Alphabet {
        &self.source
    }

    pub fn recon_alphabet(&self) -> &Alphabet {
        &self.recon
    }

    pub fn get(&self, x: usize, xhat: usize) -> f64 {
        self.table[x * self.recon.len() + xhat]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn max_value(&self) -> f64 {
        self.table.iter().copied().fold(0.0, f64::max)
    }
}

/// Random PMF of the given length with i.i.d. exponential weights.
pub fn random_pmf<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Random channel with independent rows from [`random_pmf`].
pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, from: Alphabet, to: Alphabet) -> CondChannel {
    let rows: Vec<Vec<f64>> = (0..from.len()).map(|_| random_pmf(rng, to.len())).collect();
    // row sums are 1 up to rounding; renormalize against the strict tolerance
    CondChannel::from_rows(from, to, &rows).expect("random rows are normalized")
}
