//! Exact information-theoretic quantities.
//!
//! These are the analytic oracles the compression estimates are checked
//! against, plus the conversion between compression ratios and entropy
//! rates. All logarithms are base 2, so every entropy is in bits.

use crate::error::{Error, Result};

/// Sums within this distance of 1 are renormalized; larger deviations are rejected.
pub const NORMALIZATION_SLACK: f64 = 1e-9;

/// Default iteration budget for the stationary-distribution power iteration.
pub const STATIONARY_MAX_ITER: usize = 1_000_000;

/// Convergence threshold (L1 change between iterates).
pub const STATIONARY_TOL: f64 = 1e-12;

/// A probability mass function over an alphabet of `len()` symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Build from probabilities that already sum to one (up to float noise).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let total = check_weights(&probs)?;
        if (total - 1.0).abs() > NORMALIZATION_SLACK {
            return Err(Error::invalid(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self::normalized(probs, total))
    }

    /// Build from arbitrary non-negative weights, normalizing them.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total = check_weights(&weights)?;
        if total <= 0.0 {
            return Err(Error::invalid("weights sum to zero"));
        }
        Ok(Self::normalized(weights, total))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::from_weights(vec![1.0; n])
    }

    fn normalized(mut probs: Vec<f64>, total: f64) -> Self {
        for p in &mut probs {
            *p /= total;
        }
        Pmf { probs }
    }

    /// Parse whitespace-separated decimal reals (any line layout).
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            values.extend(parse_row(line, lineno as u64 + 1)?);
        }
        Self::new(values)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

fn check_weights(w: &[f64]) -> Result<f64> {
    if w.is_empty() {
        return Err(Error::invalid("empty probability vector"));
    }
    if let Some(bad) = w.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::invalid(format!("invalid probability weight {bad}")));
    }
    Ok(w.iter().sum())
}

fn parse_row(line: &str, lineno: u64) -> Result<Vec<f64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("not a number: {tok:?}"),
            })
        })
        .collect()
}

/// Shannon entropy in bits; zero-probability terms contribute nothing.
pub fn entropy(p: &Pmf) -> f64 {
    entropy_of(p.probs())
}

fn entropy_of(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| q * q.log2())
        .sum::<f64>()
}

/// An entropy rate quoted together with the compression ratio it implies.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RateQuote {
    pub entropy_rate: f64,
    pub optimal_cr: f64,
    pub alphabet_bits: f64,
}

/// Best achievable compression ratio for a source with entropy rate `h`
/// (bits/symbol) over an alphabet of `alphabet_size` symbols.
pub fn cr_from_entropy_rate(h: f64, alphabet_size: usize) -> Result<RateQuote> {
    if alphabet_size < 2 {
        return Err(Error::invalid("alphabet must have at least two symbols"));
    }
    let bits = (alphabet_size as f64).log2();
    if !(0.0..=bits).contains(&h) {
        return Err(Error::invalid(format!(
            "entropy rate {h} outside [0, {bits}]"
        )));
    }
    Ok(RateQuote {
        entropy_rate: h,
        optimal_cr: 1.0 - h / bits,
        alphabet_bits: bits,
    })
}

/// Inverse of [`cr_from_entropy_rate`]: h = (1 − ρ)·log2 N.
pub fn entropy_rate_from_cr(cr: f64, alphabet_size: usize) -> Result<f64> {
    if alphabet_size < 2 {
        return Err(Error::invalid("alphabet must have at least two symbols"));
    }
    if !(0.0..=1.0).contains(&cr) {
        return Err(Error::invalid(format!(
            "compression ratio {cr} outside [0, 1]"
        )));
    }
    Ok((1.0 - cr) * (alphabet_size as f64).log2())
}

/// A finite, row-stochastic Markov chain with its stationary distribution.
#[derive(Debug, Clone)]
pub struct MarkovModel {
    transition: Vec<Vec<f64>>,
    stationary: Pmf,
}

impl MarkovModel {
    pub fn new(transition: Vec<Vec<f64>>) -> Result<Self> {
        Self::with_budget(transition, STATIONARY_MAX_ITER)
    }

    pub fn with_budget(transition: Vec<Vec<f64>>, max_iter: usize) -> Result<Self> {
        let n = transition.len();
        if n == 0 {
            return Err(Error::invalid("empty transition matrix"));
        }
        let mut rows = Vec::with_capacity(n);
        for (i, row) in transition.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            let pmf = Pmf::new(row).map_err(|e| Error::invalid(format!("row {i}: {e}")))?;
            rows.push(pmf.probs);
        }
        let stationary = power_iteration(&rows, max_iter)?;
        Ok(MarkovModel {
            transition: rows,
            stationary,
        })
    }

    /// `states`-state chain that stays put with probability `stay` and
    /// otherwise jumps uniformly to one of the other states.
    pub fn sticky(states: usize, stay: f64) -> Result<Self> {
        if states < 2 {
            return Err(Error::invalid("sticky chain needs at least two states"));
        }
        if !(0.0..=1.0).contains(&stay) {
            return Err(Error::invalid(format!(
                "stay probability {stay} outside [0, 1]"
            )));
        }
        let move_p = (1.0 - stay) / (states - 1) as f64;
        let rows = (0..states)
            .map(|i| {
                (0..states)
                    .map(|j| if i == j { stay } else { move_p })
                    .collect()
            })
            .collect();
        Self::new(rows)
    }

    /// Parse one matrix row per non-blank line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            rows.push(parse_row(line, lineno as u64 + 1)?);
        }
        Self::new(rows)
    }

    pub fn states(&self) -> usize {
        self.transition.len()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.transition[state]
    }

    pub fn stationary(&self) -> &Pmf {
        &self.stationary
    }
}

// μ ← μP from the uniform vector until the L1 step falls below tolerance.
fn power_iteration(p: &[Vec<f64>], max_iter: usize) -> Result<Pmf> {
    let n = p.len();
    let mut mu = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..max_iter {
        next.iter_mut().for_each(|v| *v = 0.0);
        for (i, row) in p.iter().enumerate() {
            let w = mu[i];
            if w == 0.0 {
                continue;
            }
            for (acc, &pij) in next.iter_mut().zip(row) {
                *acc += w * pij;
            }
        }
        let step: f64 = mu.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut mu, &mut next);
        if step < STATIONARY_TOL {
            let total: f64 = mu.iter().sum();
            return Ok(Pmf::normalized(mu, total));
        }
    }
    Err(Error::NoConvergence(max_iter))
}

/// Entropy rate of the chain started from stationarity: Σ_x μ_x H(P_x·).
pub fn markov_entropy_rate(m: &MarkovModel) -> f64 {
    m.stationary
        .probs()
        .iter()
        .zip(&m.transition)
        .map(|(mu, row)| mu * entropy_of(row))
        .sum()
}

/// Outcome of comparing a joint entropy with the sum of its marginals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubadditivityWitness {
    pub joint_entropy: f64,
    pub marginal_sum: f64,
    pub bound_holds: bool,
    /// Equality within 1e-9, which happens iff the components are independent.
    pub equality: bool,
}

/// Check H(X1,…,Xn) ≤ H(X1)+…+H(Xn) for a joint pmf laid out in row-major
/// order over the product alphabet (first marginal varies slowest).
pub fn joint_entropy_bound_check(marginals: &[Pmf], joint: &Pmf) -> Result<SubadditivityWitness> {
    if marginals.is_empty() {
        return Err(Error::invalid("no marginals supplied"));
    }
    let sizes: Vec<usize> = marginals.iter().map(Pmf::len).collect();
    let product: usize = sizes.iter().product();
    if product != joint.len() {
        return Err(Error::invalid(format!(
            "joint has {} cells but the marginals span {product}",
            joint.len()
        )));
    }
    // stride of each coordinate in the flat joint index
    let mut strides = vec![1usize; sizes.len()];
    for d in (0..sizes.len().saturating_sub(1)).rev() {
        strides[d] = strides[d + 1] * sizes[d + 1];
    }
    for (d, marginal) in marginals.iter().enumerate() {
        let mut implied = vec![0.0; sizes[d]];
        for (cell, &q) in joint.probs().iter().enumerate() {
            implied[(cell / strides[d]) % sizes[d]] += q;
        }
        let dev = implied
            .iter()
            .zip(marginal.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if dev > NORMALIZATION_SLACK {
            return Err(Error::invalid(format!(
                "marginal {d} disagrees with the joint by {dev:e}"
            )));
        }
    }
    let joint_entropy = entropy(joint);
    let marginal_sum: f64 = marginals.iter().map(entropy).sum();
    Ok(SubadditivityWitness {
        joint_entropy,
        marginal_sum,
        bound_holds: joint_entropy <= marginal_sum + 1e-9,
        equality: (joint_entropy - marginal_sum).abs() <= 1e-9,
    })
}
