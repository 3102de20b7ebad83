//! Seeded generators for the synthetic processes used to validate the
//! estimator, each with its analytic entropy-rate oracle where one exists.
//!
//! Every generator is a pure function of its parameters and seed.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::discretize::{RealSeries, SymbolSeries};
use crate::error::{Error, Result};
use crate::info::{
    cr_from_entropy_rate, entropy, markov_entropy_rate, MarkovModel, Pmf, RateQuote,
};
use crate::rng::{stream_rng, tag};

/// Threshold on |ε| that flips the sign of the second element of each pair.
/// At this value E[X_{2i}] ≈ 0, so the series shows almost no autocorrelation.
pub const HIDDEN_DEPENDENCE_THRESHOLD: f64 = 1.19;

/// Default number of discarded GARCH warm-up samples.
pub const GARCH_BURN_IN: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChainSpec {
    Matrix { transition: Vec<Vec<f64>> },
    Sticky { states: usize, stay: f64 },
}

impl ChainSpec {
    pub fn model(&self) -> Result<MarkovModel> {
        match self {
            ChainSpec::Matrix { transition } => MarkovModel::new(transition.clone()),
            ChainSpec::Sticky { states, stay } => MarkovModel::sticky(*states, *stay),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Garch11 {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
}

fn default_burn_in() -> usize {
    GARCH_BURN_IN
}

impl Garch11 {
    pub fn validate(&self) -> Result<()> {
        let ok = self.omega > 0.0
            && self.alpha >= 0.0
            && self.beta >= 0.0
            && self.alpha + self.beta < 1.0
            && self.omega.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "GARCH(1,1) needs omega > 0, alpha, beta >= 0 and alpha + beta < 1 \
                 (got omega={}, alpha={}, beta={})",
                self.omega, self.alpha, self.beta
            )))
        }
    }

    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.alpha - self.beta)
    }
}

/// Process family and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// iid draws from `pmf`; without one, the 256-point preset is built from the seed.
    IidCategorical {
        #[serde(default)]
        pmf: Option<Vec<f64>>,
    },
    IidUniformBytes,
    IidGaussian {
        #[serde(default = "one")]
        sigma: f64,
    },
    Markov {
        #[serde(flatten)]
        chain: ChainSpec,
    },
    HiddenDependence {
        #[serde(default = "hidden_threshold")]
        threshold: f64,
    },
    RandomWalkReturns {
        #[serde(default = "one")]
        sigma: f64,
    },
    Garch11(Garch11),
}

fn one() -> f64 {
    1.0
}

fn hidden_threshold() -> f64 {
    HIDDEN_DEPENDENCE_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
    pub seed: u64,
}

/// Output of a generator: symbols for discrete families, reals otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    Symbols(SymbolSeries),
    Reals(RealSeries),
}

impl GeneratorSpec {
    pub fn generate(&self) -> Result<Generated> {
        let (n, seed) = (self.n, self.seed);
        Ok(match &self.family {
            Family::IidCategorical { .. } => {
                Generated::Symbols(gen_iid_categorical(&self.categorical_pmf()?, n, seed)?)
            }
            Family::IidUniformBytes => Generated::Symbols(gen_iid_uniform_bytes(n, seed)?),
            Family::IidGaussian { sigma } => Generated::Reals(gen_iid_gaussian(n, seed, *sigma)?),
            Family::Markov { chain } => Generated::Symbols(gen_markov(&chain.model()?, n, seed)?),
            Family::HiddenDependence { threshold } => {
                Generated::Reals(gen_hidden_dependence_with(n, seed, *threshold)?)
            }
            Family::RandomWalkReturns { sigma } => {
                Generated::Reals(gen_random_walk_returns(n, seed, *sigma)?)
            }
            Family::Garch11(g) => Generated::Reals(gen_garch11(g, n, seed)?.returns),
        })
    }

    fn categorical_pmf(&self) -> Result<Pmf> {
        match &self.family {
            Family::IidCategorical { pmf: Some(p) } => Pmf::new(p.clone()),
            Family::IidCategorical { pmf: None } => Ok(preset_pmf(self.seed)),
            _ => Err(Error::invalid("not a categorical family")),
        }
    }

    /// Analytic entropy rate (bits/symbol) of the series as it is compressed:
    /// symbol families directly, real families after 8-bit rank discretization.
    /// `None` when no closed form is available.
    ///
    /// The hidden-dependence value is the idealized 4 bits/symbol (one free
    /// 8-bit symbol per pair); finite-resolution binning leaves a little
    /// residual uncertainty in the second symbol, so achieved ratios sit below it.
    pub fn entropy_rate_oracle(&self) -> Result<Option<f64>> {
        Ok(match &self.family {
            Family::IidCategorical { .. } => Some(entropy(&self.categorical_pmf()?)),
            Family::IidUniformBytes
            | Family::IidGaussian { .. }
            | Family::RandomWalkReturns { .. } => Some(8.0),
            Family::Markov { chain } => Some(markov_entropy_rate(&chain.model()?)),
            Family::HiddenDependence { .. } => Some(4.0),
            Family::Garch11(_) => None,
        })
    }

    /// Symbol resolution of the compressed representation.
    pub fn symbol_bits(&self) -> Result<u8> {
        Ok(match &self.family {
            Family::IidCategorical { .. } => bits_for(self.categorical_pmf()?.len()),
            Family::Markov { chain } => bits_for(chain.model()?.states()),
            _ => 8,
        })
    }

    /// Oracle entropy rate as a best achievable compression ratio.
    pub fn optimal_cr(&self) -> Result<Option<RateQuote>> {
        let bits = self.symbol_bits()?;
        self.entropy_rate_oracle()?
            .map(|h| cr_from_entropy_rate(h, 1usize << bits))
            .transpose()
    }
}

fn bits_for(alphabet: usize) -> u8 {
    let mut bits = 1u8;
    while (1usize << bits) < alphabet {
        bits += 1;
    }
    bits
}

fn check_len(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("series length must be positive"))
    } else {
        Ok(())
    }
}

fn generator_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    stream_rng(seed, &[tag::GENERATOR])
}

/// 256-point pmf: 128 weights uniform on [0, 1/3] followed by 128 uniform
/// on [0, 1], normalized. The low half is on average less likely.
pub fn preset_pmf(seed: u64) -> Pmf {
    let mut rng = stream_rng(seed, &[tag::PMF_PRESET]);
    let weights: Vec<f64> = (0..256)
        .map(|i| {
            let u: f64 = rng.gen();
            if i < 128 {
                u / 3.0
            } else {
                u
            }
        })
        .collect();
    Pmf::from_weights(weights).expect("uniform draws are non-negative and not all zero")
}

pub fn gen_iid_categorical(p: &Pmf, n: usize, seed: u64) -> Result<SymbolSeries> {
    check_len(n)?;
    if p.len() > 1 << 16 {
        return Err(Error::invalid("alphabet larger than 2^16"));
    }
    let mut rng = generator_rng(seed);
    let dist = WeightedIndex::new(p.probs()).map_err(|e| Error::invalid(e.to_string()))?;
    let symbols = (0..n).map(|_| dist.sample(&mut rng) as u16).collect();
    SymbolSeries::new(symbols, bits_for(p.len()))
}

pub fn gen_iid_uniform_bytes(n: usize, seed: u64) -> Result<SymbolSeries> {
    check_len(n)?;
    let mut bytes = vec![0u8; n];
    generator_rng(seed).fill_bytes(&mut bytes);
    Ok(SymbolSeries::from_u8(&bytes))
}

pub fn gen_iid_gaussian(n: usize, seed: u64, sigma: f64) -> Result<RealSeries> {
    check_len(n)?;
    check_sigma(sigma)?;
    let mut rng = generator_rng(seed);
    RealSeries::new(
        (0..n)
            .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
            .collect(),
    )
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "sigma must be positive, got {sigma}"
        )))
    }
}

/// Stationary chain: X_0 ~ μ, then row-conditional draws.
pub fn gen_markov(m: &MarkovModel, n: usize, seed: u64) -> Result<SymbolSeries> {
    check_len(n)?;
    if m.states() > 1 << 16 {
        return Err(Error::invalid("more than 2^16 states"));
    }
    let to_err = |e: rand::distributions::WeightedError| Error::invalid(e.to_string());
    let start = WeightedIndex::new(m.stationary().probs()).map_err(to_err)?;
    let rows = m
        .transition()
        .iter()
        .map(|r| WeightedIndex::new(r).map_err(to_err))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = generator_rng(seed);
    let mut state = start.sample(&mut rng);
    let mut symbols = Vec::with_capacity(n);
    symbols.push(state as u16);
    for _ in 1..n {
        state = rows[state].sample(&mut rng);
        symbols.push(state as u16);
    }
    SymbolSeries::new(symbols, bits_for(m.states()))
}

pub fn gen_hidden_dependence(n: usize, seed: u64) -> Result<RealSeries> {
    gen_hidden_dependence_with(n, seed, HIDDEN_DEPENDENCE_THRESHOLD)
}

/// Pairs (ε_i, |ε_i|·(2·1{|ε_i| > threshold} − 1)) with ε_i iid N(0, 1).
pub fn gen_hidden_dependence_with(n: usize, seed: u64, threshold: f64) -> Result<RealSeries> {
    check_len(n)?;
    if !n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "hidden-dependence series length must be even, got {n}"
        )));
    }
    let mut rng = generator_rng(seed);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n / 2 {
        let e: f64 = rng.sample(StandardNormal);
        values.push(e);
        values.push(if e.abs() > threshold {
            e.abs()
        } else {
            -e.abs()
        });
    }
    RealSeries::new(values)
}

/// Returns of a Brownian log-price on a uniform grid: iid N(0, σ²).
pub fn gen_random_walk_returns(n: usize, seed: u64, sigma: f64) -> Result<RealSeries> {
    gen_iid_gaussian(n, seed, sigma)
}

/// A simulated GARCH(1,1) path with its conditional volatilities.
#[derive(Debug, Clone, PartialEq)]
pub struct GarchPath {
    pub returns: RealSeries,
    pub sigma: Vec<f64>,
}

impl GarchPath {
    /// r_t / σ_t, which recovers the iid innovations exactly.
    pub fn standardized_residuals(&self) -> RealSeries {
        let z = self
            .returns
            .values()
            .iter()
            .zip(&self.sigma)
            .map(|(r, s)| r / s)
            .collect();
        RealSeries::new(z).expect("finite returns over positive volatilities")
    }
}

/// r_t = σ_t·z_t, σ²_t = ω + α·r²_{t−1} + β·σ²_{t−1}, started at the
/// unconditional variance; the first `burn_in` samples are discarded.
pub fn gen_garch11(g: &Garch11, n: usize, seed: u64) -> Result<GarchPath> {
    check_len(n)?;
    g.validate()?;
    let mut rng = generator_rng(seed);
    let mut var = g.unconditional_variance();
    let mut returns = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for t in 0..g.burn_in + n {
        let s = var.sqrt();
        let r = s * rng.sample::<f64, _>(StandardNormal);
        if t >= g.burn_in {
            returns.push(r);
            sigma.push(s);
        }
        var = g.omega + g.alpha * r * r + g.beta * var;
    }
    Ok(GarchPath {
        returns: RealSeries::new(returns)?,
        sigma,
    })
}
