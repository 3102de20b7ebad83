//! Small descriptive statistics shared by the resampling code.

use serde::{Deserialize, Serialize};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n − 1 denominator); 0 for fewer than two values.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Position (0-based) of the ⌈τ·m⌉-th order statistic in a sorted sample of
/// size `m`. τ = 0 maps to the minimum.
pub fn order_index(tau: f64, m: usize) -> usize {
    assert!(m > 0, "empty sample");
    // tolerate float noise such as 0.05 * 200 = 10.000000000000002
    let r = (tau * m as f64 - 1e-9).ceil().max(1.0) as usize;
    r.min(m) - 1
}

/// Lower empirical quantile of an already sorted sample.
pub fn order_statistic(sorted: &[f64], tau: f64) -> f64 {
    sorted[order_index(tau, sorted.len())]
}

/// Box-and-whisker style summary of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub q25: f64,
    pub mean: f64,
    pub q75: f64,
    pub max: f64,
    pub sd: f64,
}

impl Summary {
    pub fn of(sample: &[f64]) -> Summary {
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        Summary {
            min: sorted[0],
            q25: order_statistic(&sorted, 0.25),
            mean: mean(&sorted),
            q75: order_statistic(&sorted, 0.75),
            max: sorted[sorted.len() - 1],
            sd: sample_sd(&sorted),
        }
    }
}
