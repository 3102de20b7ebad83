//! Sample autocorrelation function.

use crate::discretize::RealSeries;
use crate::error::{Error, Result};

/// r(ℓ) = Σ_{t<n−ℓ} (x_t − x̄)(x_{t+ℓ} − x̄) / Σ_t (x_t − x̄)², for ℓ = 0..=max_lag.
pub fn autocorrelation(s: &RealSeries, max_lag: usize) -> Result<Vec<f64>> {
    let x = s.values();
    let n = x.len();
    if max_lag < 1 || max_lag >= n {
        return Err(Error::precondition(format!(
            "max lag {max_lag} must lie in [1, {})",
            n
        )));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let denom: f64 = centred.iter().map(|c| c * c).sum();
    if denom == 0.0 {
        return Err(Error::precondition("series has zero variance"));
    }
    Ok((0..=max_lag)
        .map(|lag| {
            centred[..n - lag]
                .iter()
                .zip(&centred[lag..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / denom
        })
        .collect())
}

/// Half-width of the approximate 95% white-noise band, 1.96/√n.
pub fn white_noise_band(n: usize) -> f64 {
    1.96 / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn hand_computed() {
        let s = RealSeries::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let r = autocorrelation(&s, 2).unwrap();
        // centred: −1.5 −0.5 0.5 1.5; Σc² = 5
        assert_eq!(r[0], 1.0);
        assert!((r[1] - 1.25 / 5.0).abs() < 1e-15);
        assert!((r[2] - (-1.5 / 5.0)).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let s = RealSeries::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!(autocorrelation(&s, 1).is_err());
        let s = RealSeries::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(autocorrelation(&s, 0).is_err());
        assert!(autocorrelation(&s, 3).is_err());
    }

    #[test]
    fn white_noise_mostly_inside_bands() {
        let mut rng = crate::rng::stream_rng(21, &[]);
        let n = 10_000;
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let r = autocorrelation(&RealSeries::new(v).unwrap(), 40).unwrap();
        let band = 3.0 / (n as f64).sqrt();
        let inside = r[1..].iter().filter(|c| c.abs() <= band).count();
        assert!(inside as f64 >= 0.95 * 40.0);
    }

    #[test]
    fn ar1_lag_one() {
        let mut rng = crate::rng::stream_rng(22, &[]);
        let mut x = 0.0;
        let v: Vec<f64> = (0..100_000)
            .map(|_| {
                x = 0.5 * x + rng.sample::<f64, _>(StandardNormal);
                x
            })
            .collect();
        let r = autocorrelation(&RealSeries::new(v).unwrap(), 2).unwrap();
        assert!((r[1] - 0.5).abs() < 0.02, "acf(1) = {}", r[1]);
        assert!((r[2] - 0.25).abs() < 0.02);
    }
}
