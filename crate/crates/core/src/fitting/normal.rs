use serde::{Deserialize, Serialize};

use super::FitError;

/// Sample mean and standard deviation (n - 1 denominator), plus the share
/// of samples inside the closed band `[mu - sigma, mu + sigma]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalFit {
    pub mu: f64,
    pub sigma: f64,
    pub band_ratio: f64,
    pub n: usize,
    pub min: f64,
    pub max: f64,
}

const BAND_SLACK: f64 = 1e-12;

pub fn fit_normal(samples: &[f64]) -> Result<NormalFit, FitError> {
    let n = samples.len();
    if n < 2 {
        return Err(FitError::TooFewPoints { needed: 2, got: n });
    }
    if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
        return Err(FitError::NonFinite(i));
    }
    let mu = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sigma = var.sqrt();
    // samples sitting exactly on a band edge must not fall out through rounding
    let slack = BAND_SLACK * (mu.abs() + sigma).max(f64::MIN_POSITIVE);
    let (lo, hi) = (mu - sigma - slack, mu + sigma + slack);
    let inside = samples.iter().filter(|&&x| x >= lo && x <= hi).count();
    let (min, max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    Ok(NormalFit {
        mu,
        sigma,
        band_ratio: inside as f64 / n as f64,
        n,
        min,
        max,
    })
}
