use serde::{Deserialize, Serialize};

use super::special::student_t_two_sided;
use super::FitError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub r: f64,
    /// Two-sided.
    pub p_value: f64,
    pub n: usize,
}

/// Pearson product-moment correlation with a two-sided p-value from
/// Student's t on `n - 2` degrees of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, FitError> {
    if x.len() != y.len() {
        return Err(FitError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(FitError::TooFewPoints { needed: 3, got: n });
    }
    if let Some(i) = x.iter().chain(y).position(|v| !v.is_finite()) {
        return Err(FitError::NonFinite(i % n));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(FitError::ConstantInput);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    Ok(CorrelationResult {
        r,
        p_value: p_from_r(r, n)?,
        n,
    })
}

/// Two-sided p-value of a correlation `r` over `n` pairs; `|r| >= 1` gives 0.
pub fn p_from_r(r: f64, n: usize) -> Result<f64, FitError> {
    if n < 3 {
        return Err(FitError::TooFewPoints { needed: 3, got: n });
    }
    if !r.is_finite() {
        return Err(FitError::NonFinite(0));
    }
    if r.abs() >= 1.0 {
        return Ok(0.0);
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    Ok(student_t_two_sided(t, df).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let c = pearson(&x, &y).unwrap();
        assert!((c.r - 1.0).abs() < 1e-12);
        assert!(c.p_value < 1e-12);
    }

    #[test]
    fn published_pairs() {
        assert!((p_from_r(-0.545, 26).unwrap() - 0.004).abs() <= 0.001);
        assert!((p_from_r(-0.435, 26).unwrap() - 0.026).abs() <= 0.002);
        assert!((p_from_r(0.214, 26).unwrap() - 0.294).abs() <= 0.01);
    }

    #[test]
    fn zero_correlation() {
        for n in [3, 10, 500] {
            assert_eq!(p_from_r(0.0, n).unwrap(), 1.0);
        }
        assert_eq!(p_from_r(1.0, 10).unwrap(), 0.0);
        assert_eq!(p_from_r(-1.0, 10).unwrap(), 0.0);
        assert!(p_from_r(0.3, 2).is_err());
    }

    #[test]
    fn errors() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(FitError::LengthMismatch(2, 3))
        );
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(FitError::ConstantInput)
        );
    }
}
