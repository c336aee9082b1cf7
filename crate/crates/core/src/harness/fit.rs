use serde::{Deserialize, Serialize};

use super::HarnessError;

/// Values below this are raised to it before taking logs.
pub const LOG_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares on `(ln T, ln max(value, 1e-12))`.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit, HarnessError> {
    if points.len() < 2 {
        return Err(HarnessError::Fit(format!("need at least 2 points, got {}", points.len())));
    }
    if points.iter().any(|&(t, v)| !(t > 0.0) || !t.is_finite() || v.is_nan()) {
        return Err(HarnessError::Fit("horizons must be positive and values not NaN".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.max(LOG_FLOOR).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::Fit("all horizons are equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // A constant series is fitted perfectly.
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(SlopeFit { slope, intercept, r2 })
}

/// Median of a non-empty slice; the mean of the middle pair for even length.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root_law() {
        let pts: Vec<_> = [1024.0, 2048.0, 4096.0].iter().map(|&t: &f64| (t, 3.0 * t.cbrt())).collect();
        let fit = fit_slope(&pts).unwrap();
        assert!((fit.slope - 1.0 / 3.0).abs() < 1e-6);
        assert!((fit.intercept - 3.0_f64.ln()).abs() < 1e-9);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_series() {
        let pts = [(16.0, 2.5), (32.0, 2.5), (64.0, 2.5)];
        let fit = fit_slope(&pts).unwrap();
        assert!(fit.slope.abs() < 1e-6);
    }

    #[test]
    fn zeros_are_floored() {
        let pts = [(16.0, 0.0), (32.0, -1.0), (64.0, 0.0)];
        let fit = fit_slope(&pts).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert!((fit.intercept - LOG_FLOOR.ln()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_slope(&[(8.0, 1.0)]).is_err());
        assert!(fit_slope(&[(8.0, 1.0), (8.0, 2.0)]).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
