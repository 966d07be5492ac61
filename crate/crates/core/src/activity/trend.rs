use std::ops::RangeInclusive;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::Real;

/// Minimum number of positive observations for a trend fit.
pub const MIN_TREND_POINTS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthTrend<F> {
    /// Least-squares slope of `ln a` per year.
    pub slope: F,
    pub intercept: F,
    /// `exp(slope)`: growth factor over one year.
    pub yearly_ratio: F,
    pub points: usize,
    /// Series indices in the window skipped for nonpositive activity.
    pub excluded: Vec<usize>,
}

/// Regresses `ln series[t]` on time in years (`t / 4`) over the quarterly
/// indices in `window` (0-based, inclusive).
pub fn growth_trend<F: Real>(series: &[F], window: RangeInclusive<usize>) -> Result<GrowthTrend<F>> {
    if *window.end() >= series.len() || window.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "window {window:?} outside series of length {}",
            series.len()
        )));
    }
    let four = F::lit(4.0);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = Vec::new();
    for t in window {
        let a = series[t];
        if a > F::zero() && a.is_finite() {
            xs.push(F::from_count(t) / four);
            ys.push(a.ln());
        } else {
            excluded.push(t);
        }
    }
    if xs.len() < MIN_TREND_POINTS {
        return Err(Error::Degenerate(format!(
            "{} positive observations, need {MIN_TREND_POINTS}",
            xs.len()
        )));
    }
    let n = F::from_count(xs.len());
    let mx = xs.iter().copied().sum::<F>() / n;
    let my = ys.iter().copied().sum::<F>() / n;
    let sxx: F = xs.iter().map(|&x| (x - mx).powi(2)).sum();
    let sxy: F = xs.iter().zip(&ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(GrowthTrend {
        slope,
        intercept: my - slope * mx,
        yearly_ratio: slope.exp(),
        points: xs.len(),
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let s: Vec<f64> = (0..20).map(|t| 3.0 * (0.2 * t as f64 / 4.0).exp()).collect();
        let g = growth_trend(&s, 0..=19).unwrap();
        assert!((g.slope - 0.2).abs() < 1e-12);
        assert!((g.yearly_ratio - 0.2f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn constant_series() {
        let g = growth_trend(&[5.0f64; 12], 0..=11).unwrap();
        assert!(g.slope.abs() < 1e-14);
        assert!((g.yearly_ratio - 1.0).abs() < 1e-14);
    }

    #[test]
    fn zeros_excluded_and_reported() {
        let mut s: Vec<f64> = (0..12).map(|t| (0.1 * t as f64).exp()).collect();
        s[3] = 0.0;
        let g = growth_trend(&s, 0..=11).unwrap();
        assert_eq!(g.excluded, [3]);
        assert_eq!(g.points, 11);
        assert!((g.slope - 0.4).abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        assert!(growth_trend(&[1.0f64; 7], 0..=6).is_err());
        let mut s = [1.0f64; 10];
        s[..3].fill(0.0);
        assert!(growth_trend(&s, 0..=9).is_err());
        assert!(growth_trend(&s, 0..=10).is_err());
    }

    #[test]
    fn scale_does_not_change_slope() {
        let s: Vec<f64> = (0..16).map(|t| 1.0 + (t * t) as f64).collect();
        let scaled: Vec<f64> = s.iter().map(|x| x * 1234.5).collect();
        let a = growth_trend(&s, 0..=15).unwrap();
        let b = growth_trend(&scaled, 0..=15).unwrap();
        assert!((a.slope - b.slope).abs() < 1e-12);
    }
}
