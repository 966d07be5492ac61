//! Concentration statistics of activity distributions.

use crate::error::{Error, Result};
use crate::ingest::{MarketTotals, Panel};
use crate::num::{millions, Real};
use crate::quarter::QuarterRange;

use super::rank::aggregate_span;

/// Gini coefficient as half the relative mean absolute difference,
/// `sum_i sum_j |x_i - x_j| / (2 n^2 mean)`.
pub fn gini<F: Real>(values: &[F]) -> Result<F> {
    if values.iter().any(|v| !v.is_finite() || *v < F::zero()) {
        return Err(Error::InvalidArgument("gini needs finite nonnegative values".into()));
    }
    let total: F = values.iter().copied().sum();
    if values.is_empty() || total <= F::zero() {
        return Err(Error::Degenerate("gini undefined without a positive value".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = F::from_count(sorted.len());
    // sum_{i<j} (x_j - x_i) = sum_k (2k - n - 1) x_(k), k = 1..n
    let weighted: F = sorted
        .iter()
        .enumerate()
        .map(|(k, &x)| (F::from_count(2 * (k + 1)) - n - F::one()) * x)
        .sum();
    Ok(weighted / (n * total))
}

/// Adjusted Fisher-Pearson sample skewness `G1 = g1 sqrt(n(n-1)) / (n-2)`.
pub fn skewness<F: Real>(values: &[F]) -> Result<F> {
    let n = values.len();
    if n < 3 {
        return Err(Error::InvalidArgument("skewness needs at least 3 values".into()));
    }
    let nf = F::from_count(n);
    let mean = values.iter().copied().sum::<F>() / nf;
    let m2 = values.iter().map(|&x| (x - mean).powi(2)).sum::<F>() / nf;
    let m3 = values.iter().map(|&x| (x - mean).powi(3)).sum::<F>() / nf;
    if m2 <= F::zero() {
        return Err(Error::Degenerate("skewness undefined for zero variance".into()));
    }
    let g1 = m3 / m2.powf(F::lit(1.5));
    Ok(g1 * (nf * (nf - F::one())).sqrt() / (nf - F::lit(2.0)))
}

/// Running share of the total covered by the first k values (descending).
pub fn cumulative_share<F: Real>(values: &[F]) -> Result<Vec<F>> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let total: F = sorted.iter().copied().sum();
    if total <= F::zero() {
        return Err(Error::Degenerate("no positive activity".into()));
    }
    let mut acc = F::zero();
    Ok(sorted
        .iter()
        .map(|&x| {
            acc = acc + x;
            acc / total
        })
        .collect())
}

/// Share of the activity summed over `period` held by the `top_k` largest
/// aggregates. With `market` given, the denominator also includes the
/// activity of institutions outside the listed ranking.
pub fn market_share<F: Real>(
    panel: &Panel,
    top_k: usize,
    period: &QuarterRange,
    market: Option<&MarketTotals>,
) -> Result<F> {
    let n = panel.institutions();
    if top_k == 0 || top_k > n {
        return Err(Error::InvalidArgument(format!("top_k must be in 1..={n}")));
    }
    let span = panel.range().index_span(period)?;
    let totals = aggregate_span(panel, span).totals_by_rank();
    let top: i64 = totals[..top_k].iter().sum();
    let mut all: i64 = totals.iter().sum();
    if let Some(m) = market {
        for q in period.iter() {
            all += m.others(q).ok_or_else(|| {
                Error::InvalidArgument(format!("market totals missing quarter {q}"))
            })?;
        }
    }
    if all <= 0 {
        return Err(Error::Degenerate("no activity in period".into()));
    }
    Ok(millions::<F>(top) / millions::<F>(all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Direct double sum, independent of the sorted formula.
    fn gini_oracle(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let mut s = 0.0;
        for a in x {
            for b in x {
                s += (a - b).abs();
            }
        }
        s / (2.0 * n * n * mean)
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[5.0, 5.0, 5.0, 5.0]).unwrap(), 0.0);
        assert!(close(gini(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.75, 1e-15));
        assert_eq!(gini(&[3.0f32]).unwrap(), 0.0);
        assert!(gini::<f64>(&[0.0, 0.0]).is_err());
        assert!(gini::<f64>(&[]).is_err());
        assert!(gini(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn skewness_examples() {
        assert!(close(skewness(&[1.0, 2.0, 3.0]).unwrap(), 0.0, 1e-15));
        // m2 = 2/9, m3 = 2/27, g1 = 1/sqrt(2), G1 = g1 * sqrt(6) / 1 = sqrt(3)
        assert!(close(skewness(&[0.0, 0.0, 1.0]).unwrap(), 3f64.sqrt(), 1e-12));
        assert!(skewness(&[2.0, 2.0, 2.0]).is_err());
        assert!(skewness(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn cumulative_ends_at_one() {
        let c = cumulative_share(&[1.0, 3.0, 6.0]).unwrap();
        assert_eq!(c, vec![0.6, 0.9, 1.0]);
    }

    proptest! {
        #[test]
        fn gini_matches_oracle(x in prop::collection::vec(0.0f64..1e6, 1..40)) {
            prop_assume!(x.iter().sum::<f64>() > 0.0);
            let g = gini(&x).unwrap();
            prop_assert!(close(g, gini_oracle(&x), 1e-9));
            prop_assert!((0.0..1.0).contains(&g));
        }

        #[test]
        fn skewness_sign_flips(x in prop::collection::vec(-1e3f64..1e3, 3..30)) {
            let m = x.iter().sum::<f64>() / x.len() as f64;
            prop_assume!(x.iter().map(|v| (v - m).powi(2)).sum::<f64>() > 1e-3);
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            let a = skewness(&x).unwrap();
            let b = skewness(&neg).unwrap();
            prop_assert!(close(a, -b, 1e-9 * (1.0 + a.abs())));
        }
    }
}
