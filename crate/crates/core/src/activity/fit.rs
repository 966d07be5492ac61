//! Log-normal descriptions of the aggregated activity distribution.
//!
//! Two estimators are offered. [`FitMethod::RankCurve`] fits the rank curve
//! `A(R) = exp(-(ln R - mu)^2 / (2 sigma^2)) / (R sigma sqrt(2 pi))` to
//! `(R, A_R)` pairs by least squares in log space. [`FitMethod::LogMoments`]
//! treats the `A_i` as a sample and takes the maximum-likelihood log-normal
//! parameters (mean and 1/n standard deviation of `ln A_i`); this is the law
//! sampled by the Kolmogorov-Smirnov harness.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum FitMethod {
    RankCurve { normalize: bool },
    LogMoments,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogNormalFit<F> {
    pub mu: F,
    pub sigma: F,
    pub method: FitMethod,
    pub points: usize,
    /// Residual sum of squares in log space (rank-curve fits only).
    pub rss: Option<F>,
}

/// The rank curve evaluated at `rank`.
pub fn rank_curve<F: Real>(rank: F, mu: F, sigma: F) -> F {
    log_rank_curve(rank.ln(), mu, sigma.ln()).exp()
}

/// `ln A` at `u = ln R`, parameterized by `s = ln sigma`.
fn log_rank_curve<F: Real>(u: F, mu: F, s: F) -> F {
    let half_ln_2pi = F::lit(0.5 * (2.0 * std::f64::consts::PI).ln());
    let inv_var = (-(s + s)).exp();
    -u - s - half_ln_2pi - (u - mu).powi(2) * inv_var / F::lit(2.0)
}

/// Fits the aggregated activities `by_rank[k]` (the value at rank `k + 1`).
pub fn fit_lognormal_rank<F: Real>(by_rank: &[F], method: FitMethod) -> Result<LogNormalFit<F>> {
    if by_rank.len() < 3 {
        return Err(Error::InvalidArgument("log-normal fit needs at least 3 points".into()));
    }
    if by_rank.iter().any(|a| !(a.is_finite() && *a > F::zero())) {
        return Err(Error::InvalidArgument("log-normal fit needs positive finite values".into()));
    }
    match method {
        FitMethod::LogMoments => log_moments(by_rank),
        FitMethod::RankCurve { normalize } => {
            let total: F = by_rank.iter().copied().sum();
            let ys: Vec<F> = by_rank
                .iter()
                .map(|&a| if normalize { (a / total).ln() } else { a.ln() })
                .collect();
            let us: Vec<F> = (1..=by_rank.len()).map(|r| F::from_count(r).ln()).collect();
            let (mu, s, rss) = levenberg_marquardt(&us, &ys)?;
            Ok(LogNormalFit {
                mu,
                sigma: s.exp(),
                method,
                points: by_rank.len(),
                rss: Some(rss),
            })
        }
    }
}

fn log_moments<F: Real>(values: &[F]) -> Result<LogNormalFit<F>> {
    let n = F::from_count(values.len());
    let logs: Vec<F> = values.iter().map(|v| v.ln()).collect();
    let mu = logs.iter().copied().sum::<F>() / n;
    let var = logs.iter().map(|&l| (l - mu).powi(2)).sum::<F>() / n;
    if var <= F::zero() {
        return Err(Error::Degenerate("all values equal: sigma would be zero".into()));
    }
    Ok(LogNormalFit {
        mu,
        sigma: var.sqrt(),
        method: FitMethod::LogMoments,
        points: values.len(),
        rss: None,
    })
}

fn rss<F: Real>(us: &[F], ys: &[F], mu: F, s: F) -> F {
    us.iter()
        .zip(ys)
        .map(|(&u, &y)| (y - log_rank_curve(u, mu, s)).powi(2))
        .sum()
}

/// Starting point from an unconstrained quadratic fit of
/// `ln A + u + ln sqrt(2 pi)` against `u`.
fn initial_guess<F: Real>(us: &[F], ys: &[F]) -> (F, F) {
    let half_ln_2pi = F::lit(0.5 * (2.0 * std::f64::consts::PI).ln());
    let mut ata = [[F::zero(); 3]; 3];
    let mut atb = [F::zero(); 3];
    for (&u, &y) in us.iter().zip(ys) {
        let z = y + u + half_ln_2pi;
        let row = [F::one(), u, u * u];
        for a in 0..3 {
            atb[a] = atb[a] + row[a] * z;
            for b in 0..3 {
                ata[a][b] = ata[a][b] + row[a] * row[b];
            }
        }
    }
    match solve3(ata, atb) {
        Some([_, c1, c2]) if c2 < F::zero() => {
            let var = -F::one() / (c2 + c2);
            (c1 * var, var.sqrt().ln())
        }
        _ => {
            let n = F::from_count(us.len());
            let mean = us.iter().copied().sum::<F>() / n;
            let var = us.iter().map(|&u| (u - mean).powi(2)).sum::<F>() / n;
            (mean, var.sqrt().max(F::lit(1e-3)).ln())
        }
    }
}

fn solve3<F: Real>(mut a: [[F; 3]; 3], mut b: [F; 3]) -> Option<[F; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite"))?;
        if a[pivot][col].abs() <= F::epsilon() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] = a[row][k] - f * a[col][k];
            }
            b[row] = b[row] - f * b[col];
        }
    }
    let mut x = [F::zero(); 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for k in row + 1..3 {
            acc = acc - a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Minimizes the log-space residuals over `(mu, ln sigma)`.
fn levenberg_marquardt<F: Real>(us: &[F], ys: &[F]) -> Result<(F, F, F)> {
    let (mut mu, mut s) = initial_guess(us, ys);
    let mut cost = rss(us, ys, mu, s);
    let mut lambda = F::lit(1e-3);
    let two = F::lit(2.0);
    for _ in 0..500 {
        let inv_var = (-(s + s)).exp();
        let (mut jtj, mut jte) = ([[F::zero(); 2]; 2], [F::zero(); 2]);
        for (&u, &y) in us.iter().zip(ys) {
            let d = u - mu;
            let e = y - log_rank_curve(u, mu, s);
            let j = [d * inv_var, d * d * inv_var - F::one()];
            for a in 0..2 {
                jte[a] = jte[a] + j[a] * e;
                for b in 0..2 {
                    jtj[a][b] = jtj[a][b] + j[a] * j[b];
                }
            }
        }
        let mut improved = false;
        while lambda < F::lit(1e12) {
            let m00 = jtj[0][0] * (F::one() + lambda);
            let m11 = jtj[1][1] * (F::one() + lambda);
            let det = m00 * m11 - jtj[0][1] * jtj[1][0];
            if det.abs() <= F::min_positive_value() {
                lambda = lambda * F::lit(10.0);
                continue;
            }
            let dmu = (m11 * jte[0] - jtj[0][1] * jte[1]) / det;
            let ds = (m00 * jte[1] - jtj[1][0] * jte[0]) / det;
            let trial = rss(us, ys, mu + dmu, s + ds);
            if trial.is_finite() && trial <= cost {
                let small = dmu.abs() <= F::epsilon() * two * (F::one() + mu.abs())
                    && ds.abs() <= F::epsilon() * two * (F::one() + s.abs());
                mu = mu + dmu;
                s = s + ds;
                let gain = cost - trial;
                cost = trial;
                lambda = (lambda / F::lit(10.0)).max(F::lit(1e-12));
                improved = !small && gain > F::epsilon() * cost;
                break;
            }
            lambda = lambda * F::lit(10.0);
        }
        if !improved {
            break;
        }
    }
    if !(mu.is_finite() && s.is_finite()) {
        return Err(Error::Degenerate("log-normal rank fit diverged".into()));
    }
    Ok((mu, s, cost))
}
