//! Two-sample Kolmogorov-Smirnov test and the Monte-Carlo goodness-of-fit
//! harness built on it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::Real;

/// PRNG used for synthetic samples; trial `k` uses stream `k` of the seed.
pub const RNG_NAME: &str = "ChaCha8 (seed_from_u64, stream = trial index)";

/// Supremum distance between the empirical CDFs of `a` and `b`.
pub fn ks_statistic<F: Real>(a: &[F], b: &[F]) -> F {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).expect("finite sample"));
    b.sort_by(|x, y| x.partial_cmp(y).expect("finite sample"));
    let (na, nb) = (F::from_count(a.len()), F::from_count(b.len()));
    let (mut i, mut j) = (0, 0);
    let mut d = F::zero();
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((F::from_count(i) / na - F::from_count(j) / nb).abs());
    }
    d
}

/// Kolmogorov survival function `Q(lambda) = P(K > lambda)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // theta-function form, fast for small lambda
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut s = 0.0;
        for k in 1..=20 {
            let m = (2 * k - 1) as f64;
            s += (-m * m * c).exp();
        }
        (1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut s = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            s += if k % 2 == 1 { term } else { -term };
            if term < 1e-17 {
                break;
            }
        }
        (2.0 * s).clamp(0.0, 1.0)
    }
}

/// Asymptotic p-value of a two-sample statistic `d` for sizes `n` and `m`,
/// with the effective-size correction `(sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) d`.
pub fn ks_p_value(d: f64, n: usize, m: usize) -> f64 {
    let ne = (n * m) as f64 / (n + m) as f64;
    let sq = ne.sqrt();
    kolmogorov_q((sq + 0.12 + 0.11 / sq) * d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn ks_two_sample<F: Real>(a: &[F], b: &[F]) -> KsTest {
    let statistic = ks_statistic(a, b).to_f64_lossy();
    KsTest {
        statistic,
        p_value: ks_p_value(statistic, a.len(), b.len()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsOutcome {
    pub trials: usize,
    pub threshold: f64,
    /// Trials whose p-value reached the threshold (null not rejected).
    pub passes: usize,
    pub seed: u64,
    pub rng: &'static str,
}

impl KsOutcome {
    pub fn pass_fraction(&self) -> f64 {
        self.passes as f64 / self.trials as f64
    }
}

/// Compares `sample` with `trials` equally sized synthetic samples drawn from
/// `LogNormal(mu, sigma)` and counts the tests that do not reject at
/// `p_threshold`. The count depends only on the seed, not on thread count.
pub fn ks_montecarlo<F>(
    sample: &[F],
    mu: F,
    sigma: F,
    trials: usize,
    p_threshold: f64,
    seed: u64,
) -> Result<KsOutcome>
where
    F: Real,
    StandardNormal: Distribution<F>,
{
    if !(p_threshold > 0.0 && p_threshold < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "p threshold {p_threshold} must lie in (0, 1)"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial required".into()));
    }
    if sample.len() < 3 {
        return Err(Error::InvalidArgument("sample needs at least 3 values".into()));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("sample has non-finite values".into()));
    }
    let law = LogNormal::new(mu, sigma)
        .map_err(|e| Error::InvalidArgument(format!("log-normal parameters: {e}")))?;
    let n = sample.len();
    let passes = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(trial as u64);
            let synthetic: Vec<F> = (0..n).map(|_| law.sample(&mut rng)).collect();
            usize::from(ks_two_sample(sample, &synthetic).p_value >= p_threshold)
        })
        .sum();
    Ok(KsOutcome {
        trials,
        threshold: p_threshold,
        passes,
        seed,
        rng: RNG_NAME,
    })
}
