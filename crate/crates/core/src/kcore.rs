//! Weighted k-core decomposition.
//!
//! Each node gets the weighted degree `k̂_i = [k_i^α (Σ_j w_ij)^β]^(1/(α+β))`
//! over its surviving neighbourhood. Thresholds are the distinct values taken
//! by the smallest surviving `k̂`: every node with `k̂ ≤ K` is removed in one
//! wave, degrees are recomputed, and the threshold only moves up once nobody
//! is left at or below it.

use std::cmp::Ordering;

use serde::Serialize;

use crate::activity::{compare_rankings, AggregateRanking, RankComparison};
use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::ingest::InstitutionId;
use crate::matrix::SquareMatrix;
use crate::num::Real;

/// Recorded in output metadata.
pub const SCHEDULE: &str = "distinct_values";

fn check_exponents<F: Real>(alpha: F, beta: F) -> Result<()> {
    if !(alpha >= F::zero() && beta >= F::zero() && alpha + beta > F::zero()) {
        return Err(Error::InvalidArgument(format!(
            "weighted degree needs alpha, beta >= 0 with alpha + beta > 0 (got {alpha}, {beta})"
        )));
    }
    Ok(())
}

fn degree_of<F: Real>(w: &SquareMatrix<F>, alive: &[bool], node: usize, alpha: F, beta: F) -> F {
    let mut k = 0usize;
    let mut s = F::zero();
    for (j, &x) in w.row(node).iter().enumerate() {
        if j != node && alive[j] && x > F::zero() {
            k += 1;
            s = s + x;
        }
    }
    let k = F::from_count(k);
    if beta == F::zero() {
        return k;
    }
    if alpha == F::zero() {
        return s;
    }
    (k.powf(alpha) * s.powf(beta)).powf(F::one() / (alpha + beta))
}

/// `k̂` of `node` among the nodes flagged in `alive`.
pub fn weighted_degree<F: Real>(
    w: &SquareMatrix<F>,
    alive: &[bool],
    node: usize,
    alpha: F,
    beta: F,
) -> Result<F> {
    check_exponents(alpha, beta)?;
    if node >= w.dim() || alive.len() != w.dim() {
        return Err(Error::InvalidArgument(format!("node {node} not in a graph of {}", w.dim())));
    }
    Ok(degree_of(w, alive, node, alpha, beta))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Removal<F> {
    pub node: usize,
    pub wave: usize,
    pub threshold: F,
    /// `k̂` at the moment of removal.
    pub degree: F,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoreDecomposition<F> {
    pub core: Vec<F>,
    pub normalized: Vec<F>,
    pub alpha: F,
    pub beta: F,
    pub schedule: &'static str,
    /// Removals in wave order; within a wave, by node index.
    pub removals: Vec<Removal<F>>,
}

impl<F: Real> CoreDecomposition<F> {
    pub fn max_core(&self) -> F {
        self.core.iter().copied().fold(F::zero(), F::max)
    }

    /// Re-runs the recorded removal sequence and checks every logged degree
    /// and that each node was at or below its threshold when removed.
    pub fn replay(&self, w: &SquareMatrix<F>) -> bool {
        let mut alive = vec![true; w.dim()];
        let mut i = 0;
        while i < self.removals.len() {
            let wave = self.removals[i].wave;
            let end = self.removals[i..].iter().position(|r| r.wave != wave).map_or(self.removals.len(), |p| i + p);
            for r in &self.removals[i..end] {
                if !alive[r.node] || degree_of(w, &alive, r.node, self.alpha, self.beta) != r.degree || r.degree > r.threshold {
                    return false;
                }
            }
            for r in &self.removals[i..end] {
                alive[r.node] = false;
            }
            i = end;
        }
        alive.iter().all(|a| !a)
    }
}

pub fn decompose<F: Real>(w: &SquareMatrix<F>, alpha: F, beta: F) -> Result<CoreDecomposition<F>> {
    check_exponents(alpha, beta)?;
    let n = w.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("k-core of an empty graph".into()));
    }
    let mut alive = vec![true; n];
    let mut core = vec![F::zero(); n];
    let mut removals = Vec::with_capacity(n);
    let mut threshold: Option<F> = None;
    let mut remaining = n;
    let mut wave = 0;
    while remaining > 0 {
        let degrees: Vec<(usize, F)> = (0..n)
            .filter(|&i| alive[i])
            .map(|i| (i, degree_of(w, &alive, i, alpha, beta)))
            .collect();
        let min = degrees.iter().map(|&(_, d)| d).fold(F::infinity(), F::min);
        let k = match threshold {
            Some(k) if k >= min => k,
            _ => min,
        };
        threshold = Some(k);
        for &(i, d) in degrees.iter().filter(|&&(_, d)| d <= k) {
            core[i] = k;
            removals.push(Removal {
                node: i,
                wave,
                threshold: k,
                degree: d,
            });
            alive[i] = false;
            remaining -= 1;
        }
        wave += 1;
    }
    let max = core.iter().copied().fold(F::zero(), F::max);
    let normalized = core
        .iter()
        .map(|&c| if max > F::zero() { c / max } else { F::zero() })
        .collect();
    Ok(CoreDecomposition {
        core,
        normalized,
        alpha,
        beta,
        schedule: SCHEDULE,
        removals,
    })
}

/// Node indices by descending core, then descending importance, then name.
pub fn topological_ranking<F: Real>(decomp: &CoreDecomposition<F>, importance: &[F], names: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..decomp.core.len()).collect();
    order.sort_by(|&a, &b| {
        decomp.core[b]
            .partial_cmp(&decomp.core[a])
            .unwrap_or(Ordering::Equal)
            .then(importance[b].partial_cmp(&importance[a]).unwrap_or(Ordering::Equal))
            .then_with(|| names[a].cmp(&names[b]))
    });
    order
}

/// Pairs each institution's topological position with its activity rank `R_i`.
pub fn compare_core_vs_activity(order: &[usize], agg: &AggregateRanking) -> Result<RankComparison> {
    let topo: Vec<(InstitutionId, u32)> = order
        .iter()
        .enumerate()
        .map(|(pos, &i)| (InstitutionId(i), pos as u32 + 1))
        .collect();
    compare_rankings(&topo, &agg.ranks())
}

/// `institution,core,normalized_core,topological_rank,activity_rank,displacement`
/// in topological order.
pub fn kcore_csv<F: Real>(decomp: &CoreDecomposition<F>, cmp: &RankComparison, names: &[String]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["institution", "core", "normalized_core", "topological_rank", "activity_rank", "displacement"])
        .expect("in-memory write");
    for row in &cmp.rows {
        let i = row.institution.index();
        w.write_record([
            names[i].clone(),
            sig9(decomp.core[i].to_f64_lossy()),
            sig9(decomp.normalized[i].to_f64_lossy()),
            row.left.to_string(),
            row.right.to_string(),
            row.displacement.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
