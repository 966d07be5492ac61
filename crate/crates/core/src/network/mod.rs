//! Co-occurrence networks built from quarterly rankings.
//!
//! Two institutions listed in the same quarter are linked. In binary mode the
//! link weight is 1; in rank-weighted mode it is `1 / max(r_i, r_j)`, i.e. the
//! inverse rank of the less active of the two. Aggregation averages links over
//! all `T` quarters of the period, including quarters where a pair is absent.

pub mod export;
pub mod frames;

pub use export::{dot, edge_list_csv, graphml};
pub use frames::{emit_frames, frame_file_name, Frame, FrameLink, FrameNode};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{Panel, MAX_RANKED};
use crate::matrix::SquareMatrix;
use crate::num::Real;
use crate::quarter::QuarterRange;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkMode {
    Binary,
    RankWeighted,
}

impl LinkMode {
    pub fn label(self) -> &'static str {
        match self {
            LinkMode::Binary => "binary",
            LinkMode::RankWeighted => "rank_weighted",
        }
    }
}

impl std::str::FromStr for LinkMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(LinkMode::Binary),
            "rank_weighted" => Ok(LinkMode::RankWeighted),
            _ => Err(Error::InvalidArgument(format!("unknown link mode {s:?} (expected binary or rank_weighted)"))),
        }
    }
}

fn listed(r: u32) -> bool {
    (1..=MAX_RANKED as u32).contains(&r)
}

/// `l_ij = 1` when both institutions are listed and `i != j`.
pub fn binary_links<F: Real>(ranks: &[u32]) -> SquareMatrix<F> {
    links(ranks, LinkMode::Binary)
}

/// `l_ij = min(1/r_i, 1/r_j)` when both institutions are listed and `i != j`.
pub fn rank_weighted_links<F: Real>(ranks: &[u32]) -> SquareMatrix<F> {
    links(ranks, LinkMode::RankWeighted)
}

pub fn links<F: Real>(ranks: &[u32], mode: LinkMode) -> SquareMatrix<F> {
    let n = ranks.len();
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        if !listed(ranks[i]) {
            continue;
        }
        for j in 0..i {
            if !listed(ranks[j]) {
                continue;
            }
            let w = match mode {
                LinkMode::Binary => F::one(),
                LinkMode::RankWeighted => F::one() / F::from_count(ranks[i].max(ranks[j]) as usize),
            };
            m.set_sym(i, j, w);
        }
    }
    m
}

/// Per-quarter link matrices indexed by registry order.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalNetwork<F> {
    mode: LinkMode,
    range: QuarterRange,
    ranks: Vec<Vec<u32>>,
    frames: Vec<SquareMatrix<F>>,
}

impl<F: Real> TemporalNetwork<F> {
    pub fn from_panel(panel: &Panel, mode: LinkMode) -> Self {
        let ranks = (1..=panel.quarters()).map(|t| panel.ranks_at(t)).collect();
        Self::from_ranks(panel.range(), ranks, mode).expect("panel ranks are consistent")
    }

    /// `ranks[t - 1]` holds every institution's rank in quarter `t`.
    pub fn from_ranks(range: QuarterRange, ranks: Vec<Vec<u32>>, mode: LinkMode) -> Result<Self> {
        if ranks.len() != range.len() {
            return Err(Error::InvalidArgument(format!(
                "{} rank vectors for {} quarters",
                ranks.len(),
                range.len()
            )));
        }
        if let Some(first) = ranks.first() {
            if ranks.iter().any(|r| r.len() != first.len()) {
                return Err(Error::InvalidArgument("rank vectors differ in length".into()));
            }
        }
        let frames = ranks.iter().map(|r| links(r, mode)).collect();
        Ok(TemporalNetwork {
            mode,
            range,
            ranks,
            frames,
        })
    }

    pub fn mode(&self) -> LinkMode {
        self.mode
    }

    pub fn range(&self) -> QuarterRange {
        self.range
    }

    /// Number of quarters `T`.
    pub fn quarters(&self) -> usize {
        self.frames.len()
    }

    pub fn nodes(&self) -> usize {
        self.ranks.first().map_or(0, |r| r.len())
    }

    /// Link matrix of 1-based quarter `t`.
    pub fn frame(&self, t: usize) -> &SquareMatrix<F> {
        &self.frames[t - 1]
    }

    pub fn ranks(&self, t: usize) -> &[u32] {
        &self.ranks[t - 1]
    }
}

/// Restricts a temporal network to `period`; `T` becomes the period length.
pub fn period_subnetwork<F: Real>(
    temporal: &TemporalNetwork<F>,
    period: &QuarterRange,
) -> Result<TemporalNetwork<F>> {
    let span = temporal.range.index_span(period)?;
    let (a, b) = (*span.start(), *span.end());
    Ok(TemporalNetwork {
        mode: temporal.mode,
        range: *period,
        ranks: temporal.ranks[a - 1..b].to_vec(),
        frames: temporal.frames[a - 1..b].to_vec(),
    })
}

/// Time-averaged weights `w_ij` and importances `W_i = sum_j w_ij`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregatedGraph<F> {
    pub mode: LinkMode,
    pub quarters: usize,
    pub weights: SquareMatrix<F>,
    pub importance: Vec<F>,
}

impl<F: Real> AggregatedGraph<F> {
    pub fn nodes(&self) -> usize {
        self.importance.len()
    }

    /// `W_i / sum_k W_k`; all zero when the graph has no links.
    pub fn normalized_importance(&self) -> Vec<F> {
        let total: F = self.importance.iter().copied().sum();
        self.importance
            .iter()
            .map(|&w| if total > F::zero() { w / total } else { F::zero() })
            .collect()
    }
}

/// `w_ij = (1/T) sum_t l_ij(t)`, summed in quarter order.
pub fn aggregate_links<F: Real>(temporal: &TemporalNetwork<F>) -> AggregatedGraph<F> {
    let n = temporal.nodes();
    let mut weights = SquareMatrix::zeros(n);
    for frame in &temporal.frames {
        weights.add_assign(frame);
    }
    if temporal.quarters() > 0 {
        weights.divide(F::from_count(temporal.quarters()));
    }
    let importance = weights.row_sums();
    AggregatedGraph {
        mode: temporal.mode,
        quarters: temporal.quarters(),
        weights,
        importance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn range(t: usize) -> QuarterRange {
        let first = "2000-Q1".parse().unwrap();
        QuarterRange::new(first, crate::quarter::Quarter::offset(first, t as i64 - 1)).unwrap()
    }

    #[test]
    fn worked_weights() {
        // r_i = 2 with the top institution, 2 vs 3, 21 vs 22
        let m: SquareMatrix<f64> = rank_weighted_links(&[2, 1, 3, 21, 22]);
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.get(0, 2), 1.0 / 3.0);
        assert_eq!(m.get(3, 4), 1.0 / 22.0);
        assert_eq!(m.get(3, 0), 1.0 / 21.0);
        assert_eq!(m.get(2, 2), 0.0);
    }

    #[test]
    fn complete_graph_of_25() {
        let ranks: Vec<u32> = (1..=25).collect();
        let m: SquareMatrix<f64> = binary_links(&ranks);
        let links = (0..25).map(|i| (0..i).filter(|&j| m.get(i, j) == 1.0).count()).sum::<usize>();
        assert_eq!(links, 300);
    }

    #[test]
    fn small_cases() {
        let one: SquareMatrix<f64> = binary_links(&[0, 1, 0]);
        assert!(one.row_sums().iter().all(|&s| s == 0.0));
        let tri: SquareMatrix<f64> = binary_links(&[1, 3, 2, 0]);
        assert_eq!(tri.row_sums(), vec![2.0, 2.0, 2.0, 0.0]);
    }

    #[test]
    fn two_of_57_quarters() {
        let mut ranks = vec![vec![0u32, 0]; 57];
        ranks[4] = vec![1, 2];
        ranks[30] = vec![2, 1];
        let tn = TemporalNetwork::<f64>::from_ranks(range(57), ranks, LinkMode::Binary).unwrap();
        let g = aggregate_links(&tn);
        assert_eq!(g.weights.get(0, 1), 2.0 / 57.0);
        let full = TemporalNetwork::<f64>::from_ranks(range(57), vec![vec![1, 2]; 57], LinkMode::Binary).unwrap();
        assert_eq!(aggregate_links(&full).weights.get(0, 1), 1.0);
    }

    #[test]
    fn three_quarter_hand_sum() {
        let ranks = vec![vec![1, 2, 3], vec![3, 1, 0], vec![2, 0, 1]];
        let tn = TemporalNetwork::<f64>::from_ranks(range(3), ranks, LinkMode::RankWeighted).unwrap();
        let g = aggregate_links(&tn);
        // (0,1): 1/2 + 1/3 + 0 ; (0,2): 1/3 + 0 + 1/2 ; (1,2): 1/3
        assert!((g.weights.get(0, 1) - (0.5 + 1.0 / 3.0) / 3.0).abs() < 1e-15);
        assert!((g.weights.get(0, 2) - (1.0 / 3.0 + 0.5) / 3.0).abs() < 1e-15);
        assert!((g.weights.get(1, 2) - (1.0 / 3.0) / 3.0).abs() < 1e-15);
        let s: f64 = g.normalized_importance().iter().sum();
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn empty_period_rejected() {
        let tn = TemporalNetwork::<f64>::from_ranks(range(3), vec![vec![1]; 3], LinkMode::Binary).unwrap();
        let outside: QuarterRange = "1990-Q1..1990-Q2".parse().unwrap();
        assert!(period_subnetwork(&tn, &outside).is_err());
        let one = QuarterRange::new(range(3).first, range(3).first).unwrap();
        assert_eq!(period_subnetwork(&tn, &one).unwrap().quarters(), 1);
        assert_eq!(period_subnetwork(&tn, &range(3)).unwrap(), tn);
    }

    fn rank_vectors(n: usize, t: usize) -> impl Strategy<Value = Vec<Vec<u32>>> {
        prop::collection::vec(Just((1..=n as u32).collect::<Vec<u32>>()).prop_shuffle(), t).prop_flat_map(move |perms| {
            prop::collection::vec(prop::collection::vec(any::<bool>(), n), perms.len()).prop_map(move |masks| {
                perms
                    .iter()
                    .zip(masks)
                    .map(|(p, m)| {
                        // keep a random subset, then re-rank it as a prefix 1..k
                        let mut kept: Vec<(u32, usize)> = p.iter().zip(&m).enumerate().filter(|(_, (_, &k))| k).map(|(i, (&r, _))| (r, i)).collect();
                        kept.sort();
                        let mut out = vec![0u32; p.len()];
                        for (pos, (_, i)) in kept.into_iter().enumerate() {
                            out[i] = pos as u32 + 1;
                        }
                        out
                    })
                    .collect()
            })
        })
    }

    proptest! {
        #[test]
        fn weight_bounds(ranks in rank_vectors(8, 6)) {
            let b = aggregate_links(&TemporalNetwork::<f64>::from_ranks(range(6), ranks.clone(), LinkMode::Binary).unwrap());
            let rw = aggregate_links(&TemporalNetwork::<f64>::from_ranks(range(6), ranks.clone(), LinkMode::RankWeighted).unwrap());
            for i in 0..8 {
                for j in 0..8 {
                    let max_l = ranks.iter().map(|r| rank_weighted_links::<f64>(r).get(i, j)).fold(0.0, f64::max);
                    prop_assert!(rw.weights.get(i, j) <= max_l + 1e-15);
                    prop_assert!(rw.weights.get(i, j) <= b.weights.get(i, j) + 1e-15);
                    prop_assert!((0.0..=1.0).contains(&b.weights.get(i, j)));
                }
                let co_listed = ranks.iter().any(|r| r[i] > 0 && r.iter().enumerate().any(|(j, &x)| j != i && x > 0));
                prop_assert_eq!(b.importance[i] > 0.0, co_listed);
            }
            prop_assert!(b.weights.is_symmetric() && rw.weights.is_symmetric());
        }

        #[test]
        fn split_recombines(ranks in rank_vectors(6, 7), cut in 1usize..7) {
            let r = range(7);
            let tn = TemporalNetwork::<f64>::from_ranks(r, ranks, LinkMode::RankWeighted).unwrap();
            let a = QuarterRange::new(r.first, r.first.offset(cut as i64 - 1)).unwrap();
            let b = QuarterRange::new(r.first.offset(cut as i64), r.last).unwrap();
            let ga = aggregate_links(&period_subnetwork(&tn, &a).unwrap());
            let gb = aggregate_links(&period_subnetwork(&tn, &b).unwrap());
            let full = aggregate_links(&tn);
            for i in 0..6 {
                for j in 0..6 {
                    let mix = (cut as f64 * ga.weights.get(i, j) + (7 - cut) as f64 * gb.weights.get(i, j)) / 7.0;
                    prop_assert!((mix - full.weights.get(i, j)).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn label_equivariance(ranks in rank_vectors(6, 4), perm in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle()) {
            let permuted: Vec<Vec<u32>> = ranks.iter().map(|r| perm.iter().map(|&p| r[p]).collect()).collect();
            let g = aggregate_links(&TemporalNetwork::<f64>::from_ranks(range(4), ranks, LinkMode::RankWeighted).unwrap());
            let gp = aggregate_links(&TemporalNetwork::<f64>::from_ranks(range(4), permuted, LinkMode::RankWeighted).unwrap());
            prop_assert_eq!(g.weights.permuted(&perm), gp.weights);
        }
    }
}
