//! Per-quarter network snapshots for animation.

use serde::Serialize;

use super::TemporalNetwork;
use crate::matrix::SquareMatrix;
use crate::num::Real;
use crate::quarter::Quarter;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameNode {
    pub id: usize,
    pub name: String,
    pub rank: u32,
    pub importance: f64,
    pub normalized_importance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameLink {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correlation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frame {
    pub quarter: Quarter,
    pub t: usize,
    pub mode: &'static str,
    pub nodes: Vec<FrameNode>,
    pub links: Vec<FrameLink>,
}

impl Frame {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("frame serializes");
        s.push('\n');
        s
    }
}

pub fn frame_file_name(q: Quarter) -> String {
    format!("frame_{}.json", q.compact())
}

/// One frame per quarter. Nodes are the listed institutions in rank order;
/// quarterly importance is the row sum of that quarter's links. When given,
/// `correlation` is indexed like the registry and colours the links.
pub fn emit_frames<F: Real>(
    temporal: &TemporalNetwork<F>,
    names: &[String],
    correlation: Option<&SquareMatrix<Option<f64>>>,
) -> Vec<Frame> {
    (1..=temporal.quarters())
        .map(|t| {
            let ranks = temporal.ranks(t);
            let links = temporal.frame(t);
            let strength = links.row_sums();
            let total: F = strength.iter().copied().sum();
            let mut listed: Vec<usize> = (0..ranks.len()).filter(|&i| ranks[i] > 0).collect();
            listed.sort_by_key(|&i| ranks[i]);
            let nodes = listed
                .iter()
                .map(|&i| FrameNode {
                    id: i,
                    name: names[i].clone(),
                    rank: ranks[i],
                    importance: strength[i].to_f64_lossy(),
                    normalized_importance: if total > F::zero() {
                        (strength[i] / total).to_f64_lossy()
                    } else {
                        0.0
                    },
                })
                .collect();
            let mut edges = Vec::new();
            for (a, &i) in listed.iter().enumerate() {
                for &j in &listed[a + 1..] {
                    let w = links.get(i, j);
                    if w > F::zero() {
                        edges.push(FrameLink {
                            source: i,
                            target: j,
                            weight: w.to_f64_lossy(),
                            correlation: correlation.and_then(|c| c.get(i, j)),
                        });
                    }
                }
            }
            Frame {
                quarter: temporal.range().quarter_at(t).expect("t within range"),
                t,
                mode: temporal.mode().label(),
                nodes,
                links: edges,
            }
        })
        .collect()
}
