#![allow(dead_code)]

use std::path::PathBuf;

use otcnet::ingest::{load_panel, AliasTable, Panel, PanelOptions};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture_panel() -> Panel {
    load_panel(&fixture("panel_raw.csv"), &AliasTable::bundled(), &PanelOptions::default(), false)
        .expect("fixture loads")
        .0
}

/// Pruning by exhaustive scans: one node at a time, every degree recomputed
/// from the full adjacency each time it is looked at.
pub fn kcore_oracle(w: &[Vec<f64>], alpha: f64, beta: f64) -> Vec<f64> {
    let n = w.len();
    let mut gone = vec![false; n];
    let mut core = vec![f64::NAN; n];
    let degree = |i: usize, gone: &[bool]| -> f64 {
        let mut k = 0.0;
        let mut s = 0.0;
        for j in 0..n {
            if j != i && !gone[j] && w[i][j] > 0.0 {
                k += 1.0;
                s += w[i][j];
            }
        }
        if beta == 0.0 {
            k
        } else if alpha == 0.0 {
            s
        } else {
            (f64::powf(k, alpha) * f64::powf(s, beta)).powf(1.0 / (alpha + beta))
        }
    };
    let mut threshold = f64::NEG_INFINITY;
    while gone.iter().any(|g| !g) {
        let mut victim = None;
        for i in 0..n {
            if !gone[i] && degree(i, &gone) <= threshold {
                victim = Some(i);
                break;
            }
        }
        match victim {
            Some(i) => {
                core[i] = threshold;
                gone[i] = true;
            }
            None => {
                threshold = (0..n)
                    .filter(|&i| !gone[i])
                    .map(|i| degree(i, &gone))
                    .fold(f64::INFINITY, f64::min);
            }
        }
    }
    core
}

/// Textbook single-pass Pearson coefficient over the points where both
/// values are present.
pub fn pearson_oracle(x: &[Option<f64>], y: &[Option<f64>]) -> (Option<f64>, usize) {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter_map(|(a, b)| Some(((*a)?, (*b)?))).collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return (None, pts.len());
    }
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(a, b) in &pts {
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    // relative cut-off: the one-pass sums cancel catastrophically for constant series
    if vx <= 1e-12 * n * sxx || vy <= 1e-12 * n * syy {
        return (None, pts.len());
    }
    (Some((n * sxy - sx * sy) / (vx * vy).sqrt()), pts.len())
}
