//! Acceptance checks. Prints one line per criterion and exits non-zero when
//! any criterion that could run failed.
//!
//! Criteria 1-4 and 8 need the full 1998-Q4..2012-Q4 panel: point
//! `OTCNET_OCC_PANEL` at its CSV (and `OTCNET_OCC_MARKET_TOTALS` at the
//! per-quarter totals of unlisted institutions for the top-25 share checks).
//! Without it they report NOT RUN.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{fixture, fixture_panel, kcore_oracle};
use otcnet::activity::{
    activity_series, aggregate, cumulative_share, fit_lognormal_rank, gini, growth_trend, ks_montecarlo, market_share,
    skewness, FitMethod,
};
use otcnet::cli::{commands, Context, RunConfig, Sink};
use otcnet::correlate::{
    correlation_matrix, pearson_full, pearson_pairwise, scale_by_weight, split_at, Cell, CorrelationMatrix,
    CorrelationRequest, Method, SeriesField,
};
use otcnet::ingest::{load_panel, AliasTable, MarketTotals, Panel, PanelOptions};
use otcnet::kcore::decompose;
use otcnet::matrix::SquareMatrix;
use otcnet::network::{aggregate_links, binary_links, period_subnetwork, rank_weighted_links, AggregatedGraph, LinkMode};
use otcnet::{InstitutionId, Matrix64, QuarterRange, TemporalNetwork64};

const OCC_RANGE: &str = "1998-Q4..2012-Q4";
const GINI: (f64, f64) = (0.9559, 0.0005);
const SKEWNESS: (f64, f64) = (4.637, 0.01);
const MU: (f64, f64) = (14.54116, 0.05);
const SIGMA: (f64, f64) = (2.865165, 0.05);
const KS_TRIALS: usize = 10_000;
const KS_P: f64 = 0.10;
const KS_PASSES: (usize, usize) = (9856, 200);
const KS_SEED: u64 = 1;
const TOP7: (f64, f64) = (0.95, 0.01);
const TOP15_MIN: f64 = 0.99;
const TOP25_1998_MIN: f64 = 0.99;
const TOP25_2012_MIN: f64 = 0.995;
const BAC_WINDOW: &str = "1999-Q3..2011-Q3";
const BAC_SLOPE: (f64, f64) = (0.2066, 0.002);
const BAC_RATIO: (f64, f64) = (1.2295, 0.003);
const ALWAYS_PRESENT: usize = 8;

enum Status {
    Pass(String),
    Fail(String),
    NotRun(String),
}

fn within(x: f64, (target, tol): (f64, f64)) -> bool {
    (x - target).abs() <= tol
}

fn check(ok: bool, detail: String) -> Status {
    if ok {
        Status::Pass(detail)
    } else {
        Status::Fail(detail)
    }
}

fn occ_panel() -> Option<Result<Panel, String>> {
    let path = PathBuf::from(std::env::var_os("OTCNET_OCC_PANEL")?);
    let opts = PanelOptions {
        range: Some(OCC_RANGE.parse().unwrap()),
        ..PanelOptions::default()
    };
    Some(
        load_panel(&path, &AliasTable::bundled(), &opts, true)
            .map(|(p, _, _)| p)
            .map_err(|e| e.to_string()),
    )
}

fn with_occ(f: impl FnOnce(&Panel) -> Result<Status, String>) -> Status {
    match occ_panel() {
        None => Status::NotRun("OTCNET_OCC_PANEL not set; the OCC panel is not bundled".into()),
        Some(Err(e)) => Status::Fail(format!("could not load OCC panel: {e}")),
        Some(Ok(p)) => f(&p).unwrap_or_else(Status::Fail),
    }
}

fn aggregates(panel: &Panel) -> Vec<f64> {
    aggregate(panel).totals_by_rank().iter().map(|&a| a as f64).collect()
}

fn concentration() -> Status {
    with_occ(|p| {
        let a = aggregates(p);
        let g = gini(&a).map_err(|e| e.to_string())?;
        let s = skewness(&a).map_err(|e| e.to_string())?;
        Ok(check(
            within(g, GINI) && within(s, SKEWNESS),
            format!("gini {g:.7} (want {} +/- {}), skewness {s:.4} (want {} +/- {})", GINI.0, GINI.1, SKEWNESS.0, SKEWNESS.1),
        ))
    })
}

fn lognormal() -> Status {
    with_occ(|p| {
        let a: Vec<f64> = aggregates(p).into_iter().filter(|&x| x > 0.0).collect();
        let fit = fit_lognormal_rank(&a, FitMethod::LogMoments).map_err(|e| e.to_string())?;
        let ks = ks_montecarlo(&a, fit.mu, fit.sigma, KS_TRIALS, KS_P, KS_SEED).map_err(|e| e.to_string())?;
        let passes_ok = ks.passes.abs_diff(KS_PASSES.0) <= KS_PASSES.1;
        Ok(check(
            within(fit.mu, MU) && within(fit.sigma, SIGMA) && passes_ok,
            format!(
                "mu {:.5}, sigma {:.5}; KS passes {}/{} (want {} +/- {})",
                fit.mu, fit.sigma, ks.passes, KS_TRIALS, KS_PASSES.0, KS_PASSES.1
            ),
        ))
    })
}

fn market_concentration() -> Status {
    with_occ(|p| {
        let cum = cumulative_share(&aggregates(p)).map_err(|e| e.to_string())?;
        let (s7, s15) = (cum[6], cum[14]);
        let top_ok = within(s7, TOP7) && s15 > TOP15_MIN;
        let detail = format!("top-7 {s7:.4}, top-15 {s15:.4}");
        let Some(mt) = std::env::var_os("OTCNET_OCC_MARKET_TOTALS") else {
            return Ok(if top_ok {
                Status::NotRun(format!("{detail}; top-25 market shares need OTCNET_OCC_MARKET_TOTALS"))
            } else {
                Status::Fail(detail)
            });
        };
        let market = MarketTotals::from_path(&PathBuf::from(mt)).map_err(|e| e.to_string())?;
        let share = |q: &str| -> Result<f64, String> {
            let r: QuarterRange = q.parse().map_err(|e: otcnet::Error| e.to_string())?;
            market_share::<f64>(p, 25, &r, Some(&market)).map_err(|e| e.to_string())
        };
        let (a, b) = (share("1998-Q4")?, share("2012-Q1")?);
        Ok(check(
            top_ok && a >= TOP25_1998_MIN && b >= TOP25_2012_MIN,
            format!("{detail}, top-25 share 1998-Q4 {a:.4}, 2012-Q1 {b:.4}"),
        ))
    })
}

fn growth() -> Status {
    with_occ(|p| {
        let id = p.registry().id("BANK OF AMERICA").ok_or("BANK OF AMERICA not in panel")?;
        let window: QuarterRange = BAC_WINDOW.parse().unwrap();
        let span = p.range().index_span(&window).map_err(|e| e.to_string())?;
        let t = growth_trend(&activity_series::<f64>(p, id), span.start() - 1..=span.end() - 1).map_err(|e| e.to_string())?;
        Ok(check(
            within(t.slope, BAC_SLOPE) && within(t.yearly_ratio, BAC_RATIO),
            format!("slope {:.4}, yearly ratio {:.4} over {} points", t.slope, t.yearly_ratio, t.points),
        ))
    })
}

fn random_ranks(rng: &mut ChaCha8Rng) -> Vec<u32> {
    let n = rng.random_range(2..=61);
    let k = rng.random_range(0..=n.min(25));
    let mut idx: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        idx.swap(i, rng.random_range(0..=i));
    }
    let mut ranks = vec![0u32; n];
    for (pos, &i) in idx[..k].iter().enumerate() {
        ranks[i] = pos as u32 + 1;
    }
    ranks
}

fn link_weights() -> Status {
    let m: Matrix64 = rank_weighted_links(&[2, 1, 3, 21, 22]);
    let worked = m.get(0, 1) == 0.5 && m.get(0, 2) == 1.0 / 3.0 && m.get(3, 4) == 1.0 / 22.0;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0;
    for _ in 0..1000 {
        let r = random_ranks(&mut rng);
        let l: Matrix64 = rank_weighted_links(&r);
        let b: Matrix64 = binary_links(&r);
        for i in 0..r.len() {
            for j in 0..r.len() {
                let both = i != j && r[i] > 0 && r[j] > 0;
                let want = if both { 1.0 / r[i].max(r[j]) as f64 } else { 0.0 };
                if l.get(i, j) != want || l.get(i, j) != l.get(j, i) || b.get(i, j) != if both { 1.0 } else { 0.0 } {
                    bad += 1;
                }
            }
        }
    }
    check(worked && bad == 0, format!("worked weights exact: {worked}; 1000 random rank vectors, {bad} mismatching cells"))
}

fn kcore_oracle_equivalence() -> Status {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    for _ in 0..200 {
        let n = rng.random_range(1..=12);
        let density: f64 = rng.random_range(0.1..0.9);
        let mut w = Matrix64::zeros(n);
        for i in 0..n {
            for j in 0..i {
                if rng.random_bool(density) {
                    w.set_sym(i, j, rng.random_range(0.001..1.0));
                }
            }
        }
        let rows: Vec<Vec<f64>> = (0..n).map(|i| w.row(i).to_vec()).collect();
        for (alpha, beta) in [(0.0, 1.0), (1.0, 0.0)] {
            let d = decompose(&w, alpha, beta).expect("nonempty graph");
            if d.core != kcore_oracle(&rows, alpha, beta) {
                mismatches += 1;
            }
        }
    }
    let mut k4 = Matrix64::zeros(4);
    let mut star = Matrix64::zeros(6);
    for i in 0..4 {
        for j in 0..i {
            k4.set_sym(i, j, 1.0);
        }
    }
    for j in 1..6 {
        star.set_sym(0, j, 1.0);
    }
    let classic = decompose(&k4, 1.0, 0.0).unwrap().core == vec![3.0; 4] && decompose(&star, 1.0, 0.0).unwrap().core == vec![1.0; 6];
    check(
        mismatches == 0 && classic,
        format!("200 random graphs x 2 exponent settings, {mismatches} mismatches; K4 and star classic cores: {classic}"),
    )
}

fn two_by_two(value: Option<f64>, w: f64) -> Result<CorrelationMatrix<f64>, otcnet::Error> {
    let cell = Cell { value, overlap: 5, weight: None, scaled: None };
    let mut cells = SquareMatrix::filled(2, cell);
    cells.set(0, 0, Cell { value: Some(1.0), ..cell });
    cells.set(1, 1, Cell { value: Some(1.0), ..cell });
    let raw = CorrelationMatrix {
        field: SeriesField::ActivityTotal,
        period: "2000-Q1..2001-Q1".parse().unwrap(),
        method: Method::Pairwise,
        order: vec![InstitutionId(0), InstitutionId(1)],
        names: vec!["A".into(), "B".into()],
        cells,
    };
    let mut weights = Matrix64::zeros(2);
    weights.set_sym(0, 1, w);
    let g = AggregatedGraph { mode: LinkMode::Binary, quarters: 5, importance: weights.row_sums(), weights };
    scale_by_weight(&raw, &g)
}

fn correlation_engine() -> Status {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut exact_bad, mut affine_bad, mut bound_bad) = (0, 0, 0);
    for _ in 0..1000 {
        let len = rng.random_range(3..=57);
        let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1e3..1e3)).collect();
        let y: Vec<f64> = (0..len).map(|_| rng.random_range(-1e3..1e3)).collect();
        let xs: Vec<Option<f64>> = x.iter().map(|&v| Some(v)).collect();
        let ys: Vec<Option<f64>> = y.iter().map(|&v| Some(v)).collect();
        let full = pearson_full(&x, &y);
        if pearson_pairwise(&xs, &ys).value != full {
            exact_bad += 1;
        }
        let holes: Vec<Option<f64>> = ys.iter().map(|&v| if rng.random_bool(0.2) { None } else { v }).collect();
        let (a, b) = (rng.random_range(0.01..100.0), rng.random_range(-1e4..1e4));
        let base = pearson_pairwise(&xs, &holes).value;
        let moved: Vec<Option<f64>> = xs.iter().map(|v| v.map(|v| a * v + b)).collect();
        let flipped: Vec<Option<f64>> = xs.iter().map(|v| v.map(|v| -a * v + b)).collect();
        match (base, pearson_pairwise(&moved, &holes).value, pearson_pairwise(&flipped, &holes).value) {
            (Some(r), Some(m), Some(f)) if (r - m).abs() < 1e-9 && (r + f).abs() < 1e-9 => {}
            (None, None, None) => {}
            _ => affine_bad += 1,
        }
        let w = rng.random_range(0.0..=1.0);
        match two_by_two(full, w) {
            Ok(s) => {
                let c = s.cells.get(0, 1);
                if c.scaled.is_some_and(|v| v.abs() > w) || c.scaled.is_some() != full.is_some() {
                    bound_bad += 1;
                }
            }
            Err(_) => bound_bad += 1,
        }
    }
    let panel = fixture_panel();
    let ids = [
        panel.registry().id("GOLDMAN SACHS BANK USA").unwrap(),
        panel.registry().id("BANK OF NEW YORK").unwrap(),
    ];
    let req = CorrelationRequest {
        field: SeriesField::ActivityTotal,
        period: None,
        method: Method::Pairwise,
        scaled: true,
        order: ids.to_vec(),
    };
    let disjoint = match correlation_matrix::<f64>(&panel, &req) {
        Ok(m) => {
            let c = m.cells.get(0, 1);
            c.value.is_none() && c.scaled.is_none() && c.overlap == 0 && m.to_csv().lines().nth(1).is_some_and(|l| l.ends_with(','))
        }
        Err(_) => false,
    };
    check(
        exact_bad + affine_bad + bound_bad == 0 && disjoint,
        format!(
            "1000 random pairs: complete-presence mismatches {exact_bad}, affine failures {affine_bad}, bound violations {bound_bad}; disjoint pair undefined and blank: {disjoint}"
        ),
    )
}

fn occ_correlations() -> Status {
    with_occ(|p| {
        let all = p.always_present(1..=p.quarters());
        if all.len() != ALWAYS_PRESENT {
            return Ok(Status::Fail(format!("{} institutions present in every quarter (want {ALWAYS_PRESENT})", all.len())));
        }
        let req = CorrelationRequest {
            field: SeriesField::ActivityTotal,
            period: None,
            method: Method::Pairwise,
            scaled: false,
            order: all.clone(),
        };
        let m = correlation_matrix::<f64>(p, &req).map_err(|e| e.to_string())?;
        let n = all.len();
        let mut positive = true;
        let mut means = Vec::new();
        for a in 0..n {
            let mut s = 0.0;
            for b in (0..n).filter(|&b| b != a) {
                let v = m.cells.get(a, b).value.ok_or("undefined correlation among always-present institutions")?;
                positive &= v > 0.0;
                s += v;
            }
            means.push((s / (n - 1) as f64, m.names[a].clone()));
        }
        means.sort_by(|x, y| x.0.total_cmp(&y.0));
        let lowest = &means[0].1;
        Ok(check(
            positive && lowest == "KEYBANK",
            format!("8 always present; all positive: {positive}; lowest mean off-diagonal: {lowest} ({:.3})", means[0].0),
        ))
    })
}

fn report_once(out: PathBuf) -> Result<Vec<(String, String)>, String> {
    let config = RunConfig {
        panel: Some(fixture("panel_raw.csv")),
        market_totals: Some(fixture("market_totals.csv")),
        out,
        seed: 42,
        correlation: otcnet::cli::config::CorrelationConfig {
            split: Some("2008-Q4".parse().unwrap()),
            ..Default::default()
        },
        ..RunConfig::default()
    };
    let ctx = Context::load(config).map_err(|e| e.to_string())?;
    let mut sink = Sink::new(&ctx.config.out).map_err(|e| e.to_string())?;
    let manifest = commands::cmd_report(&ctx, &mut sink).map_err(|e| e.to_string())?;
    Ok(manifest.artifacts.into_iter().map(|a| (a.path, a.sha256)).collect())
}

fn reproducibility() -> Status {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    match (report_once(a.path().to_path_buf()), report_once(b.path().to_path_buf())) {
        (Ok(x), Ok(y)) => check(x == y && !x.is_empty(), format!("{} artifacts, checksums identical: {}", x.len(), x == y)),
        (Err(e), _) | (_, Err(e)) => Status::Fail(e),
    }
}

fn split_consistency() -> Status {
    let panel = fixture_panel();
    let Ok((before, after)) = split_at(&panel.range(), "2008-Q4".parse().unwrap()) else {
        return Status::Fail("split failed".into());
    };
    let order: Vec<InstitutionId> = panel.registry().ids().collect();
    let mut overlap_bad = 0;
    for field in SeriesField::ALL {
        let mk = |period| {
            let req = CorrelationRequest { field, period, method: Method::Pairwise, scaled: true, order: order.clone() };
            correlation_matrix::<f64>(&panel, &req).unwrap()
        };
        let (full, b, a) = (mk(None), mk(Some(before)), mk(Some(after)));
        for i in 0..order.len() {
            for j in 0..order.len() {
                if b.cells.get(i, j).overlap + a.cells.get(i, j).overlap != full.cells.get(i, j).overlap {
                    overlap_bad += 1;
                }
            }
        }
    }
    let mut worst: f64 = 0.0;
    for mode in [LinkMode::Binary, LinkMode::RankWeighted] {
        let tn = TemporalNetwork64::from_panel(&panel, mode);
        let gf = aggregate_links(&tn);
        let gb = aggregate_links(&period_subnetwork(&tn, &before).unwrap());
        let ga = aggregate_links(&period_subnetwork(&tn, &after).unwrap());
        let (tb, ta, t) = (before.len() as f64, after.len() as f64, panel.quarters() as f64);
        for i in 0..gf.nodes() {
            for j in 0..gf.nodes() {
                let mix = (tb * gb.weights.get(i, j) + ta * ga.weights.get(i, j)) / t;
                worst = worst.max((mix - gf.weights.get(i, j)).abs());
            }
        }
    }
    check(
        overlap_bad == 0 && worst < 1e-12,
        format!("{overlap_bad} overlap mismatches over 4 fields; worst weight recombination error {worst:.1e}"),
    )
}

type Criterion = (u32, &'static str, &'static str, fn() -> Status);

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "real data", "concentration statistics", concentration),
        (2, "real data", "log-normal fit and KS Monte Carlo", lognormal),
        (3, "real data", "market concentration", market_concentration),
        (4, "real data", "growth trend", growth),
        (5, "fixture", "link weight unit suite", link_weights),
        (6, "fixture", "k-core oracle equivalence", kcore_oracle_equivalence),
        (7, "fixture", "correlation engine", correlation_engine),
        (8, "real data", "correlation structure", occ_correlations),
        (9, "fixture", "reproducibility", reproducibility),
        (10, "fixture", "period-split consistency", split_consistency),
    ];
    let mut failed = 0;
    for (n, kind, title, run) in criteria {
        let start = Instant::now();
        let status = run();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match status {
            Status::Pass(d) => ("PASS", d),
            Status::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
            Status::NotRun(d) => ("NOT RUN", d),
        };
        println!("criterion {n:>2} [{kind}] {title}: {tag} ({secs:.2}s) - {detail}");
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
