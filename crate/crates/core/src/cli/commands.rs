//! Subcommand implementations. Each writes its files below the output
//! directory and records them, with content hashes, for the manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use super::config::{FitChoice, RunConfig, Selection};
use crate::activity::{
    activity_series, aggregate, compare_rankings, cumulative_share, fit_lognormal_rank, gini, growth_trend,
    ks_montecarlo, market_share, otc_ratios, rank_curve, skewness, FitMethod, OtcRatio,
};
use crate::correlate::{correlation_matrix, split_at, CorrelationMatrix, CorrelationRequest, Method, SeriesField};
use crate::error::{Error, Result};
use crate::fmt::sig9;
use crate::ingest::{load_panel, registry_json, AliasTable, IngestLog, MarketTotals, MergeReport, Panel, PanelOptions};
use crate::kcore::{compare_core_vs_activity, decompose, kcore_csv, topological_ranking, CoreDecomposition};
use crate::network::{
    aggregate_links, dot, edge_list_csv, emit_frames, frame_file_name, graphml, period_subnetwork, AggregatedGraph,
    LinkMode, TemporalNetwork,
};
use crate::quarter::QuarterRange;

/// Artifact families a full report produces.
pub const FAMILIES: [&str; 9] = [
    "stats",
    "rank_activity",
    "market_share",
    "otc_ratio",
    "rank_comparison",
    "network",
    "kcore",
    "correlation",
    "frames",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Artifact {
    pub family: &'static str,
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub content: &'static str,
}

/// Writes files under the output directory and remembers what it wrote.
pub struct Sink {
    root: PathBuf,
    pub artifacts: Vec<Artifact>,
}

impl Sink {
    pub fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Sink {
            root: root.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    pub fn write(&mut self, family: &'static str, rel: &str, content: &'static str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.artifacts.push(Artifact {
            family,
            path: rel.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            content,
        });
        Ok(())
    }
}

/// A loaded panel with the inputs it came from.
pub struct Context {
    pub config: RunConfig,
    pub panel: Panel,
    pub merge: MergeReport,
    pub log: IngestLog,
}

impl Context {
    pub fn load(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let aliases = match &config.aliases {
            Some(p) => AliasTable::from_path(p)?,
            None => AliasTable::bundled(),
        };
        let opts = PanelOptions {
            range: config.range,
            allow_merge_conflicts: config.allow_merge_conflicts,
            ..PanelOptions::default()
        };
        let panel_path = config.panel.clone().expect("validated");
        let (panel, merge, log) = load_panel(&panel_path, &aliases, &opts, config.tolerant)?;
        Ok(Context {
            config,
            panel,
            merge,
            log,
        })
    }

    fn names(&self) -> Vec<String> {
        self.panel.registry().names().to_vec()
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

fn csv_bytes(header: &[&str], rows: Vec<Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("flush")
}

pub fn cmd_ingest(ctx: &Context, sink: &mut Sink) -> Result<()> {
    sink.write("panel", "panel.csv", "normalized panel", ctx.panel.to_csv_string()?.as_bytes())?;
    sink.write("panel", "registry.json", "institution registry", registry_json(&ctx.panel, &ctx.merge)?.as_bytes())?;
    sink.write("panel", "ingest.log", "repair, merge and validation log", ctx.log.render().as_bytes())?;
    Ok(())
}

pub fn cmd_stats(ctx: &Context, sink: &mut Sink) -> Result<()> {
    let cfg = &ctx.config.stats;
    let panel = &ctx.panel;
    let agg = aggregate(panel);
    let by_rank = agg.by_rank();
    let totals: Vec<f64> = by_rank.iter().map(|e| e.total as f64).collect();
    let positive: Vec<f64> = totals.iter().copied().filter(|&a| a > 0.0).collect();

    let fit = fit_lognormal_rank(
        &positive,
        match cfg.fit {
            FitChoice::LogMoments => FitMethod::LogMoments,
            FitChoice::RankCurve => FitMethod::RankCurve { normalize: cfg.normalize },
        },
    )?;
    let curve = fit_lognormal_rank(&positive, FitMethod::RankCurve { normalize: cfg.normalize }).ok();
    let ks = ks_montecarlo(&positive, fit.mu, fit.sigma, cfg.trials, cfg.p_threshold, ctx.config.seed)?;

    let full = panel.range();
    let mut shares = serde_json::Map::new();
    for &k in &cfg.top_k {
        if k <= panel.institutions() {
            shares.insert(k.to_string(), json!(market_share::<f64>(panel, k, &full, None)?));
        }
    }
    let mut trends = Vec::new();
    for spec in &cfg.trends {
        let id = panel
            .registry()
            .id(&spec.institution)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown institution {:?}", spec.institution)))?;
        let span = full.index_span(&spec.window)?;
        let series = activity_series::<f64>(panel, id);
        let t = growth_trend(&series, span.start() - 1..=span.end() - 1)?;
        trends.push(json!({
            "institution": spec.institution,
            "window": spec.window,
            "slope": t.slope,
            "intercept": t.intercept,
            "yearly_ratio": t.yearly_ratio,
            "points": t.points,
        }));
    }
    let bands = [(1u32, 10u32), (11, 25), (26, u32::MAX)];
    let cmp = compare_rankings(&agg.ranks(), &agg.otc_ranks())?;
    let stats = json!({
        "mu": fit.mu,
        "sigma": fit.sigma,
        "fit": fit,
        "rank_curve_fit": curve,
        "gini": gini(&totals)?,
        "skewness": skewness(&totals)?,
        "ks": ks,
        "institutions": totals.len(),
        "quarters": panel.quarters(),
        "market_share": shares,
        "trends": trends,
        "rank_displacement": bands.iter().map(|&(a, b)| json!({
            "band": if b == u32::MAX { format!("{a}+") } else { format!("{a}-{b}") },
            "max": cmp.max_displacement(a..=b),
        })).collect::<Vec<_>>(),
    });
    sink.write("stats", "stats.json", "concentration, log-normal fit and KS summary", &to_json(&stats)?)?;

    let scale: f64 = if cfg.normalize { positive.iter().sum() } else { 1.0 };
    let rows = by_rank
        .iter()
        .map(|e| {
            let fitted = curve
                .as_ref()
                .filter(|_| e.total > 0)
                .map(|c| sig9(scale * rank_curve(e.rank as f64, c.mu, c.sigma)))
                .unwrap_or_default();
            vec![e.rank.to_string(), e.name.clone(), e.total.to_string(), fitted]
        })
        .collect();
    sink.write(
        "rank_activity",
        "rank_activity.csv",
        "aggregated activity against rank with the fitted rank curve",
        &csv_bytes(&["rank", "institution", "aggregate_activity", "fitted"], rows),
    )?;

    let cum = cumulative_share(&totals)?;
    let rows = by_rank
        .iter()
        .zip(&cum)
        .map(|(e, c)| vec![e.rank.to_string(), e.name.clone(), e.total.to_string(), sig9(*c)])
        .collect();
    sink.write(
        "market_share",
        "market_share.csv",
        "cumulative share of aggregated activity by rank",
        &csv_bytes(&["rank", "institution", "aggregate_activity", "cumulative_share"], rows),
    )?;
    if let Some(path) = &ctx.config.market_totals {
        let market = MarketTotals::from_path(path)?;
        let mut rows = Vec::new();
        for (t, q) in full.iter().enumerate() {
            let one = QuarterRange::new(q, q)?;
            let listed = panel.ranked_at(t + 1).len();
            let share = market_share::<f64>(panel, listed.max(1).min(panel.institutions()), &one, Some(&market))?;
            rows.push(vec![q.to_string(), listed.to_string(), sig9(share)]);
        }
        sink.write(
            "market_share",
            "market_share_quarterly.csv",
            "share of all reported activity held by the listed institutions per quarter",
            &csv_bytes(&["quarter", "listed", "share"], rows),
        )?;
    }

    let ratios = otc_ratios::<f64>(&agg);
    let rows = by_rank
        .iter()
        .map(|e| {
            let r = ratios.iter().find(|(id, _)| *id == e.institution).map(|(_, r)| *r).expect("every institution");
            let ratio = match r {
                OtcRatio::Finite(v) => sig9(v),
                OtcRatio::Infinite => "inf".into(),
                OtcRatio::Undefined => String::new(),
            };
            vec![e.rank.to_string(), e.name.clone(), e.otc.to_string(), e.etd.to_string(), ratio]
        })
        .collect();
    sink.write(
        "otc_ratio",
        "otc_ratio.csv",
        "OTC to exchange-traded ratio against rank",
        &csv_bytes(&["rank", "institution", "otc", "etd", "ratio"], rows),
    )?;

    let rows = cmp
        .rows
        .iter()
        .map(|r| {
            vec![
                panel.name(r.institution).to_string(),
                r.left.to_string(),
                r.right.to_string(),
                r.displacement.to_string(),
            ]
        })
        .collect();
    sink.write(
        "rank_comparison",
        "rank_comparison.csv",
        "total-activity rank against OTC-activity rank",
        &csv_bytes(&["institution", "rank", "rank_otc", "displacement"], rows),
    )?;
    Ok(())
}

fn aggregated(panel: &Panel, mode: LinkMode) -> AggregatedGraph<f64> {
    aggregate_links(&TemporalNetwork::from_panel(panel, mode))
}

pub fn cmd_network(ctx: &Context, sink: &mut Sink, modes: &[LinkMode]) -> Result<()> {
    let names = ctx.names();
    for &mode in modes {
        let g = aggregated(&ctx.panel, mode);
        let stem = format!("network_{}", mode.label());
        sink.write("network", &format!("{stem}_edges.csv"), "time-averaged link weights", edge_list_csv(&g, &names).as_bytes())?;
        sink.write("network", &format!("{stem}.graphml"), "aggregated graph", graphml(&g, &names).as_bytes())?;
        sink.write("network", &format!("{stem}.dot"), "aggregated graph", dot(&g, &names).as_bytes())?;
        let norm = g.normalized_importance();
        let rows = (0..g.nodes())
            .map(|i| vec![names[i].clone(), sig9(g.importance[i]), sig9(norm[i])])
            .collect();
        sink.write(
            "network",
            &format!("{stem}_importance.csv"),
            "node importance",
            &csv_bytes(&["institution", "importance", "normalized_importance"], rows),
        )?;
    }
    Ok(())
}

/// Core decomposition of the configured aggregated graph and its ranking.
pub fn core_ranking(ctx: &Context) -> Result<(AggregatedGraph<f64>, CoreDecomposition<f64>, Vec<usize>)> {
    let k = &ctx.config.kcore;
    let g = aggregated(&ctx.panel, k.link_mode);
    let d = decompose(&g.weights, k.alpha, k.beta)?;
    let order = topological_ranking(&d, &g.importance, ctx.panel.registry().names());
    Ok((g, d, order))
}

pub fn cmd_kcore(ctx: &Context, sink: &mut Sink) -> Result<()> {
    let names = ctx.names();
    let (_, d, order) = core_ranking(ctx)?;
    let cmp = compare_core_vs_activity(&order, &aggregate(&ctx.panel))?;
    sink.write("kcore", "kcore.csv", "core index, topological and activity ranks", kcore_csv(&d, &cmp, &names).as_bytes())?;
    let meta = json!({
        "alpha": d.alpha,
        "beta": d.beta,
        "link_mode": ctx.config.kcore.link_mode,
        "schedule": d.schedule,
        "max_core": d.max_core(),
        "removals": d.removals.iter().map(|r| json!({
            "institution": names[r.node],
            "wave": r.wave,
            "threshold": r.threshold,
            "degree": r.degree,
        })).collect::<Vec<_>>(),
    });
    sink.write("kcore", "kcore.json", "decomposition parameters and removal sequence", &to_json(&meta)?)?;
    Ok(())
}

/// Matrices produced for one field: the whole period, then before/after a split.
pub fn correlation_set(ctx: &Context, field: SeriesField, order: &[usize]) -> Result<Vec<(String, CorrelationMatrix<f64>)>> {
    let cfg = &ctx.config.correlation;
    let panel = &ctx.panel;
    let period = cfg.period.unwrap_or(panel.range());
    let mut periods = vec![(String::new(), period)];
    if let Some(b) = cfg.split {
        let (before, after) = split_at(&period, b)?;
        periods.push(("_before".into(), before));
        periods.push(("_after".into(), after));
    }
    let mut out = Vec::new();
    for (suffix, p) in periods {
        let ids = match cfg.institutions {
            Selection::All => order.iter().map(|&i| crate::ingest::InstitutionId(i)).collect(),
            Selection::AlwaysPresent => {
                let present = panel.always_present(panel.range().index_span(&p)?);
                order
                    .iter()
                    .map(|&i| crate::ingest::InstitutionId(i))
                    .filter(|id| present.contains(id))
                    .collect()
            }
        };
        let req = CorrelationRequest {
            field,
            period: Some(p),
            method: cfg.method,
            scaled: cfg.scaled,
            order: ids,
        };
        out.push((suffix, correlation_matrix(panel, &req)?));
    }
    Ok(out)
}

pub fn cmd_correlate(ctx: &Context, sink: &mut Sink) -> Result<()> {
    let (_, _, order) = core_ranking(ctx)?;
    for &field in &ctx.config.correlation.fields {
        for (suffix, m) in correlation_set(ctx, field, &order)? {
            let stem = format!("correlation_{}{suffix}", field.label());
            sink.write("correlation", &format!("{stem}.csv"), "correlation matrix in topological order", m.to_csv().as_bytes())?;
            sink.write("correlation", &format!("{stem}.json"), "overlap counts and definedness", &to_json(&m.sidecar())?)?;
        }
    }
    Ok(())
}

pub fn cmd_frames(ctx: &Context, sink: &mut Sink) -> Result<()> {
    let cfg = &ctx.config.frames;
    let names = ctx.names();
    let mut temporal = TemporalNetwork::<f64>::from_panel(&ctx.panel, cfg.link_mode);
    if let Some(p) = &cfg.period {
        temporal = period_subnetwork(&temporal, p)?;
    }
    let colour = if cfg.correlation {
        let req = CorrelationRequest {
            field: SeriesField::ActivityTotal,
            period: None,
            method: Method::Pairwise,
            scaled: true,
            order: ctx.panel.registry().ids().collect(),
        };
        Some(correlation_matrix::<f64>(&ctx.panel, &req)?.registry_matrix(names.len()))
    } else {
        None
    };
    for frame in emit_frames(&temporal, &names, colour.as_ref()) {
        sink.write(
            "frames",
            &format!("frames/{}", frame_file_name(frame.quarter)),
            "quarterly network snapshot",
            frame.to_json().as_bytes(),
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: RunConfig,
    pub parameters: serde_json::Value,
    pub families: Vec<&'static str>,
    pub artifacts: Vec<Artifact>,
}

/// Every analysis artifact plus `manifest.json`.
pub fn cmd_report(ctx: &Context, sink: &mut Sink) -> Result<Manifest> {
    cmd_stats(ctx, sink)?;
    cmd_network(ctx, sink, &[LinkMode::Binary, LinkMode::RankWeighted])?;
    cmd_kcore(ctx, sink)?;
    cmd_correlate(ctx, sink)?;
    cmd_frames(ctx, sink)?;
    let cfg = &ctx.config;
    let mut families: Vec<&'static str> = Vec::new();
    for a in &sink.artifacts {
        if !families.contains(&a.family) {
            families.push(a.family);
        }
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg.clone(),
        parameters: json!({
            "seed": cfg.seed,
            "alpha": cfg.kcore.alpha,
            "beta": cfg.kcore.beta,
            "p_threshold": cfg.stats.p_threshold,
            "trials": cfg.stats.trials,
            "split": cfg.correlation.split,
            "range": ctx.panel.range(),
        }),
        families,
        artifacts: sink.artifacts.clone(),
    };
    let bytes = to_json(&manifest)?;
    let path = sink.root.join("manifest.json");
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

/// One line per written file, for stdout.
pub fn summary(artifacts: &[Artifact]) -> String {
    let mut s = String::new();
    for a in artifacts {
        let _ = writeln!(s, "{}\t{}", a.sha256, a.path);
    }
    s
}
