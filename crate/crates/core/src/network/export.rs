//! Edge-list, GraphML and DOT exports of an aggregated graph.

use std::fmt::Write;

use super::AggregatedGraph;
use crate::fmt::sig9;
use crate::num::Real;

/// `source,target,weight` for every positive weight with `i < j`.
pub fn edge_list_csv<F: Real>(g: &AggregatedGraph<F>, names: &[String]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["source", "target", "weight"]).expect("in-memory write");
    for i in 0..g.nodes() {
        for j in i + 1..g.nodes() {
            let x = g.weights.get(i, j);
            if x > F::zero() {
                w.write_record([names[i].as_str(), names[j].as_str(), &sig9(x.to_f64_lossy())])
                    .expect("in-memory write");
            }
        }
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub fn graphml<F: Real>(g: &AggregatedGraph<F>, names: &[String]) -> String {
    let norm = g.normalized_importance();
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    s.push_str("  <key id=\"name\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n");
    s.push_str("  <key id=\"importance\" for=\"node\" attr.name=\"importance\" attr.type=\"double\"/>\n");
    s.push_str("  <key id=\"size\" for=\"node\" attr.name=\"size\" attr.type=\"double\"/>\n");
    s.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    let _ = writeln!(s, "  <graph id=\"{}\" edgedefault=\"undirected\">", g.mode.label());
    for i in 0..g.nodes() {
        let _ = writeln!(
            s,
            "    <node id=\"n{i}\"><data key=\"name\">{}</data><data key=\"importance\">{}</data><data key=\"size\">{}</data></node>",
            xml_escape(&names[i]),
            sig9(g.importance[i].to_f64_lossy()),
            sig9(norm[i].to_f64_lossy())
        );
    }
    for i in 0..g.nodes() {
        for j in i + 1..g.nodes() {
            let x = g.weights.get(i, j);
            if x > F::zero() {
                let _ = writeln!(
                    s,
                    "    <edge source=\"n{i}\" target=\"n{j}\"><data key=\"weight\">{}</data></edge>",
                    sig9(x.to_f64_lossy())
                );
            }
        }
    }
    s.push_str("  </graph>\n</graphml>\n");
    s
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Node `size` is the normalized importance.
pub fn dot<F: Real>(g: &AggregatedGraph<F>, names: &[String]) -> String {
    let norm = g.normalized_importance();
    let mut s = format!("graph {} {{\n", g.mode.label());
    for i in 0..g.nodes() {
        let _ = writeln!(s, "  {} [size={}];", dot_quote(&names[i]), sig9(norm[i].to_f64_lossy()));
    }
    for i in 0..g.nodes() {
        for j in i + 1..g.nodes() {
            let x = g.weights.get(i, j);
            if x > F::zero() {
                let _ = writeln!(
                    s,
                    "  {} -- {} [weight={}];",
                    dot_quote(&names[i]),
                    dot_quote(&names[j]),
                    sig9(x.to_f64_lossy())
                );
            }
        }
    }
    s.push_str("}\n");
    s
}
