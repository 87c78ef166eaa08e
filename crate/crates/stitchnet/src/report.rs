//! Text and JSON renderings of reports, histories and feature matrices.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use stitchnet_core::learning::{EpochRecord, EvalReport, PatternScore};
use stitchnet_core::pattern::EdgeRef;
use stitchnet_core::tensor::Matrix;

#[derive(Serialize, Deserialize)]
struct ReportDoc {
    tp: f64,
    tr: f64,
    tf1: f64,
    mep: f64,
    mer: f64,
    mef1: f64,
    gsp: f64,
    empty_warning: bool,
    patterns: Vec<PatternDoc>,
}

#[derive(Serialize, Deserialize)]
struct PatternDoc {
    name: String,
    precision: f64,
    recall: f64,
    f1: f64,
    exact: bool,
}

pub fn report_to_json(r: &EvalReport) -> String {
    let doc = ReportDoc {
        tp: r.tp,
        tr: r.tr,
        tf1: r.tf1,
        mep: r.mep,
        mer: r.mer,
        mef1: r.mef1,
        gsp: r.gsp,
        empty_warning: r.empty_warning,
        patterns: r
            .patterns
            .iter()
            .map(|p| PatternDoc { name: p.name.clone(), precision: p.precision, recall: p.recall, f1: p.f1, exact: p.exact })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("reports always serialize");
    s.push('\n');
    s
}

pub fn report_from_json(bytes: &[u8]) -> crate::Result<EvalReport> {
    let d: ReportDoc = serde_json::from_slice(bytes)?;
    Ok(EvalReport {
        tp: d.tp,
        tr: d.tr,
        tf1: d.tf1,
        mep: d.mep,
        mer: d.mer,
        mef1: d.mef1,
        gsp: d.gsp,
        empty_warning: d.empty_warning,
        patterns: d
            .patterns
            .into_iter()
            .map(|p| PatternScore { name: p.name, precision: p.precision, recall: p.recall, f1: p.f1, exact: p.exact })
            .collect(),
    })
}

/// The seven pooled metrics, one per line.
pub fn metrics_table(r: &EvalReport) -> String {
    let mut s = String::new();
    for (k, v) in [
        ("TP", r.tp),
        ("TR", r.tr),
        ("TF1", r.tf1),
        ("MEP", r.mep),
        ("MER", r.mer),
        ("MEF1", r.mef1),
        ("GSP", r.gsp),
    ] {
        let _ = writeln!(s, "{k:<5} {:>7.2}%", 100.0 * v);
    }
    if r.empty_warning {
        s.push_str("warning: no patterns evaluated, GSP reported as 0\n");
    }
    s
}

pub fn history_table(h: &[EpochRecord]) -> String {
    let mut s = String::from("epoch  train_loss    val_tf1    val_gsp\n");
    for r in h {
        let _ = writeln!(s, "{:>5}  {:>10.6}  {:>9.4}  {:>9.4}", r.epoch, r.train_loss, r.val_tf1, r.val_gsp);
    }
    s
}

const SLOTS: [&str; 24] = [
    "x0", "y0", "x1", "y1", "len", "ox", "oy", "kind", "k1", "k2", "k3", "k4", "k5", "k6", "k7", "k8", "k9", "k10",
    "sin_al", "cos_al", "sin_ar", "cos_ar", "n_edges", "panel",
];

/// One row per node: the node's edge in the input numbering, then its features.
pub fn feature_table(nodes: &[EdgeRef], x: &Matrix) -> String {
    let mut s = format!("{:>4} {:>7}", "node", "edge");
    for name in &SLOTS[..x.cols().min(SLOTS.len())] {
        let _ = write!(s, " {name:>12}");
    }
    s.push('\n');
    for (i, r) in nodes.iter().enumerate() {
        let _ = write!(s, "{i:>4} {:>7}", r.to_string());
        for v in x.row(i) {
            let _ = write!(s, " {v:>12.6}");
        }
        s.push('\n');
    }
    s
}

/// Square matrix with the last row/column labelled as the dustbin.
pub fn score_table(nodes: &[EdgeRef], p: &Matrix) -> String {
    let label = |i: usize| nodes.get(i).map_or_else(|| "bin".to_string(), ToString::to_string);
    let mut s = format!("{:>7}", "");
    for j in 0..p.cols() {
        let _ = write!(s, " {:>9}", label(j));
    }
    s.push('\n');
    for i in 0..p.rows() {
        let _ = write!(s, "{:>7}", label(i));
        for v in p.row(i) {
            let _ = write!(s, " {v:>9.6}");
        }
        s.push('\n');
    }
    s
}
