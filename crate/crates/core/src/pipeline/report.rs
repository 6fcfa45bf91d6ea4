//! CSV renderings of evaluation results.

use std::fmt::Write;

use super::cv::{CvReport, SweepPoint};
use super::metrics::FoldMetrics;

pub const METRICS_HEADER: &str = "fold,tp,fp,fn,tn,precision,recall,f1";

fn row(out: &mut String, name: &str, m: &FoldMetrics) {
    writeln!(
        out,
        "{name},{},{},{},{},{:.4},{:.4},{:.4}",
        m.tp, m.fp, m.fn_, m.tn, m.precision, m.recall, m.f1
    )
    .expect("writing to a String");
}

/// One row per fold (numbered from 1), then the pooled `micro` row and the
/// fold-averaged `macro` row, which has no counts.
pub fn cv_csv(r: &CvReport) -> String {
    let mut out = format!("{METRICS_HEADER}\n");
    for (i, m) in r.folds.iter().enumerate() {
        row(&mut out, &(i + 1).to_string(), m);
    }
    row(&mut out, "micro", &r.aggregate);
    let a = &r.macro_average;
    writeln!(out, "macro,,,,,{:.4},{:.4},{:.4}", a.precision, a.recall, a.f1).expect("writing to a String");
    out
}

/// A single metrics row labelled `name`.
pub fn metrics_csv(name: &str, m: &FoldMetrics) -> String {
    let mut out = format!("{METRICS_HEADER}\n");
    row(&mut out, name, m);
    out
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("param,value,tp,fp,fn,tn,precision,recall,f1,macro_precision,macro_recall,macro_f1\n");
    for p in points {
        let m = &p.report.aggregate;
        let a = &p.report.macro_average;
        writeln!(
            out,
            "{},{},{},{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            p.param, p.value, m.tp, m.fp, m.fn_, m.tn, m.precision, m.recall, m.f1, a.precision, a.recall, a.f1
        )
        .expect("writing to a String");
    }
    out
}
