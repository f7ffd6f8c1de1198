//! CSV output: `#` metadata lines, then `h,dt,ge_l2,p_l2,ge_max,p_max`.

use std::fmt::Write;

use crate::config::{ExperimentConfig, NormKind};
use crate::run::Outcome;

pub const HEADER: &str = "h,dt,ge_l2,p_l2,ge_max,p_max";

/// Full precision (17 significant digits), `NaN` kept literal.
pub fn number(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

fn order(p: Option<f64>) -> String {
    p.map(number).unwrap_or_default()
}

pub fn render(cfg: &ExperimentConfig, outcome: &Outcome) -> String {
    let rep = &outcome.report;
    let mut out = String::new();
    if let Some(name) = &cfg.name {
        let _ = writeln!(out, "# experiment={name}");
    }
    let _ = writeln!(out, "# problem={}", rep.problem);
    let _ = writeln!(out, "# method={}", rep.method);
    let _ = writeln!(out, "# correction={}", rep.correction.name());
    let _ = writeln!(out, "# estimator={}", rep.estimator.name());
    let _ = writeln!(out, "# dt_rule={}", cfg.dt.describe());
    let _ = writeln!(out, "# threads={}", outcome.threads);
    for row in &rep.rows {
        let _ = writeln!(
            out,
            "# level h=1/{:.0}: steps={} dt_factor={}",
            1.0 / row.h,
            row.steps,
            number(row.dt_factor)
        );
    }
    for note in &rep.notes {
        let _ = writeln!(out, "# note: {note}");
    }
    for s in &outcome.skipped {
        let _ = writeln!(out, "# SKIPPED h=1/{}: {}", s.h_inv, s.reason);
    }
    if let Some(t) = outcome.runtime {
        let _ = writeln!(out, "# runtime_s={t:.3}");
    }
    out.push_str(HEADER);
    out.push('\n');
    let (l2, max) = (cfg.wants(NormKind::L2), cfg.wants(NormKind::Max));
    for row in &rep.rows {
        let pick = |on: bool, s: String| if on { s } else { String::new() };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            number(row.h),
            number(row.dt),
            pick(l2, number(row.ge_l2)),
            pick(l2, order(row.p_l2)),
            pick(max, number(row.ge_max)),
            pick(max, order(row.p_max)),
        );
    }
    out
}

/// One data row read back from a CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub h: f64,
    pub dt: f64,
    pub ge_l2: Option<f64>,
    pub p_l2: Option<f64>,
    pub ge_max: Option<f64>,
    pub p_max: Option<f64>,
}

/// Parses the data rows of a CSV written by [`render`].
pub fn parse(text: &str) -> Result<Vec<CsvRow>, String> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    match lines.next() {
        Some(h) if h == HEADER => {}
        other => return Err(format!("unexpected header {other:?}")),
    }
    let field = |s: &str| -> Result<Option<f64>, String> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|e| format!("bad number `{s}`: {e}"))
        }
    };
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 6 {
                return Err(format!("expected 6 fields in `{l}`"));
            }
            Ok(CsvRow {
                h: field(f[0])?.ok_or("missing h")?,
                dt: field(f[1])?.ok_or("missing dt")?,
                ge_l2: field(f[2])?,
                p_l2: field(f[3])?,
                ge_max: field(f[4])?,
                p_max: field(f[5])?,
            })
        })
        .collect()
}
