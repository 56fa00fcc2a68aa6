//! Cycle-length scores against ground truth, pooled per section.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::detector::RecurrenceResult;
use crate::error::{Error, Result};
use crate::synthgen::LabeledSeries;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

fn check_pairs(true_lengths: &[f64], est_lengths: &[f64]) -> Result<()> {
    if true_lengths.len() != est_lengths.len() {
        return Err(Error::CountMismatch {
            expected: true_lengths.len(),
            got: est_lengths.len(),
        });
    }
    if true_lengths.is_empty() {
        return Err(Error::input("no cycles to score"));
    }
    Ok(())
}

/// Mean absolute error `(1/k) sum |tau_i - est_i|`.
pub fn mae(true_lengths: &[f64], est_lengths: &[f64]) -> Result<f64> {
    check_pairs(true_lengths, est_lengths)?;
    let sum: f64 = true_lengths
        .iter()
        .zip(est_lengths)
        .map(|(t, e)| (t - e).abs())
        .sum();
    Ok(sum / true_lengths.len() as f64)
}

/// Mean absolute relative error `(1/k) sum |(tau_i - est_i) / tau_i|`.
pub fn mare(true_lengths: &[f64], est_lengths: &[f64]) -> Result<f64> {
    check_pairs(true_lengths, est_lengths)?;
    if true_lengths.contains(&0.0) {
        return Err(Error::input("true cycle length of zero"));
    }
    let sum: f64 = true_lengths
        .iter()
        .zip(est_lengths)
        .map(|(t, e)| ((t - e) / t).abs())
        .sum();
    Ok(sum / true_lengths.len() as f64)
}

/// One scored series: ground truth plus the detector outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub name: String,
    pub true_times: Vec<f64>,
    pub mean_spacing: f64,
    /// `None` when detection failed outright.
    pub estimated_times: Option<Vec<f64>>,
}

impl RunEntry {
    pub fn new(
        name: impl Into<String>,
        truth: &LabeledSeries,
        result: Option<&RecurrenceResult>,
    ) -> Self {
        Self {
            name: name.into(),
            true_times: truth.true_times.clone(),
            mean_spacing: truth.series.mean_spacing(),
            estimated_times: result.map(|r| r.recurrence_times.clone()),
        }
    }

    fn true_lengths(&self) -> Vec<f64> {
        lengths(&self.true_times)
    }

    fn estimated_lengths(&self) -> Option<Vec<f64>> {
        self.estimated_times.as_deref().map(lengths)
    }
}

fn lengths(times: &[f64]) -> Vec<f64> {
    times.windows(2).map(|w| w[1] - w[0]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub mae_seconds: f64,
    pub mae_samples: f64,
    pub mare: f64,
    pub n_cycles: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionReport {
    pub series: Vec<String>,
    pub n_cycles: usize,
    pub matched: bool,
    /// Absent for unmatched sections.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<Scores>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub problems: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub sections: BTreeMap<String, SectionReport>,
    /// Pooled over matched sections only; `None` when none matched.
    pub overall: Option<Scores>,
    pub failures: Vec<String>,
}

/// Cycle errors pooled over series.
#[derive(Default)]
struct Pool {
    abs_seconds: f64,
    abs_samples: f64,
    rel: f64,
    n: usize,
}

impl Pool {
    fn add(&mut self, true_lengths: &[f64], est: &[f64], spacing: f64) {
        for (t, e) in true_lengths.iter().zip(est) {
            let d = (t - e).abs();
            self.abs_seconds += d;
            self.abs_samples += d / spacing;
            self.rel += d / t.abs();
            self.n += 1;
        }
    }

    fn merge(&mut self, other: &Pool) {
        self.abs_seconds += other.abs_seconds;
        self.abs_samples += other.abs_samples;
        self.rel += other.rel;
        self.n += other.n;
    }

    fn scores(&self) -> Option<Scores> {
        (self.n > 0).then(|| {
            let n = self.n as f64;
            Scores {
                mae_seconds: self.abs_seconds / n,
                mae_samples: self.abs_samples / n,
                mare: self.rel / n,
                n_cycles: self.n,
            }
        })
    }
}

/// Section of a benchmark series name: its first two dot-separated parts
/// (`"II.1.3"` belongs to `"II.1"`).
pub fn default_section(name: &str) -> String {
    name.splitn(3, '.').take(2).collect::<Vec<_>>().join(".")
}

/// Maps every entry to [`default_section`] of its name.
pub fn default_sectioning(entries: &[RunEntry]) -> BTreeMap<String, String> {
    entries
        .iter()
        .map(|e| (e.name.clone(), default_section(&e.name)))
        .collect()
}

/// Scores every entry and pools cycles per section. Entries missing from
/// `sectioning` form a section of their own. A section with any count
/// mismatch or failed detection is listed in `failures`, carries no scores and
/// is left out of `overall`.
pub fn evaluate_run(entries: &[RunEntry], sectioning: &BTreeMap<String, String>) -> EvalReport {
    let mut groups: BTreeMap<String, Vec<&RunEntry>> = BTreeMap::new();
    for e in entries {
        let section = sectioning
            .get(&e.name)
            .cloned()
            .unwrap_or_else(|| e.name.clone());
        groups.entry(section).or_default().push(e);
    }

    let mut sections = BTreeMap::new();
    let mut failures = Vec::new();
    let mut overall = Pool::default();
    for (section, members) in groups {
        let mut pool = Pool::default();
        let mut problems = Vec::new();
        let mut n_cycles = 0;
        for e in &members {
            let truth = e.true_lengths();
            n_cycles += truth.len();
            match e.estimated_lengths() {
                None => problems.push(format!("{}: no recurrence detected", e.name)),
                Some(est) if est.len() != truth.len() => problems.push(format!(
                    "{}: expected {} cycles, found {}",
                    e.name,
                    truth.len(),
                    est.len()
                )),
                Some(est) => pool.add(&truth, &est, e.mean_spacing),
            }
        }
        let matched = problems.is_empty();
        if matched {
            overall.merge(&pool);
        } else {
            failures.push(section.clone());
        }
        sections.insert(
            section,
            SectionReport {
                series: members.iter().map(|e| e.name.clone()).collect(),
                n_cycles,
                matched,
                scores: if matched { pool.scores() } else { None },
                problems,
            },
        );
    }
    EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        sections,
        overall: overall.scores(),
        failures,
    }
}

/// MAE as printed in the results table.
pub fn format_mae(v: f64) -> String {
    format!("{v:.2}")
}

/// MARE as printed in the results table.
pub fn format_mare(v: f64) -> String {
    format!("{v:.3}")
}

/// Plain-text table: one row per labelled report, a MAE (samples) / MARE
/// column pair per section plus the overall pair; failed cells are dashes.
pub fn render_table(rows: &[(&str, &EvalReport)]) -> String {
    let mut sections: Vec<&String> = rows.iter().flat_map(|(_, r)| r.sections.keys()).collect();
    sections.sort();
    sections.dedup();

    let mut header = vec!["method".to_string()];
    for s in &sections {
        header.push(format!("{s} MAE"));
        header.push(format!("{s} MARE"));
    }
    header.push("overall MAE".into());
    header.push("overall MARE".into());

    let cells = |scores: Option<&Scores>| match scores {
        Some(s) => [format_mae(s.mae_samples), format_mare(s.mare)],
        None => ["-".to_string(), "-".to_string()],
    };
    let mut body = Vec::new();
    for (label, report) in rows {
        let mut line = vec![label.to_string()];
        for s in &sections {
            line.extend(cells(
                report.sections.get(*s).and_then(|r| r.scores.as_ref()),
            ));
        }
        line.extend(cells(report.overall.as_ref()));
        body.push(line);
    }

    let widths: Vec<usize> = (0..header.len())
        .map(|c| {
            std::iter::once(&header)
                .chain(&body)
                .map(|l| l[c].len())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for line in std::iter::once(&header).chain(&body) {
        let padded: Vec<String> = line
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(c, (cell, w))| {
                if c == 0 {
                    format!("{cell:<w$}")
                } else {
                    format!("{cell:>w$}")
                }
            })
            .collect();
        let _ = writeln!(out, "{}", padded.join("  ").trim_end());
    }
    out
}

/// Per-cycle error rows for box plots of matched series. `length_rel_error`
/// is `|tau_i - est_i| / tau_i`; `time_rel_error` is `|T_i - est T_i| / tau_i`.
pub fn boxplot_csv(entries: &[RunEntry], sectioning: &BTreeMap<String, String>) -> String {
    let mut out = String::from(
        "section,series,cycle,true_length,estimated_length,length_rel_error,time_rel_error\n",
    );
    for e in entries {
        let Some(est_times) = &e.estimated_times else {
            continue;
        };
        if est_times.len() != e.true_times.len() {
            continue;
        }
        let section = sectioning
            .get(&e.name)
            .cloned()
            .unwrap_or_else(|| e.name.clone());
        let truth = e.true_lengths();
        let est = lengths(est_times);
        for (i, (t, s)) in truth.iter().zip(&est).enumerate() {
            let time_err = (e.true_times[i + 1] - est_times[i + 1]).abs() / t;
            let _ = writeln!(
                out,
                "{section},{},{},{t},{s},{},{time_err}",
                e.name,
                i + 1,
                (t - s).abs() / t
            );
        }
    }
    out
}
