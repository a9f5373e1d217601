//! Descriptive statistics over exported revision histories.
//!
//! Every report is a pure function of the parsed export, and rendering is
//! deterministic, so the same file always produces the same bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::FeedbackError;
use crate::export::JobRecord;
use crate::feedback::entropy;
use crate::models::AttributeClassifier;
use crate::op::{category_of, ReportingCategory};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Tsv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "tsv" => Ok(ReportFormat::Tsv),
            other => Err(format!("unknown format {other:?} (expected table or tsv)")),
        }
    }
}

fn render(format: ReportFormat, header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    match format {
        ReportFormat::Tsv => {
            out.push_str(&header.join("\t"));
            out.push('\n');
            for row in rows {
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
        }
        ReportFormat::Table => {
            let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
            for row in rows {
                for (w, cell) in widths.iter_mut().zip(row) {
                    *w = (*w).max(cell.chars().count());
                }
            }
            let mut line = |cells: &mut dyn Iterator<Item = &str>| {
                let mut first = true;
                for (cell, w) in cells.zip(&widths) {
                    if !first {
                        out.push_str("  ");
                    }
                    first = false;
                    let _ = write!(out, "{cell:<w$}");
                }
                let trimmed = out.trim_end_matches(' ').len();
                out.truncate(trimmed);
                out.push('\n');
            };
            line(&mut header.iter().copied());
            for row in rows {
                line(&mut row.iter().map(String::as_str));
            }
        }
    }
    out
}

/// Revision counts per reporting category. Reverts are not counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpDistribution {
    pub counts: BTreeMap<ReportingCategory, usize>,
}

impl OpDistribution {
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn count(&self, category: ReportingCategory) -> usize {
        self.counts.get(&category).copied().unwrap_or(0)
    }

    pub fn percentage(&self, category: ReportingCategory) -> f64 {
        match self.total() {
            0 => 0.0,
            total => 100.0 * self.count(category) as f64 / total as f64,
        }
    }

    pub fn render(&self, format: ReportFormat) -> String {
        let rows: Vec<Vec<String>> = ReportingCategory::ALL
            .iter()
            .map(|&c| {
                vec![
                    c.to_string(),
                    self.count(c).to_string(),
                    format!("{:.2}", self.percentage(c)),
                ]
            })
            .collect();
        render(format, &["category", "count", "percent"], &rows)
    }
}

pub fn op_distribution(jobs: &[JobRecord]) -> OpDistribution {
    let mut counts: BTreeMap<ReportingCategory, usize> = ReportingCategory::ALL.iter().map(|&c| (c, 0)).collect();
    for rev in jobs.iter().flat_map(|j| j.history().revisions()) {
        if let Ok(category) = category_of(&rev.op) {
            *counts.entry(category).or_default() += 1;
        }
    }
    OpDistribution { counts }
}

/// Auxiliary-mode operations: every categorized op except sentence typing.
fn auxiliary_ops(job: &JobRecord) -> usize {
    job.history()
        .revisions()
        .iter()
        .filter(|r| matches!(category_of(&r.op), Ok(c) if c != ReportingCategory::SentenceTyping))
        .count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Engagement {
    pub jobs: usize,
    pub modified_jobs: usize,
    /// Fraction of jobs with at least one auxiliary-mode operation.
    pub modified_fraction: f64,
    /// Mean number of auxiliary-mode operations per job.
    pub mean_ops: f64,
}

impl Engagement {
    pub fn render(&self, format: ReportFormat) -> String {
        let rows = vec![
            vec!["jobs".into(), self.jobs.to_string()],
            vec!["modified_jobs".into(), self.modified_jobs.to_string()],
            vec!["modified_fraction".into(), format!("{:.4}", self.modified_fraction)],
            vec!["mean_ops_per_job".into(), format!("{:.4}", self.mean_ops)],
        ];
        render(format, &["statistic", "value"], &rows)
    }
}

pub fn engagement(jobs: &[JobRecord]) -> Engagement {
    let ops: Vec<usize> = jobs.iter().map(auxiliary_ops).collect();
    let modified_jobs = ops.iter().filter(|&&n| n > 0).count();
    let (modified_fraction, mean_ops) = match jobs.len() {
        0 => (0.0, 0.0),
        n => (
            modified_jobs as f64 / n as f64,
            ops.iter().sum::<usize>() as f64 / n as f64,
        ),
    };
    Engagement {
        jobs: jobs.len(),
        modified_jobs,
        modified_fraction,
        mean_ops,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyReport {
    pub jobs: usize,
    pub mean_original: f64,
    pub mean_final: f64,
}

impl EntropyReport {
    pub fn render(&self, format: ReportFormat) -> String {
        let rows = vec![
            vec!["jobs".into(), self.jobs.to_string()],
            vec!["mean_entropy_original".into(), format!("{:.6}", self.mean_original)],
            vec!["mean_entropy_final".into(), format!("{:.6}", self.mean_final)],
        ];
        render(format, &["statistic", "value"], &rows)
    }
}

/// Mean posterior entropy of each job's original and final sentence.
/// An empty export yields zeros.
pub fn entropy_report(jobs: &[JobRecord], clf: &AttributeClassifier) -> Result<EntropyReport, FeedbackError> {
    let mut original = 0.0;
    let mut last = 0.0;
    for job in jobs {
        let history = job.history();
        original += entropy(&clf.posterior(history.original()))?;
        last += entropy(&clf.posterior(history.current()))?;
    }
    let n = jobs.len().max(1) as f64;
    Ok(EntropyReport {
        jobs: jobs.len(),
        mean_original: original / n,
        mean_final: last / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparison {
    AtMost,
    AtLeast,
}

/// A heuristic threshold on a feedback score, written `NAME<=X` or `NAME>=X`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackFilter {
    pub provider: String,
    pub comparison: Comparison,
    pub threshold: f64,
}

impl FeedbackFilter {
    fn accepts(&self, score: Option<f64>) -> bool {
        match (score, self.comparison) {
            (Some(s), Comparison::AtMost) => s <= self.threshold,
            (Some(s), Comparison::AtLeast) => s >= self.threshold,
            (None, _) => false,
        }
    }
}

impl FromStr for FeedbackFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (provider, comparison, value) = if let Some((p, v)) = s.split_once("<=") {
            (p, Comparison::AtMost, v)
        } else if let Some((p, v)) = s.split_once(">=") {
            (p, Comparison::AtLeast, v)
        } else {
            return Err(format!("filter {s:?} must look like NAME<=X or NAME>=X"));
        };
        let threshold: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("bad threshold in filter {s:?}"))?;
        let provider = provider.trim();
        if provider.is_empty() {
            return Err(format!("missing provider name in filter {s:?}"));
        }
        Ok(FeedbackFilter {
            provider: provider.to_string(),
            comparison,
            threshold,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCounts {
    pub per_job: Vec<(String, usize)>,
    pub mean: f64,
    pub filtered: bool,
}

impl ReferenceCounts {
    pub fn render(&self, format: ReportFormat) -> String {
        let mut rows: Vec<Vec<String>> = self
            .per_job
            .iter()
            .map(|(id, n)| vec![id.clone(), n.to_string()])
            .collect();
        rows.push(vec!["mean".into(), format!("{:.4}", self.mean)]);
        let mut out = render(format, &["job", "candidates"], &rows);
        if self.filtered {
            out.push_str("# counts filtered by heuristic feedback thresholds\n");
        }
        out
    }
}

/// Distinct candidate references per job. With filters, a candidate is kept
/// only if the feedback recorded where it first appeared passes all of them.
pub fn reference_counts(jobs: &[JobRecord], filters: &[FeedbackFilter]) -> ReferenceCounts {
    let per_job: Vec<(String, usize)> = jobs
        .iter()
        .map(|job| {
            let revisions = job.history().revisions();
            let n = job
                .history()
                .extract_references()
                .iter()
                .filter(|r| {
                    let feedback = &revisions[r.indices[0]].feedback;
                    filters
                        .iter()
                        .all(|f| f.accepts(feedback.get(&f.provider).copied().flatten()))
                })
                .count();
            (job.header.job_id.clone(), n)
        })
        .collect();
    let mean = match per_job.len() {
        0 => 0.0,
        n => per_job.iter().map(|(_, c)| *c).sum::<usize>() as f64 / n as f64,
    };
    ReferenceCounts {
        per_job,
        mean,
        filtered: !filters.is_empty(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::export::JobHeader;
    use crate::history::FeedbackSnapshot;
    use crate::op::{EditOp, OpKind};
    use chrono::{TimeZone, Utc};

    fn job(id: &str, ops: Vec<EditOp>) -> JobRecord {
        let mut job = JobRecord::new(JobHeader {
            job_id: id.into(),
            task_id: "t".into(),
            sentence_index: 0,
            assignee: "u".into(),
            created: Utc.timestamp_opt(0, 0).unwrap(),
            original_text: "a b c d e f".into(),
        });
        for (i, op) in ops.into_iter().enumerate() {
            let fb: FeedbackSnapshot = [("ED".to_string(), Some(i as f64 + 1.0))].into();
            job.apply(op, fb, Utc.timestamp_opt(i as i64, 0).unwrap()).unwrap();
        }
        job
    }

    fn deletes(n: usize) -> Vec<EditOp> {
        (0..n).map(|_| OpKind::delete(0).typed()).collect()
    }

    #[test]
    fn engagement_arithmetic() {
        let jobs = vec![job("a", deletes(0)), job("b", deletes(2)), job("c", deletes(4))];
        let e = engagement(&jobs);
        assert_eq!(e.modified_fraction, 2.0 / 3.0);
        assert_eq!(e.mean_ops, 2.0);
        assert_eq!(engagement(&[]).modified_fraction, 0.0);
        assert_eq!(engagement(&[]).mean_ops, 0.0);
        assert_eq!(engagement(&jobs[1..]).modified_fraction, 1.0);
    }

    #[test]
    fn sentence_typing_is_not_auxiliary() {
        let jobs = vec![job("a", vec![OpKind::replace_sentence("x y").typed()])];
        assert_eq!(engagement(&jobs).modified_jobs, 0);
        let dist = op_distribution(&jobs);
        assert_eq!(dist.count(ReportingCategory::SentenceTyping), 1);
        assert_eq!(dist.total(), 1);
        assert_eq!(reference_counts(&jobs, &[]).per_job, vec![("a".to_string(), 1)]);
    }

    #[test]
    fn empty_distribution() {
        let dist = op_distribution(&[]);
        assert_eq!(dist.total(), 0);
        assert_eq!(dist.counts.len(), 5);
        assert_eq!(
            dist.render(ReportFormat::Tsv),
            "category\tcount\tpercent\nWordTyping\t0\t0.00\nDeletion\t0\t0.00\nSubstitution\t0\t0.00\nReordering\t0\t0.00\nSentenceTyping\t0\t0.00\n"
        );
    }

    #[test]
    fn reverts_are_not_counted() {
        let mut ops = deletes(1);
        ops.push(EditOp::revert(-1));
        let jobs = vec![job("a", ops)];
        assert_eq!(op_distribution(&jobs).total(), 1);
        assert_eq!(engagement(&jobs).mean_ops, 1.0);
    }

    #[test]
    fn table_rendering_is_aligned() {
        let jobs = vec![job("a", deletes(3))];
        let text = op_distribution(&jobs).render(ReportFormat::Table);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "category        count  percent");
        assert_eq!(lines[2], "Deletion        3      100.00");
    }

    #[test]
    fn filters() {
        let f: FeedbackFilter = "ED<=2".parse().unwrap();
        assert_eq!(f.comparison, Comparison::AtMost);
        assert!("ED=2".parse::<FeedbackFilter>().is_err());
        assert!("<=2".parse::<FeedbackFilter>().is_err());
        assert!("ED>=x".parse::<FeedbackFilter>().is_err());

        let jobs = vec![job("a", deletes(4))];
        assert_eq!(reference_counts(&jobs, &[]).per_job[0].1, 4);
        let counts = reference_counts(&jobs, &[f]);
        assert_eq!(counts.per_job[0].1, 2);
        assert!(counts.render(ReportFormat::Tsv).contains("heuristic"));
        let missing = reference_counts(&jobs, &["PPL<=10".parse().unwrap()]);
        assert_eq!(missing.per_job[0].1, 0);
    }
}
