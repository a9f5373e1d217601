//! Job records and the line-oriented revision-history export format.
//!
//! An export is a sequence of JSON objects, one per line. Each job starts with
//! a `job` record followed by its `revision` and `status` records in the order
//! they happened:
//!
//! ```text
//! {"record":"job","job_id":"t1.0.ann","task_id":"t1","sentence_index":0,"assignee":"ann","created":"…","original_text":"…"}
//! {"record":"revision","index":0,"op":{"kind":"substitute","position":4,"text":"love","source":"lm_recommended"},"result_text":"…","timestamp":"…","feedback":{"ED":1.0}}
//! {"record":"status","status":"complete","timestamp":"…"}
//! ```
//!
//! Parsing replays every operation and rejects records whose stored result
//! disagrees with the replay.

use std::io::{self, BufRead, Write};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{EditError, ExportError};
use crate::history::{FeedbackSnapshot, Revision, RevisionHistory};
use crate::op::EditOp;
use crate::token::tokenize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Incomplete,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobHeader {
    pub job_id: String,
    pub task_id: String,
    pub sentence_index: usize,
    pub assignee: String,
    pub created: DateTime<Utc>,
    pub original_text: String,
}

/// Position of an event in a job's timeline.
#[derive(Debug, Clone, PartialEq)]
pub enum TimelineEntry {
    Revision(usize),
    Status(JobStatus, DateTime<Utc>),
}

/// A job with its full replayed history and status changes.
#[derive(Debug, Clone, PartialEq)]
pub struct JobRecord {
    pub header: JobHeader,
    history: RevisionHistory,
    timeline: Vec<TimelineEntry>,
}

impl JobRecord {
    pub fn new(header: JobHeader) -> Self {
        let history = RevisionHistory::new(tokenize(&header.original_text));
        JobRecord {
            header,
            history,
            timeline: Vec::new(),
        }
    }

    pub fn history(&self) -> &RevisionHistory {
        &self.history
    }

    pub fn timeline(&self) -> &[TimelineEntry] {
        &self.timeline
    }

    pub fn status(&self) -> JobStatus {
        self.timeline
            .iter()
            .rev()
            .find_map(|e| match e {
                TimelineEntry::Status(s, _) => Some(*s),
                TimelineEntry::Revision(_) => None,
            })
            .unwrap_or(JobStatus::Incomplete)
    }

    /// Appends a revision (including reverts) to the history.
    pub fn apply(
        &mut self,
        op: EditOp,
        feedback: FeedbackSnapshot,
        timestamp: DateTime<Utc>,
    ) -> Result<&Revision, EditError> {
        let index = self.history.len();
        self.history.append(op, feedback, timestamp)?;
        self.timeline.push(TimelineEntry::Revision(index));
        Ok(&self.history.revisions()[index])
    }

    pub fn set_status(&mut self, status: JobStatus, timestamp: DateTime<Utc>) {
        self.timeline.push(TimelineEntry::Status(status, timestamp));
    }

    pub fn records(&self) -> Vec<ExportRecord> {
        let mut out = vec![ExportRecord::Job(self.header.clone())];
        for entry in &self.timeline {
            out.push(match entry {
                TimelineEntry::Revision(i) => {
                    ExportRecord::Revision(RevisionRecord::from(&self.history.revisions()[*i]))
                }
                TimelineEntry::Status(status, timestamp) => ExportRecord::Status(StatusRecord {
                    status: *status,
                    timestamp: *timestamp,
                }),
            });
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevisionRecord {
    pub index: usize,
    pub op: EditOp,
    pub result_text: String,
    pub timestamp: DateTime<Utc>,
    pub feedback: FeedbackSnapshot,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script: Option<Vec<EditOp>>,
}

impl From<&Revision> for RevisionRecord {
    fn from(rev: &Revision) -> Self {
        RevisionRecord {
            index: rev.index,
            op: rev.op.clone(),
            result_text: rev.result.text(),
            timestamp: rev.timestamp,
            feedback: rev.feedback.clone(),
            script: rev.script.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatusRecord {
    pub status: JobStatus,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum ExportRecord {
    Job(JobHeader),
    Revision(RevisionRecord),
    Status(StatusRecord),
}

/// Writes jobs in the given order, one record per line.
pub fn write_export<'a, W, I>(mut out: W, jobs: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a JobRecord>,
{
    for job in jobs {
        for record in job.records() {
            serde_json::to_writer(&mut out, &record)?;
            out.write_all(b"\n")?;
        }
    }
    Ok(())
}

/// Parses and replays an export. Errors carry 1-based line numbers.
pub fn parse_export<R: BufRead>(input: R) -> Result<Vec<JobRecord>, ExportError> {
    let mut jobs: Vec<JobRecord> = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| ExportError::new(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ExportRecord = serde_json::from_str(&line).map_err(|e| ExportError::new(lineno, e.to_string()))?;
        match record {
            ExportRecord::Job(header) => jobs.push(JobRecord::new(header)),
            ExportRecord::Revision(rec) => {
                let job = jobs
                    .last_mut()
                    .ok_or_else(|| ExportError::new(lineno, "revision before any job record"))?;
                apply_record(job, rec).map_err(|m| ExportError::new(lineno, m))?;
            }
            ExportRecord::Status(rec) => {
                let job = jobs
                    .last_mut()
                    .ok_or_else(|| ExportError::new(lineno, "status before any job record"))?;
                job.set_status(rec.status, rec.timestamp);
            }
        }
    }
    Ok(jobs)
}

fn apply_record(job: &mut JobRecord, rec: RevisionRecord) -> Result<(), String> {
    let expected = job.history().len();
    if rec.index != expected {
        return Err(format!("revision index {} where {expected} was expected", rec.index));
    }
    let rev = job
        .apply(rec.op, rec.feedback, rec.timestamp)
        .map_err(|e| e.to_string())?;
    if rev.result.text() != rec.result_text {
        return Err(format!(
            "stored result {:?} does not match replayed {:?}",
            rec.result_text,
            rev.result.text()
        ));
    }
    if rec.script.is_some() && rec.script != rev.script {
        return Err("stored derived script does not match replay".into());
    }
    Ok(())
}
