//! Per-job event logs.
//!
//! Each line is `<seq>\t<crc32 of body, 8 hex digits>\t<body>` where the body is
//! one JSON event. Line 1 is always the `created` event carrying the job header.

use alter_core::export::{JobHeader, JobRecord, JobStatus, TimelineEntry};
use alter_core::{EditOp, FeedbackSnapshot};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::StoreError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum LogEvent {
    Created(JobHeader),
    Revision {
        op: EditOp,
        feedback: FeedbackSnapshot,
        timestamp: DateTime<Utc>,
    },
    Status {
        status: JobStatus,
        timestamp: DateTime<Utc>,
    },
}

/// An event before the store has stamped it.
#[derive(Debug, Clone, PartialEq)]
pub enum JobEvent {
    /// An edit or a revert, with the feedback computed for its result.
    Revision {
        op: EditOp,
        feedback: FeedbackSnapshot,
    },
    Complete,
    Reopen,
}

impl JobEvent {
    pub fn stamp(self, timestamp: DateTime<Utc>) -> LogEvent {
        match self {
            JobEvent::Revision { op, feedback } => LogEvent::Revision {
                op,
                feedback,
                timestamp,
            },
            JobEvent::Complete => LogEvent::Status {
                status: JobStatus::Complete,
                timestamp,
            },
            JobEvent::Reopen => LogEvent::Status {
                status: JobStatus::Incomplete,
                timestamp,
            },
        }
    }
}

pub fn encode_line(seq: usize, event: &LogEvent) -> String {
    let body = serde_json::to_string(event).expect("log events always serialize");
    format!("{seq}\t{:08x}\t{body}\n", crc32fast::hash(body.as_bytes()))
}

/// Applies a stamped event to a job already holding its header.
pub fn apply_event(job: &mut JobRecord, event: LogEvent) -> Result<(), String> {
    match event {
        LogEvent::Created(_) => Err("duplicate created event".into()),
        LogEvent::Revision {
            op,
            feedback,
            timestamp,
        } => job
            .apply(op, feedback, timestamp)
            .map(|_| ())
            .map_err(|e| e.to_string()),
        LogEvent::Status { status, timestamp } => {
            job.set_status(status, timestamp);
            Ok(())
        }
    }
}

/// The log events that rebuild `job`, in order.
pub fn events_of(job: &JobRecord) -> Vec<LogEvent> {
    let mut out = vec![LogEvent::Created(job.header.clone())];
    for entry in job.timeline() {
        out.push(match entry {
            TimelineEntry::Revision(i) => {
                let rev = &job.history().revisions()[*i];
                LogEvent::Revision {
                    op: rev.op.clone(),
                    feedback: rev.feedback.clone(),
                    timestamp: rev.timestamp,
                }
            }
            TimelineEntry::Status(status, timestamp) => LogEvent::Status {
                status: *status,
                timestamp: *timestamp,
            },
        });
    }
    out
}

/// Replays a whole log file. A final line without its newline counts as
/// truncated and is reported as corrupt.
pub fn replay(job_id: &str, text: &str) -> Result<JobRecord, StoreError> {
    let corrupt = |line: usize, message: String| StoreError::CorruptLog {
        job: job_id.to_string(),
        line,
        message,
    };
    let mut job: Option<JobRecord> = None;
    let mut rest = text;
    let mut lineno = 0;
    while !rest.is_empty() {
        lineno += 1;
        let Some((line, tail)) = rest.split_once('\n') else {
            return Err(corrupt(lineno, "truncated line".into()));
        };
        rest = tail;
        let event = decode_line(lineno, line).map_err(|m| corrupt(lineno, m))?;
        match (&mut job, event) {
            (None, LogEvent::Created(header)) => {
                if header.job_id != job_id {
                    return Err(corrupt(lineno, format!("header names job {:?}", header.job_id)));
                }
                job = Some(JobRecord::new(header));
            }
            (None, _) => return Err(corrupt(lineno, "log does not start with a created event".into())),
            (Some(j), event) => apply_event(j, event).map_err(|m| corrupt(lineno, m))?,
        }
    }
    job.ok_or_else(|| corrupt(1, "empty log".into()))
}

fn decode_line(lineno: usize, line: &str) -> Result<LogEvent, String> {
    let mut parts = line.splitn(3, '\t');
    let (Some(seq), Some(crc), Some(body)) = (parts.next(), parts.next(), parts.next()) else {
        return Err("expected seq, checksum and body".into());
    };
    if seq.parse::<usize>().ok() != Some(lineno - 1) {
        return Err(format!("sequence number {seq:?} where {} was expected", lineno - 1));
    }
    let expected = format!("{:08x}", crc32fast::hash(body.as_bytes()));
    if crc != expected {
        return Err(format!("checksum {crc} does not match body ({expected})"));
    }
    serde_json::from_str(body).map_err(|e| format!("bad event: {e}"))
}
