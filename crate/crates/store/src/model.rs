use std::fmt;
use std::str::FromStr;

use alter_core::export::{JobRecord, JobStatus};
use serde::{Deserialize, Serialize};

use crate::error::StoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Annotator,
    Administrator,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Annotator => "annotator",
            Role::Administrator => "administrator",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Role {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "annotator" => Ok(Role::Annotator),
            "administrator" | "admin" => Ok(Role::Administrator),
            other => Err(StoreError::Invalid(format!("unknown role {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct User {
    pub id: String,
    pub name: String,
    pub role: Role,
    /// Opaque bearer token, compared for equality.
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub title: String,
    pub sentences: Vec<String>,
    /// Feedback provider names, in display order.
    #[serde(default)]
    pub providers: Vec<String>,
    /// Attribute labels the task is about.
    #[serde(default)]
    pub labels: Vec<String>,
    /// Label scored by the Class provider and salience.
    #[serde(default)]
    pub target_label: Option<String>,
}

/// Selects jobs for listing and export. Empty fields match everything.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct JobFilter {
    pub user: Option<String>,
    pub task: Option<String>,
    pub status: Option<JobStatus>,
}

impl JobFilter {
    pub fn user(id: impl Into<String>) -> Self {
        JobFilter {
            user: Some(id.into()),
            ..JobFilter::default()
        }
    }

    pub fn matches(&self, job: &JobRecord) -> bool {
        self.user.as_ref().is_none_or(|u| *u == job.header.assignee)
            && self.task.as_ref().is_none_or(|t| *t == job.header.task_id)
            && self.status.is_none_or(|s| s == job.status())
    }
}

/// Ids appear in file names and job ids, so they are kept to a safe alphabet.
pub fn validate_id(kind: &str, id: &str) -> Result<(), StoreError> {
    if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return Err(StoreError::Invalid(format!(
            "{kind} id {id:?} must be non-empty and use only letters, digits, '_' or '-'"
        )));
    }
    Ok(())
}

pub fn job_id(task: &str, sentence_index: usize, user: &str) -> String {
    format!("{task}.{sentence_index}.{user}")
}
