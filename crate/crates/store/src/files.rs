//! Text formats for the users file and task files.

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use crate::error::{Result, StoreError};
use crate::model::{Role, Task, User};

fn format_err(path: &Path, line: usize, message: impl Into<String>) -> StoreError {
    StoreError::Format {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Rejects values that would break a line- or tab-separated record.
pub fn check_field(what: &str, value: &str, allow_tab: bool) -> Result<()> {
    if value.contains(['\n', '\r']) || (!allow_tab && value.contains('\t')) {
        return Err(StoreError::Invalid(format!("{what} contains a line break or tab")));
    }
    Ok(())
}

/// Writes `contents` to a sibling temp file, syncs it, and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut file = File::create(&tmp)?;
        file.write_all(contents.as_bytes())?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    if let Some(dir) = path.parent() {
        // Persist the rename itself where the platform allows it.
        if let Ok(d) = File::open(dir) {
            let _ = d.sync_all();
        }
    }
    Ok(())
}

pub fn format_users<'a>(users: impl IntoIterator<Item = &'a User>) -> String {
    users
        .into_iter()
        .map(|u| format!("{}\t{}\t{}\t{}\n", u.id, u.name, u.role, u.token))
        .collect()
}

pub fn parse_users(path: &Path, text: &str) -> Result<Vec<User>> {
    let mut users = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [id, name, role, token] = fields[..] else {
            return Err(format_err(
                path,
                i + 1,
                format!("expected 4 fields, found {}", fields.len()),
            ));
        };
        let role: Role = role
            .parse()
            .map_err(|e: StoreError| format_err(path, i + 1, e.to_string()))?;
        users.push(User {
            id: id.into(),
            name: name.into(),
            role,
            token: token.into(),
        });
    }
    Ok(users)
}

pub fn format_task(task: &Task) -> String {
    let mut out = format!("id={}\ntitle={}\n", task.id, task.title);
    out.push_str(&format!("providers={}\n", task.providers.join(",")));
    out.push_str(&format!("labels={}\n", task.labels.join(",")));
    if let Some(target) = &task.target_label {
        out.push_str(&format!("target_label={target}\n"));
    }
    for s in &task.sentences {
        out.push_str(&format!("sentence={s}\n"));
    }
    out
}

fn split_list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

pub fn parse_task(path: &Path, text: &str) -> Result<Task> {
    let mut task = Task {
        id: String::new(),
        title: String::new(),
        sentences: Vec::new(),
        providers: Vec::new(),
        labels: Vec::new(),
        target_label: None,
    };
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format_err(path, i + 1, "expected key=value"));
        };
        match key {
            "id" => task.id = value.into(),
            "title" => task.title = value.into(),
            "providers" => task.providers = split_list(value),
            "labels" => task.labels = split_list(value),
            "target_label" => task.target_label = Some(value.into()),
            "sentence" => task.sentences.push(value.into()),
            other => return Err(format_err(path, i + 1, format!("unknown key {other:?}"))),
        }
    }
    if task.id.is_empty() {
        return Err(format_err(path, 0, "missing id"));
    }
    Ok(task)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn task_round_trip() {
        let task = Task {
            id: "t1".into(),
            title: "Gender = female".into(),
            sentences: vec!["a = b".into(), "My husband and I enjoy LA Hilton Hotel.".into()],
            providers: vec!["ED".into(), "Class".into()],
            labels: vec!["F".into(), "M".into()],
            target_label: Some("M".into()),
        };
        let text = format_task(&task);
        assert_eq!(parse_task(Path::new("t"), &text).unwrap(), task);
    }

    #[test]
    fn users_reject_bad_lines() {
        let err = parse_users(Path::new("users.tsv"), "a\tA\tannotator\tx\nb\tB\tboss\ty\n").unwrap_err();
        assert!(matches!(err, StoreError::Format { line: 2, .. }), "{err}");
        let err = parse_users(Path::new("users.tsv"), "a\tA\n").unwrap_err();
        assert!(matches!(err, StoreError::Format { line: 1, .. }));
    }
}
