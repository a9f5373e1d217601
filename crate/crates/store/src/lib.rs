//! Directory-backed store for users, tasks and jobs.
//!
//! ```text
//! <root>/users.tsv        id, name, role, token (tab separated)
//! <root>/tasks/<id>.task  key=value lines, one `sentence=` per sentence
//! <root>/jobs/<id>.log    append-only event log, see [`log`]
//! ```
//!
//! Job ids are `<task>.<sentence index>.<user>`. Appends to one job are
//! serialized; different jobs can be written concurrently.

mod error;
mod files;
pub mod log;
mod model;

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, OpenOptions};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

use alter_core::export::{parse_export, write_export, JobHeader, JobRecord};
use chrono::{DateTime, Utc};

pub use error::{Result, StoreError};
pub use log::JobEvent;
pub use model::{job_id, validate_id, JobFilter, Role, Task, User};

type Clock = Box<dyn Fn() -> DateTime<Utc> + Send + Sync>;
type JobKey = (String, usize, String);
type JobSlot = Arc<Mutex<Option<JobRecord>>>;

#[derive(Default)]
struct Meta {
    users: BTreeMap<String, User>,
    tasks: BTreeMap<String, Task>,
    /// Ordered by (task, sentence index, assignee), which is also export order.
    jobs: BTreeMap<JobKey, String>,
}

pub struct Store {
    root: PathBuf,
    meta: Mutex<Meta>,
    /// Lazily replayed jobs. Holding a slot's lock makes the holder the only writer.
    slots: Mutex<HashMap<String, JobSlot>>,
    clock: Clock,
}

/// Everything the store holds, for equality checks.
#[derive(Debug, Clone, PartialEq)]
pub struct StoreSnapshot {
    pub users: Vec<User>,
    pub tasks: Vec<Task>,
    pub jobs: Vec<JobRecord>,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn parse_job_key(id: &str) -> Option<JobKey> {
    let mut parts = id.split('.');
    let (task, idx, user) = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some() || validate_id("task", task).is_err() || validate_id("user", user).is_err() {
        return None;
    }
    Some((task.to_string(), idx.parse().ok()?, user.to_string()))
}

impl Store {
    /// Opens the store at `root`, creating the directory layout if needed.
    pub fn open(root: impl AsRef<Path>) -> Result<Store> {
        Self::open_with_clock(root, Box::new(Utc::now))
    }

    /// Like [`Store::open`] with a custom source of append timestamps.
    pub fn open_with_clock(root: impl AsRef<Path>, clock: Clock) -> Result<Store> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(root.join("tasks"))?;
        fs::create_dir_all(root.join("jobs"))?;
        let mut meta = Meta::default();

        let users_path = root.join("users.tsv");
        if users_path.exists() {
            for user in files::parse_users(&users_path, &fs::read_to_string(&users_path)?)? {
                meta.users.insert(user.id.clone(), user);
            }
        }
        for entry in fs::read_dir(root.join("tasks"))? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "task") {
                let task = files::parse_task(&path, &fs::read_to_string(&path)?)?;
                if path.file_stem().is_none_or(|s| s != task.id.as_str()) {
                    return Err(StoreError::Format {
                        path,
                        line: 1,
                        message: format!("task id {:?} does not match the file name", task.id),
                    });
                }
                meta.tasks.insert(task.id.clone(), task);
            }
        }
        let mut slots = HashMap::new();
        for entry in fs::read_dir(root.join("jobs"))? {
            let path = entry?.path();
            if path.extension().is_none_or(|e| e != "log") {
                continue;
            }
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or_default()
                .to_string();
            let key = parse_job_key(&id).ok_or_else(|| StoreError::Format {
                path: path.clone(),
                line: 0,
                message: "log file name is not a job id".into(),
            })?;
            meta.jobs.insert(key, id.clone());
            slots.insert(id, JobSlot::default());
        }
        Ok(Store {
            root,
            meta: Mutex::new(meta),
            slots: Mutex::new(slots),
            clock,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn log_path(&self, id: &str) -> PathBuf {
        self.root.join("jobs").join(format!("{id}.log"))
    }

    /// Creates a user. A token is generated unless one is given.
    pub fn create_user(&self, id: &str, name: &str, role: Role, token: Option<String>) -> Result<User> {
        validate_id("user", id)?;
        files::check_field("name", name, false)?;
        let token = token.unwrap_or_else(|| uuid::Uuid::new_v4().simple().to_string());
        if token.is_empty() || token.contains(char::is_whitespace) {
            return Err(StoreError::Invalid("token must be non-empty without whitespace".into()));
        }
        let mut meta = lock(&self.meta);
        if meta.users.contains_key(id) {
            return Err(StoreError::Conflict(format!("user {id} already exists")));
        }
        if meta.users.values().any(|u| u.token == token) {
            return Err(StoreError::Conflict("token already in use".into()));
        }
        let user = User {
            id: id.into(),
            name: name.into(),
            role,
            token,
        };
        let mut users = meta.users.clone();
        users.insert(user.id.clone(), user.clone());
        files::write_atomic(&self.root.join("users.tsv"), &files::format_users(users.values()))?;
        meta.users = users;
        Ok(user)
    }

    pub fn users(&self) -> Vec<User> {
        lock(&self.meta).users.values().cloned().collect()
    }

    pub fn user(&self, id: &str) -> Result<User> {
        lock(&self.meta)
            .users
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(format!("user {id}")))
    }

    pub fn user_by_token(&self, token: &str) -> Option<User> {
        lock(&self.meta).users.values().find(|u| u.token == token).cloned()
    }

    pub fn create_task(&self, task: Task) -> Result<Task> {
        validate_id("task", &task.id)?;
        files::check_field("title", &task.title, true)?;
        if task.sentences.is_empty() {
            return Err(StoreError::Invalid("a task needs at least one sentence".into()));
        }
        for s in &task.sentences {
            files::check_field("sentence", s, true)?;
            if s.trim().is_empty() {
                return Err(StoreError::Invalid("empty sentence".into()));
            }
        }
        for name in task.providers.iter().chain(&task.labels).chain(&task.target_label) {
            if name.is_empty() || name.contains([',', '=', '\n', '\r']) {
                return Err(StoreError::Invalid(format!("bad provider or label name {name:?}")));
            }
        }
        if let Some(target) = &task.target_label {
            if !task.labels.is_empty() && !task.labels.contains(target) {
                return Err(StoreError::Invalid(format!(
                    "target label {target} is not among the labels"
                )));
            }
        }
        let mut meta = lock(&self.meta);
        if meta.tasks.contains_key(&task.id) {
            return Err(StoreError::Conflict(format!("task {} already exists", task.id)));
        }
        let path = self.root.join("tasks").join(format!("{}.task", task.id));
        files::write_atomic(&path, &files::format_task(&task))?;
        meta.tasks.insert(task.id.clone(), task.clone());
        Ok(task)
    }

    pub fn tasks(&self) -> Vec<Task> {
        lock(&self.meta).tasks.values().cloned().collect()
    }

    pub fn task(&self, id: &str) -> Result<Task> {
        lock(&self.meta)
            .tasks
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(format!("task {id}")))
    }

    /// Creates one job per (sentence, user). Nothing is written unless every
    /// reference exists and no job already exists.
    pub fn assign(&self, task_id: &str, user_ids: &[String]) -> Result<Vec<JobHeader>> {
        let mut meta = lock(&self.meta);
        let task = meta
            .tasks
            .get(task_id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(format!("task {task_id}")))?;
        let mut headers = Vec::new();
        let created = (self.clock)();
        for user in user_ids {
            if !meta.users.contains_key(user) {
                return Err(StoreError::NotFound(format!("user {user}")));
            }
            for (idx, text) in task.sentences.iter().enumerate() {
                let key = (task.id.clone(), idx, user.clone());
                let id = job_id(task_id, idx, user);
                if meta.jobs.contains_key(&key) || headers.iter().any(|h: &JobHeader| h.job_id == id) {
                    return Err(StoreError::Conflict(format!("job {id} already exists")));
                }
                headers.push(JobHeader {
                    job_id: id,
                    task_id: task.id.clone(),
                    sentence_index: idx,
                    assignee: user.clone(),
                    created,
                    original_text: text.clone(),
                });
            }
        }
        for header in &headers {
            let job = JobRecord::new(header.clone());
            self.write_new_log(&job)?;
            let key = (header.task_id.clone(), header.sentence_index, header.assignee.clone());
            meta.jobs.insert(key, header.job_id.clone());
            lock(&self.slots).insert(header.job_id.clone(), Arc::new(Mutex::new(Some(job))));
        }
        Ok(headers)
    }

    fn write_new_log(&self, job: &JobRecord) -> Result<()> {
        let text: String = log::events_of(job)
            .iter()
            .enumerate()
            .map(|(i, e)| log::encode_line(i, e))
            .collect();
        let path = self.log_path(&job.header.job_id);
        if path.exists() {
            return Err(StoreError::Conflict(format!(
                "job {} already exists",
                job.header.job_id
            )));
        }
        files::write_atomic(&path, &text)
    }

    fn slot(&self, id: &str) -> Result<JobSlot> {
        lock(&self.slots)
            .get(id)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(format!("job {id}")))
    }

    fn loaded<'a>(&self, id: &str, slot: &'a mut Option<JobRecord>) -> Result<&'a mut JobRecord> {
        if slot.is_none() {
            let text = fs::read_to_string(self.log_path(id))?;
            *slot = Some(log::replay(id, &text)?);
        }
        Ok(slot.as_mut().expect("loaded above"))
    }

    /// Replays a job from its log (cached after the first load).
    pub fn load_job(&self, id: &str) -> Result<JobRecord> {
        let slot = self.slot(id)?;
        let mut guard = lock(&slot);
        Ok(self.loaded(id, &mut guard)?.clone())
    }

    /// Runs `decide` on the current job while holding the job's write lock and
    /// appends the event it returns, stamped by the store clock. `None` leaves
    /// the job unchanged. Returns the job after the update.
    pub fn update_job<E, F>(&self, id: &str, decide: F) -> Result<JobRecord, E>
    where
        E: From<StoreError>,
        F: FnOnce(&JobRecord) -> Result<Option<JobEvent>, E>,
    {
        let slot = self.slot(id)?;
        let mut guard = lock(&slot);
        let job = self.loaded(id, &mut guard)?;
        let Some(event) = decide(job)? else {
            return Ok(job.clone());
        };
        let event = event.stamp((self.clock)());
        let mut next = job.clone();
        log::apply_event(&mut next, event.clone()).map_err(StoreError::Invalid)?;
        let seq = 1 + job.timeline().len();
        let mut file = OpenOptions::new()
            .append(true)
            .open(self.log_path(id))
            .map_err(StoreError::from)?;
        file.write_all(log::encode_line(seq, &event).as_bytes())
            .and_then(|_| file.sync_data())
            .map_err(StoreError::from)?;
        *job = next;
        Ok(job.clone())
    }

    /// Appends one event unconditionally.
    pub fn append_event(&self, id: &str, event: JobEvent) -> Result<JobRecord> {
        self.update_job(id, |_| Ok(Some(event)))
    }

    /// Jobs matching `filter`, ordered by task, sentence index and assignee.
    pub fn jobs(&self, filter: &JobFilter) -> Result<Vec<JobRecord>> {
        let ids: Vec<String> = lock(&self.meta)
            .jobs
            .iter()
            .filter(|((task, _, user), _)| {
                filter.task.as_ref().is_none_or(|t| t == task) && filter.user.as_ref().is_none_or(|u| u == user)
            })
            .map(|(_, id)| id.clone())
            .collect();
        let mut out = Vec::new();
        for id in ids {
            let job = self.load_job(&id)?;
            if filter.matches(&job) {
                out.push(job);
            }
        }
        Ok(out)
    }

    /// Writes matching jobs in the export format. Returns the number of jobs.
    pub fn export<W: Write>(&self, filter: &JobFilter, out: W) -> Result<usize> {
        let jobs = self.jobs(filter)?;
        write_export(out, &jobs)?;
        Ok(jobs.len())
    }

    /// Adds the jobs of an export. Users and tasks are not required to exist;
    /// every job id must be new.
    pub fn import<R: BufRead>(&self, input: R) -> Result<usize> {
        let jobs = parse_export(input)?;
        let mut meta = lock(&self.meta);
        let mut keys = Vec::new();
        for job in &jobs {
            let h = &job.header;
            validate_id("task", &h.task_id)?;
            validate_id("user", &h.assignee)?;
            if h.job_id != job_id(&h.task_id, h.sentence_index, &h.assignee) {
                return Err(StoreError::Invalid(format!(
                    "job id {:?} does not match its task, index and assignee",
                    h.job_id
                )));
            }
            let key = (h.task_id.clone(), h.sentence_index, h.assignee.clone());
            if meta.jobs.contains_key(&key) || keys.contains(&key) {
                return Err(StoreError::Conflict(format!("job {} already exists", h.job_id)));
            }
            keys.push(key);
        }
        for (job, key) in jobs.iter().zip(keys) {
            self.write_new_log(job)?;
            meta.jobs.insert(key, job.header.job_id.clone());
            lock(&self.slots).insert(job.header.job_id.clone(), Arc::new(Mutex::new(Some(job.clone()))));
        }
        Ok(jobs.len())
    }

    pub fn snapshot(&self) -> Result<StoreSnapshot> {
        Ok(StoreSnapshot {
            users: self.users(),
            tasks: self.tasks(),
            jobs: self.jobs(&JobFilter::default())?,
        })
    }
}
