use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use alter_core::analysis::{engagement, entropy_report, op_distribution, reference_counts};
use alter_core::export::{parse_export, JobRecord, JobStatus};
use alter_core::models::{AttributeClassifier, LabeledCorpus, NGramLm};
use alter_store::{JobFilter, Store, StoreError, Task};
use reqwest::blocking::Client;
use thiserror::Error;

use crate::backend::Backend;
use crate::cli::{Cli, Command, StatusArg, TaskCommand, UserCommand};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        CliError::Domain(e.to_string())
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Domain(format!("{}: {e}", path.display()))
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let format = cli.format;
    match cli.command {
        Command::User(UserCommand::Create {
            id,
            name,
            role,
            user_token,
        }) => {
            let user = backend(&cli.store, &cli.server, &cli.token)?.create_user(&id, &name, role, user_token)?;
            emit(out, &format!("{}\t{}\t{}\n", user.id, user.role, user.token))
        }
        Command::Task(TaskCommand::Create {
            id,
            title,
            sentences,
            sentence,
            providers,
            labels,
            target_label,
        }) => {
            let mut all = Vec::new();
            if let Some(path) = &sentences {
                let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                all.extend(text.lines().filter(|l| !l.trim().is_empty()).map(String::from));
            }
            all.extend(sentence);
            let task = Task {
                id,
                title,
                sentences: all,
                providers,
                labels,
                target_label,
            };
            let task = backend(&cli.store, &cli.server, &cli.token)?.create_task(task)?;
            emit(out, &format!("{}\t{} sentences\n", task.id, task.sentences.len()))
        }
        Command::Assign { task, users } => {
            let ids = backend(&cli.store, &cli.server, &cli.token)?.assign(&task, &users)?;
            let mut text = String::new();
            for id in ids {
                text.push_str(&id);
                text.push('\n');
            }
            emit(out, &text)
        }
        Command::Export {
            user,
            task,
            status,
            output,
        } => {
            let backend = backend(&cli.store, &cli.server, &cli.token)?;
            let store = backend.store("export")?;
            let filter = JobFilter {
                user,
                task,
                status: status.map(|s| match s {
                    StatusArg::Complete => JobStatus::Complete,
                    StatusArg::Incomplete => JobStatus::Incomplete,
                }),
            };
            let count = match &output {
                Some(path) => {
                    let file = File::create(path).map_err(|e| io_err(path, e))?;
                    let mut writer = BufWriter::new(file);
                    let n = store.export(&filter, &mut writer)?;
                    writer.flush().map_err(|e| io_err(path, e))?;
                    writer.get_ref().sync_all().map_err(|e| io_err(path, e))?;
                    n
                }
                None => {
                    let n = store.export(&filter, &mut *out)?;
                    out.flush().map_err(|e| CliError::Domain(e.to_string()))?;
                    n
                }
            };
            eprintln!("exported {count} jobs");
            Ok(())
        }
        Command::Import { export } => {
            let backend = backend(&cli.store, &cli.server, &cli.token)?;
            let store = backend.store("import")?;
            let file = File::open(&export).map_err(|e| io_err(&export, e))?;
            let n = store.import(BufReader::new(file))?;
            emit(out, &format!("imported {n} jobs\n"))
        }
        Command::OpDistribution(arg) => {
            let jobs = read_export(&arg.export)?;
            emit(out, &op_distribution(&jobs).render(format))
        }
        Command::EngagementReport(arg) => {
            let jobs = read_export(&arg.export)?;
            emit(out, &engagement(&jobs).render(format))
        }
        Command::EntropyReport { export, classifier } => {
            let jobs = read_export(&export.export)?;
            let file = File::open(&classifier).map_err(|e| io_err(&classifier, e))?;
            let clf = AttributeClassifier::load(BufReader::new(file)).map_err(|e| io_err(&classifier, e))?;
            let report = entropy_report(&jobs, &clf).map_err(|e| CliError::Domain(e.to_string()))?;
            emit(out, &report.render(format))
        }
        Command::ReferenceCount { export, filters } => {
            let jobs = read_export(&export.export)?;
            emit(out, &reference_counts(&jobs, &filters).render(format))
        }
        Command::TrainLm {
            corpus,
            order,
            alpha,
            output,
        } => {
            let text = fs::read_to_string(&corpus).map_err(|e| io_err(&corpus, e))?;
            let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
            let lm = NGramLm::train(&lines, order, alpha).map_err(|e| io_err(&corpus, e))?;
            save(&output, |w| lm.save(w).map_err(|e| e.to_string()))?;
            emit(
                out,
                &format!(
                    "order {order}, {} sentences, vocabulary {}\n",
                    lines.len(),
                    lm.vocab_size()
                ),
            )
        }
        Command::TrainClassifier { corpus, beta, output } => {
            let file = File::open(&corpus).map_err(|e| io_err(&corpus, e))?;
            let data = LabeledCorpus::parse_tsv(BufReader::new(file)).map_err(|e| io_err(&corpus, e))?;
            let clf = AttributeClassifier::train(&data, beta).map_err(|e| io_err(&corpus, e))?;
            save(&output, |w| clf.save(w).map_err(|e| e.to_string()))?;
            emit(
                out,
                &format!(
                    "labels {}, {} documents, vocabulary {}\n",
                    clf.labels().join(","),
                    data.len(),
                    clf.vocab_size()
                ),
            )
        }
    }
}

fn backend(
    store: &Option<std::path::PathBuf>,
    server: &Option<String>,
    token: &Option<String>,
) -> Result<Backend, CliError> {
    match (store, server) {
        (Some(root), None) => Ok(Backend::Local(Store::open(root)?)),
        (None, Some(base)) => {
            let token = token
                .clone()
                .ok_or_else(|| CliError::Usage("--server needs --token".into()))?;
            let client = Client::builder().build().map_err(|e| CliError::Domain(e.to_string()))?;
            Ok(Backend::Remote {
                client,
                base: base.clone(),
                token,
            })
        }
        _ => Err(CliError::Usage("pass exactly one of --store or --server".into())),
    }
}

fn read_export(path: &Path) -> Result<Vec<JobRecord>, CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let jobs = parse_export(BufReader::new(file)).map_err(|e| io_err(path, e))?;
    if jobs.is_empty() {
        eprintln!("warning: {} contains no jobs", path.display());
    }
    Ok(jobs)
}

fn save(path: &Path, write: impl FnOnce(&mut BufWriter<File>) -> Result<(), String>) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut writer = BufWriter::new(file);
    write(&mut writer).map_err(|e| io_err(path, e))?;
    writer.flush().map_err(|e| io_err(path, e))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e: io::Error| CliError::Domain(e.to_string()))
}
