use alter_store::{Role, Store, Task, User};
use reqwest::blocking::{Client, Response};
use serde_json::{json, Value};

use crate::commands::CliError;

/// Where administrative writes go.
pub enum Backend {
    Local(Store),
    Remote {
        client: Client,
        base: String,
        token: String,
    },
}

impl Backend {
    pub fn create_user(&self, id: &str, name: &str, role: Role, token: Option<String>) -> Result<User, CliError> {
        match self {
            Backend::Local(store) => Ok(store.create_user(id, name, role, token)?),
            Backend::Remote { .. } => {
                let mut body = json!({"id": id, "name": name, "role": role.as_str()});
                if let Some(t) = token {
                    body["token"] = Value::String(t);
                }
                let value = self.post("/users", &body)?;
                serde_json::from_value(value).map_err(|e| CliError::Domain(format!("bad server response: {e}")))
            }
        }
    }

    pub fn create_task(&self, task: Task) -> Result<Task, CliError> {
        match self {
            Backend::Local(store) => Ok(store.create_task(task)?),
            Backend::Remote { .. } => {
                let body = serde_json::to_value(&task).map_err(|e| CliError::Domain(e.to_string()))?;
                let value = self.post("/tasks", &body)?;
                serde_json::from_value(value).map_err(|e| CliError::Domain(format!("bad server response: {e}")))
            }
        }
    }

    pub fn assign(&self, task: &str, users: &[String]) -> Result<Vec<String>, CliError> {
        match self {
            Backend::Local(store) => Ok(store.assign(task, users)?.into_iter().map(|h| h.job_id).collect()),
            Backend::Remote { .. } => {
                let value = self.post(&format!("/tasks/{task}/assign"), &json!({ "users": users }))?;
                let ids = value["jobs"]
                    .as_array()
                    .ok_or_else(|| CliError::Domain("bad server response: missing jobs".into()))?;
                Ok(ids.iter().filter_map(|v| v.as_str().map(String::from)).collect())
            }
        }
    }

    pub fn store(&self, command: &str) -> Result<&Store, CliError> {
        match self {
            Backend::Local(store) => Ok(store),
            Backend::Remote { .. } => Err(CliError::Usage(format!("{command} needs --store"))),
        }
    }

    fn post(&self, path: &str, body: &Value) -> Result<Value, CliError> {
        let Backend::Remote { client, base, token } = self else {
            unreachable!("post on a local backend")
        };
        let url = format!("{}{path}", base.trim_end_matches('/'));
        let response = client
            .post(&url)
            .bearer_auth(token)
            .json(body)
            .send()
            .map_err(|e| CliError::Domain(format!("{url}: {e}")))?;
        decode(response)
    }
}

fn decode(response: Response) -> Result<Value, CliError> {
    let status = response.status();
    let value: Value = response
        .json()
        .map_err(|e| CliError::Domain(format!("server returned {status}: {e}")))?;
    if status.is_success() {
        return Ok(value);
    }
    let message = value["error"]["message"].as_str().unwrap_or("no message");
    Err(CliError::Domain(format!("server returned {status}: {message}")))
}
