use std::sync::Arc;

use alter_core::feedback::{edit_distance, ModelSet};
use alter_core::models::{AttributeClassifier, EmbeddingTable, LabeledCorpus, NGramLm};
use alter_core::tokenize;
use alter_service::{router, AppState};
use alter_store::{Role, Store};
use reqwest::{Client, StatusCode};
use serde_json::{json, Value};

const ORIGINAL: &str = "My husband and I enjoy LA Hilton Hotel.";

fn models() -> ModelSet {
    let lm = NGramLm::train(
        &[
            "my husband and i love the hotel",
            "we love la",
            "the hotel in los angeles is nice",
        ],
        2,
        1.0,
    )
    .unwrap();
    let emb = EmbeddingTable::load("love 1 0.1\nenjoy 0.9 0.2\nlike 0.8 0.3\nhotel 0 1\n".as_bytes()).unwrap();
    let corpus = LabeledCorpus::new([
        ("F", "my husband and i love it"),
        ("F", "so cute and lovely"),
        ("M", "my wife and i enjoy the game"),
        ("M", "great beer"),
    ])
    .unwrap();
    ModelSet {
        embeddings: Some(Arc::new(emb)),
        lm: Some(Arc::new(lm)),
        classifier: Some(Arc::new(AttributeClassifier::train(&corpus, 1.0).unwrap())),
    }
}

struct Server {
    base: String,
    client: Client,
    _dir: tempfile::TempDir,
}

impl Server {
    async fn start(models: ModelSet) -> Server {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store
            .create_user("root", "Root", Role::Administrator, Some("root-token".into()))
            .unwrap();
        let state = AppState::new(store, models, vec!["ED".into()], 10);
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let addr = listener.local_addr().unwrap();
        tokio::spawn(async move { axum::serve(listener, router(state)).await });
        Server {
            base: format!("http://{addr}"),
            client: Client::new(),
            _dir: dir,
        }
    }

    async fn call(&self, method: &str, path: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
        let url = format!("{}{path}", self.base);
        let mut req = match method {
            "GET" => self.client.get(url),
            _ => self.client.post(url),
        };
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().await.unwrap();
        let status = resp.status();
        let text = resp.text().await.unwrap();
        (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
    }

    async fn get(&self, path: &str, token: &str) -> (StatusCode, Value) {
        self.call("GET", path, Some(token), None).await
    }

    async fn post(&self, path: &str, token: &str, body: Value) -> (StatusCode, Value) {
        self.call("POST", path, Some(token), Some(body)).await
    }

    /// Creates annotator `ann` and a two-sentence task assigned to them.
    async fn seed(&self) -> String {
        let (s, user) = self
            .post("/users", "root-token", json!({"id": "ann", "name": "Ann"}))
            .await;
        assert_eq!(s, StatusCode::CREATED, "{user}");
        let task = json!({
            "id": "hotel",
            "title": "gender",
            "sentences": [ORIGINAL, "The food is good."],
            "providers": ["ED", "PPL", "Class", "Entropy", "WMD"],
            "labels": ["F", "M"],
            "target_label": "M"
        });
        assert_eq!(self.post("/tasks", "root-token", task).await.0, StatusCode::CREATED);
        let (s, jobs) = self
            .post("/tasks/hotel/assign", "root-token", json!({"users": ["ann"]}))
            .await;
        assert_eq!(s, StatusCode::CREATED);
        assert_eq!(jobs["jobs"], json!(["hotel.0.ann", "hotel.1.ann"]));
        user["token"].as_str().unwrap().to_string()
    }
}

fn op(kind: Value, source: &str, parent: i64) -> Value {
    json!({"op": kind, "source": source, "parent_revision_index": parent})
}

#[tokio::test]
async fn rh2_sequence_over_http() {
    let srv = Server::start(models()).await;
    let ann = srv.seed().await;
    let path = "/jobs/hotel.0.ann/ops";
    let steps = [
        (
            json!({"kind": "substitute", "position": 4, "text": "love"}),
            "lm_recommended",
        ),
        (json!({"kind": "delete", "position": 5}), "typed"),
        (
            json!({"kind": "insert", "position": 7, "text": "in Los Angeles"}),
            "typed",
        ),
        (
            json!({"kind": "substitute", "position": 8, "span": 2, "text": "LA"}),
            "lm_recommended",
        ),
        (
            json!({"kind": "substitute", "position": 0, "span": 4, "text": "Family"}),
            "lm_recommended",
        ),
        (
            json!({"kind": "substitute", "position": 0, "text": "All family members"}),
            "typed",
        ),
    ];
    let expected = [
        "My husband and I love LA Hilton Hotel.",
        "My husband and I love Hilton Hotel.",
        "My husband and I love Hilton Hotel in Los Angeles.",
        "My husband and I love Hilton Hotel in LA.",
        "Family love Hilton Hotel in LA.",
        "All family members love Hilton Hotel in LA.",
    ];
    let original = tokenize(ORIGINAL);
    for (i, ((kind, source), text)) in steps.into_iter().zip(expected).enumerate() {
        let (status, body) = srv.post(path, &ann, op(kind, source, i as i64 - 1)).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        assert_eq!(body["revision"]["index"], json!(i));
        assert_eq!(body["last_index"], json!(i));
        assert_eq!(body["revision"]["result_text"], json!(tokenize(text).text()));
        let ed = edit_distance(&original, &tokenize(text)) as f64;
        assert_eq!(body["feedback"]["ED"], json!(ed));
        for name in ["PPL", "Class", "Entropy"] {
            assert!(body["feedback"][name].is_f64(), "{name}: {body}");
        }
        assert_eq!(
            body["salience"]["scores"].as_array().unwrap().len(),
            tokenize(text).len()
        );
    }

    // Stale parent.
    let (status, body) = srv
        .post(path, &ann, op(json!({"kind": "delete", "position": 0}), "typed", 3))
        .await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["current"]["last_index"], json!(5));

    // Revert appends a new revision.
    let (status, body) = srv
        .post(
            "/jobs/hotel.0.ann/revert",
            &ann,
            json!({"target_revision_index": 0, "parent_revision_index": 5}),
        )
        .await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    assert_eq!(body["revision"]["index"], json!(6));
    assert_eq!(
        body["revision"]["op"],
        json!({"kind": "revert", "target": 0, "source": "system"})
    );
    assert_eq!(body["current"]["text"], json!(tokenize(expected[0]).text()));
    assert_eq!(body["feedback"]["ED"], json!(1.0));

    let (_, job) = srv.get("/jobs/hotel.0.ann", &ann).await;
    let indices: Vec<i64> = job["revisions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["index"].as_i64().unwrap())
        .collect();
    assert_eq!(indices, (0..=6).collect::<Vec<_>>());
    assert_eq!(job["revisions"][5]["result_text"], json!(tokenize(expected[5]).text()));
    assert_eq!(job["current"]["tokens"][4], json!({"index": 4, "text": "love"}));
    assert_eq!(job["original_text"], json!(ORIGINAL));

    // Revert to the original.
    let (status, body) = srv
        .post(
            "/jobs/hotel.0.ann/revert",
            &ann,
            json!({"target_revision_index": -1, "parent_revision_index": 6}),
        )
        .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["feedback"]["ED"], json!(0.0));
    assert_eq!(body["feedback"]["WMD"], json!(0.0));
}

#[tokio::test]
async fn invalid_requests() {
    let srv = Server::start(models()).await;
    let ann = srv.seed().await;
    let path = "/jobs/hotel.1.ann/ops";
    let cases = [
        op(json!({"kind": "delete", "position": 40}), "typed", -1),
        op(json!({"kind": "reorder", "from": 1, "to": 1}), "typed", -1),
        op(json!({"kind": "insert", "position": 0, "text": "  "}), "typed", -1),
        op(json!({"kind": "revert", "target": -1}), "typed", -1),
        op(json!({"kind": "delete", "position": 0}), "system", -1),
        op(json!({"kind": "teleport"}), "typed", -1),
        json!({"op": {"kind": "delete", "position": 0}}),
    ];
    for body in cases {
        let (status, resp) = srv.post(path, &ann, body.clone()).await;
        assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body} -> {resp}");
        assert!(resp["error"]["message"].is_string());
    }
    let (status, _) = srv
        .post(
            "/jobs/hotel.1.ann/revert",
            &ann,
            json!({"target_revision_index": 3, "parent_revision_index": -1}),
        )
        .await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY);
    let (_, job) = srv.get("/jobs/hotel.1.ann", &ann).await;
    assert_eq!(job["last_index"], json!(-1));
    assert_eq!(
        srv.post(
            "/jobs/nope.0.ann/ops",
            &ann,
            op(json!({"kind": "delete", "position": 0}), "typed", -1)
        )
        .await
        .0,
        StatusCode::NOT_FOUND
    );
}

#[tokio::test]
async fn direct_typing_records_script() {
    let srv = Server::start(models()).await;
    let ann = srv.seed().await;
    let (status, body) = srv
        .post(
            "/jobs/hotel.1.ann/ops",
            &ann,
            op(
                json!({"kind": "replace_sentence", "text": "The food is great."}),
                "typed",
                -1,
            ),
        )
        .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(
        body["revision"]["script"],
        json!([{"kind": "substitute", "position": 3, "text": "great", "source": "typed"}])
    );
    let (_, body) = srv
        .post(
            "/jobs/hotel.1.ann/ops",
            &ann,
            op(
                json!({"kind": "replace_sentence", "text": "The food is great."}),
                "typed",
                0,
            ),
        )
        .await;
    assert_eq!(body["revision"]["script"], json!([]));
}

#[tokio::test]
async fn authentication_and_authorization() {
    let srv = Server::start(models()).await;
    let ann = srv.seed().await;
    srv.post(
        "/users",
        "root-token",
        json!({"id": "bob", "name": "Bob", "token": "bob-token"}),
    )
    .await;

    assert_eq!(
        srv.call("GET", "/jobs/hotel.0.ann", None, None).await.0,
        StatusCode::UNAUTHORIZED
    );
    assert_eq!(srv.get("/jobs/hotel.0.ann", "wrong").await.0, StatusCode::UNAUTHORIZED);
    assert_eq!(srv.get("/jobs/hotel.0.ann", "bob-token").await.0, StatusCode::FORBIDDEN);
    assert_eq!(srv.get("/jobs/hotel.0.ann", "root-token").await.0, StatusCode::OK);
    assert_eq!(srv.get("/jobs?user=ann", "bob-token").await.0, StatusCode::FORBIDDEN);
    assert_eq!(
        srv.post("/users", &ann, json!({"id": "x", "name": "X"})).await.0,
        StatusCode::FORBIDDEN
    );
    assert_eq!(
        srv.call("POST", "/tasks", None, Some(json!({}))).await.0,
        StatusCode::UNAUTHORIZED
    );
    assert_eq!(
        srv.post("/tasks/hotel/assign", "bob-token", json!({"users": ["bob"]}))
            .await
            .0,
        StatusCode::FORBIDDEN
    );
}

#[tokio::test]
async fn admin_endpoints_map_store_errors() {
    let srv = Server::start(models()).await;
    srv.seed().await;
    let root = "root-token";
    assert_eq!(
        srv.post("/users", root, json!({"id": "ann", "name": "Again"})).await.0,
        StatusCode::CONFLICT
    );
    assert_eq!(
        srv.post("/tasks/hotel/assign", root, json!({"users": ["ann"]})).await.0,
        StatusCode::CONFLICT
    );
    assert_eq!(
        srv.post("/tasks/hotel/assign", root, json!({"users": ["ghost"]}))
            .await
            .0,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        srv.post("/tasks/none/assign", root, json!({"users": ["ann"]})).await.0,
        StatusCode::NOT_FOUND
    );
    let bad = json!({"id": "t2", "title": "x", "sentences": ["a"], "providers": ["BLEU"]});
    assert_eq!(srv.post("/tasks", root, bad).await.0, StatusCode::UNPROCESSABLE_ENTITY);
    let empty = json!({"id": "t3", "title": "x", "sentences": []});
    assert_eq!(
        srv.post("/tasks", root, empty).await.0,
        StatusCode::UNPROCESSABLE_ENTITY
    );

    let many: Vec<String> = (0..100).map(|i| format!("sentence {i}")).collect();
    srv.post("/tasks", root, json!({"id": "big", "title": "big", "sentences": many}))
        .await;
    srv.post(
        "/users",
        root,
        json!({"id": "cat", "name": "Cat", "token": "cat-token"}),
    )
    .await;
    assert_eq!(
        srv.post("/tasks/big/assign", root, json!({"users": ["cat"]})).await.0,
        StatusCode::CREATED
    );
    let (_, list) = srv.get("/jobs", "cat-token").await;
    assert_eq!(list["jobs"].as_array().unwrap().len(), 100);
    assert_eq!(srv.get("/jobs?user=ghost", root).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn completion_is_idempotent_and_listed() {
    let srv = Server::start(models()).await;
    let ann = srv.seed().await;
    for _ in 0..2 {
        let (status, body) = srv.post("/jobs/hotel.1.ann/complete", &ann, json!({})).await;
        assert_eq!(status, StatusCode::OK);
        assert_eq!(body["status"], json!("complete"));
    }
    let (_, list) = srv.get("/jobs?user=ann", &ann).await;
    let statuses: Vec<&str> = list["jobs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|j| j["status"].as_str().unwrap())
        .collect();
    assert_eq!(statuses, ["incomplete", "complete"]);
    let (_, body) = srv.post("/jobs/hotel.1.ann/reopen", &ann, json!({})).await;
    assert_eq!(body["status"], json!("incomplete"));
    assert_eq!(
        srv.post("/jobs/missing.0.ann/complete", &ann, json!({})).await.0,
        StatusCode::NOT_FOUND
    );

    // One complete event, one reopen event.
    let (_, job) = srv.get("/jobs/hotel.1.ann", &ann).await;
    assert_eq!(job["status"], json!("incomplete"));
}

#[tokio::test]
async fn recommendations() {
    let srv = Server::start(models()).await;
    let ann = srv.seed().await;
    let (status, body) = srv
        .get("/jobs/hotel.0.ann/recommend?position=4&kind=similarity&k=2", &ann)
        .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let words: Vec<&str> = body["recommendations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["word"].as_str().unwrap())
        .collect();
    assert_eq!(words, ["love", "like"]);
    assert_eq!(body["recommendations"][0]["provider"], json!("similarity"));

    let (_, body) = srv.get("/jobs/hotel.0.ann/recommend?position=2&kind=lm", &ann).await;
    let recs = body["recommendations"].as_array().unwrap();
    // "and" is the only observed continuation of "husband" but is the current word.
    assert!(recs.iter().all(|r| r["word"] != json!("and")));
    let (_, body) = srv.get("/jobs/hotel.0.ann/recommend?position=4&kind=lm", &ann).await;
    let recs = body["recommendations"].as_array().unwrap();
    assert_eq!(recs[0]["word"], json!("love"));
    assert_eq!(recs[0]["provider"], json!("language_model"));
    assert!(recs.len() <= 10);

    assert_eq!(
        srv.get("/jobs/hotel.0.ann/recommend?position=99&kind=lm", &ann).await.0,
        StatusCode::UNPROCESSABLE_ENTITY
    );
    assert_eq!(
        srv.get("/jobs/hotel.0.ann/recommend?position=1&kind=psychic", &ann)
            .await
            .0,
        StatusCode::UNPROCESSABLE_ENTITY
    );
    assert_eq!(
        srv.get("/jobs/hotel.0.ann/recommend?kind=lm", &ann).await.0,
        StatusCode::UNPROCESSABLE_ENTITY
    );
}

#[tokio::test]
async fn missing_models_are_reported() {
    let srv = Server::start(ModelSet::default()).await;
    let ann = {
        srv.post(
            "/users",
            "root-token",
            json!({"id": "ann", "name": "Ann", "token": "ann-token"}),
        )
        .await;
        srv.post(
            "/tasks",
            "root-token",
            json!({"id": "t", "title": "t", "sentences": [ORIGINAL]}),
        )
        .await;
        srv.post("/tasks/t/assign", "root-token", json!({"users": ["ann"]}))
            .await;
        "ann-token"
    };
    let (status, _) = srv.get("/jobs/t.0.ann/recommend?position=1&kind=lm", ann).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
    let (_, job) = srv.get("/jobs/t.0.ann", ann).await;
    assert_eq!(job["salience"], Value::Null);
    let (_, body) = srv
        .post(
            "/jobs/t.0.ann/ops",
            ann,
            op(
                json!({"kind": "substitute", "position": 4, "text": "love"}),
                "typed",
                -1,
            ),
        )
        .await;
    assert_eq!(body["feedback"], json!({"ED": 1.0}));
}

#[tokio::test]
async fn concurrent_posts_with_one_parent_yield_one_revision() {
    let srv = Arc::new(Server::start(models()).await);
    let ann = srv.seed().await;
    let mut handles = Vec::new();
    for i in 0..8 {
        let srv = Arc::clone(&srv);
        let ann = ann.clone();
        handles.push(tokio::spawn(async move {
            let kind = json!({"kind": "insert", "position": 0, "text": format!("w{i}")});
            srv.post("/jobs/hotel.1.ann/ops", &ann, op(kind, "typed", -1)).await.0
        }));
    }
    let mut codes = Vec::new();
    for h in handles {
        codes.push(h.await.unwrap());
    }
    assert_eq!(codes.iter().filter(|c| **c == StatusCode::CREATED).count(), 1);
    assert_eq!(codes.iter().filter(|c| **c == StatusCode::CONFLICT).count(), 7);
    let (_, job) = srv.get("/jobs/hotel.1.ann", &ann).await;
    assert_eq!(job["last_index"], json!(0));
}

#[tokio::test]
async fn reads_are_repeatable() {
    let srv = Server::start(models()).await;
    let ann = srv.seed().await;
    srv.post(
        "/jobs/hotel.0.ann/ops",
        &ann,
        op(json!({"kind": "delete", "position": 5}), "typed", -1),
    )
    .await;
    let first = srv.get("/jobs/hotel.0.ann", &ann).await;
    let second = srv.get("/jobs/hotel.0.ann", &ann).await;
    assert_eq!(first, second);
    assert_eq!(srv.get("/health", &ann).await.1, json!({"status": "ok"}));
}
