//! Remote chat provider against a mock endpoint: request shape, bearer
//! credential, response parsing, and retry on transient server errors.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use evalbox::problem::{Paradigm, Prompt};
use evalbox::provider::{ProviderConfig, SamplingParams};

#[derive(Clone)]
struct MockState {
    hits: Arc<AtomicUsize>,
    fail_first: usize,
}

async fn chat_handler(
    State(state): State<MockState>,
    headers: HeaderMap,
    Json(body): Json<serde_json::Value>,
) -> (StatusCode, Json<serde_json::Value>) {
    let hit = state.hits.fetch_add(1, Ordering::SeqCst);
    if hit < state.fail_first {
        return (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(serde_json::json!({"error": "transient"})),
        );
    }

    // the provider must send a bearer credential and the chat fields
    let auth = headers
        .get("authorization")
        .and_then(|v| v.to_str().ok())
        .unwrap_or_default();
    assert_eq!(auth, "Bearer test-token-123");
    assert_eq!(body["model"], "demo-model");
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["max_tokens"], 2048);
    let messages = body["messages"].as_array().unwrap();
    assert_eq!(messages.len(), 1);
    assert_eq!(messages[0]["role"], "user");
    let question = messages[0]["content"].as_str().unwrap().to_string();

    (
        StatusCode::OK,
        Json(serde_json::json!({
            "choices": [{
                "message": {
                    "role": "assistant",
                    "content": format!("```python\n# for: {question}\nprint(1)\n```")
                }
            }]
        })),
    )
}

fn spawn_mock(fail_first: usize) -> (std::net::SocketAddr, Arc<AtomicUsize>) {
    let hits = Arc::new(AtomicUsize::new(0));
    let state = MockState {
        hits: Arc::clone(&hits),
        fail_first,
    };
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let runtime = tokio::runtime::Builder::new_current_thread()
            .enable_all()
            .build()
            .unwrap();
        runtime.block_on(async move {
            let app = Router::new()
                .route("/v1/chat/completions", post(chat_handler))
                .with_state(state);
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            axum::serve(listener, app).await.unwrap();
        });
    });
    (rx.recv().unwrap(), hits)
}

fn prompt(text: &str) -> Prompt {
    Prompt {
        system_text: None,
        user_text: text.to_string(),
        paradigm: Paradigm::ZeroShot,
    }
}

#[test]
fn remote_chat_round_trip() {
    let (addr, hits) = spawn_mock(0);
    std::env::set_var("REMOTE_TEST_KEY_A", "test-token-123");
    let mut config = ProviderConfig::remote(
        format!("http://{addr}/v1/chat/completions"),
        "REMOTE_TEST_KEY_A",
    );
    config.model = Some("demo-model".to_string());
    let provider = config.build(None).unwrap();

    let response = provider
        .complete(&prompt("double the input"), &SamplingParams::default())
        .unwrap();
    assert!(response.contains("print(1)"));
    assert!(response.contains("double the input"));
    assert_eq!(hits.load(Ordering::SeqCst), 1);
}

#[test]
fn remote_chat_retries_transient_server_errors() {
    let (addr, hits) = spawn_mock(2);
    std::env::set_var("REMOTE_TEST_KEY_B", "test-token-123");
    let mut config = ProviderConfig::remote(
        format!("http://{addr}/v1/chat/completions"),
        "REMOTE_TEST_KEY_B",
    );
    config.model = Some("demo-model".to_string());
    let provider = config.build(None).unwrap();

    let response = provider
        .complete(&prompt("retry me"), &SamplingParams::default())
        .unwrap();
    assert!(response.contains("retry me"));
    // two 500s then a success
    assert_eq!(hits.load(Ordering::SeqCst), 3);
}

#[test]
fn remote_chat_gives_up_after_bounded_retries() {
    let (addr, hits) = spawn_mock(usize::MAX);
    std::env::set_var("REMOTE_TEST_KEY_C", "test-token-123");
    let mut config = ProviderConfig::remote(
        format!("http://{addr}/v1/chat/completions"),
        "REMOTE_TEST_KEY_C",
    );
    config.model = Some("demo-model".to_string());
    let provider = config.build(None).unwrap();

    let err = provider
        .complete(&prompt("hopeless"), &SamplingParams::default())
        .expect_err("must fail after retries");
    assert!(matches!(err, evalbox::Error::Provider(_)));
    assert_eq!(hits.load(Ordering::SeqCst), 3, "bounded retry count");
}
