//! Embedding and chat clients against a local stub server.

mod common;

use common::{chat_reply, embedding_reply, StubServer};
use lextrace::embeddings::{EmbeddingProvider, HttpProvider, HttpProviderConfig};
use lextrace::prompting::{ChatBackend, HttpChat, LlmConfig};
use lextrace::Error;

fn texts(n: usize) -> Vec<(String, String)> {
    (0..n).map(|i| (format!("R{i}"), format!("requirement number {i}"))).collect()
}

fn embed_config(url: &str) -> HttpProviderConfig {
    HttpProviderConfig {
        batch_size: 2,
        backoff_base_ms: 1,
        timeout_seconds: 5.0,
        ..HttpProviderConfig::new(url, "stub-encoder")
    }
}

fn chat_config(url: &str) -> LlmConfig {
    LlmConfig {
        endpoint_url: url.to_owned(),
        backoff_base_ms: 1,
        timeout_seconds: 5.0,
        ..LlmConfig::default()
    }
}

#[test]
fn embeddings_are_batched_and_keyed_by_id() {
    let server = StubServer::start(|_, body| (200, embedding_reply(body, 4)));
    let provider = HttpProvider::with_api_key(embed_config(&server.url), Some("k".into())).unwrap();
    let set = provider.embed(&texts(5)).unwrap();
    assert_eq!(set.len(), 5);
    assert_eq!(set.dim(), 4);
    let requests = server.requests();
    assert_eq!(requests.len(), 3);
    assert_eq!(requests[0].body["model"], "stub-encoder");
    assert_eq!(requests[0].body["input"][1], "requirement number 1");
    assert_eq!(requests[0].header("authorization"), Some("Bearer k"));
    // R2 is the first input of the second batch
    assert_eq!(set.get("R2").unwrap().values()[0], 1.0);
}

#[test]
fn server_errors_are_retried_until_success() {
    let ok = embedding_reply(&serde_json::json!({"input": ["a"]}), 3);
    let server = StubServer::scripted(vec![(500, "{}".into()), (500, "{}".into()), (200, ok)]);
    let provider = HttpProvider::with_api_key(embed_config(&server.url), None).unwrap();
    let set = provider.embed(&texts(1)).unwrap();
    assert_eq!(set.len(), 1);
    assert_eq!(server.requests().len(), 3);
}

#[test]
fn rate_limit_is_retried() {
    let ok = chat_reply("Trace links: [SEC]");
    let server = StubServer::scripted(vec![(429, "{\"error\":\"slow down\"}".into()), (200, ok)]);
    let chat = HttpChat::with_api_key(chat_config(&server.url), Some("k".into())).unwrap();
    assert_eq!(chat.complete("prompt").unwrap(), "Trace links: [SEC]");
    assert_eq!(server.requests().len(), 2);
}

#[test]
fn retries_are_bounded() {
    let server = StubServer::scripted(vec![(503, "{}".into())]);
    let config = HttpProviderConfig {
        max_retries: 2,
        ..embed_config(&server.url)
    };
    let err = HttpProvider::with_api_key(config, None).unwrap().embed(&texts(1)).unwrap_err();
    assert!(matches!(err, Error::Network { attempts: 3, .. }), "{err}");
    assert_eq!(server.requests().len(), 3);
}

#[test]
fn authentication_failure_is_not_retried() {
    let server = StubServer::scripted(vec![(401, "{}".into())]);
    let chat = HttpChat::with_api_key(chat_config(&server.url), Some("bad".into())).unwrap();
    assert!(matches!(chat.complete("p").unwrap_err(), Error::Auth { status: 401, .. }));
    assert_eq!(server.requests().len(), 1);
}

#[test]
fn ragged_dimensions_are_rejected() {
    let server = StubServer::start(|_, _| {
        let body = serde_json::json!({"data": [
            {"index": 0, "embedding": [1.0, 0.0, 0.0]},
            {"index": 1, "embedding": [1.0, 0.0]},
        ]});
        (200, body.to_string())
    });
    let err = HttpProvider::with_api_key(embed_config(&server.url), None)
        .unwrap()
        .embed(&texts(2))
        .unwrap_err();
    assert!(
        matches!(err, Error::DimensionMismatch { expected: 3, found: 2, .. }),
        "{err}"
    );
}

#[test]
fn missing_or_shuffled_indices_are_rejected() {
    let server = StubServer::start(|_, _| {
        let body = serde_json::json!({"data": [{"index": 1, "embedding": [1.0]}, {"index": 1, "embedding": [2.0]}]});
        (200, body.to_string())
    });
    let err = HttpProvider::with_api_key(embed_config(&server.url), None)
        .unwrap()
        .embed(&texts(2))
        .unwrap_err();
    assert!(matches!(err, Error::ResponseShape(_)), "{err}");
}

#[test]
fn chat_request_carries_the_fixed_sampling_settings() {
    let server = StubServer::start(|_, _| (200, chat_reply("no")));
    let chat = HttpChat::with_api_key(chat_config(&server.url), Some("k".into())).unwrap();
    chat.complete("Is there a link?").unwrap();
    let body = &server.requests()[0].body;
    assert_eq!(body["model"], "gpt-4o");
    assert_eq!(body["temperature"].as_f64(), Some(0.0));
    assert_eq!(body["seed"].as_i64(), Some(16));
    assert_eq!(body["max_tokens"].as_u64(), Some(2000));
    assert_eq!(body["top_p"].as_f64(), Some(1.0));
    assert_eq!(body["frequency_penalty"].as_f64(), Some(0.0));
    assert_eq!(body["presence_penalty"].as_f64(), Some(0.0));
    assert_eq!(body["messages"][0]["role"], "user");
    assert_eq!(body["messages"][0]["content"], "Is there a link?");
}

#[test]
fn malformed_chat_body_is_a_shape_error() {
    let server = StubServer::start(|_, _| (200, "{\"choices\": []}".into()));
    let chat = HttpChat::with_api_key(chat_config(&server.url), None).unwrap();
    assert!(matches!(chat.complete("p").unwrap_err(), Error::ResponseShape(_)));
}
