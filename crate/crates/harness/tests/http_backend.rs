use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::time::Duration;

use quadrank_harness::backend::AdapterConfig;
use quadrank_harness::{complete, Backend, BackendError, Backoff, CompletionRequest, GenerationParams, HttpBackend};

/// Serve `responses` in order, one per connection; returns the request bodies.
fn serve(responses: Vec<(u16, String)>) -> (String, std::thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat", listener.local_addr().unwrap());
    let handle = std::thread::spawn(move || {
        let mut bodies = Vec::new();
        for (status, body) in responses {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut len = 0usize;
            let mut auth = String::new();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let lower = line.to_ascii_lowercase();
                if let Some(v) = lower.strip_prefix("content-length:") {
                    len = v.trim().parse().unwrap();
                }
                if lower.starts_with("authorization:") {
                    auth = line.trim().to_string();
                }
                if line == "\r\n" || line.is_empty() {
                    break;
                }
            }
            let mut buf = vec![0; len];
            reader.read_exact(&mut buf).unwrap();
            bodies.push(format!("{auth}|{}", String::from_utf8(buf).unwrap()));
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
        bodies
    });
    (url, handle)
}

fn config(url: &str, auth_env: Option<&str>) -> AdapterConfig {
    serde_json::from_value(serde_json::json!({
        "model": "local-test",
        "endpoint": url,
        "auth_env": auth_env,
        "body": {"model": "local-test", "messages": [{"role": "user", "content": ""}]},
        "prompt_path": "/messages/0/content",
        "temperature_path": "/temperature",
        "max_tokens_path": "/max_tokens",
        "response_path": "/choices/0/message/content",
        "usage_path": "/usage/total_tokens"
    }))
    .unwrap()
}

fn fast() -> Backoff {
    Backoff { base: Duration::from_millis(1), max: Duration::from_millis(2) }
}

#[test]
fn posts_prompt_and_reads_answer_after_rate_limit() {
    let ok = r#"{"choices":[{"message":{"content":"Ranking: Argument 1"}}],"usage":{"total_tokens":12}}"#;
    let (url, server) = serve(vec![(429, "{}".into()), (200, ok.into())]);
    std::env::set_var("QUADRANK_HTTP_TEST_KEY", "sekrit");
    let params = GenerationParams { retry_limit: 2, ..GenerationParams::default() };
    let backend = HttpBackend::new(config(&url, Some("QUADRANK_HTTP_TEST_KEY")), &params).unwrap();
    let c = complete(&backend, &CompletionRequest::new("rank these", &params, 0), &params, fast()).unwrap();
    assert_eq!(c.text, "Ranking: Argument 1");
    assert_eq!(c.token_usage, Some(12));
    assert_eq!(backend.model_id(), "local-test");
    let bodies = server.join().unwrap();
    assert_eq!(bodies.len(), 2);
    let (auth, body) = bodies[1].split_once('|').unwrap();
    assert_eq!(auth, "authorization: Bearer sekrit");
    let json: serde_json::Value = serde_json::from_str(body).unwrap();
    assert_eq!(json["messages"][0]["content"], "rank these");
    assert_eq!(json["temperature"], 0.7);
}

#[test]
fn persistent_rate_limit_is_reported() {
    let (url, server) = serve(vec![(429, "{}".into()), (429, "{}".into())]);
    let params = GenerationParams { retry_limit: 1, ..GenerationParams::default() };
    let backend = HttpBackend::new(config(&url, None), &params).unwrap();
    let err = complete(&backend, &CompletionRequest::new("x", &params, 0), &params, fast()).unwrap_err();
    assert!(matches!(err, BackendError::RateLimited { attempts: 2 }));
    server.join().unwrap();
}

#[test]
fn missing_answer_field_is_a_bad_response() {
    let (url, server) = serve(vec![(200, r#"{"choices":[]}"#.into())]);
    let params = GenerationParams { retry_limit: 0, ..GenerationParams::default() };
    let backend = HttpBackend::new(config(&url, None), &params).unwrap();
    let err = complete(&backend, &CompletionRequest::new("x", &params, 0), &params, fast()).unwrap_err();
    assert!(matches!(err, BackendError::BadResponse(_)));
    server.join().unwrap();
}

#[test]
fn unreachable_endpoint_without_retries() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let params = GenerationParams { retry_limit: 0, ..GenerationParams::default() };
    let backend = HttpBackend::new(config(&format!("http://127.0.0.1:{port}/x"), None), &params).unwrap();
    let err = complete(&backend, &CompletionRequest::new("x", &params, 0), &params, fast()).unwrap_err();
    assert!(matches!(err, BackendError::Transport(_)), "{err:?}");
}

#[test]
fn slow_server_times_out() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/x", listener.local_addr().unwrap());
    let hold = std::thread::spawn(move || {
        let (s, _) = listener.accept().unwrap();
        std::thread::sleep(Duration::from_millis(800));
        drop(s);
    });
    let params = GenerationParams {
        retry_limit: 0,
        request_timeout: Duration::from_millis(200),
        ..GenerationParams::default()
    };
    let backend = HttpBackend::new(config(&url, None), &params).unwrap();
    let err = complete(&backend, &CompletionRequest::new("x", &params, 0), &params, fast()).unwrap_err();
    assert!(matches!(err, BackendError::TimeoutExceeded(_)), "{err:?}");
    hold.join().unwrap();
}

/// Set QUADRANK_LIVE_CONFIG to an adapter config file to run against a real
/// endpoint.
#[test]
#[ignore = "needs a live endpoint"]
fn live_smoke() {
    let path = std::env::var("QUADRANK_LIVE_CONFIG").expect("QUADRANK_LIVE_CONFIG");
    let params = GenerationParams::default();
    let backend = HttpBackend::new(AdapterConfig::load(path.as_ref()).unwrap(), &params).unwrap();
    let req = CompletionRequest::new("Reply with the single word: ready", &params, 0);
    let c = complete(&backend, &req, &params, Backoff::default()).unwrap();
    assert!(!c.text.trim().is_empty());
    assert!(c.latency <= params.request_timeout);
}

#[test]
fn bundled_adapter_configs_load_and_render() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/backends");
    let params = GenerationParams::default();
    for name in ["openai-chat.json", "anthropic-messages.json"] {
        let config = AdapterConfig::load(&dir.join(name)).unwrap();
        let body = config.render_body(&CompletionRequest::new("rank these", &params, 0)).unwrap();
        assert_eq!(body["messages"][0]["content"], "rank these", "{name}");
        assert_eq!(body["temperature"], 0.7, "{name}");
        assert_eq!(body["max_tokens"], 4096, "{name}");
    }
}
