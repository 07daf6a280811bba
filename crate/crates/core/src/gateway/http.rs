//! Generic HTTP chat-completion backend.

use std::time::Duration;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{Backend, BackendError, FinishReason, ImageRef, ModelCompletion, ModelRequest, Role, Usage};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpBackendConfig {
    /// Full URL of the chat-completions endpoint.
    pub endpoint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key: Option<String>,
    pub model: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    120
}

pub struct HttpBackend {
    config: HttpBackendConfig,
    client: reqwest::blocking::Client,
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpBackend").field("endpoint", &self.config.endpoint).field("model", &self.config.model).finish()
    }
}

impl HttpBackend {
    pub fn new(config: HttpBackendConfig) -> Result<Self, reqwest::Error> {
        let client = reqwest::blocking::Client::builder().timeout(Duration::from_secs(config.timeout_secs)).build()?;
        Ok(HttpBackend { config, client })
    }

    /// JSON body sent to the endpoint.
    pub fn wire_body(&self, request: &ModelRequest) -> Value {
        let messages: Vec<Value> = request
            .messages
            .iter()
            .map(|m| {
                let role = match m.role {
                    Role::System => "system",
                    Role::User => "user",
                    Role::Assistant => "assistant",
                };
                if m.images.is_empty() {
                    return json!({ "role": role, "content": m.text });
                }
                let mut parts = vec![json!({ "type": "text", "text": m.text })];
                parts.extend(m.images.iter().map(|img| {
                    let url = match img {
                        ImageRef::Inline { media_type, data } => {
                            format!("data:{media_type};base64,{}", STANDARD.encode(data))
                        }
                        ImageRef::Url { url } => url.clone(),
                    };
                    json!({ "type": "image_url", "image_url": { "url": url } })
                }));
                json!({ "role": role, "content": parts })
            })
            .collect();
        let p = &request.params;
        let mut body = json!({
            "model": self.config.model,
            "messages": messages,
            "max_tokens": p.max_tokens,
            "temperature": p.temperature,
            "top_p": p.top_p,
            "n": p.n,
            "frequency_penalty": p.frequency_penalty,
            "presence_penalty": p.presence_penalty,
            "stop": p.stop,
            "logprobs": p.logprobs,
        });
        if let Some(bias) = &p.logit_bias {
            body["logit_bias"] = json!(bias);
        }
        body
    }
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

pub(crate) fn parse_wire_response(body: &str) -> Result<ModelCompletion, BackendError> {
    let resp: WireResponse =
        serde_json::from_str(body).map_err(|e| BackendError::Rejected(format!("malformed response body: {e}")))?;
    let choice = resp.choices.into_iter().next().ok_or_else(|| BackendError::Rejected("response has no choices".into()))?;
    let usage = resp.usage.map(|u| Usage { prompt_tokens: u.prompt_tokens, completion_tokens: u.completion_tokens });
    Ok(ModelCompletion {
        text: choice.message.content.unwrap_or_default(),
        finish_reason: FinishReason::from_wire(choice.finish_reason.as_deref().unwrap_or("stop")),
        usage: usage.unwrap_or_default(),
    })
}

impl Backend for HttpBackend {
    fn send(&self, request: &ModelRequest) -> Result<ModelCompletion, BackendError> {
        let mut builder = self.client.post(&self.config.endpoint).json(&self.wire_body(request));
        if let Some(key) = &self.config.api_key {
            builder = builder.bearer_auth(key);
        }
        let resp = builder.send().map_err(|e| {
            if e.is_timeout() {
                BackendError::Timeout
            } else {
                BackendError::Transient(e.to_string())
            }
        })?;
        let status = resp.status();
        let body = resp.text().map_err(|e| BackendError::Transient(e.to_string()))?;
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(BackendError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(BackendError::Rejected(format!("HTTP {status}: {body}")));
        }
        parse_wire_response(&body)
    }
}

#[cfg(test)]
mod tests {
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    use super::*;
    use crate::gateway::{Gateway, GatewayError, Profile, RetryPolicy};

    fn backend(endpoint: String) -> HttpBackend {
        HttpBackend::new(HttpBackendConfig { endpoint, api_key: Some("tok".into()), model: "m".into(), timeout_secs: 5 })
            .unwrap()
    }

    #[test]
    fn wire_body_shape() {
        let b = backend("http://unused".into());
        let req = ModelRequest::new(Profile::Planner, "sys").user_with_images("look", vec![ImageRef::png(vec![1, 2])]);
        let body = b.wire_body(&req);
        assert_eq!(body["max_tokens"], 4096);
        assert_eq!(body["messages"][0]["content"], "sys");
        assert_eq!(body["messages"][1]["content"][0]["text"], "look");
        assert_eq!(body["messages"][1]["content"][1]["image_url"]["url"], "data:image/png;base64,AQI=");
    }

    #[test]
    fn parses_completion() {
        let c = parse_wire_response(
            r#"{"choices":[{"message":{"content":"hi"},"finish_reason":"length"}],"usage":{"prompt_tokens":3,"completion_tokens":1}}"#,
        )
        .unwrap();
        assert_eq!(c.text, "hi");
        assert_eq!(c.finish_reason, FinishReason::Length);
        assert_eq!(c.usage.prompt_tokens, 3);
        assert!(parse_wire_response(r#"{"choices":[]}"#).is_err());
    }

    /// Serves the given canned HTTP responses, one per connection, and
    /// returns the request bodies it saw.
    fn serve(responses: Vec<(u16, &'static str)>) -> (String, std::thread::JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
        let handle = std::thread::spawn(move || {
            let mut bodies = Vec::new();
            for (status, body) in responses {
                let (stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream);
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" {
                        break;
                    }
                    if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                bodies.push(String::from_utf8(buf).unwrap());
                let mut stream = reader.into_inner();
                write!(
                    stream,
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                )
                .unwrap();
            }
            bodies
        });
        (url, handle)
    }

    #[test]
    fn round_trip_over_loopback_with_retry() {
        let ok = r#"{"choices":[{"message":{"content":"fine"},"finish_reason":"stop"}]}"#;
        let (url, server) = serve(vec![(503, "{}"), (200, ok)]);
        let gw = Gateway::new(std::sync::Arc::new(backend(url))).with_retry(RetryPolicy::immediate());
        let req = ModelRequest::new(Profile::Tutor, "sys").user("question");
        assert_eq!(gw.complete(&req).unwrap().text, "fine");
        let bodies = server.join().unwrap();
        assert_eq!(bodies.len(), 2);
        let sent: Value = serde_json::from_str(&bodies[1]).unwrap();
        assert_eq!(sent["temperature"], 0.95);
        assert_eq!(sent["model"], "m");
    }

    #[test]
    fn client_error_is_rejected() {
        let (url, server) = serve(vec![(400, r#"{"error":"bad"}"#)]);
        let gw = Gateway::new(std::sync::Arc::new(backend(url))).with_retry(RetryPolicy::immediate());
        let err = gw.complete(&ModelRequest::new(Profile::Tutor, "s").user("u")).unwrap_err();
        assert!(matches!(err, GatewayError::BackendRejected(_)), "{err:?}");
        server.join().unwrap();
    }
}
