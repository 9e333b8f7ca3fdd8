use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

use super::{ConfigError, Gateway, GatewayConfig, GatewayError, GatewayErrorKind, PromptBundle};

/// Counting semaphore bounding concurrent requests.
struct InFlight {
    available: Mutex<usize>,
    freed: Condvar,
}

impl InFlight {
    fn acquire(&self) -> InFlightGuard<'_> {
        let mut n = self.available.lock().unwrap_or_else(|e| e.into_inner());
        while *n == 0 {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n -= 1;
        InFlightGuard(self)
    }
}

struct InFlightGuard<'a>(&'a InFlight);

impl Drop for InFlightGuard<'_> {
    fn drop(&mut self) {
        *self.0.available.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.freed.notify_one();
    }
}

/// OpenAI-compatible chat-completions client with retry and backoff.
pub struct HttpGateway {
    config: GatewayConfig,
    client: reqwest::blocking::Client,
    in_flight: InFlight,
}

impl HttpGateway {
    pub fn new(config: GatewayConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| ConfigError::Client(e.to_string()))?;
        Ok(HttpGateway {
            in_flight: InFlight {
                available: Mutex::new(config.in_flight_limit),
                freed: Condvar::new(),
            },
            config,
            client,
        })
    }

    fn request_body(&self, bundle: &PromptBundle) -> Value {
        let mut messages = vec![json!({"role": "system", "content": bundle.system})];
        for (input, output) in &bundle.fewshots {
            messages.push(json!({"role": "user", "content": input}));
            messages.push(json!({"role": "assistant", "content": output}));
        }
        messages.push(json!({"role": "user", "content": bundle.user}));
        json!({
            "model": self.config.model_name,
            "messages": messages,
            "temperature": self.config.temperature,
        })
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'))
    }

    fn attempt(&self, body: &Value) -> Result<String, GatewayError> {
        let _slot = self.in_flight.acquire();
        let mut req = self.client.post(self.endpoint()).json(body);
        if let Some(key) = &self.config.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| {
            let kind = if e.is_timeout() {
                GatewayErrorKind::Timeout
            } else {
                GatewayErrorKind::Transport
            };
            GatewayError::new(kind, e.to_string())
        })?;
        let status = resp.status();
        let text = resp.text().map_err(|e| {
            let kind = if e.is_timeout() {
                GatewayErrorKind::Timeout
            } else {
                GatewayErrorKind::Transport
            };
            GatewayError::new(kind, e.to_string())
        })?;
        if !status.is_success() {
            return Err(GatewayError::http_status(status.as_u16(), text));
        }
        parse_completion(&text)
    }
}

/// Extracts `choices[0].message.content` from a chat-completions response.
pub(crate) fn parse_completion(text: &str) -> Result<String, GatewayError> {
    let malformed = |msg: &str| GatewayError::new(GatewayErrorKind::MalformedResponse, msg);
    let value: Value = serde_json::from_str(text).map_err(|e| malformed(&e.to_string()))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| malformed("missing choices[0].message.content"))
}

impl Gateway for HttpGateway {
    fn complete(&self, bundle: &PromptBundle) -> Result<String, GatewayError> {
        let body = self.request_body(bundle);
        let mut attempt = 0;
        loop {
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err(e) if e.is_retryable() && attempt < self.config.max_retries => {
                    let delay = self.config.backoff_ms.saturating_mul(1 << attempt.min(16));
                    thread::sleep(Duration::from_millis(delay));
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn completion_parsing() {
        let ok = r#"{"choices":[{"message":{"role":"assistant","content":"hi"}}]}"#;
        assert_eq!(parse_completion(ok).unwrap(), "hi");
        let err = parse_completion("<html>").unwrap_err();
        assert_eq!(err.kind, GatewayErrorKind::MalformedResponse);
        let err = parse_completion(r#"{"choices":[]}"#).unwrap_err();
        assert_eq!(err.kind, GatewayErrorKind::MalformedResponse);
    }
}
