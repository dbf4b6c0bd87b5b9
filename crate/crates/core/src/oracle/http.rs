//! Chat-completion client over plain HTTP.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde_json::{json, Value};

use super::{Oracle, OracleError, OracleRequest};

pub const URL_VAR: &str = "SYMBOLACT_ORACLE_URL";
pub const KEY_VAR: &str = "SYMBOLACT_ORACLE_KEY";

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    pub url: String,
    pub api_key: Option<String>,
    pub model: String,
    /// Extra attempts after a transient failure.
    pub max_retries: u32,
    pub backoff: Duration,
    pub max_in_flight: usize,
    pub timeout: Duration,
}

impl HttpConfig {
    pub fn new(url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            api_key: None,
            model: model.into(),
            max_retries: 3,
            backoff: Duration::from_millis(250),
            max_in_flight: 4,
            timeout: Duration::from_secs(60),
        }
    }

    /// Endpoint and bearer token from the environment; `url` overrides the
    /// endpoint variable when given.
    pub fn from_env(url: Option<String>, model: impl Into<String>) -> Result<Self, OracleError> {
        let url = url
            .or_else(|| std::env::var(URL_VAR).ok())
            .ok_or_else(|| OracleError::Transport(format!("no endpoint configured; set {URL_VAR}")))?;
        let mut config = Self::new(url, model);
        config.api_key = std::env::var(KEY_VAR).ok().filter(|k| !k.is_empty());
        Ok(config)
    }
}

/// Counting semaphore bounding concurrent requests.
struct Limiter {
    in_flight: Mutex<usize>,
    released: Condvar,
    limit: usize,
}

impl Limiter {
    fn acquire(&self) -> LimiterGuard<'_> {
        let mut count = self.in_flight.lock().expect("limiter lock");
        while *count >= self.limit {
            count = self.released.wait(count).expect("limiter lock");
        }
        *count += 1;
        LimiterGuard(self)
    }
}

struct LimiterGuard<'a>(&'a Limiter);

impl Drop for LimiterGuard<'_> {
    fn drop(&mut self) {
        *self.0.in_flight.lock().expect("limiter lock") -= 1;
        self.0.released.notify_one();
    }
}

pub struct HttpOracle {
    config: HttpConfig,
    agent: ureq::Agent,
    limiter: Limiter,
}

impl HttpOracle {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        let limiter =
            Limiter { in_flight: Mutex::new(0), released: Condvar::new(), limit: config.max_in_flight.max(1) };
        Self { config, agent, limiter }
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    fn body(&self, request: &OracleRequest) -> Value {
        json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": request.role_preamble},
                {"role": "user", "content": request.rendered_prompt},
            ],
            "temperature": request.decode.temperature,
            "max_tokens": request.decode.max_tokens,
            "n": 1,
        })
    }

    /// `Ok(text)`, or `Err((retryable, message))`.
    fn attempt(&self, body: &Value) -> Result<String, (bool, String)> {
        let _slot = self.limiter.acquire();
        let mut call = self.agent.post(&self.config.url);
        if let Some(key) = &self.config.api_key {
            call = call.set("Authorization", &format!("Bearer {key}"));
        }
        let response = match call.send_json(body.clone()) {
            Ok(response) => response,
            Err(ureq::Error::Status(code, response)) => {
                let retryable = code == 429 || code >= 500;
                let detail = response.into_string().unwrap_or_default();
                return Err((retryable, format!("status {code}: {detail}")));
            }
            Err(e) => return Err((true, e.to_string())),
        };
        let value: Value = response.into_json().map_err(|e| (true, e.to_string()))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| (false, format!("no message content in {value}")))
    }
}

impl Oracle for HttpOracle {
    fn complete(&self, request: &OracleRequest) -> Result<String, OracleError> {
        let body = self.body(request);
        let mut attempt = 0;
        loop {
            match self.attempt(&body) {
                Ok(text) => return Ok(text),
                Err((true, _)) if attempt < self.config.max_retries => {
                    std::thread::sleep(self.config.backoff * 2u32.pow(attempt));
                    attempt += 1;
                }
                Err((_, message)) => {
                    return Err(OracleError::Transport(format!("{message} after {} attempt(s)", attempt + 1)))
                }
            }
        }
    }
}
