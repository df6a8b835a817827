//! HTTP chat and embedding backends.
//!
//! Chat: `POST {"system", "user", "temperature", "top_p", "max_tokens"?}`
//! answered by `{"text"}`. Embeddings: `POST {"texts": [..]}` answered by
//! `{"embeddings": [[..], ..]}`. Both retry transport errors, 429 and 5xx.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use klamp_core::embed::{Embedder, Embedding};
use klamp_core::suggest::{ChatBackend, ChatRequest};
use klamp_core::Error as CoreError;
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::{Deserialize, Serialize};

use crate::config::BackendConfig;

const BACKOFF_BASE: Duration = Duration::from_millis(200);
const BACKOFF_CAP: Duration = Duration::from_secs(5);

/// Counting gate bounding concurrent requests.
#[derive(Debug)]
pub struct InFlight {
    free: Mutex<usize>,
    cv: Condvar,
}

pub struct Permit<'a>(&'a InFlight);

impl InFlight {
    pub fn new(limit: usize) -> Self {
        InFlight {
            free: Mutex::new(limit.max(1)),
            cv: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().expect("in-flight lock");
        while *free == 0 {
            free = self.cv.wait(free).expect("in-flight lock");
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().expect("in-flight lock") += 1;
        self.0.cv.notify_one();
    }
}

#[derive(Debug, Clone)]
pub struct RemoteOptions {
    pub timeout: Duration,
    pub max_retries: u32,
    pub max_in_flight: usize,
}

impl From<&BackendConfig> for RemoteOptions {
    fn from(b: &BackendConfig) -> Self {
        RemoteOptions {
            timeout: Duration::from_secs(b.timeout_seconds),
            max_retries: b.max_retries,
            max_in_flight: b.max_in_flight,
        }
    }
}

struct Http {
    client: Client,
    endpoint: String,
    opts: RemoteOptions,
    gate: InFlight,
}

enum Attempt<T> {
    Done(T),
    Retry {
        message: String,
        retry_after: Option<u64>,
    },
    Fatal(String),
}

impl Http {
    fn new(endpoint: &str, opts: RemoteOptions) -> klamp_core::Result<Self> {
        let client = Client::builder()
            .timeout(opts.timeout)
            .build()
            .map_err(|e| unavailable(e.to_string(), 0, None))?;
        Ok(Http {
            client,
            endpoint: endpoint.to_string(),
            gate: InFlight::new(opts.max_in_flight),
            opts,
        })
    }

    fn post<B: Serialize, R: for<'de> Deserialize<'de>>(&self, body: &B) -> klamp_core::Result<R> {
        let _permit = self.gate.acquire();
        let attempts = self.opts.max_retries + 1;
        let mut last = (String::new(), None);
        for attempt in 0..attempts {
            if attempt > 0 {
                let wait = last.1.map(Duration::from_secs).unwrap_or_else(|| {
                    BACKOFF_BASE
                        .saturating_mul(1 << (attempt - 1).min(10))
                        .min(BACKOFF_CAP)
                });
                std::thread::sleep(wait.min(BACKOFF_CAP));
            }
            match self.try_post(body) {
                Attempt::Done(v) => return Ok(v),
                Attempt::Fatal(message) => return Err(unavailable(message, attempt + 1, None)),
                Attempt::Retry {
                    message,
                    retry_after,
                } => last = (message, retry_after),
            }
        }
        Err(unavailable(last.0, attempts, last.1))
    }

    fn try_post<B: Serialize, R: for<'de> Deserialize<'de>>(&self, body: &B) -> Attempt<R> {
        let resp = match self.client.post(&self.endpoint).json(body).send() {
            Ok(r) => r,
            Err(e) => {
                return Attempt::Retry {
                    message: e.to_string(),
                    retry_after: None,
                }
            }
        };
        let status = resp.status();
        if status == StatusCode::TOO_MANY_REQUESTS || status.is_server_error() {
            let retry_after = resp
                .headers()
                .get(reqwest::header::RETRY_AFTER)
                .and_then(|v| v.to_str().ok())
                .and_then(|v| v.trim().parse().ok());
            return Attempt::Retry {
                message: format!("{} returned {status}", self.endpoint),
                retry_after,
            };
        }
        if !status.is_success() {
            return Attempt::Fatal(format!("{} returned {status}", self.endpoint));
        }
        match resp.json::<R>() {
            Ok(v) => Attempt::Done(v),
            Err(e) => Attempt::Fatal(format!("bad response body from {}: {e}", self.endpoint)),
        }
    }
}

fn unavailable(message: String, attempts: u32, retry_after: Option<u64>) -> CoreError {
    CoreError::BackendUnavailable {
        message,
        attempts,
        retry_after,
    }
}

pub struct RemoteChat {
    http: Http,
}

#[derive(Deserialize)]
struct ChatResponse {
    text: String,
}

impl RemoteChat {
    pub fn new(endpoint: &str, opts: RemoteOptions) -> klamp_core::Result<Self> {
        Ok(RemoteChat {
            http: Http::new(endpoint, opts)?,
        })
    }
}

impl ChatBackend for RemoteChat {
    fn complete(&self, request: &ChatRequest) -> klamp_core::Result<String> {
        self.http.post::<_, ChatResponse>(request).map(|r| r.text)
    }
}

pub struct RemoteEmbedder {
    http: Http,
    dim: usize,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
}

impl RemoteEmbedder {
    /// `dim` is the expected vector length; responses of another length are
    /// rejected.
    pub fn new(endpoint: &str, dim: usize, opts: RemoteOptions) -> klamp_core::Result<Self> {
        Ok(RemoteEmbedder {
            http: Http::new(endpoint, opts)?,
            dim,
        })
    }
}

impl Embedder for RemoteEmbedder {
    fn embed(&self, text: &str) -> klamp_core::Result<Embedding> {
        Ok(self.embed_batch(&[text])?.remove(0))
    }

    fn embed_batch(&self, texts: &[&str]) -> klamp_core::Result<Vec<Embedding>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let resp: EmbedResponse = self.http.post(&EmbedRequest { texts })?;
        if resp.embeddings.len() != texts.len() {
            return Err(CoreError::InvalidInput(format!(
                "embedding service returned {} vectors for {} texts",
                resp.embeddings.len(),
                texts.len()
            )));
        }
        resp.embeddings
            .into_iter()
            .map(|values| {
                if values.len() != self.dim || values.iter().any(|v| !v.is_finite()) {
                    return Err(CoreError::InvalidInput(format!(
                        "embedding service returned a bad vector of length {}",
                        values.len()
                    )));
                }
                Ok(Embedding { values }.normalized())
            })
            .collect()
    }
}
