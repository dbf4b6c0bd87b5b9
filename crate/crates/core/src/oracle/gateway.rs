use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use super::{Oracle, OracleError, OracleRecord, OracleRequest, ReplayCache};

/// A backend plus an optional recorder. With a recorder attached, cached
/// keys are served locally and fresh responses are appended.
pub struct Gateway {
    backend: Box<dyn Oracle>,
    recorder: Option<Arc<ReplayCache>>,
    backend_calls: AtomicU64,
    cache_hits: AtomicU64,
}

impl Gateway {
    pub fn new(backend: impl Oracle + 'static) -> Self {
        Self {
            backend: Box::new(backend),
            recorder: None,
            backend_calls: AtomicU64::new(0),
            cache_hits: AtomicU64::new(0),
        }
    }

    pub fn recording(backend: impl Oracle + 'static, cache: Arc<ReplayCache>) -> Self {
        Self { recorder: Some(cache), ..Self::new(backend) }
    }

    pub fn recorder(&self) -> Option<&Arc<ReplayCache>> {
        self.recorder.as_ref()
    }

    /// Requests forwarded to the backend.
    pub fn backend_calls(&self) -> u64 {
        self.backend_calls.load(Ordering::Relaxed)
    }

    pub fn cache_hits(&self) -> u64 {
        self.cache_hits.load(Ordering::Relaxed)
    }
}

impl Oracle for Gateway {
    fn complete(&self, request: &OracleRequest) -> Result<String, OracleError> {
        if let Some(cache) = &self.recorder {
            if let Some(hit) = cache.get(&request.key()) {
                self.cache_hits.fetch_add(1, Ordering::Relaxed);
                return Ok(hit);
            }
        }
        self.backend_calls.fetch_add(1, Ordering::Relaxed);
        let response = self.backend.complete(request)?;
        if let Some(cache) = &self.recorder {
            cache.append(OracleRecord {
                kind: request.kind,
                digest: request.digest(),
                sample: request.sample_index,
                response: response.clone(),
            })?;
        }
        Ok(response)
    }
}
