use std::collections::HashMap;

use super::{prompt_digest, DecodeParams, Oracle, OracleError, OracleRequest, PromptKind};

/// Outcome of a query plus the number of oracle calls it consumed,
/// successful or not.
#[derive(Debug)]
pub struct Attempted<T> {
    pub result: Result<T, OracleError>,
    pub calls: u32,
}

/// Sample-index allocation and bounded resampling over one oracle. Each
/// repetition of the same (kind, prompt) pair receives the next index, so
/// branches, retries, and repeated samples never collide.
pub struct OracleSession<'a> {
    oracle: &'a dyn Oracle,
    decode: DecodeParams,
    /// Extra attempts after a malformed response.
    pub max_resamples: u32,
    counters: HashMap<(PromptKind, String), u32>,
}

impl<'a> OracleSession<'a> {
    pub fn new(oracle: &'a dyn Oracle, decode: DecodeParams) -> Self {
        Self { oracle, decode, max_resamples: 3, counters: HashMap::new() }
    }

    pub fn next_request(&mut self, kind: PromptKind, prompt: &str) -> Result<OracleRequest, OracleError> {
        let counter = self.counters.entry((kind, prompt_digest(prompt))).or_insert(0);
        let sample = *counter;
        *counter += 1;
        Ok(OracleRequest::new(kind, prompt, sample)?.with_decode(self.decode))
    }

    /// One logical query: resamples while the parser reports a malformed
    /// response, up to `max_resamples` extra calls. Fatal errors stop at once.
    pub fn query<T>(
        &mut self,
        kind: PromptKind,
        prompt: &str,
        mut parse: impl FnMut(&str) -> Result<T, OracleError>,
    ) -> Attempted<T> {
        let mut calls = 0;
        loop {
            let request = match self.next_request(kind, prompt) {
                Ok(request) => request,
                Err(e) => return Attempted { result: Err(e), calls },
            };
            calls += 1;
            let result = self.oracle.complete(&request).and_then(|raw| parse(&raw));
            match result {
                Err(e) if e.is_retryable() && calls <= self.max_resamples => continue,
                result => return Attempted { result, calls },
            }
        }
    }
}
