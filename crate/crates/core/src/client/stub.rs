//! In-process clients for tests and offline runs.

use std::collections::VecDeque;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use super::{ChatClient, ChatRequest, ClientError};

/// Answers each request with a closure of the request.
pub struct FnClient<F>(pub F);

impl<F> ChatClient for FnClient<F>
where
    F: Fn(&ChatRequest) -> Result<String, ClientError> + Send + Sync,
{
    fn chat(&self, request: &ChatRequest) -> Result<String, ClientError> {
        (self.0)(request)
    }
}

/// Pops canned responses in call order; fails with `ModelUnavailable` once
/// the script runs out.
pub struct ScriptedClient {
    script: Mutex<VecDeque<Result<String, ClientError>>>,
    seen: Mutex<Vec<ChatRequest>>,
}

impl ScriptedClient {
    pub fn new<I, S>(responses: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::from_results(responses.into_iter().map(|s| Ok(s.into())))
    }

    pub fn from_results(results: impl IntoIterator<Item = Result<String, ClientError>>) -> Self {
        ScriptedClient { script: Mutex::new(results.into_iter().collect()), seen: Mutex::new(Vec::new()) }
    }

    pub fn requests(&self) -> Vec<ChatRequest> {
        self.seen.lock().unwrap().clone()
    }

    pub fn remaining(&self) -> usize {
        self.script.lock().unwrap().len()
    }
}

impl ChatClient for ScriptedClient {
    fn chat(&self, request: &ChatRequest) -> Result<String, ClientError> {
        self.seen.lock().unwrap().push(request.clone());
        self.script.lock().unwrap().pop_front().unwrap_or_else(|| {
            Err(ClientError::ModelUnavailable { attempts: 1, last: "script exhausted".into() })
        })
    }
}

/// Wraps a responder and records call count and peak concurrency.
pub struct InstrumentedClient<F> {
    respond: F,
    delay: Duration,
    calls: AtomicUsize,
    current: AtomicUsize,
    peak: AtomicUsize,
}

impl<F> InstrumentedClient<F>
where
    F: Fn(&ChatRequest) -> Result<String, ClientError> + Send + Sync,
{
    pub fn new(respond: F) -> Self {
        InstrumentedClient {
            respond,
            delay: Duration::ZERO,
            calls: AtomicUsize::new(0),
            current: AtomicUsize::new(0),
            peak: AtomicUsize::new(0),
        }
    }

    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn max_in_flight(&self) -> usize {
        self.peak.load(Ordering::SeqCst)
    }
}

impl<F> ChatClient for InstrumentedClient<F>
where
    F: Fn(&ChatRequest) -> Result<String, ClientError> + Send + Sync,
{
    fn chat(&self, request: &ChatRequest) -> Result<String, ClientError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let now = self.current.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
        if !self.delay.is_zero() {
            thread::sleep(self.delay);
        }
        let out = (self.respond)(request);
        self.current.fetch_sub(1, Ordering::SeqCst);
        out
    }
}
