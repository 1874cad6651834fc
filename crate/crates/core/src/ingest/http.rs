use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};

/// Pacing and retry policy for outbound requests.
#[derive(Debug, Clone)]
pub struct HttpPolicy {
    /// Minimum spacing between two requests to the same host.
    pub min_interval: Duration,
    /// Retries after the first attempt.
    pub max_retries: u32,
    /// First backoff delay; doubles after every failed attempt.
    pub base_backoff: Duration,
    pub timeout: Duration,
}

impl Default for HttpPolicy {
    fn default() -> Self {
        HttpPolicy {
            min_interval: Duration::from_secs(1),
            max_retries: 5,
            base_backoff: Duration::from_millis(500),
            timeout: Duration::from_secs(30),
        }
    }
}

impl HttpPolicy {
    /// No pacing and no backoff sleeps; for local mock servers.
    pub fn immediate() -> Self {
        HttpPolicy {
            min_interval: Duration::ZERO,
            base_backoff: Duration::ZERO,
            ..HttpPolicy::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct Response {
    pub status: u16,
    pub body: String,
}

/// What the caller wants done with a response.
pub(crate) enum Verdict<T> {
    Accept(T),
    Retry(String),
    Fail(Error),
}

/// Blocking HTTP client with per-host pacing and exponential backoff on
/// 429/5xx responses and transport failures.
pub struct HttpClient {
    agent: ureq::Agent,
    policy: HttpPolicy,
    next_slot: Mutex<HashMap<String, Instant>>,
    requests: AtomicUsize,
}

impl HttpClient {
    pub fn new(policy: HttpPolicy) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(policy.timeout)
            .user_agent(concat!("sentiforge/", env!("CARGO_PKG_VERSION")))
            .build();
        HttpClient {
            agent,
            policy,
            next_slot: Mutex::new(HashMap::new()),
            requests: AtomicUsize::new(0),
        }
    }

    pub fn policy(&self) -> &HttpPolicy {
        &self.policy
    }

    /// Number of requests actually sent, retries included.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }

    /// GET that retries on 429/5xx and network errors; other statuses are returned.
    pub fn get(&self, url: &str) -> Result<Response> {
        self.get_with(url, |resp| {
            if resp.status == 429 || resp.status >= 500 {
                Verdict::Retry(format!("HTTP {}", resp.status))
            } else {
                Verdict::Accept(resp)
            }
        })
    }

    pub(crate) fn get_with<T>(
        &self,
        url: &str,
        mut judge: impl FnMut(Response) -> Verdict<T>,
    ) -> Result<T> {
        let attempts = self.policy.max_retries + 1;
        let mut reason = String::new();
        for attempt in 0..attempts {
            if attempt > 0 {
                let backoff = self.policy.base_backoff * 2u32.saturating_pow(attempt - 1);
                std::thread::sleep(backoff);
            }
            self.pace(url);
            self.requests.fetch_add(1, Ordering::Relaxed);
            let resp = match self.agent.get(url).call() {
                Ok(r) => into_response(r),
                Err(ureq::Error::Status(_, r)) => into_response(r),
                Err(ureq::Error::Transport(t)) => {
                    reason = t.to_string();
                    log::debug!("GET {url} attempt {} failed: {reason}", attempt + 1);
                    continue;
                }
            };
            match judge(resp) {
                Verdict::Accept(v) => return Ok(v),
                Verdict::Fail(e) => return Err(e),
                Verdict::Retry(why) => {
                    log::debug!("GET {url} attempt {} rejected: {why}", attempt + 1);
                    reason = why;
                }
            }
        }
        Err(Error::Retryable {
            url: url.to_string(),
            attempts,
            reason,
        })
    }

    /// Reserves the next send slot for the URL's host and sleeps until it opens.
    fn pace(&self, url: &str) {
        if self.policy.min_interval.is_zero() {
            return;
        }
        let host = host_of(url).to_string();
        let wait_until = {
            let mut slots = self.next_slot.lock().expect("pacing table poisoned");
            let now = Instant::now();
            let slot = slots.get(&host).copied().unwrap_or(now).max(now);
            slots.insert(host, slot + self.policy.min_interval);
            slot
        };
        let now = Instant::now();
        if wait_until > now {
            std::thread::sleep(wait_until - now);
        }
    }
}

fn into_response(r: ureq::Response) -> Response {
    let status = r.status();
    let body = r.into_string().unwrap_or_default();
    Response { status, body }
}

fn host_of(url: &str) -> &str {
    let rest = url.split_once("://").map_or(url, |(_, r)| r);
    rest.split(['/', '?']).next().unwrap_or(rest)
}
