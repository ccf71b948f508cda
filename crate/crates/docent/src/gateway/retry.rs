//! Single retry with jittered backoff for transient gateway failures.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use docent_core::gateway::{FieldMap, FieldSpec, GatewayError, GatewayRequest, LanguageModel};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Time kept in reserve so timer overshoot cannot break the total budget.
const SLACK: Duration = Duration::from_millis(5);

/// Wraps a backend so each call makes at most two attempts.
///
/// Only transient errors (timeouts, transport failures, error statuses) are
/// retried. The pause before the second attempt is uniform in
/// `[max_backoff / 2, max_backoff]`. A whole call, both attempts and the
/// pause, finishes within `2 * deadline + max_backoff`; the second attempt
/// gets whatever remains of that budget, at most one deadline.
pub struct Retrying<M> {
    inner: M,
    max_backoff: Duration,
    deadline: Option<Duration>,
    rng: Mutex<StdRng>,
}

impl<M: LanguageModel> Retrying<M> {
    pub fn new(inner: M, max_backoff: Duration, seed: u64) -> Self {
        Retrying {
            inner,
            max_backoff,
            deadline: None,
            rng: Mutex::new(StdRng::seed_from_u64(seed)),
        }
    }

    /// Per-attempt deadline replacing the one each request carries.
    pub fn with_deadline(mut self, deadline: Duration) -> Self {
        self.deadline = Some(deadline);
        self
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    fn backoff(&self) -> Duration {
        let cap = self.max_backoff.as_secs_f64();
        let secs = self.rng.lock().expect("rng lock poisoned").gen_range(cap / 2.0..=cap);
        Duration::from_secs_f64(secs)
    }

    fn attempt<T>(
        &self,
        req: &GatewayRequest,
        mut call: impl FnMut(&GatewayRequest) -> Result<T, GatewayError>,
    ) -> Result<T, GatewayError> {
        let start = Instant::now();
        let deadline = self.deadline.unwrap_or_else(|| Duration::from_secs_f64(req.deadline));
        let end = start + 2 * deadline + self.max_backoff;
        let mut req = req.clone();
        req.deadline = deadline.as_secs_f64();
        match call(&req) {
            Err(e) if e.is_transient() => {
                tracing::debug!(error = %e, "retrying language model call");
                let left = end.saturating_duration_since(Instant::now());
                std::thread::sleep(self.backoff().min(left.saturating_sub(deadline)));
                let left = end.saturating_duration_since(Instant::now()).saturating_sub(SLACK);
                if left.is_zero() {
                    return Err(e);
                }
                req.deadline = left.min(deadline).as_secs_f64();
                call(&req)
            }
            other => other,
        }
    }
}

impl<M: LanguageModel> LanguageModel for Retrying<M> {
    fn complete(&self, req: &GatewayRequest) -> Result<String, GatewayError> {
        self.attempt(req, |r| self.inner.complete(r))
    }

    fn extract_structured(&self, req: &GatewayRequest, schema: &[FieldSpec]) -> Result<FieldMap, GatewayError> {
        self.attempt(req, |r| self.inner.extract_structured(r, schema))
    }
}
