//! Monotone incumbent shared by every hyperplane search.

use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Best known solution. The value only ever increases.
#[derive(Debug)]
pub struct Incumbent {
    lb: AtomicI64,
    inner: Mutex<Inner>,
    start: Instant,
}

/// One accepted improvement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Improvement {
    pub value: i64,
    pub elapsed: Duration,
    pub x: Vec<bool>,
}

#[derive(Debug, Clone)]
struct Inner {
    history: Vec<Improvement>,
}

impl Incumbent {
    /// Starts from a known feasible solution of value `value`.
    pub fn new(solution: Vec<bool>, value: i64) -> Self {
        Self::with_start(solution, value, Instant::now())
    }

    pub fn with_start(solution: Vec<bool>, value: i64, start: Instant) -> Self {
        Self {
            lb: AtomicI64::new(value),
            inner: Mutex::new(Inner {
                history: vec![Improvement {
                    value,
                    elapsed: start.elapsed(),
                    x: solution,
                }],
            }),
            start,
        }
    }

    pub fn lb(&self) -> i64 {
        self.lb.load(Ordering::Acquire)
    }

    /// Installs `x` if `value` beats the current bound.
    pub fn offer(&self, x: &[bool], value: i64) -> bool {
        if value <= self.lb() {
            return false;
        }
        let mut inner = self.inner.lock().expect("incumbent lock poisoned");
        // Re-check under the lock: another worker may have raised the bound.
        if value <= self.lb.load(Ordering::Acquire) {
            return false;
        }
        inner.history.push(Improvement {
            value,
            elapsed: self.start.elapsed(),
            x: x.to_vec(),
        });
        self.lb.store(value, Ordering::Release);
        true
    }

    pub fn solution(&self) -> Vec<bool> {
        let inner = self.inner.lock().expect("incumbent lock poisoned");
        inner
            .history
            .last()
            .expect("history starts non-empty")
            .x
            .clone()
    }

    pub fn trajectory(&self) -> Vec<(i64, Duration)> {
        self.history()
            .into_iter()
            .map(|i| (i.value, i.elapsed))
            .collect()
    }

    /// Every accepted solution, oldest first.
    pub fn history(&self) -> Vec<Improvement> {
        self.inner
            .lock()
            .expect("incumbent lock poisoned")
            .history
            .clone()
    }
}
