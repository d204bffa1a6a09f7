//! Token-bucket request limiter with an injectable clock.

use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

/// Monotonic time source; `now` is measured from an arbitrary origin.
pub trait Clock: Send + Sync {
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

#[derive(Debug)]
pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Virtual clock for tests: `sleep` advances time instead of blocking.
#[derive(Debug, Default)]
pub struct ManualClock {
    now: Mutex<Duration>,
}

impl ManualClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, d: Duration) {
        *self.now.lock().unwrap() += d;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        *self.now.lock().unwrap()
    }

    fn sleep(&self, d: Duration) {
        self.advance(d);
    }
}

struct Bucket {
    tokens: f64,
    last: Duration,
}

/// Grants at most `rate` requests per second on average, with bursts up to
/// `capacity`. With the default capacity of one, consecutive grants are at
/// least `1 / rate` seconds apart.
pub struct RateLimiter {
    rate: f64,
    capacity: f64,
    bucket: Mutex<Bucket>,
    clock: Arc<dyn Clock>,
}

pub const DEFAULT_RATE: f64 = 8.0;

impl RateLimiter {
    pub fn new(rate: f64, clock: Arc<dyn Clock>) -> Self {
        Self::with_capacity(rate, 1.0, clock)
    }

    pub fn with_capacity(rate: f64, capacity: f64, clock: Arc<dyn Clock>) -> Self {
        assert!(rate > 0.0 && rate.is_finite(), "rate must be positive");
        assert!(capacity >= 1.0, "capacity must be at least one token");
        let last = clock.now();
        Self {
            rate,
            capacity,
            bucket: Mutex::new(Bucket {
                tokens: capacity,
                last,
            }),
            clock,
        }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }

    /// Blocks until a token is available and returns the grant time.
    pub fn acquire(&self) -> Duration {
        loop {
            let wait = {
                let mut b = self.bucket.lock().unwrap();
                let now = self.clock.now();
                let elapsed = now.saturating_sub(b.last).as_secs_f64();
                b.tokens = (b.tokens + elapsed * self.rate).min(self.capacity);
                b.last = now;
                if b.tokens >= 1.0 {
                    b.tokens -= 1.0;
                    return now;
                }
                Duration::from_secs_f64((1.0 - b.tokens) / self.rate)
            };
            self.clock.sleep(wait.max(Duration::from_nanos(1)));
        }
    }
}
