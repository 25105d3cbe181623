use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

/// Counting semaphore shared by every client to cap in-flight requests.
#[derive(Debug)]
pub struct ConcurrencyLimit {
    free: Mutex<usize>,
    cv: Condvar,
}

impl ConcurrencyLimit {
    pub fn new(permits: usize) -> Self {
        ConcurrencyLimit {
            free: Mutex::new(permits.max(1)),
            cv: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit { limit: self }
    }
}

pub struct Permit<'a> {
    limit: &'a ConcurrencyLimit,
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut free = self.limit.free.lock().unwrap_or_else(|e| e.into_inner());
        *free += 1;
        self.limit.cv.notify_one();
    }
}

/// Spaces requests at least `interval` apart.
#[derive(Debug)]
pub(crate) struct Pacer {
    interval: Duration,
    next: Mutex<Option<Instant>>,
}

impl Pacer {
    pub(crate) fn per_minute(rpm: Option<u32>) -> Self {
        let interval = match rpm {
            Some(n) if n > 0 => Duration::from_secs(60) / n,
            _ => Duration::ZERO,
        };
        Pacer {
            interval,
            next: Mutex::new(None),
        }
    }

    pub(crate) fn wait(&self) {
        if self.interval.is_zero() {
            return;
        }
        let sleep_for = {
            let mut next = self.next.lock().unwrap_or_else(|e| e.into_inner());
            let now = Instant::now();
            let slot = next.map_or(now, |t| t.max(now));
            *next = Some(slot + self.interval);
            slot - now
        };
        std::thread::sleep(sleep_for);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    #[test]
    fn never_exceeds_permits() {
        let limit = Arc::new(ConcurrencyLimit::new(2));
        let live = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let (limit, live, peak) = (limit.clone(), live.clone(), peak.clone());
                std::thread::spawn(move || {
                    let _p = limit.acquire();
                    let n = live.fetch_add(1, Ordering::SeqCst) + 1;
                    peak.fetch_max(n, Ordering::SeqCst);
                    std::thread::sleep(Duration::from_millis(5));
                    live.fetch_sub(1, Ordering::SeqCst);
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }

    #[test]
    fn pacer_spaces_calls() {
        let p = Pacer::per_minute(Some(60 * 50));
        let t = Instant::now();
        for _ in 0..4 {
            p.wait();
        }
        assert!(t.elapsed() >= Duration::from_millis(55));
    }
}
