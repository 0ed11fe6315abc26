//! Deterministic chunked parallelism for element loops.

use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};

static THREADS: AtomicUsize = AtomicUsize::new(0);

/// Set the worker count; 0 restores the default.
pub fn set_threads(n: usize) {
    THREADS.store(n, Ordering::Relaxed);
}

/// Worker count: explicit setting, else `PIPEFLOW_THREADS`, else 1.
pub fn threads() -> usize {
    match THREADS.load(Ordering::Relaxed) {
        0 => std::env::var("PIPEFLOW_THREADS")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .unwrap_or(1),
        n => n,
    }
}

/// Split `0..n` into contiguous chunks, run `f` on each and concatenate the
/// outputs in index order. The result does not depend on the thread count.
pub fn map_chunks<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> Vec<T> + Sync,
{
    let workers = threads().min(n / 256).max(1);
    if workers == 1 {
        return f(0..n);
    }
    let chunk = n.div_ceil(workers);
    let parts: Vec<Vec<T>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let r = (w * chunk).min(n)..((w + 1) * chunk).min(n);
                let f = &f;
                s.spawn(move || f(r))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    parts.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_map_preserves_order() {
        let out = map_chunks(10_000, |r| r.map(|i| i * 2).collect());
        assert_eq!(out, (0..10_000).map(|i| i * 2).collect::<Vec<_>>());
    }
}
