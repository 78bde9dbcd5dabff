//! Deterministic fan-out for replicated experiments: results come back in
//! input order regardless of scheduling, and the whole thing degrades to a
//! plain serial loop on single-core hosts.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

/// Applies `f` to `0..n`, possibly on several threads, and returns the
/// results indexed by input. `f` must be deterministic per index for the
/// output to be reproducible, which every caller in this crate guarantees by
/// deriving per-index RNG seeds.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let threads = std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1);
    let threads = threads.min(n.max(1));
    if threads <= 1 {
        return (0..n).map(f).collect();
    }
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..n).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let out = f(i);
                slots.lock().unwrap()[i] = Some(out);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|s| s.unwrap())
        .collect()
}
