//! Shared rayon pools keyed by worker count.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::{ThreadPool, ThreadPoolBuilder};

/// Returns a cached pool with exactly `workers` threads, building it on
/// first use. Panics if `workers == 0`.
pub fn pool(workers: usize) -> Arc<ThreadPool> {
    assert!(workers >= 1, "worker count must be positive");
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<ThreadPool>>>> = OnceLock::new();
    let pools = POOLS.get_or_init(Default::default);
    let mut pools = pools.lock().unwrap_or_else(|e| e.into_inner());
    pools
        .entry(workers)
        .or_insert_with(|| {
            Arc::new(
                ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .thread_name(move |i| format!("gnncolor-{workers}-{i}"))
                    .build()
                    .expect("failed to build thread pool"),
            )
        })
        .clone()
}
