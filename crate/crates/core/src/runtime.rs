//! Process-level knobs.

use std::sync::Once;

static INIT: Once = Once::new();

/// Caps internal parallelism from the `BFP_THREADS` environment variable
/// (`0` or unset means auto). Safe to call more than once; only the first
/// call takes effect, and it must happen before any parallel work.
pub fn init_threads_from_env() {
    INIT.call_once(|| {
        let threads = std::env::var("BFP_THREADS")
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .unwrap_or(0);
        if threads > 0 {
            // ignore failure: a pool may already exist in embedding contexts
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    });
}
