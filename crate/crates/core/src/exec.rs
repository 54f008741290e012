//! Data-parallel execution helpers.
//!
//! With the `parallel` feature (default) the helpers fan out over rayon;
//! without it they run sequentially. Results are always collected in task
//! order and reduced sequentially by the caller, so scores are bitwise
//! identical regardless of thread count.

use std::sync::OnceLock;

static THREADS: OnceLock<()> = OnceLock::new();

/// Initialize the global thread pool, honoring the `CLM_THREADS` env var.
///
/// Safe to call more than once; only the first call has any effect. With the
/// `parallel` feature disabled this is a no-op.
pub fn configure_threads() {
    THREADS.get_or_init(|| {
        #[cfg(feature = "parallel")]
        {
            if let Some(n) = std::env::var("CLM_THREADS")
                .ok()
                .and_then(|v| v.parse::<usize>().ok())
                .filter(|&n| n > 0)
            {
                // Fails if a global pool already exists; keep whatever is there.
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    });
}

#[cfg(feature = "parallel")]
pub(crate) fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    configure_threads();
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub(crate) fn par_map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    use rayon::prelude::*;
    configure_threads();
    (0..count).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map_indexed<U, F>(count: usize, f: F) -> Vec<U>
where
    F: Fn(usize) -> U,
{
    (0..count).map(f).collect()
}
