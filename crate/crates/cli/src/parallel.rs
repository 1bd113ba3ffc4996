//! Fixed-order parallel map. The worker count comes from the
//! TRACE_FORMS_WORKERS environment variable and changes only wall time:
//! items are independent and results are returned in input order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::{CliError, Result};

pub fn worker_count() -> Result<usize> {
    match std::env::var("TRACE_FORMS_WORKERS") {
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| {
                CliError::Config(format!("TRACE_FORMS_WORKERS must be a positive integer, got `{}`", raw))
            }),
    }
}

pub fn parallel_map<T, R, F>(items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync,
{
    let workers = worker_count()?.min(items.len().max(1));
    if workers <= 1 {
        return Ok(items.iter().map(&f).collect());
    }
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(items.len()));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= items.len() {
                    return;
                }
                let out = f(&items[idx]);
                done.lock().unwrap().push((idx, out));
            });
        }
    });
    let mut pairs = done.into_inner().unwrap();
    pairs.sort_by_key(|(idx, _)| *idx);
    Ok(pairs.into_iter().map(|(_, out)| out).collect())
}
