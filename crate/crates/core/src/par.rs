//! Data-parallel helpers with a sequential fallback.
//!
//! Kernels call [`map`] / [`flat_map`] for per-cell and per-item loops. With
//! the `parallel` feature these dispatch to rayon unless the process-wide
//! mode has been switched to [`ExecMode::Sequential`]; without the feature
//! everything runs sequentially. Output order is always the input order.

use std::sync::atomic::{AtomicU8, Ordering};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

static MODE: AtomicU8 = AtomicU8::new(1);

pub fn set_mode(mode: ExecMode) {
    MODE.store(if mode == ExecMode::Parallel { 1 } else { 0 }, Ordering::Relaxed);
}

pub fn mode() -> ExecMode {
    if cfg!(feature = "parallel") && MODE.load(Ordering::Relaxed) == 1 {
        ExecMode::Parallel
    } else {
        ExecMode::Sequential
    }
}

/// Below this many items the rayon overhead is not worth paying.
#[cfg(feature = "parallel")]
const MIN_PARALLEL: usize = 32;

pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == ExecMode::Parallel && items.len() >= MIN_PARALLEL {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

/// Like [`map`] but for coarse work items, parallel from two items up.
pub fn map_coarse<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode() == ExecMode::Parallel && items.len() >= 2 {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    items.iter().map(f).collect()
}

pub fn flat_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Vec<U> + Sync + Send,
{
    map(items, f).into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved_in_both_modes() {
        let items: Vec<u32> = (0..1000).collect();
        let seq: Vec<u32> = items.iter().map(|x| x * 3).collect();
        assert_eq!(map(&items, |x| x * 3), seq);
        assert_eq!(flat_map(&items, |x| vec![*x, *x]).len(), 2000);
    }
}
