//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper returns its results in index order so that callers can
//! merge them deterministically.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Parallelism {
    /// Use the rayon pool when the `parallel` feature is enabled.
    #[default]
    Auto,
    Sequential,
}

impl Parallelism {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Auto
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(par: Parallelism, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if par.is_parallel() && items.len() > 1 {
            use rayon::prelude::*;
            return items.into_par_iter().map(f).collect();
        }
    }
    let _ = par;
    items.into_iter().map(f).collect()
}

/// Maps `f` over `lo..hi`, preserving order.
pub fn map_range<R, F>(par: Parallelism, lo: u64, hi: u64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(u64) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if par.is_parallel() && hi > lo + 1 {
            use rayon::prelude::*;
            return (lo..hi).into_par_iter().map(f).collect();
        }
    }
    let _ = par;
    (lo..hi).map(f).collect()
}
