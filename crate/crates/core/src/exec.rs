//! Data-parallel execution with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`Parallelism::Parallel`] maps
//! over rayon's current thread pool. Without it, or with
//! [`Parallelism::Sequential`], work runs in order on the calling thread.
//! Both paths return results in input order, so callers observe identical
//! output either way.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    /// Whether this setting actually fans out work in the current build.
    pub fn is_effective(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

/// Map `f` over `items`, preserving order.
pub fn map_vec<T, R, F>(par: Parallelism, items: Vec<T>, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par == Parallelism::Parallel {
        use rayon::prelude::*;
        return items.into_par_iter().map(f).collect();
    }
    let _ = par;
    items.into_iter().map(f).collect()
}

/// Map `f` over a slice by reference, preserving order.
pub fn map_slice<'a, T, R, F>(par: Parallelism, items: &'a [T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&'a T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if par == Parallelism::Parallel {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = par;
    items.iter().map(f).collect()
}

/// Run `f` inside a dedicated pool of `threads` workers when given, otherwise
/// on the ambient pool.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => return pool.install(f),
            Err(e) => log::warn!("could not build a {n}-thread pool: {e}; using the global pool"),
        }
    }
    let _ = threads;
    f()
}
