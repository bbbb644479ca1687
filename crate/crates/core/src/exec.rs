//! Execution layer: a data-parallel sweep with a sequential fallback.
//!
//! Every operation in this crate is a pure function over immutable values, so
//! independent work items can always run concurrently. [`sweep`] maps a
//! function over a batch using a work-stealing thread pool when the `parallel`
//! feature (on by default) is enabled, and degrades to a plain sequential map
//! when it is not. [`sweep_seq`] is always sequential; the bench suite
//! compares the two on identical batches.
//!
//! Both functions preserve input order, so any result assembled from a sweep
//! is deterministic regardless of scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, in parallel when the `parallel` feature is enabled.
///
/// Results are returned in input order.
#[cfg(feature = "parallel")]
pub fn sweep<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

/// Map `f` over `items`, in parallel when the `parallel` feature is enabled.
///
/// Results are returned in input order. (Sequential build of the same API.)
#[cfg(not(feature = "parallel"))]
pub fn sweep<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

/// Map `f` over `items` sequentially, regardless of enabled features.
///
/// This is the comparison baseline for the bench suite and the right choice
/// for batches too small to amortize scheduling.
pub fn sweep_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_sweep_preserves_order() {
        let squares = sweep((0u64..100).collect(), |k| k * k);
        let expected: Vec<u64> = (0..100).map(|k| k * k).collect();
        assert_eq!(squares, expected, "sweep must preserve input order");
    }

    #[test]
    fn test_sweep_matches_sequential() {
        let items: Vec<i64> = (-50..50).collect();
        let par = sweep(items.clone(), |k| k * 3 - 1);
        let seq = sweep_seq(items, |k| k * 3 - 1);
        assert_eq!(par, seq, "parallel and sequential sweeps must agree");
    }
}
