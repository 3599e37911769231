//! Execution policy for the data-parallel loops (per-context dynamic
//! programs, Monte Carlo trials, parameter sweeps).
//!
//! `Parallel` uses rayon when the `parallel` feature is enabled and quietly
//! degrades to the sequential path otherwise. Results never depend on the
//! policy: work items are independent and outputs are collected in input
//! order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually be spread over a thread pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    /// Maps `f` over `items`, preserving order.
    pub fn map<T, R, F>(self, items: Vec<T>, f: F) -> Vec<R>
    where
        T: Send,
        R: Send,
        F: Fn(T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return items.into_par_iter().map(f).collect();
        }
        items.into_iter().map(f).collect()
    }

    /// Runs `f` on every item for its side effects (typically disjoint
    /// `&mut` slices).
    pub fn for_each<T, F>(self, items: Vec<T>, f: F)
    where
        T: Send,
        F: Fn(T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            items.into_par_iter().for_each(f);
            return;
        }
        items.into_iter().for_each(f)
    }
}

/// Splits `data` into consecutive mutable chunks of the given lengths.
pub(crate) fn split_lengths<'a, T>(mut data: &'a mut [T], lengths: &[usize]) -> Vec<&'a mut [T]> {
    let mut out = Vec::with_capacity(lengths.len());
    for &len in lengths {
        let (head, tail) = std::mem::take(&mut data).split_at_mut(len);
        out.push(head);
        data = tail;
    }
    out
}
