//! Parallel-for over rayon, with a sequential fallback.
//!
//! Without the `parallel` feature every loop runs on the calling thread and
//! [`Execution::Parallel`] behaves like [`Execution::Sequential`].

use std::ops::Range;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }

    pub fn for_each_index<F>(self, range: Range<usize>, f: F)
    where
        F: Fn(usize) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            range.into_par_iter().for_each(f);
            return;
        }
        range.for_each(f);
    }

    pub fn for_each<T, F>(self, items: &[T], f: F)
    where
        T: Sync,
        F: Fn(&T) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            items.par_iter().for_each(f);
            return;
        }
        items.iter().for_each(f);
    }

    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
        items.iter().map(f).collect()
    }

    /// Stable sort by key.
    pub fn sort_by_key<T, K, F>(self, items: &mut [T], key: F)
    where
        T: Send,
        K: Ord,
        F: Fn(&T) -> K + Sync,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            use rayon::prelude::*;
            items.par_sort_by_key(key);
            return;
        }
        items.sort_by_key(key);
    }
}

/// Runs `f` with the requested degree of parallelism. `threads == 1` runs
/// sequentially, `0` uses every available core.
pub fn with_threads<R, F>(threads: usize, f: F) -> R
where
    R: Send,
    F: FnOnce(Execution) -> R + Send,
{
    if threads == 1 || !cfg!(feature = "parallel") {
        return f(Execution::Sequential);
    }
    #[cfg(feature = "parallel")]
    {
        match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => pool.install(|| f(Execution::Parallel)),
            Err(_) => f(Execution::Parallel),
        }
    }
    #[cfg(not(feature = "parallel"))]
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn both_modes_visit_everything() {
        for threads in [1, 4] {
            let sum = with_threads(threads, |exec| {
                let acc = AtomicUsize::new(0);
                exec.for_each_index(0..100, |i| {
                    acc.fetch_add(i, Ordering::Relaxed);
                });
                acc.into_inner()
            });
            assert_eq!(sum, 4950);
        }
    }

    #[test]
    fn sort_is_stable() {
        let mut v: Vec<(u8, usize)> = (0..1000).map(|i| ((i % 7) as u8, i)).collect();
        with_threads(4, |exec| exec.sort_by_key(&mut v, |p| p.0));
        for w in v.windows(2) {
            assert!(w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 < w[1].1));
        }
    }
}
