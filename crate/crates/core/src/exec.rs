//! Sequential or data-parallel execution of independent per-cell work.

/// How per-level cell updates and independent samples are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is enabled, and runs
    /// sequentially otherwise.
    #[default]
    Parallel,
}

/// Fewest indices handed to one rayon task.
#[cfg(feature = "parallel")]
const MIN_PARALLEL_CHUNK: usize = 64;

impl Exec {
    /// Maps `f` over `0..len`, collecting results in index order.
    pub fn map_range<T, F>(self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Exec::Parallel if len > 1 => {
                use rayon::prelude::*;
                (0..len).into_par_iter().with_min_len(MIN_PARALLEL_CHUNK).map(f).collect()
            }
            _ => (0..len).map(f).collect(),
        }
    }

    /// Like [`Exec::map_range`] for fallible work; the first error in index
    /// order wins.
    pub fn try_map_range<T, E, F>(self, len: usize, f: F) -> Result<Vec<T>, E>
    where
        T: Send,
        E: Send,
        F: Fn(usize) -> Result<T, E> + Sync + Send,
    {
        self.map_range(len, f).into_iter().collect()
    }
}
