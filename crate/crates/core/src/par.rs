//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (on by default) the batch entry points run on
//! rayon's global pool; without it they run in a plain loop. Results are
//! always collected in input order, so output never depends on scheduling.

/// How a batch operation is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// `Parallel` degrades to `Sequential` when the crate is built without
    /// the `parallel` feature.
    pub fn effective(self) -> Self {
        if cfg!(feature = "parallel") {
            self
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, U, F>(items: &[T], exec: Execution, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    match exec.effective() {
        Execution::Sequential => items.iter().map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => unreachable!(),
    }
}

/// Maps `f` over `0..n`, preserving order.
pub fn map_range<U, F>(n: usize, exec: Execution, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    match exec.effective() {
        Execution::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_keep_order() {
        let xs: Vec<u64> = (0..1000).collect();
        let seq = map(&xs, Execution::Sequential, |x| x * x);
        let par = map(&xs, Execution::Parallel, |x| x * x);
        assert_eq!(seq, par);
        assert_eq!(map_range(5, Execution::Parallel, |i| i), vec![0, 1, 2, 3, 4]);
    }
}
