//! Execution strategy for the data-parallel kernels.
//!
//! Every kernel is written so that each output element (a cloud row, a matrix
//! row, a partial sum for one outer triplet index) is a pure function of its
//! position. The parallel path hands those positions to rayon; the serial path
//! walks them in order. Both produce bit-identical results, and reductions are
//! always merged in canonical order so the worker count never leaks into the
//! output.

use std::ops::Range;

/// How a kernel should schedule its independent work items.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Serial,
    /// Uses the rayon global pool. Falls back to [`Execution::Serial`] when the
    /// crate is built without the `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Serial
        }
    }
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Caps the global worker pool. Must be called before any parallel kernel runs;
/// later calls fail. Without the `parallel` feature this is a no-op.
pub fn configure_threads(threads: usize) -> crate::Result<()> {
    if threads == 0 {
        return Err(crate::Error::InvalidArgument("thread count must be >= 1".into()));
    }
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
    }
    Ok(())
}

/// Worker count the parallel path would use.
pub fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Calls `f(row_index, row)` for each `width`-sized row of `data`.
pub(crate) fn for_each_row<F>(exec: Execution, data: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Send + Sync,
{
    if width == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        data.par_chunks_mut(width).enumerate().for_each(|(i, row)| f(i, row));
        return;
    }
    let _ = exec;
    data.chunks_mut(width).enumerate().for_each(|(i, row)| f(i, row));
}

/// Maps `f` over `range`, returning results in index order.
pub(crate) fn map_range<T, F>(exec: Execution, range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec;
    range.map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serial_and_parallel_agree() {
        let mut a = vec![0.0; 40];
        let mut b = vec![0.0; 40];
        let fill = |i: usize, row: &mut [f64]| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (i * 10 + j) as f64;
            }
        };
        for_each_row(Execution::Serial, &mut a, 4, fill);
        for_each_row(Execution::Parallel, &mut b, 4, fill);
        assert_eq!(a, b);

        let s = map_range(Execution::Serial, 0..100, |i| i * i);
        let p = map_range(Execution::Parallel, 0..100, |i| i * i);
        assert_eq!(s, p);
    }

    #[test]
    fn zero_threads_rejected() {
        assert!(configure_threads(0).is_err());
    }
}
