//! Data-parallel helpers with a sequential fallback.
//!
//! Every parallel site in this crate computes independent output cells
//! (no cross-thread floating-point reductions), so results are
//! bit-identical whether the `parallel` feature is enabled or not and
//! regardless of thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `0..count` through `f`, preserving index order in the output.
pub(crate) fn map_indexed<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count).map(f).collect()
    }
}

/// Apply `f(chunk_index, chunk)` to consecutive `chunk_len` slices of `data`.
pub(crate) fn for_each_chunk_mut<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk_len)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk_len).enumerate().for_each(|(i, c)| f(i, c));
    }
}

/// Cap the global thread pool. A no-op without the `parallel` feature.
///
/// Must run before any parallel work; later calls fail if the pool is
/// already built, which callers may ignore when the cap matches.
pub fn configure_thread_pool(threads: usize) -> crate::Result<()> {
    if threads == 0 {
        return Err(crate::Error::Config("threads must be >= 1".into()));
    }
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| crate::Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}
