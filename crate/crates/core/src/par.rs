//! Data-parallel helpers. With the `parallel` feature the loops go through
//! rayon; without it (or after `set_enabled(false)`) they run sequentially.

use std::sync::atomic::{AtomicBool, Ordering};

static ENABLED: AtomicBool = AtomicBool::new(true);

/// Switch the parallel code paths on or off at runtime.
pub fn set_enabled(on: bool) {
    ENABLED.store(on, Ordering::Relaxed);
}

/// Whether loops currently run on the rayon pool.
pub fn enabled() -> bool {
    cfg!(feature = "parallel") && ENABLED.load(Ordering::Relaxed)
}

fn threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// Split `data` into blocks of whole rows (`row` elements each) and call `f`
/// with the index of the first row and the block.
pub fn for_row_blocks<T, F>(data: &mut [T], row: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let rows = data.len() / row;
    let nt = if enabled() { threads() } else { 1 };
    if nt <= 1 || rows < 2 {
        f(0, data);
        return;
    }
    let per = rows.div_ceil(nt);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        data.par_chunks_mut(per * row)
            .enumerate()
            .for_each(|(b, chunk)| f(b * per, chunk));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (b, chunk) in data.chunks_mut(per * row).enumerate() {
            f(b * per, chunk);
        }
    }
}

/// Elementwise update of a mutable slice.
pub fn for_each_mut<T, F>(data: &mut [T], f: F)
where
    T: Send,
    F: Fn(usize, &mut T) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if enabled() && data.len() >= 1 << 14 {
        use rayon::prelude::*;
        data.par_iter_mut().enumerate().for_each(|(i, v)| f(i, v));
        return;
    }
    for (i, v) in data.iter_mut().enumerate() {
        f(i, v);
    }
}

/// Map an index range to a vector, in parallel when enabled.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if enabled() {
        use rayon::prelude::*;
        return (0..n).into_par_iter().map(f).collect();
    }
    (0..n).map(f).collect()
}

/// Sum of `f(i)` over `0..n`.
pub fn sum_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if enabled() && n >= 1 << 14 {
        use rayon::prelude::*;
        return (0..n).into_par_iter().with_min_len(4096).map(f).sum();
    }
    (0..n).map(f).sum()
}
