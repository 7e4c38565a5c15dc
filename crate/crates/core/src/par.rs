//! Maps over independent work items, in parallel when the `parallel`
//! feature is on and the caller asks for it.

/// Applies `f` to every item, preserving order. Falls back to a plain loop
/// when `parallel` is false or the crate was built without rayon.
pub fn map<T, R, F>(items: &[T], parallel: bool, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallel && items.len() > 1 {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = parallel;
    items.iter().map(f).collect()
}

/// True when [`map`] can actually run in parallel.
pub const fn available() -> bool {
    cfg!(feature = "parallel")
}
