//! Thin shim over rayon so every data-parallel loop has a sequential twin.

/// Whether this build runs block work on the rayon pool.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Maps `0..count` and folds with an associative `reduce`. The reduction
/// tree keeps left-to-right order, so the result only depends on `reduce`
/// being associative.
#[cfg(feature = "parallel")]
pub(crate) fn map_reduce<T, I, M, R>(count: usize, identity: I, map: M, reduce: R) -> T
where
    T: Send,
    I: Fn() -> T + Sync + Send,
    M: Fn(usize) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(map).reduce(identity, reduce)
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_reduce<T, I, M, R>(count: usize, identity: I, map: M, reduce: R) -> T
where
    I: Fn() -> T,
    M: Fn(usize) -> T,
    R: Fn(T, T) -> T,
{
    sequential_map_reduce(count, identity, map, reduce)
}

pub(crate) fn sequential_map_reduce<T, I, M, R>(count: usize, identity: I, map: M, reduce: R) -> T
where
    I: Fn() -> T,
    M: Fn(usize) -> T,
    R: Fn(T, T) -> T,
{
    (0..count).map(map).fold(identity(), reduce)
}

/// Ordered map over `0..count`.
#[cfg(feature = "parallel")]
pub(crate) fn map_collect<T, M>(count: usize, map: M) -> Vec<T>
where
    T: Send,
    M: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(map).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_collect<T, M>(count: usize, map: M) -> Vec<T>
where
    M: Fn(usize) -> T,
{
    (0..count).map(map).collect()
}

pub(crate) fn sequential_map_collect<T, M>(count: usize, map: M) -> Vec<T>
where
    M: Fn(usize) -> T,
{
    (0..count).map(map).collect()
}
