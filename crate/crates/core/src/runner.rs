//! Replica fan-out with a fixed-order reduction.
//!
//! Replicas are embarrassingly parallel and each owns its derived RNG
//! stream, so results are collected by replica index and identical whether
//! the `parallel` feature is on or off.

use alloc::vec::Vec;

use crate::Result;

#[cfg(feature = "parallel")]
pub fn map_replicas<T, F>(replicas: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    (0..replicas as u64).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_replicas<T, F>(replicas: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(u64) -> Result<T>,
{
    (0..replicas as u64).map(f).collect()
}
