//! Data-parallel helpers that compile down to plain iterators when the
//! `parallel` feature is disabled.
//!
//! Every helper preserves input order in its output, so results are identical
//! whichever backend is compiled in.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_range<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    (0..n).map(f).collect()
}

/// Maps `f` over a slice, collecting results in slice order.
pub fn map_slice<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return items.par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    items.iter().map(f).collect()
}

/// Fallible variant of [`map_slice`]; returns the first error in slice order.
pub fn try_map_slice<T, R, E, F>(items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    map_slice(items, f).into_iter().collect()
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        let out = map_range(1000, |i| i * 2);
        assert!(out.iter().enumerate().all(|(i, &v)| v == 2 * i));
        let words = ["a", "bb", "ccc"];
        assert_eq!(map_slice(&words, |w| w.len()), vec![1, 2, 3]);
    }

    #[test]
    fn try_map_reports_first_error() {
        let r: Result<Vec<i32>, usize> =
            try_map_slice(&[1, 2, 3, 4], |&x| if x % 2 == 0 { Err(x as usize) } else { Ok(x) });
        assert_eq!(r, Err(2));
    }
}
