//! Indexed batch execution. Results come back ordered by index, so the
//! output is byte-for-byte identical whether or not the parallel feature
//! is enabled.

/// Runs f over 0..n on the rayon pool when the parallel feature is on,
/// sequentially otherwise.
#[cfg(feature = "parallel")]
pub fn run_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn run_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    run_indexed_seq(n, f)
}

/// Always-sequential variant, kept available for benchmarking against
/// the pool.
pub fn run_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_and_identical_across_modes() {
        let f = |i: usize| i * i + 1;
        assert_eq!(run_indexed(100, f), run_indexed_seq(100, f));
        assert_eq!(run_indexed(0, f), Vec::<usize>::new());
    }
}
