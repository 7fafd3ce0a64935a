//! Order-preserving map over a slice, parallel when the `parallel` feature
//! is enabled and plain sequential otherwise. Output order always matches
//! input order, so results are deterministic either way.

#[cfg(feature = "parallel")]
pub fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Sequential map with the same shape as [`map_ordered`]; the baseline the
/// bench suite compares against.
pub fn map_sequential<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_order() {
        let xs: Vec<u64> = (0..10_000).collect();
        let doubled = map_ordered(&xs, |x| x * 2);
        let expect = map_sequential(&xs, |x| x * 2);
        assert_eq!(doubled, expect);
    }
}
