//! Data-parallel execution with a sequential fallback.
//!
//! Batch analyses (subset enumeration, clique search, random sweeps) go
//! through [`Exec`]. With the `parallel` feature the default runs on rayon;
//! without it every call is a plain iterator. Output order is always the
//! input order, so results are identical in both modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Exec {
    /// Every mode compiled into this build.
    pub fn available() -> Vec<Exec> {
        #[cfg(feature = "parallel")]
        {
            vec![Exec::Sequential, Exec::Parallel]
        }
        #[cfg(not(feature = "parallel"))]
        {
            vec![Exec::Sequential]
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Exec::Sequential => "sequential",
            #[cfg(feature = "parallel")]
            Exec::Parallel => "parallel",
        }
    }

    /// Maps over a slice, preserving order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Exec::Sequential => items.iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => items.par_iter().map(f).collect(),
        }
    }

    /// Maps over `0..len`, preserving order.
    pub fn map_range<R, F>(self, len: u64, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(u64) -> R + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..len).map(f).collect(),
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..len).into_par_iter().map(f).collect(),
        }
    }

    /// Smallest index in `0..len` satisfying `pred`.
    pub fn find_first<F>(self, len: u64, pred: F) -> Option<u64>
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..len).find(|&i| pred(i)),
            #[cfg(feature = "parallel")]
            Exec::Parallel => (0..len).into_par_iter().find_first(|&i| pred(i)),
        }
    }

    pub fn all<F>(self, len: u64, pred: F) -> bool
    where
        F: Fn(u64) -> bool + Sync + Send,
    {
        self.find_first(len, |i| !pred(i)).is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let items: Vec<u64> = (0..500).collect();
        let outputs: Vec<_> = Exec::available()
            .into_iter()
            .map(|e| (e.map(&items, |x| x * x), e.find_first(500, |i| i * 7 % 13 == 5)))
            .collect();
        for w in outputs.windows(2) {
            assert_eq!(w[0], w[1]);
        }
        assert_eq!(outputs[0].1, Some(10));
    }
}
