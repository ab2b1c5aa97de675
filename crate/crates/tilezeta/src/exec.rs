//! Data-parallel helpers with a sequential fallback.
//!
//! Enumeration work is sharded over independent inputs; shard results are
//! merged in input order and any numeric folding happens sequentially after
//! the merge, so output bytes do not depend on the feature flag or thread
//! count.

/// Maps `f` over the inputs, in parallel when the `parallel` feature is
/// enabled. Results are returned in input order either way.
#[cfg(feature = "parallel")]
pub fn par_map<I, O, F>(inputs: Vec<I>, f: F) -> Vec<O>
where
    I: Send,
    O: Send,
    F: Fn(I) -> O + Sync + Send,
{
    use rayon::prelude::*;
    inputs.into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn par_map<I, O, F>(inputs: Vec<I>, f: F) -> Vec<O>
where
    I: Send,
    O: Send,
    F: Fn(I) -> O + Sync + Send,
{
    inputs.into_iter().map(f).collect()
}

/// Always-sequential twin of [`par_map`], kept callable with the feature on
/// so benchmarks can compare the two paths directly.
pub fn seq_map<I, O, F>(inputs: Vec<I>, f: F) -> Vec<O>
where
    F: Fn(I) -> O,
{
    inputs.into_iter().map(f).collect()
}
