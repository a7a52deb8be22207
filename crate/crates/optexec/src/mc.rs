//! Ensemble evaluation.
//!
//! Paths are generated independently from their (seed, index) coordinates,
//! mapped in parallel, collected in index order, and reduced with pairwise
//! summation. No stage depends on thread scheduling, so a run with one worker
//! and a run with sixty-four produce bit-identical estimates.

use crate::path::{PathBundle, Simulator};
use crate::stats::{mean_se, MeanSe};
use rayon::prelude::*;

/// Evaluate `f` on every path bundle, in path order.
pub fn map_paths<T, F>(sim: &Simulator, n_paths: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &PathBundle) -> T + Sync,
{
    (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let bundle = sim.bundle(p);
            f(p, &bundle)
        })
        .collect()
}

/// Mean and standard error of a scalar path functional.
pub fn estimate<F>(sim: &Simulator, n_paths: u64, f: F) -> MeanSe
where
    F: Fn(&PathBundle) -> f64 + Sync,
{
    let values = map_paths(sim, n_paths, |_, b| f(b));
    mean_se(&values)
}

/// Mean and standard error of K scalar functionals sharing one path sweep
/// (common random numbers by construction).
pub fn estimate_multi<const K: usize, F>(sim: &Simulator, n_paths: u64, f: F) -> [MeanSe; K]
where
    F: Fn(&PathBundle) -> [f64; K] + Sync,
{
    let rows = map_paths(sim, n_paths, |_, b| f(b));
    std::array::from_fn(|k| {
        let col: Vec<f64> = rows.iter().map(|r| r[k]).collect();
        mean_se(&col)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::model::{ModelSpec, TargetSpec};

    fn sim() -> Simulator {
        let spec = ModelSpec::with_constants(
            TimeGrid::new(0.0, 1.0, 32).unwrap(),
            1.0,
            0.0,
            0.25,
            1.0,
            0.5,
            0.1,
            0.0,
            TargetSpec::liquidate(),
            1.0,
            0.0,
        )
        .unwrap();
        Simulator::new(spec, 31415).unwrap()
    }

    #[test]
    fn estimates_are_pool_size_invariant() {
        let s = sim();
        let f = |b: &PathBundle| b.gamma[32] * b.nu[32];
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| estimate(&s, 4000, f));
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| estimate(&s, 4000, f));
        assert_eq!(one.mean.to_bits(), four.mean.to_bits());
        assert_eq!(one.std_error.to_bits(), four.std_error.to_bits());
    }

    #[test]
    fn multi_estimate_shares_paths() {
        let s = sim();
        let [a, b] = estimate_multi(&s, 500, |bd: &PathBundle| [bd.gamma[32], bd.gamma[32]]);
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
    }
}
