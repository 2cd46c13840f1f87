//! Thread-pool versions of the MDS restarts and the stress baseline. Results
//! are collected in start/trial order, so they do not depend on the number
//! of threads.

use latentkit_core::mds::{self, Dissimilarity, MdsOptions, MdsSolution, StressBaseline};
use rayon::prelude::*;

use crate::error::{Error, Result};

pub fn pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config(format!("cannot start {threads} threads: {e}")))
}

pub fn mds(pool: &rayon::ThreadPool, delta: &Dissimilarity, opts: &MdsOptions) -> Result<MdsSolution> {
    let fits = pool.install(|| {
        mds::starts(opts)
            .into_par_iter()
            .map(|s| mds::fit_start(delta, opts, s))
            .collect::<latentkit_core::Result<Vec<_>>>()
    })?;
    Ok(mds::select_best(delta, opts, fits)?)
}

pub fn stress_baseline(
    pool: &rayon::ThreadPool,
    p: usize,
    trials: usize,
    seed: u64,
    opts: &MdsOptions,
) -> Result<StressBaseline> {
    if trials < mds::MIN_BASELINE_TRIALS {
        return Err(latentkit_core::Error::MinTrials { min: mds::MIN_BASELINE_TRIALS, got: trials }.into());
    }
    let stresses = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| mds::baseline_trial(p, opts, seed, t))
            .collect::<latentkit_core::Result<Vec<_>>>()
    })?;
    Ok(mds::summarize_baseline(p, opts.k, stresses)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use latentkit_core::synth;

    #[test]
    fn matches_sequential_for_any_thread_count() {
        let (_, delta) = synth::planted_points(9, 2, 1.0, 0.3, 4).unwrap();
        let opts = MdsOptions { restarts: 4, seed: 3, ..MdsOptions::default() };
        let seq = mds::mds(&delta, &opts).unwrap();
        for t in [1, 3] {
            assert_eq!(mds(&pool(t).unwrap(), &delta, &opts).unwrap(), seq);
        }
        let base = mds::random_stress_baseline(9, 2, 20, 5, &opts).unwrap();
        assert_eq!(stress_baseline(&pool(2).unwrap(), 9, 20, 5, &opts).unwrap(), base);
    }
}
