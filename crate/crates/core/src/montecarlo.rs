//! Monte Carlo cross-checks for the exact tables: path simulation of the
//! stopped walk and of the reflected chain.
//!
//! Reproducibility is a hard contract: every path draws from its own
//! counter-based substream selected by `(seed, path_index)`, and results
//! are aggregated as exact integer counts, so the outcome is a pure
//! function of `(seed, paths, horizon)` no matter how the paths are
//! partitioned across workers.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::exactdp::StoppingTime;
use crate::walkmodel::{WalkError, WalkSpec};

#[derive(Debug, thiserror::Error)]
pub enum McError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Simulation configuration. Results are a pure function of
/// `(seed, paths, horizon)`; `workers` only changes the schedule.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SimConfig {
    pub seed: u64,
    pub paths: u64,
    pub horizon: usize,
    /// Worker threads; 0 uses the process-default pool.
    pub workers: usize,
}

impl SimConfig {
    fn check(&self) -> Result<(), McError> {
        if self.paths == 0 {
            return Err(McError::InvalidConfig("need at least one path".into()));
        }
        Ok(())
    }
}

/// Per-step sampler using Vose's alias method: O(1) per draw after an
/// O(k) build over the k-point step law.
struct AliasSampler {
    offsets: Vec<i64>,
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasSampler {
    fn new(walk: &WalkSpec) -> Self {
        let steps = walk.float_steps();
        let k = steps.len();
        let offsets: Vec<i64> = steps.iter().map(|(s, _)| *s).collect();
        let scaled: Vec<f64> = steps.iter().map(|(_, p)| p * k as f64).collect();
        let mut prob = vec![0.0; k];
        let mut alias = vec![0usize; k];
        let mut small: Vec<usize> = Vec::with_capacity(k);
        let mut large: Vec<usize> = Vec::with_capacity(k);
        let mut rem = scaled;
        for (j, w) in rem.iter().enumerate() {
            if *w < 1.0 {
                small.push(j);
            } else {
                large.push(j);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            prob[s] = rem[s];
            alias[s] = l;
            rem[l] = (rem[l] + rem[s]) - 1.0;
            if rem[l] < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        for j in large {
            prob[j] = 1.0;
            alias[j] = j;
        }
        for j in small {
            prob[j] = 1.0;
            alias[j] = j;
        }
        AliasSampler {
            offsets,
            prob,
            alias,
        }
    }

    #[inline]
    fn draw<R: Rng>(&self, rng: &mut R) -> i64 {
        let j = rng.gen_range(0..self.offsets.len());
        if rng.gen::<f64>() < self.prob[j] {
            self.offsets[j]
        } else {
            self.offsets[self.alias[j]]
        }
    }
}

fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Run `body` over all path indices inside a pool of `cfg.workers` threads
/// (process default when 0), merging per-chunk accumulators with `merge`.
fn run_paths<T, FInit, FBody, FMerge>(
    cfg: &SimConfig,
    init: FInit,
    body: FBody,
    merge: FMerge,
) -> Result<T, McError>
where
    T: Send,
    FInit: Fn() -> T + Sync,
    FBody: Fn(&mut T, u64, &mut ChaCha8Rng) + Sync,
    FMerge: Fn(T, T) -> T + Sync,
{
    cfg.check()?;
    let chunk: u64 = 4096;
    let n_chunks = cfg.paths.div_ceil(chunk);
    let job = || {
        (0..n_chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = init();
                let lo = c * chunk;
                let hi = ((c + 1) * chunk).min(cfg.paths);
                for p in lo..hi {
                    let mut rng = path_rng(cfg.seed, p);
                    body(&mut acc, p, &mut rng);
                }
                acc
            })
            .reduce(&init, &merge)
    };
    if cfg.workers == 0 {
        Ok(job())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| McError::Pool(e.to_string()))?;
        Ok(pool.install(job))
    }
}

/// Empirical survival curve of a stopped walk: `alive[n]` counts paths
/// with `tau > n`, for every `n` up to the horizon.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct McSurvival {
    pub seed: u64,
    pub paths: u64,
    pub horizon: usize,
    pub alive: Vec<u64>,
}

impl McSurvival {
    pub fn estimate(&self, n: usize) -> f64 {
        self.alive[n] as f64 / self.paths as f64
    }

    /// Binomial standard error of the estimate at `n`.
    pub fn std_error(&self, n: usize) -> f64 {
        let p = self.estimate(n);
        (p * (1.0 - p) / self.paths as f64).sqrt()
    }
}

/// Simulate the walk until it triggers `stop` or outlives the horizon.
pub fn mc_survival(
    walk: &WalkSpec,
    stop: StoppingTime,
    cfg: &SimConfig,
) -> Result<McSurvival, McError> {
    let sampler = AliasSampler::new(walk);
    let n = cfg.horizon;
    // Histogram of the stopping time capped at the horizon; the survival
    // curve is its suffix sum. Integer counts make the merge exact.
    let hist = run_paths(
        cfg,
        || vec![0u64; n + 2],
        |acc, _p, rng| {
            let mut s: i64 = 0;
            let mut stopped = n + 1;
            for step in 1..=n {
                s += sampler.draw(rng);
                if stop.triggers(s) {
                    stopped = step;
                    break;
                }
            }
            acc[stopped] += 1;
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    )?;
    let mut alive = vec![0u64; n + 1];
    let mut acc = hist[n + 1];
    alive[n] = acc;
    for m in (0..n).rev() {
        acc += hist[m + 1];
        alive[m] = acc;
    }
    Ok(McSurvival {
        seed: cfg.seed,
        paths: cfg.paths,
        horizon: n,
        alive,
    })
}

/// Empirical endpoint law of the reflected chain after `horizon` steps.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct McHistogram {
    pub seed: u64,
    pub paths: u64,
    pub horizon: usize,
    pub counts: BTreeMap<i64, u64>,
}

impl McHistogram {
    pub fn estimate(&self, k: i64) -> f64 {
        *self.counts.get(&k).unwrap_or(&0) as f64 / self.paths as f64
    }

    pub fn std_error(&self, k: i64) -> f64 {
        let p = self.estimate(k);
        (p * (1.0 - p) / self.paths as f64).sqrt()
    }
}

/// Simulate the reflected chain `X_{n+1} = max(X_n + Y, 0)` from `x0` and
/// histogram its endpoint.
pub fn mc_reflected(walk: &WalkSpec, x0: i64, cfg: &SimConfig) -> Result<McHistogram, McError> {
    if x0 < 0 {
        return Err(McError::InvalidConfig(format!(
            "reflected chains start in the nonnegative half-line, got {x0}"
        )));
    }
    let sampler = AliasSampler::new(walk);
    let n = cfg.horizon;
    let counts = run_paths(
        cfg,
        BTreeMap::<i64, u64>::new,
        |acc, _p, rng| {
            let mut x = x0;
            for _ in 0..n {
                x = (x + sampler.draw(rng)).max(0);
            }
            *acc.entry(x).or_insert(0) += 1;
        },
        |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        },
    )?;
    Ok(McHistogram {
        seed: cfg.seed,
        paths: cfg.paths,
        horizon: n,
        counts,
    })
}
