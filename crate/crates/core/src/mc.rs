//! Monte Carlo plumbing: stream-per-batch execution and batch-means errors.
//!
//! Work is always split into a fixed number of batches, each owning one RNG
//! stream of the run's seed. Workers pick up whole batches and the batch
//! accumulators are combined in batch order, so the aggregate is identical
//! for any worker count. Standard errors come from the spread of the batch
//! means, which also guards against correlation inside an estimator.

use crate::sampler::stream_rng;
use rand_chacha::ChaCha8Rng;

/// How many samples to draw, from which seed, on how many threads.
#[derive(Debug, Clone, Copy)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig {
            samples,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

/// Number of batches (and RNG streams) per run.
pub const BATCHES: u64 = 32;

/// Run `body` once per batch with that batch's RNG and sample count,
/// returning the per-batch accumulators in batch order.
pub fn run_batches<A, F>(cfg: &McConfig, init: impl Fn() -> A, body: F) -> Vec<A>
where
    A: Send,
    F: Fn(&mut ChaCha8Rng, u64, &mut A) + Sync,
{
    let counts: Vec<u64> = (0..BATCHES)
        .map(|b| cfg.samples / BATCHES + u64::from(b < cfg.samples % BATCHES))
        .collect();
    let mut accs: Vec<A> = (0..BATCHES).map(|_| init()).collect();
    if cfg.workers <= 1 {
        for (b, acc) in accs.iter_mut().enumerate() {
            let mut rng = stream_rng(cfg.seed, b as u64);
            body(&mut rng, counts[b], acc);
        }
        return accs;
    }
    let workers = cfg.workers.min(BATCHES as usize);
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (w, chunk) in accs.chunks_mut(BATCHES as usize / workers + 1).enumerate() {
            let counts = &counts;
            let body = &body;
            let base = w * (BATCHES as usize / workers + 1);
            handles.push(scope.spawn(move || {
                for (off, acc) in chunk.iter_mut().enumerate() {
                    let b = base + off;
                    let mut rng = stream_rng(cfg.seed, b as u64);
                    body(&mut rng, counts[b], acc);
                }
            }));
        }
        for h in handles {
            h.join().expect("worker panicked");
        }
    });
    accs
}

/// A mean with its batch-means standard error.
#[derive(Debug, Clone, Copy)]
pub struct BatchEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl BatchEstimate {
    /// Combine per-batch `(sum, count)` pairs.
    pub fn from_batch_sums(sums: &[f64], counts: &[u64]) -> BatchEstimate {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return BatchEstimate {
                mean: f64::NAN,
                stderr: f64::NAN,
                samples: 0,
            };
        }
        let mean = sums.iter().sum::<f64>() / total as f64;
        let used: Vec<f64> = sums
            .iter()
            .zip(counts)
            .filter(|(_, &c)| c > 0)
            .map(|(&s, &c)| s / c as f64)
            .collect();
        let b = used.len() as f64;
        let stderr = if used.len() > 1 {
            let var = used.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>();
            (var / (b * (b - 1.0))).sqrt()
        } else {
            0.0
        };
        BatchEstimate {
            mean,
            stderr,
            samples: total,
        }
    }

    /// Distance from `exact` in standard errors (0 when both agree exactly
    /// with zero spread, infinite when they differ with zero spread).
    pub fn z_score(&self, exact: f64) -> f64 {
        let delta = self.mean - exact;
        if self.stderr > 0.0 {
            delta / self.stderr
        } else if delta == 0.0 {
            0.0
        } else {
            f64::INFINITY * delta.signum()
        }
    }
}

/// Convenience wrapper: estimate the mean of `f` over independent samples.
pub fn estimate_mean<F>(cfg: &McConfig, f: F) -> BatchEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let accs = run_batches(
        cfg,
        || (0.0f64, 0u64),
        |rng, count, acc| {
            for _ in 0..count {
                acc.0 += f(rng);
            }
            acc.1 = count;
        },
    );
    let sums: Vec<f64> = accs.iter().map(|a| a.0).collect();
    let counts: Vec<u64> = accs.iter().map(|a| a.1).collect();
    BatchEstimate::from_batch_sums(&sums, &counts)
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let c = cdf(x);
        d = d.max((c - i as f64 / n).abs());
        d = d.max(((i + 1) as f64 / n - c).abs());
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < na && j < nb {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    d
}

/// Large-sample KS critical value at significance `alpha` for a one-sample
/// test with `n` points; for two samples pass `n = n1*n2/(n1+n2)`.
pub fn ks_critical(alpha: f64, n: f64) -> f64 {
    (-0.5 * (alpha / 2.0).ln()).sqrt() / n.sqrt()
}
