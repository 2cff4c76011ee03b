//! Sharded Monte Carlo driver.
//!
//! Replicates are split into fixed-size shards; shard `k` draws from
//! `root.child(k)`. The shard plan depends only on the replicate count, and
//! per-replicate results are gathered in shard order, so output is identical
//! for any number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sampling::RngStream;

/// Replicates per shard.
pub const SHARD_SIZE: usize = 4096;

/// Runs `f` once per replicate, in parallel over shards, and returns the
/// results in replicate order.
pub fn sharded_map<T, F>(root: &RngStream, replicates: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut RngStream) -> Result<T> + Sync,
{
    let shards = replicates.div_ceil(SHARD_SIZE);
    let chunks: Vec<Vec<T>> = (0..shards)
        .into_par_iter()
        .map(|k| {
            let mut rng = root.child(k as u64);
            let len = SHARD_SIZE.min(replicates - k * SHARD_SIZE);
            (0..len).map(|_| f(&mut rng)).collect::<Result<Vec<T>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(chunks.into_iter().flatten().collect())
}

/// Neumaier-compensated sum.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Summary {
        let count = xs.len();
        if count == 0 {
            return Summary {
                mean: f64::NAN,
                se: f64::NAN,
                count,
            };
        }
        let n = count as f64;
        let mean = compensated_sum(xs.iter().copied()) / n;
        let se = if count > 1 {
            let ss = compensated_sum(xs.iter().map(|x| (x - mean) * (x - mean)));
            (ss / (n - 1.0) / n).sqrt()
        } else {
            f64::INFINITY
        };
        Summary { mean, se, count }
    }

    /// Summary of the elementwise difference `a − b` of paired replicates.
    pub fn of_difference(a: &[f64], b: &[f64]) -> Summary {
        let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        Summary::of(&diffs)
    }

    /// `|mean − target| ≤ k · se`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }
}

/// `√(se_a² + se_b²)`.
pub fn combined_se(a: f64, b: f64) -> f64 {
    a.hypot(b)
}
