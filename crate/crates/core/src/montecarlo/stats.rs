use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::rng::{RngSpec, SimRng};
use super::summary::{MomentAccumulator, SampleSummary};
use crate::error::{Error, Result};

/// Draws per RNG stream in [`parallel_draws`].
pub const BATCH_SIZE: usize = 10_000;

/// `n` draws of `draw`, split into batches of [`BATCH_SIZE`] where batch `b`
/// uses stream `b` of `rng`. The output order, and therefore every statistic
/// computed from it, does not depend on the number of worker threads.
pub fn parallel_draws<F>(rng: &RngSpec, n: usize, draw: F) -> Result<Vec<f64>>
where
    F: Fn(&mut SimRng) -> Result<f64> + Sync,
{
    let batches = n.div_ceil(BATCH_SIZE);
    let chunks: Vec<Vec<f64>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut stream = rng.stream(b as u64)?;
            let len = BATCH_SIZE.min(n - b * BATCH_SIZE);
            (0..len).map(|_| draw(&mut stream)).collect()
        })
        .collect::<Result<_>>()?;
    Ok(chunks.concat())
}

/// Summary together with batch-means standard errors for the shape statistics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BatchedSummary {
    pub summary: SampleSummary,
    pub skewness_se: f64,
    pub kurtosis_se: f64,
    pub batches: usize,
}

/// Summarizes `samples` and estimates the spread of skewness and excess
/// kurtosis from `batches` equal contiguous blocks.
pub fn summarize_batched(samples: &[f64], batches: usize) -> Result<BatchedSummary> {
    if batches < 2 || samples.len() < 2 * batches {
        return Err(Error::InsufficientData {
            needed: 2 * batches.max(2),
            got: samples.len(),
        });
    }
    let block = samples.len() / batches;
    let per_block: Vec<MomentAccumulator> = samples
        .chunks(block)
        .take(batches)
        .map(|c| {
            let mut acc = MomentAccumulator::new();
            acc.extend(c.iter().copied());
            acc
        })
        .collect();
    let mut total = MomentAccumulator::new();
    total.extend(samples.iter().copied());
    let summary = total.summary()?;
    let spread = |pick: fn(&SampleSummary) -> f64| -> Result<f64> {
        let mut acc = MomentAccumulator::new();
        for b in &per_block {
            acc.push(pick(&b.summary()?));
        }
        let s = acc.summary()?;
        Ok((s.variance / batches as f64).sqrt())
    };
    Ok(BatchedSummary {
        summary,
        skewness_se: spread(|s| s.skewness)?,
        kurtosis_se: spread(|s| s.kurtosis_excess)?,
        batches,
    })
}

/// Result of Pearson's goodness-of-fit test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson χ² test of integer observations against `probs` (P(0), P(1), ...).
///
/// Adjacent cells are pooled left to right until each expected count reaches
/// `min_expected`; the final cell absorbs every value past the table.
pub fn chi_square_counts(observations: &[usize], probs: &[f64], min_expected: f64) -> Result<ChiSquareTest> {
    let n = observations.len();
    if n == 0 || probs.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: n });
    }
    let mut observed = vec![0usize; probs.len() + 1];
    for &k in observations {
        observed[k.min(probs.len())] += 1;
    }
    let tail = (1.0 - probs.iter().sum::<f64>()).max(0.0);
    let expected: Vec<f64> = probs.iter().chain(std::iter::once(&tail)).map(|p| p * n as f64).collect();

    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o_acc, mut e_acc) = (0.0, 0.0);
    for (o, e) in observed.iter().zip(&expected) {
        o_acc += *o as f64;
        e_acc += e;
        if e_acc >= min_expected {
            cells.push((o_acc, e_acc));
            o_acc = 0.0;
            e_acc = 0.0;
        }
    }
    if e_acc > 0.0 || o_acc > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o_acc;
                last.1 += e_acc;
            }
            None => cells.push((o_acc, e_acc)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::Degenerate("fewer than two cells after pooling".into()));
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: dist.sf(statistic),
    })
}

/// Asymptotic Kolmogorov-Smirnov critical value √(-ln(α/2)/2)/√n.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// sup |F_n(x) - F(x)| over the supplied points, where F_n is the empirical
/// CDF of `sorted` and `points` holds (x, F(x)).
pub fn ks_distance_at(sorted: &[f64], points: &[(f64, f64)]) -> f64 {
    let n = sorted.len() as f64;
    points
        .iter()
        .map(|&(x, f)| {
            let below = sorted.partition_point(|&s| s < x) as f64 / n;
            let at_or_below = sorted.partition_point(|&s| s <= x) as f64 / n;
            (below - f).abs().max((at_or_below - f).abs())
        })
        .fold(0.0, f64::max)
}
