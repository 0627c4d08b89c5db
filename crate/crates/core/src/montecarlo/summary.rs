use crate::error::{Error, Result};

/// Moment estimates from a sample, accumulated in one pass.
///
/// `skewness` and `kurtosis_excess` are the population-style ratios
/// m3/m2^{3/2} and m4/m2² - 3 of the central sums; they are NaN when the
/// sample has no spread.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleSummary {
    pub n_samples: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub skewness: f64,
    pub kurtosis_excess: f64,
    pub mean_se: f64,
    pub variance_se: f64,
}

/// Running central sums M2..M4 with pairwise merging.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MomentAccumulator {
    n: u64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl MomentAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        let n1 = self.n as f64;
        self.n += 1;
        let n = self.n as f64;
        let delta = x - self.mean;
        let dn = delta / n;
        let dn2 = dn * dn;
        let t1 = delta * dn * n1;
        self.mean += dn;
        self.m4 += t1 * dn2 * (n * n - 3.0 * n + 3.0) + 6.0 * dn2 * self.m2 - 4.0 * dn * self.m3;
        self.m3 += t1 * dn * (n - 2.0) - 3.0 * dn * self.m2;
        self.m2 += t1;
    }

    /// Combines two disjoint samples.
    pub fn merge(&self, other: &Self) -> Self {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let na = self.n as f64;
        let nb = other.n as f64;
        let n = na + nb;
        let delta = other.mean - self.mean;
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let d4 = d2 * d2;
        let mean = self.mean + delta * nb / n;
        let m2 = self.m2 + other.m2 + d2 * na * nb / n;
        let m3 = self.m3 + other.m3 + d3 * na * nb * (na - nb) / (n * n)
            + 3.0 * delta * (na * other.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + other.m4
            + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * other.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * delta * (na * other.m3 - nb * self.m3) / n;
        Self {
            n: self.n + other.n,
            mean,
            m2,
            m3,
            m4,
        }
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn summary(&self) -> Result<SampleSummary> {
        if self.n < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: self.n as usize,
            });
        }
        let n = self.n as f64;
        let variance = (self.m2 / (n - 1.0)).max(0.0);
        let c2 = self.m2 / n;
        let c4 = self.m4 / n;
        let (skewness, kurtosis_excess) = if c2 > 0.0 {
            (self.m3 / n / c2.powf(1.5), c4 / (c2 * c2) - 3.0)
        } else {
            (f64::NAN, f64::NAN)
        };
        // Var(s²) ≈ (μ4 - (n-3)/(n-1)·σ⁴)/n
        let var_of_var = ((c4 - (n - 3.0) / (n - 1.0) * variance * variance) / n).max(0.0);
        Ok(SampleSummary {
            n_samples: self.n as usize,
            mean: self.mean,
            variance,
            skewness,
            kurtosis_excess,
            mean_se: (variance / n).sqrt(),
            variance_se: var_of_var.sqrt(),
        })
    }
}

impl Extend<f64> for MomentAccumulator {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.push(x);
        }
    }
}

/// Summary statistics of `samples` (at least two values).
pub fn summarize(samples: &[f64]) -> Result<SampleSummary> {
    let mut acc = MomentAccumulator::new();
    acc.extend(samples.iter().copied());
    acc.summary()
}
