use rayon::prelude::*;

use super::spec::ProcessSpec;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specialfn::series::Neumaier;
use crate::specialfn::{kilbas_saigo, scaled_deriv, SeriesConfig};

/// Round-off below this magnitude is clamped away from probabilities.
const CLAMP: f64 = 1e-10;
/// Largest table built by [`pmf_table_auto`].
pub const AUTO_N_MAX: usize = 500;

pub(crate) fn clamp_probability<T: Real>(v: T) -> Result<T> {
    let c = T::lit(CLAMP);
    if v < -c || v > T::one() + c || v.is_nan() {
        return Err(Error::PrecisionLoss {
            estimated_error: v.abs().to_f64_lossy(),
            value: v.to_f64_lossy(),
        });
    }
    Ok(v.max(T::zero()).min(T::one()))
}

/// P(n, t) = (x^n/n!)·E^{(n)}(-x) with x = λt^(μ+β).
pub fn pmf<T: Real>(spec: &ProcessSpec<T>, t: T, n: usize, cfg: &SeriesConfig<T>) -> Result<T> {
    let x = spec.scaled_time(t)?;
    if x == T::zero() {
        return Ok(if n == 0 { T::one() } else { T::zero() });
    }
    let v = scaled_deriv(spec.params(), n, -x, T::one(), x, cfg)?;
    clamp_probability(v)
}

/// Probabilities P(0..=n_max, t) and the mass beyond them.
#[derive(Clone, Debug, PartialEq)]
pub struct PMFTable<T: Real> {
    pub spec: ProcessSpec<T>,
    pub t: T,
    pub probs: Vec<T>,
    /// 1 - Σ probs.
    pub tail_mass: T,
}

impl<T: Real> PMFTable<T> {
    pub fn n_max(&self) -> usize {
        self.probs.len() - 1
    }

    /// Cumulative probabilities P(N ≤ n) for n = 0..=n_max.
    pub fn cdf(&self) -> Vec<T> {
        let mut acc = Neumaier::new();
        self.probs
            .iter()
            .map(|&p| {
                acc.add(p);
                acc.value()
            })
            .collect()
    }

    /// Σ n^m P(n) over the tabulated range.
    pub fn truncated_moment(&self, m: u32) -> T {
        let mut acc = Neumaier::new();
        for (n, &p) in self.probs.iter().enumerate() {
            acc.add(T::from_usize_lossy(n).powi(m as i32) * p);
        }
        acc.value()
    }

    fn from_probs(spec: &ProcessSpec<T>, t: T, probs: Vec<T>) -> Result<Self> {
        let mut acc = Neumaier::new();
        for &p in &probs {
            acc.add(p);
        }
        let tail_mass = T::one() - acc.value();
        if tail_mass < -T::lit(1e-8) {
            return Err(Error::PrecisionLoss {
                estimated_error: -tail_mass.to_f64_lossy(),
                value: acc.value().to_f64_lossy(),
            });
        }
        Ok(Self {
            spec: spec.clone(),
            t,
            probs,
            tail_mass,
        })
    }
}

/// P(n, t) for n = 0..=n_max.
pub fn pmf_table<T: Real>(spec: &ProcessSpec<T>, t: T, n_max: usize, cfg: &SeriesConfig<T>) -> Result<PMFTable<T>> {
    spec.scaled_time(t)?;
    let probs = (0..=n_max)
        .into_par_iter()
        .map(|n| pmf(spec, t, n, cfg))
        .collect::<Result<Vec<T>>>()?;
    PMFTable::from_probs(spec, t, probs)
}

/// Extends the table until P(n) < 1e-12·max P for five consecutive n
/// past the mode, or until n = [`AUTO_N_MAX`].
pub fn pmf_table_auto<T: Real>(spec: &ProcessSpec<T>, t: T, cfg: &SeriesConfig<T>) -> Result<PMFTable<T>> {
    let x = spec.scaled_time(t)?;
    if x == T::zero() {
        return PMFTable::from_probs(spec, t, vec![T::one()]);
    }
    let threshold = T::lit(1e-12);
    let mut probs: Vec<T> = Vec::new();
    let mut peak = T::zero();
    let mut quiet = 0usize;
    // evaluate in parallel blocks; the stopping rule is applied in order
    let block = 16;
    'outer: while probs.len() <= AUTO_N_MAX {
        let start = probs.len();
        let end = (start + block).min(AUTO_N_MAX + 1);
        let chunk = (start..end)
            .into_par_iter()
            .map(|n| pmf(spec, t, n, cfg))
            .collect::<Result<Vec<T>>>()?;
        for p in chunk {
            probs.push(p);
            peak = peak.max(p);
            if p < threshold * peak {
                quiet += 1;
                if quiet >= 5 {
                    break 'outer;
                }
            } else {
                quiet = 0;
            }
        }
    }
    PMFTable::from_probs(spec, t, probs)
}

/// Probability of no arrival in [0, t]: E(-λt^(μ+β)).
pub fn survival_zero<T: Real>(spec: &ProcessSpec<T>, t: T, cfg: &SeriesConfig<T>) -> Result<T> {
    let x = spec.scaled_time(t)?;
    if x == T::zero() {
        return Ok(T::one());
    }
    clamp_probability(kilbas_saigo(spec.params(), -x, cfg)?)
}

/// Probability generating function Σ s^n P(n, t) = E(λt^(μ+β)(s-1)), 0 ≤ s ≤ 1.
pub fn pgf<T: Real>(spec: &ProcessSpec<T>, t: T, s: T, cfg: &SeriesConfig<T>) -> Result<T> {
    if !(s >= T::zero() && s <= T::one()) {
        return Err(Error::Domain(format!("pgf requires 0 <= s <= 1, got {s}")));
    }
    let x = spec.scaled_time(t)?;
    kilbas_saigo(spec.params(), x * (s - T::one()), cfg)
}

/// Σ e^{-sn} P(n, t) = E(λt^(μ+β)(e^{-s}-1)).
///
/// Negative `s` is accepted as long as the argument stays inside the
/// series domain, so that derivatives at s = 0 can be formed.
pub fn mgf<T: Real>(spec: &ProcessSpec<T>, t: T, s: T, cfg: &SeriesConfig<T>) -> Result<T> {
    if !s.is_finite() {
        return Err(Error::Domain(format!("mgf requires finite s, got {s}")));
    }
    let x = spec.scaled_time(t)?;
    kilbas_saigo(spec.params(), x * (-s).exp_m1(), cfg)
}
