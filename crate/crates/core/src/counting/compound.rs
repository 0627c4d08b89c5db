use rand::RngCore;
use rand_distr::{Distribution, Exp, Normal};

use super::moments::mean;
use super::spec::ProcessSpec;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specialfn::{kilbas_saigo, SeriesConfig};

/// Law of the i.i.d. jumps Y of a compound process.
pub trait JumpDistribution<T: Real>: Send + Sync {
    /// g(s) = ⟨e^{sY}⟩; a domain error where it diverges.
    fn mgf(&self, s: T) -> Result<T>;
    fn mean(&self) -> T;
    fn sample(&self, rng: &mut dyn RngCore) -> T;
}

/// Y ≡ value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DegenerateJump<T>(pub T);

impl<T: Real> JumpDistribution<T> for DegenerateJump<T> {
    fn mgf(&self, s: T) -> Result<T> {
        Ok((s * self.0).exp())
    }

    fn mean(&self) -> T {
        self.0
    }

    fn sample(&self, _rng: &mut dyn RngCore) -> T {
        self.0
    }
}

/// Exponential jumps with the given rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentialJump<T> {
    rate: T,
    dist: Exp<f64>,
}

impl<T: Real> ExponentialJump<T> {
    pub fn new(rate: T) -> Result<Self> {
        let dist = Exp::new(rate.to_f64_lossy())
            .ok()
            .filter(|_| rate > T::zero() && rate.is_finite())
            .ok_or_else(|| Error::InvalidParameter(format!("exponential jump rate must be positive, got {rate}")))?;
        Ok(Self { rate, dist })
    }
}

impl<T: Real> JumpDistribution<T> for ExponentialJump<T> {
    fn mgf(&self, s: T) -> Result<T> {
        if s >= self.rate {
            return Err(Error::Domain(format!(
                "exponential jump mgf diverges for s >= {}",
                self.rate
            )));
        }
        Ok(self.rate / (self.rate - s))
    }

    fn mean(&self) -> T {
        self.rate.recip()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> T {
        T::lit(self.dist.sample(rng))
    }
}

/// Normal jumps N(mean, sd²).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalJump<T> {
    mean: T,
    sd: T,
    dist: Normal<f64>,
}

impl<T: Real> NormalJump<T> {
    pub fn new(mean: T, sd: T) -> Result<Self> {
        if !(sd >= T::zero() && sd.is_finite() && mean.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "normal jump needs finite mean and sd >= 0, got ({mean}, {sd})"
            )));
        }
        let dist = Normal::new(mean.to_f64_lossy(), sd.to_f64_lossy())
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        Ok(Self { mean, sd, dist })
    }
}

impl<T: Real> JumpDistribution<T> for NormalJump<T> {
    fn mgf(&self, s: T) -> Result<T> {
        Ok((self.mean * s + T::lit(0.5) * self.sd * self.sd * s * s).exp())
    }

    fn mean(&self) -> T {
        self.mean
    }

    fn sample(&self, rng: &mut dyn RngCore) -> T {
        T::lit(self.dist.sample(rng))
    }
}

/// J(s, t) = ⟨e^{sX(t)}⟩ = E(λt^(μ+β)·(g(s) - 1)) for the compound sum X(t).
pub fn compound_mgf<T: Real, G: Fn(T) -> Result<T>>(
    spec: &ProcessSpec<T>,
    t: T,
    jump_mgf: G,
    s: T,
    cfg: &SeriesConfig<T>,
) -> Result<T> {
    let at_zero = jump_mgf(T::zero())?;
    if (at_zero - T::one()).abs() > T::lit(1e-12) {
        return Err(Error::InvalidParameter(format!(
            "jump mgf must equal 1 at s = 0, got {at_zero}"
        )));
    }
    let g = jump_mgf(s)?;
    if !g.is_finite() {
        return Err(Error::Domain(format!("jump mgf is not finite at s = {s}")));
    }
    let x = spec.scaled_time(t)?;
    kilbas_saigo(spec.params(), x * (g - T::one()), cfg)
}

/// ⟨X(t)⟩ = ⟨Y⟩·⟨N(t)⟩.
pub fn compound_mean<T: Real>(spec: &ProcessSpec<T>, t: T, jump_mean: T) -> Result<T> {
    Ok(jump_mean * mean(spec, t)?)
}
