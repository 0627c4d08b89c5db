use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specialfn::FractalityParams;

/// A counting process: fractality parameters plus the rate λ (units of
/// time^-(μ+β)).
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessSpec<T: Real> {
    params: FractalityParams<T>,
    rate: T,
}

impl<T: Real> ProcessSpec<T> {
    pub fn new(params: FractalityParams<T>, rate: T) -> Result<Self> {
        if !(rate > T::zero() && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rate must be positive and finite (got {rate})"
            )));
        }
        Ok(Self { params, rate })
    }

    /// Shorthand for `ProcessSpec::new(FractalityParams::new(mu, beta)?, rate)`.
    pub fn from_parts(mu: T, beta: T, rate: T) -> Result<Self> {
        Self::new(FractalityParams::new(mu, beta)?, rate)
    }

    pub fn params(&self) -> &FractalityParams<T> {
        &self.params
    }

    pub fn rate(&self) -> T {
        self.rate
    }

    pub fn mu(&self) -> T {
        self.params.mu()
    }

    pub fn beta(&self) -> T {
        self.params.beta()
    }

    pub fn rho(&self) -> T {
        self.params.rho()
    }

    /// True for μ = 1, the non-homogeneous Poisson family.
    pub fn is_poisson_family(&self) -> bool {
        self.mu() == T::one()
    }

    /// x = λ t^(μ+β), the argument every series is evaluated at (negated).
    pub fn scaled_time(&self, t: T) -> Result<T> {
        if !(t >= T::zero() && t.is_finite()) {
            return Err(Error::Domain(format!("time must be finite and non-negative, got {t}")));
        }
        if t == T::zero() {
            return Ok(T::zero());
        }
        Ok(self.rate * t.powf(self.rho()))
    }

    /// Inverse of [`scaled_time`](Self::scaled_time): t = (x/λ)^(1/(μ+β)).
    pub fn time_for_scaled(&self, x: T) -> T {
        (x / self.rate).powf(T::one() / self.rho())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_must_be_positive() {
        assert!(ProcessSpec::from_parts(1.0_f64, 0.0, 0.0).is_err());
        assert!(ProcessSpec::from_parts(1.0_f64, 0.0, f64::INFINITY).is_err());
        assert!(ProcessSpec::from_parts(1.0_f64, 0.5, 1.0).is_err());
    }

    #[test]
    fn scaled_time_round_trip() {
        let s = ProcessSpec::from_parts(0.7_f64, 0.1, 2.5).unwrap();
        let x = s.scaled_time(3.0).unwrap();
        assert!((x - 2.5 * 3f64.powf(0.8)).abs() < 1e-14);
        assert!((s.time_for_scaled(x) - 3.0).abs() < 1e-13);
        assert_eq!(s.scaled_time(0.0).unwrap(), 0.0);
        assert!(s.scaled_time(-1.0).is_err());
    }
}
