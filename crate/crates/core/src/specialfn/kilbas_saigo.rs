//! The three-parameter Kilbas–Saigo function in the (μ, β) family,
//! E(z) = Σ_{n≥0} K_n z^n with
//! K_n = Π_{k<n} Γ(kρ+β+1) / Γ(kρ+ρ+1), ρ = μ+β.

use std::sync::Arc;

use rug::Float;

use super::params::FractalityParams;
use super::series::{sum_series, CoefficientSeq, Scale, SeriesConfig, SeriesValue};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// A coefficient K_n together with its logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesCoeff<T> {
    pub value: T,
    pub ln_value: T,
    /// Set when K_n is positive but below the smallest positive `T`;
    /// `value` is then 0 and only `ln_value` is meaningful.
    pub underflow: bool,
}

/// K_n with its logarithm and an underflow flag.
pub fn ks_series_coeff_detailed<T: Real>(params: &FractalityParams<T>, n: usize) -> SeriesCoeff<T> {
    if n == 0 {
        return SeriesCoeff {
            value: T::one(),
            ln_value: T::zero(),
            underflow: false,
        };
    }
    let ln_value = params.ln_coefficients(n)[n].0;
    let value = ln_value.exp();
    SeriesCoeff {
        value,
        ln_value,
        underflow: value < T::min_positive_value(),
    }
}

/// K_n; returns 0 when K_n underflows (see [`ks_series_coeff_detailed`]).
pub fn ks_series_coeff<T: Real>(params: &FractalityParams<T>, n: usize) -> T {
    let c = ks_series_coeff_detailed(params, n);
    if c.underflow {
        T::zero()
    } else {
        c.value
    }
}

/// `(K_{n+1}/K_n, Γ(nρ+β+1)/Γ(nρ+ρ+1))`: the ratio of consecutive memoised
/// coefficients next to the Gamma ratio evaluated independently.
pub fn ks_coeff_ratio_check<T: Real>(params: &FractalityParams<T>, n: usize) -> (T, T) {
    let table = params.ln_coefficients(n + 1);
    let from_products = (table[n + 1].0 - table[n].0).exp();
    let direct = params.ln_factor_direct(n).exp();
    (from_products, direct)
}

/// E(z) = Σ K_n z^n.
pub fn kilbas_saigo<T: Real>(params: &FractalityParams<T>, z: T, cfg: &SeriesConfig<T>) -> Result<T> {
    kilbas_saigo_deriv(params, 0, z, cfg)
}

/// The `order`-th derivative E^{(order)}(z) = Σ_m ((m+order)!/m!) K_{m+order} z^m.
pub fn kilbas_saigo_deriv<T: Real>(
    params: &FractalityParams<T>,
    order: usize,
    z: T,
    cfg: &SeriesConfig<T>,
) -> Result<T> {
    Ok(sum_series(params, order, z, Scale::unit(), cfg)?.value)
}

/// [`kilbas_saigo_deriv`] with its error bound, term count and working precision.
pub fn kilbas_saigo_deriv_detailed<T: Real>(
    params: &FractalityParams<T>,
    order: usize,
    z: T,
    cfg: &SeriesConfig<T>,
) -> Result<SeriesValue<T>> {
    sum_series(params, order, z, Scale::unit(), cfg)
}

/// The coefficients K_1, K_2, ... relabelled from zero.
struct Tail<'a, T: Real>(&'a FractalityParams<T>);

impl<T: Real> CoefficientSeq<T> for Tail<'_, T> {
    fn ln_coeffs(&self, upto: usize) -> Arc<Vec<(T, T)>> {
        Arc::new(self.0.ln_coefficients(upto + 1)[1..].to_vec())
    }

    fn mp_coeffs(&self, upto: usize, prec: u32) -> Arc<Vec<Float>> {
        Arc::new(self.0.mp_coefficients(upto + 1, prec)[1..].to_vec())
    }
}

/// 1 - E(-x) for x ≥ 0, summed as x·Σ K_{m+1}(-x)^m so that small x keeps
/// full relative accuracy.
pub fn kilbas_saigo_one_minus<T: Real>(params: &FractalityParams<T>, x: T, cfg: &SeriesConfig<T>) -> Result<T> {
    if !(x >= T::zero()) {
        return Err(Error::Domain(format!("kilbas_saigo_one_minus requires x >= 0, got {x}")));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    Ok(sum_series(&Tail(params), 0, -x, Scale::factor(x), cfg)?.value)
}

/// factor · x^n/n! · E^{(n)}(z), evaluated without forming the factors separately.
pub(crate) fn scaled_deriv<T: Real>(
    params: &FractalityParams<T>,
    order: usize,
    z: T,
    factor: T,
    base: T,
    cfg: &SeriesConfig<T>,
) -> Result<T> {
    let scale = Scale {
        factor,
        base,
        power: order,
    };
    Ok(sum_series(params, order, z, scale, cfg)?.value)
}
