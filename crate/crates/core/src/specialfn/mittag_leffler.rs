//! One- and two-parameter Mittag-Leffler functions on the real line.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::Float;

use super::gamma::log_gamma_unchecked;
use super::series::{sum_series, CoefficientSeq, Scale, SeriesConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coefficients 1/Γ(μn+ν).
struct InverseGamma<T> {
    mu: T,
    nu: T,
}

type MpKey = (u64, u64);

fn mp_cache() -> &'static Mutex<HashMap<MpKey, (u32, Arc<Vec<Float>>)>> {
    static CACHE: OnceLock<Mutex<HashMap<MpKey, (u32, Arc<Vec<Float>>)>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl<T: Real> CoefficientSeq<T> for InverseGamma<T> {
    fn ln_coeffs(&self, upto: usize) -> Arc<Vec<(T, T)>> {
        let table = (0..=upto)
            .map(|n| {
                let arg = self.mu * T::from_usize_lossy(n) + self.nu;
                let lg = log_gamma_unchecked(arg);
                (-lg, T::lit(4.0) + lg.abs())
            })
            .collect();
        Arc::new(table)
    }

    fn mp_coeffs(&self, upto: usize, prec: u32) -> Arc<Vec<Float>> {
        let mu = self.mu.to_f64_lossy();
        let nu = self.nu.to_f64_lossy();
        let key = (mu.to_bits(), nu.to_bits());
        let mut cache = mp_cache().lock().expect("coefficient cache lock");
        if let Some((p, values)) = cache.get(&key) {
            if *p >= prec && values.len() > upto {
                return Arc::clone(values);
            }
        }
        let mu_mp = Float::with_val(prec, mu);
        let nu_mp = Float::with_val(prec, nu);
        let len = (upto + 1).max(64);
        let values: Vec<Float> = (0..len)
            .map(|n| {
                let arg = Float::with_val(prec, &mu_mp * (n as u32)) + &nu_mp;
                arg.gamma().recip()
            })
            .collect();
        let values = Arc::new(values);
        if cache.len() > 64 {
            cache.clear();
        }
        cache.insert(key, (prec, Arc::clone(&values)));
        values
    }
}

/// E_μ(z) = Σ z^n / Γ(μn+1) for 0 < μ ≤ 1.
pub fn mittag_leffler<T: Real>(mu: T, z: T, cfg: &SeriesConfig<T>) -> Result<T> {
    if !(mu > T::zero() && mu <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "mittag_leffler requires 0 < mu <= 1, got {mu}"
        )));
    }
    mittag_leffler2(mu, T::one(), z, cfg)
}

/// E_{μ,ν}(z) = Σ z^n / Γ(μn+ν) for μ > 0, ν > 0.
pub fn mittag_leffler2<T: Real>(mu: T, nu: T, z: T, cfg: &SeriesConfig<T>) -> Result<T> {
    if !(mu > T::zero() && mu.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mittag_leffler2 requires mu > 0, got {mu}"
        )));
    }
    if !(nu > T::zero() && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "mittag_leffler2 requires nu > 0, got {nu}"
        )));
    }
    let coeffs = InverseGamma { mu, nu };
    Ok(sum_series(&coeffs, 0, z, Scale::unit(), cfg)?.value)
}
