use rug::Float;

use super::stirling::StirlingCache;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specialfn::{kilbas_saigo, FractalityParams, SeriesConfig};

fn cached(cap: usize, m: usize, l: usize) -> Result<(std::sync::Arc<StirlingCache>, usize, usize)> {
    if m > cap {
        return Err(Error::Unsupported(format!(
            "combinatorial index m = {m} exceeds the cap {cap}"
        )));
    }
    Ok((StirlingCache::shared(cap), m, l))
}

/// Working precision for l!·K_l·S(m, l) before the single final rounding.
const PRODUCT_PRECISION: u32 = 128;

fn frac_comb_with<T: Real>(params: &FractalityParams<T>, cache: &StirlingCache, m: usize, l: usize) -> Result<T> {
    if l > m {
        return Ok(T::zero());
    }
    let s = cache.second_kind(m, l)?;
    if *s == 0 {
        return Ok(T::zero());
    }
    let k = params.mp_coefficients(l, PRODUCT_PRECISION);
    let mut v = Float::with_val(PRODUCT_PRECISION, &k[l] * s);
    for j in 2..=l {
        v *= j as u32;
    }
    Ok(T::lit(v.to_f64()))
}

/// Fractional combinatorial number S_{μ,β}(m, l) = l!·K_l·S(m, l).
///
/// Reduces to the Stirling number S(m, l) for μ = 1, β = 0.
pub fn frac_comb_number<T: Real>(params: &FractalityParams<T>, m: usize, l: usize) -> Result<T> {
    let (cache, m, l) = cached(StirlingCache::DEFAULT_CAP, m, l)?;
    frac_comb_with(params, &cache, m, l)
}

/// S_{μ,β}(m, l) for all l ≤ m ≤ cap.
#[derive(Clone, Debug)]
pub struct FracCombTable<T: Real> {
    params: FractalityParams<T>,
    values: Vec<Vec<T>>,
}

impl<T: Real> FracCombTable<T> {
    pub fn new(params: &FractalityParams<T>, cap: usize) -> Result<Self> {
        let cache = StirlingCache::shared(cap);
        let values = (0..=cap)
            .map(|m| (0..=m).map(|l| frac_comb_with(params, &cache, m, l)).collect::<Result<Vec<T>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            params: params.clone(),
            values,
        })
    }

    pub fn params(&self) -> &FractalityParams<T> {
        &self.params
    }

    pub fn cap(&self) -> usize {
        self.values.len() - 1
    }

    /// S_{μ,β}(m, l); zero for l > m, `None` above the cap.
    pub fn get(&self, m: usize, l: usize) -> Option<T> {
        let row = self.values.get(m)?;
        Some(row.get(l).copied().unwrap_or(T::zero()))
    }

    /// Row m as a slice indexed by l = 0..=m.
    pub fn row(&self, m: usize) -> Option<&[T]> {
        self.values.get(m).map(Vec::as_slice)
    }
}

/// B_{μ,β}(x, m) = Σ_l S_{μ,β}(m, l) x^l.
pub fn frac_polynomial<T: Real>(params: &FractalityParams<T>, x: T, m: usize) -> Result<T> {
    let (cache, m, _) = cached(StirlingCache::DEFAULT_CAP, m, 0)?;
    // Horner from the top coefficient
    let mut acc = T::zero();
    for l in (0..=m).rev() {
        acc = acc * x + frac_comb_with(params, &cache, m, l)?;
    }
    Ok(acc)
}

/// B_{μ,β}(m) = B_{μ,β}(1, m).
pub fn frac_number<T: Real>(params: &FractalityParams<T>, m: usize) -> Result<T> {
    frac_polynomial(params, T::one(), m)
}

/// Exponential generating function of the polynomials in m:
/// Σ_m B_{μ,β}(x, m) s^m/m! = E(x(e^s - 1)).
pub fn poly_genfun<T: Real>(params: &FractalityParams<T>, s: T, x: T, cfg: &SeriesConfig<T>) -> Result<T> {
    kilbas_saigo(params, x * s.exp_m1(), cfg)
}
