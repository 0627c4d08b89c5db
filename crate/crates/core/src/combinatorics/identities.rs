//! Stirling-number representations of the Kilbas–Saigo function.
//!
//! The alternating sums Σ_l s(m,l)·B_{μ,β}(l) cancel catastrophically (the
//! terms exceed the result by many orders of magnitude already for m ≈ 12),
//! so everything here runs in MPFR arithmetic. The working precision comes
//! from a cheap 64-bit pass that measures the ratio of Σ|terms| to the result.

use rug::{Float, Integer};

use super::stirling::StirlingCache;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specialfn::FractalityParams;

const MAX_ORDER: usize = 1000;
const MAX_PRECISION: u32 = 1 << 17;
const STABILITY_TOL: f64 = 1e-10;

/// r!·K_r for r = 0..=upto.
fn weighted_coefficients<T: Real>(params: &FractalityParams<T>, upto: usize, prec: u32) -> Vec<Float> {
    let k = params.mp_coefficients(upto, prec);
    let mut fact = Float::with_val(prec, 1);
    (0..=upto)
        .map(|r| {
            if r > 0 {
                fact *= r as u32;
            }
            Float::with_val(prec, &fact * &k[r])
        })
        .collect()
}

/// B_{μ,β}(l) = Σ_r r!K_r S(l,r) for l = 0..=upto; all terms positive.
fn frac_numbers(weights: &[Float], cache: &StirlingCache, upto: usize, prec: u32) -> Vec<Float> {
    (0..=upto)
        .map(|l| {
            let mut acc = Float::with_val(prec, 0);
            for (r, s) in cache.second_row(l).iter().enumerate() {
                if *s != 0 {
                    acc += Float::with_val(prec, &weights[r] * s);
                }
            }
            acc
        })
        .collect()
}

/// log2 of Σ_l |s(m,l)| B(l) / (m! K_m), the bits lost to cancellation in row m.
fn cancellation_bits(row: &[Integer], numbers: &[Float], weights_m: &Float) -> f64 {
    let mut abs = Float::with_val(64, 0);
    for (l, s) in row.iter().enumerate() {
        abs += Float::with_val(64, &numbers[l] * Integer::from(s.abs_ref()));
    }
    let ratio = abs / weights_m;
    ratio.log2().to_f64().max(0.0)
}

fn working_precision<T: Real>(params: &FractalityParams<T>, cache: &StirlingCache, upto: usize) -> Result<u32> {
    let weights = weighted_coefficients(params, upto, 64);
    let numbers = frac_numbers(&weights, cache, upto, 64);
    let worst = (0..=upto)
        .map(|m| cancellation_bits(cache.first_row(m), &numbers, &weights[m]))
        .fold(0.0_f64, f64::max);
    let bits = 128.0 + worst + 2.0 * ((upto + 2) as f64).log2();
    if bits > MAX_PRECISION as f64 {
        return Err(Error::PrecisionLoss {
            estimated_error: f64::INFINITY,
            value: f64::NAN,
        });
    }
    Ok(bits.ceil() as u32)
}

fn check_order(m: usize, cap: usize) -> Result<()> {
    if m > cap {
        return Err(Error::Unsupported(format!("order {m} exceeds the cap {cap}")));
    }
    Ok(())
}

/// Both sides of Σ_l s(m,l)·B_{μ,β}(l) = m!·K_m.
pub fn ks_identity_sides<T: Real>(params: &FractalityParams<T>, m: usize) -> Result<(T, T)> {
    check_order(m, StirlingCache::DEFAULT_CAP)?;
    let cache = StirlingCache::shared(StirlingCache::DEFAULT_CAP);
    let prec = working_precision(params, &cache, m)?;
    let weights = weighted_coefficients(params, m, prec);
    let numbers = frac_numbers(&weights, &cache, m, prec);
    let mut left = Float::with_val(prec, 0);
    for (l, s) in cache.first_row(m).iter().enumerate() {
        left += Float::with_val(prec, &numbers[l] * s);
    }
    Ok((T::lit(left.to_f64()), T::lit(weights[m].to_f64())))
}

/// Both sides of Σ_l Σ_r s(m,l)·S_{μ,β}(l,r) = m!·K_m, the double sum taken
/// term by term without forming the fractional numbers first.
pub fn ks_identity_sides_double<T: Real>(params: &FractalityParams<T>, m: usize) -> Result<(T, T)> {
    check_order(m, StirlingCache::DEFAULT_CAP)?;
    let cache = StirlingCache::shared(StirlingCache::DEFAULT_CAP);
    let prec = working_precision(params, &cache, m)?;
    let weights = weighted_coefficients(params, m, prec);
    let mut left = Float::with_val(prec, 0);
    for (l, s1) in cache.first_row(m).iter().enumerate() {
        for (r, s2) in cache.second_row(l).iter().enumerate() {
            if *s2 == 0 {
                continue;
            }
            let comb = Float::with_val(prec, &weights[r] * s2);
            left += Float::with_val(prec, &comb * s1);
        }
    }
    Ok((T::lit(left.to_f64()), T::lit(weights[m].to_f64())))
}

/// E(z) ≈ Σ_{m ≤ m_max} (z^m/m!) Σ_l s(m,l)·B_{μ,β}(l).
///
/// Fails with a convergence error when the last two retained terms are not
/// negligible (relative 1e-10) against the sum.
pub fn ks_via_stirling<T: Real>(params: &FractalityParams<T>, z: T, m_max: usize) -> Result<T> {
    check_order(m_max, MAX_ORDER)?;
    if !z.is_finite() {
        return Err(Error::Domain(format!("argument must be finite, got {z}")));
    }
    if z == T::zero() {
        return Ok(T::one());
    }
    let cache = StirlingCache::shared(m_max);
    let zf = z.to_f64_lossy();
    // the powers z^m/m! scale each row but never cancel across rows
    let prec = working_precision(params, &cache, m_max)? + 64;
    let weights = weighted_coefficients(params, m_max, prec);
    let numbers = frac_numbers(&weights, &cache, m_max, prec);
    let zmp = Float::with_val(prec, zf);
    let mut scale = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 0);
    let mut tail = [Float::with_val(64, 0), Float::with_val(64, 0)];
    for m in 0..=m_max {
        if m > 0 {
            scale *= &zmp;
            scale /= m as u32;
        }
        let mut inner = Float::with_val(prec, 0);
        for (l, s) in cache.first_row(m).iter().enumerate() {
            inner += Float::with_val(prec, &numbers[l] * s);
        }
        let term = Float::with_val(prec, &inner * &scale);
        sum += &term;
        tail[m % 2] = Float::with_val(64, term.abs_ref());
    }
    let total = Float::with_val(64, sum.abs_ref());
    let threshold = Float::with_val(64, &total * STABILITY_TOL);
    let last = tail[0].clone().max(&tail[1]);
    if m_max < 1 || last > threshold {
        return Err(Error::Convergence {
            terms: m_max + 1,
            last_term: last.to_f64(),
        });
    }
    Ok(T::lit(sum.to_f64()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::{kilbas_saigo, ks_series_coeff, mittag_leffler, SeriesConfig};

    fn p(mu: f64, beta: f64) -> FractalityParams<f64> {
        FractalityParams::new(mu, beta).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        ((a - b) / b).abs() <= tol
    }

    #[test]
    fn identity_examples() {
        let (a, b) = ks_identity_sides(&p(1.0, 0.0), 3).unwrap();
        assert!(close(a, 1.0, 1e-14) && close(b, 1.0, 1e-14));
        let (a, b) = ks_identity_sides(&p(0.4, 0.3), 0).unwrap();
        assert_eq!((a, b), (1.0, 1.0));
        let q = p(0.5, 0.0);
        let (a, b) = ks_identity_sides(&q, 2).unwrap();
        let k2 = ks_series_coeff(&q, 2);
        assert!(close(b, 2.0 * k2, 1e-14));
        assert!(close(a, b, 1e-14));
    }

    #[test]
    fn identities_hold_with_heavy_cancellation() {
        for &(mu, beta) in &[(0.3, -0.27), (0.5, 0.25), (0.7, 0.0), (1.0, -0.9)] {
            let q = p(mu, beta);
            for m in 0..=16 {
                let (a, b) = ks_identity_sides(&q, m).unwrap();
                assert!(close(a, b, 1e-12), "({mu},{beta}) m={m}: {a} vs {b}");
                let (c, d) = ks_identity_sides_double(&q, m).unwrap();
                assert!(close(c, d, 1e-12) && d == b);
            }
        }
    }

    #[test]
    fn stirling_representation_examples() {
        let v = ks_via_stirling(&p(1.0, 0.0), 1.0, 20).unwrap();
        assert!(close(v, std::f64::consts::E, 1e-8));
        assert_eq!(ks_via_stirling(&p(0.6, 0.2), 0.0, 20).unwrap(), 1.0);
        let cfg = SeriesConfig::default();
        let v = ks_via_stirling(&p(0.5, 0.0), -0.5, 20).unwrap();
        assert!(close(v, mittag_leffler(0.5, -0.5, &cfg).unwrap(), 1e-8));
    }

    #[test]
    fn slow_coefficient_decay_needs_more_orders() {
        let q = p(0.3, -0.27);
        assert!(matches!(ks_via_stirling(&q, 1.0, 20), Err(Error::Convergence { .. })));
        let cfg = SeriesConfig::default();
        let v = ks_via_stirling(&q, -1.0, 250).unwrap();
        assert!(close(v, kilbas_saigo(&q, -1.0, &cfg).unwrap(), 1e-10));
    }

    #[test]
    fn order_cap() {
        assert!(matches!(ks_identity_sides(&p(0.5, 0.0), 31), Err(Error::Unsupported(_))));
        assert!(matches!(ks_via_stirling(&p(0.5, 0.0), 0.5, 1001), Err(Error::Unsupported(_))));
    }
}
