//! Summation engine for power series Σ c_n z^n with positive coefficients.
//!
//! Every series first runs in the native scalar type with compensated
//! summation and a running rounding-error bound. When cancellation makes
//! that bound exceed the requested tolerance (large negative arguments), or
//! a term overflows, the same series is re-summed in MPFR arithmetic at a
//! precision derived from the observed term magnitudes, raising it until
//! the bound is met or `max_precision_bits` is exhausted.

use std::sync::Arc;

use rug::ops::Pow;
use rug::Float;

use super::gamma::log_gamma_unchecked;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Tolerances and limits shared by all series evaluations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesConfig<T> {
    /// Relative accuracy target for the returned value.
    pub rel_tol: T,
    /// Terms (and results) below this magnitude are treated as negligible.
    pub abs_tol: T,
    pub max_terms: usize,
    /// Largest |z| accepted; beyond it the series is refused with a domain error.
    pub z_abs_max: T,
    /// Ceiling for the extended-precision retry. Zero disables the retry,
    /// so cancellation beyond the native budget is reported as precision loss.
    pub max_precision_bits: u32,
}

impl<T: Real> Default for SeriesConfig<T> {
    fn default() -> Self {
        let floor = T::lit(1e-12);
        let scaled = T::lit(100.0) * T::epsilon();
        Self {
            rel_tol: if scaled > floor { scaled } else { floor },
            abs_tol: T::lit(1e-300).max(T::min_positive_value()),
            max_terms: 2000,
            z_abs_max: T::lit(40.0),
            max_precision_bits: 16_384,
        }
    }
}

impl<T: Real> SeriesConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > T::zero() && self.rel_tol < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol >= T::zero()) {
            return Err(Error::InvalidParameter("abs_tol must be non-negative".into()));
        }
        if self.max_terms < 8 {
            return Err(Error::InvalidParameter("max_terms must be at least 8".into()));
        }
        if !(self.z_abs_max > T::zero()) {
            return Err(Error::InvalidParameter("z_abs_max must be positive".into()));
        }
        Ok(())
    }

    /// Same limits with a different relative tolerance.
    pub fn with_rel_tol(mut self, rel_tol: T) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// Positive series coefficients c_n available as native logs and as MPFR values.
pub(crate) trait CoefficientSeq<T: Real>: Sync {
    /// `(ln c_n, abs error of ln c_n in units of eps)` for n = 0..=upto (at least).
    fn ln_coeffs(&self, upto: usize) -> Arc<Vec<(T, T)>>;
    /// c_n for n = 0..=upto (at least), correct to roughly `prec` bits.
    fn mp_coeffs(&self, upto: usize, prec: u32) -> Arc<Vec<Float>>;
}

/// Prefactor `factor * base^power / power!` applied to a series.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Scale<T> {
    pub factor: T,
    pub base: T,
    pub power: usize,
}

impl<T: Real> Scale<T> {
    pub fn unit() -> Self {
        Self {
            factor: T::one(),
            base: T::one(),
            power: 0,
        }
    }

    pub fn factor(factor: T) -> Self {
        Self {
            factor,
            base: T::one(),
            power: 0,
        }
    }

    fn ln(&self) -> T {
        let mut l = self.factor.ln();
        if self.power > 0 {
            let n = T::from_usize_lossy(self.power);
            l = l + n * self.base.ln() - log_gamma_unchecked(n + T::one());
        }
        l
    }

    fn to_mp(self, prec: u32) -> Float {
        let mut s = Float::with_val(prec, self.factor.to_f64_lossy());
        if self.power > 0 {
            let b = Float::with_val(prec, self.base.to_f64_lossy());
            let pw = b.pow(self.power as u32);
            let fact = Float::with_val(prec, Float::factorial(self.power as u32));
            s *= pw;
            s /= fact;
        }
        s
    }
}

/// Outcome of a series evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesValue<T> {
    pub value: T,
    /// Bound on the absolute rounding error of `value`.
    pub error: T,
    pub terms: usize,
    /// Working precision in bits; zero when the native pass sufficed.
    pub precision_bits: u32,
}

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Neumaier<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Neumaier<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp = self.comp + ((self.sum - t) + x);
        } else {
            self.comp = self.comp + ((x - t) + self.sum);
        }
        self.sum = t;
    }

    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

enum NativeOutcome<T> {
    Accepted(SeriesValue<T>),
    /// Native rounding bound too large. Carries the log of Σ|t| (without
    /// scale) for sizing the retry, plus the rejected value and its bound.
    Retry { ln_abs_sum: T, value: T, error: T },
}

/// Σ_{m≥0} scale · ((m+order)!/m!) c_{m+order} z^m, i.e. the order-th
/// derivative of Σ c_n z^n times the prefactor.
pub(crate) fn sum_series<T: Real>(
    coeffs: &dyn CoefficientSeq<T>,
    order: usize,
    z: T,
    scale: Scale<T>,
    cfg: &SeriesConfig<T>,
) -> Result<SeriesValue<T>> {
    cfg.validate()?;
    if !z.is_finite() {
        return Err(Error::Domain(format!("series argument must be finite, got {z}")));
    }
    if z.abs() > cfg.z_abs_max {
        return Err(Error::Domain(format!(
            "|z| = {} exceeds the supported maximum {}",
            z.abs(),
            cfg.z_abs_max
        )));
    }
    if !(scale.factor > T::zero()) || (scale.power > 0 && !(scale.base > T::zero())) {
        return Err(Error::Domain("series prefactor must be positive".into()));
    }
    let ln_abs_sum = match native_pass(coeffs, order, z, scale, cfg)? {
        NativeOutcome::Accepted(v) => return Ok(v),
        NativeOutcome::Retry { ln_abs_sum, value, error } => {
            if cfg.max_precision_bits == 0 {
                let value = value.to_f64_lossy();
                return Err(Error::PrecisionLoss {
                    estimated_error: error.to_f64_lossy() / value.abs().max(f64::MIN_POSITIVE),
                    value,
                });
            }
            ln_abs_sum
        }
    };
    extended_pass(coeffs, order, z, scale, cfg, ln_abs_sum)
}

fn native_pass<T: Real>(
    coeffs: &dyn CoefficientSeq<T>,
    order: usize,
    z: T,
    scale: Scale<T>,
    cfg: &SeriesConfig<T>,
) -> Result<NativeOutcome<T>> {
    let eps = T::epsilon();
    let ln_max = T::max_value().ln() - T::lit(2.0);
    let ln_scale = scale.ln();
    let ln_abs_z = z.abs().ln();
    let negative = z < T::zero();
    let k = T::from_usize_lossy(order);

    let mut table = coeffs.ln_coeffs(order + 64);
    let mut lnff = log_gamma_unchecked(k + T::one());
    let mut sum = Neumaier::new();
    let mut weighted = T::zero();
    let mut ln_peak = T::neg_infinity();
    let mut ln_abs_sum = T::neg_infinity();
    let mut small_run = 0usize;
    let mut overflow = false;
    let mut last_ln = T::neg_infinity();
    let ln_rel_tol = cfg.rel_tol.ln();

    for m in 0..cfg.max_terms {
        if m > 0 {
            if z == T::zero() {
                let value = sum.value();
                return Ok(NativeOutcome::Accepted(SeriesValue {
                    value,
                    error: eps * weighted,
                    terms: 1,
                    precision_bits: 0,
                }));
            }
            lnff = lnff + (k / T::from_usize_lossy(m)).ln_1p();
        }
        if m + order >= table.len() {
            table = coeffs.ln_coeffs(2 * (m + order) + 1);
        }
        let (lc, ec) = table[m + order];
        let ln_core = if m == 0 {
            lnff + lc
        } else {
            lnff + lc + T::from_usize_lossy(m) * ln_abs_z
        };
        ln_abs_sum = log_add(ln_abs_sum, ln_core);
        let l = ln_scale + ln_core;
        if l > ln_peak {
            ln_peak = l;
        }
        last_ln = l;
        if overflow || l > ln_max {
            // magnitudes only: locate the end of the series for the retry
            overflow = true;
            if l - ln_scale <= ln_abs_sum + ln_rel_tol {
                small_run += 1;
                if small_run >= 3 {
                    return Ok(NativeOutcome::Retry {
                        ln_abs_sum,
                        value: T::nan(),
                        error: T::infinity(),
                    });
                }
            } else {
                small_run = 0;
            }
            continue;
        }
        let mag = l.exp();
        let t = if negative && m % 2 == 1 { -mag } else { mag };
        sum.add(t);
        let w = T::lit(4.0) + l.abs() + ec + T::lit(2.0) * T::from_usize_lossy(m + order);
        weighted = weighted + mag * w;

        let s = sum.value().abs();
        if mag <= cfg.rel_tol * s || mag <= cfg.abs_tol {
            small_run += 1;
            if small_run >= 3 {
                let value = sum.value();
                let error = eps * (weighted + value.abs());
                let budget = (cfg.rel_tol * value.abs()).max(cfg.abs_tol);
                if error <= budget {
                    return Ok(NativeOutcome::Accepted(SeriesValue {
                        value,
                        error,
                        terms: m + 1,
                        precision_bits: 0,
                    }));
                }
                return Ok(NativeOutcome::Retry {
                    ln_abs_sum,
                    value,
                    error,
                });
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::Convergence {
        terms: cfg.max_terms,
        last_term: last_ln.to_f64_lossy().exp(),
    })
}

fn log_add<T: Real>(a: T, b: T) -> T {
    if a == T::neg_infinity() {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

fn extended_pass<T: Real>(
    coeffs: &dyn CoefficientSeq<T>,
    order: usize,
    z: T,
    scale: Scale<T>,
    cfg: &SeriesConfig<T>,
    ln_abs_sum: T,
) -> Result<SeriesValue<T>> {
    let log2_sum = (ln_abs_sum.to_f64_lossy() / std::f64::consts::LN_2).max(0.0);
    let log2_tol = -cfg.rel_tol.to_f64_lossy().log2();
    let mut prec = (64.0 + 2.0 * log2_sum + log2_tol).ceil() as u32;
    prec = prec.min(cfg.max_precision_bits).max(64);
    loop {
        let (value, err, terms) = extended_sum(coeffs, order, z, scale, cfg, prec)?;
        let abs_value = Float::with_val(64, value.abs_ref());
        let rel_budget = abs_value.to_f64() * cfg.rel_tol.to_f64_lossy();
        let budget = rel_budget.max(cfg.abs_tol.to_f64_lossy());
        let err_f = err.to_f64();
        if err_f <= 0.5 * budget || (err_f <= budget && prec >= cfg.max_precision_bits) {
            return finish(value, err_f, terms, prec);
        }
        if prec >= cfg.max_precision_bits {
            return Err(Error::PrecisionLoss {
                estimated_error: err_f / abs_value.to_f64().max(f64::MIN_POSITIVE),
                value: value.to_f64(),
            });
        }
        let shortfall = if budget > 0.0 && err_f.is_finite() {
            (err_f / budget).log2().max(0.0)
        } else {
            prec as f64
        };
        let next = prec as f64 + shortfall + 32.0;
        prec = (next.ceil() as u32).min(cfg.max_precision_bits).max(prec + 32);
        prec = prec.min(cfg.max_precision_bits);
    }
}

fn finish<T: Real>(value: Float, err: f64, terms: usize, prec: u32) -> Result<SeriesValue<T>> {
    let v = value.to_f64();
    if !v.is_finite() {
        return Err(Error::Range(format!(
            "series value {value:.6e} is outside the representable range"
        )));
    }
    Ok(SeriesValue {
        value: T::lit(v),
        error: T::lit(err),
        terms,
        precision_bits: prec,
    })
}

fn extended_sum<T: Real>(
    coeffs: &dyn CoefficientSeq<T>,
    order: usize,
    z: T,
    scale: Scale<T>,
    cfg: &SeriesConfig<T>,
    prec: u32,
) -> Result<(Float, Float, usize)> {
    let zf = Float::with_val(prec, z.to_f64_lossy());
    let scale_mp = scale.to_mp(prec);
    let rel_tol = cfg.rel_tol.to_f64_lossy();
    let abs_tol = Float::with_val(64, cfg.abs_tol.to_f64_lossy()) / Float::with_val(64, scale_mp.abs_ref());

    let mut table = coeffs.mp_coeffs(order + 64, prec);
    let mut zpow = Float::with_val(prec, 1);
    let mut ff = Float::with_val(prec, Float::factorial(order as u32));
    let mut sum = Float::with_val(prec, 0);
    let mut weighted = Float::with_val(64, 0);
    let mut small_run = 0usize;
    let mut term = Float::new(prec);

    for m in 0..cfg.max_terms {
        if m > 0 {
            if z == T::zero() {
                break;
            }
            zpow *= &zf;
            ff *= (m + order) as u32;
            ff /= m as u32;
        }
        if m + order >= table.len() {
            table = coeffs.mp_coeffs(2 * (m + order) + 1, prec);
        }
        term.assign_from(&ff, &table[m + order], &zpow);
        sum += &term;
        let mag = Float::with_val(64, term.abs_ref());
        let w = 8.0 + 6.0 * (m + order) as f64;
        weighted += Float::with_val(64, &mag * w);

        let s = Float::with_val(64, sum.abs_ref());
        if mag <= Float::with_val(64, &s * rel_tol) || mag <= abs_tol {
            small_run += 1;
            if small_run >= 3 {
                return Ok(scaled(sum, weighted, &scale_mp, prec, m + 1));
            }
        } else {
            small_run = 0;
        }
    }
    if z == T::zero() {
        return Ok(scaled(sum, weighted, &scale_mp, prec, 1));
    }
    Err(Error::Convergence {
        terms: cfg.max_terms,
        last_term: term.to_f64(),
    })
}

fn scaled(sum: Float, weighted: Float, scale: &Float, prec: u32, terms: usize) -> (Float, Float, usize) {
    let value = Float::with_val(prec, &sum * scale);
    let ulp = Float::with_val(64, Float::i_exp(1, 1 - prec as i32));
    let mut err = Float::with_val(64, &weighted + Float::with_val(64, sum.abs_ref()));
    err *= Float::with_val(64, scale.abs_ref());
    err *= ulp;
    (value, err, terms)
}

trait AssignProduct {
    fn assign_from(&mut self, a: &Float, b: &Float, c: &Float);
}

impl AssignProduct for Float {
    fn assign_from(&mut self, a: &Float, b: &Float, c: &Float) {
        use rug::Assign;
        self.assign(a * b);
        *self *= c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// c_n = 1/n!, so the series is exp.
    struct ExpCoeffs;

    impl CoefficientSeq<f64> for ExpCoeffs {
        fn ln_coeffs(&self, upto: usize) -> Arc<Vec<(f64, f64)>> {
            Arc::new(
                (0..=upto)
                    .map(|n| (-log_gamma_unchecked(n as f64 + 1.0), 4.0))
                    .collect(),
            )
        }

        fn mp_coeffs(&self, upto: usize, prec: u32) -> Arc<Vec<Float>> {
            let mut v = Vec::with_capacity(upto + 1);
            let mut c = Float::with_val(prec, 1);
            for n in 0..=upto {
                if n > 0 {
                    c /= n as u32;
                }
                v.push(c.clone());
            }
            Arc::new(v)
        }
    }

    fn cfg() -> SeriesConfig<f64> {
        SeriesConfig::default()
    }

    #[test]
    fn neumaier_recovers_cancelled_bits() {
        let mut s = Neumaier::new();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn exponential_positive_and_negative() {
        for &z in &[0.0, 0.5, 3.0, 20.0, -0.5, -3.0, -10.0, -30.0, -40.0] {
            let v = sum_series(&ExpCoeffs, 0, z, Scale::unit(), &cfg()).unwrap();
            let exact = Float::with_val(200, z).exp().to_f64();
            assert!(((v.value - exact) / exact).abs() < 1e-12, "z={z}: {} vs {exact}", v.value);
        }
    }

    #[test]
    fn cancellation_triggers_extended_precision() {
        let v = sum_series(&ExpCoeffs, 0, -25.0, Scale::unit(), &cfg()).unwrap();
        assert!(v.precision_bits > 0);
        let v = sum_series(&ExpCoeffs, 0, 1.0, Scale::unit(), &cfg()).unwrap();
        assert_eq!(v.precision_bits, 0);
    }

    #[test]
    fn derivatives_of_exponential_equal_exponential() {
        for &k in &[1usize, 4, 30] {
            let v = sum_series(&ExpCoeffs, k, -6.0, Scale::unit(), &cfg()).unwrap();
            let exact = (-6.0_f64).exp();
            assert!(((v.value - exact) / exact).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn prefactor_is_applied_without_overflow() {
        // x^n/n! e^{-x} is the Poisson mass; with n = 200 neither factor alone fits
        let x = 30.0;
        let n = 200;
        let v = sum_series(&ExpCoeffs, n, -x, Scale { factor: 1.0, base: x, power: n }, &cfg()).unwrap();
        let exact = {
            let xf = Float::with_val(300, x);
            let num = Float::with_val(300, xf.clone().pow(n as u32)) * Float::with_val(300, (-xf).exp());
            (num / Float::with_val(300, Float::factorial(n as u32))).to_f64()
        };
        assert!(((v.value - exact) / exact).abs() < 1e-12, "{} vs {exact}", v.value);
    }

    #[test]
    fn rejects_out_of_domain_arguments() {
        assert!(matches!(
            sum_series(&ExpCoeffs, 0, -41.0, Scale::unit(), &cfg()),
            Err(Error::Domain(_))
        ));
        assert!(sum_series(&ExpCoeffs, 0, f64::NAN, Scale::unit(), &cfg()).is_err());
    }

    #[test]
    fn disabled_escalation_reports_precision_loss() {
        let c = SeriesConfig {
            max_precision_bits: 0,
            ..cfg()
        };
        match sum_series(&ExpCoeffs, 0, -30.0, Scale::unit(), &c) {
            Err(Error::PrecisionLoss { estimated_error, .. }) => assert!(estimated_error > 1e-12),
            other => panic!("expected precision loss, got {other:?}"),
        }
    }

    #[test]
    fn term_limit_yields_convergence_error() {
        let c = SeriesConfig { max_terms: 10, ..cfg() };
        assert!(matches!(
            sum_series(&ExpCoeffs, 0, 20.0, Scale::unit(), &c),
            Err(Error::Convergence { terms: 10, .. })
        ));
    }

    #[test]
    fn single_precision_series() {
        struct ExpF32;
        impl CoefficientSeq<f32> for ExpF32 {
            fn ln_coeffs(&self, upto: usize) -> Arc<Vec<(f32, f32)>> {
                Arc::new((0..=upto).map(|n| (-log_gamma_unchecked(n as f32 + 1.0), 4.0)).collect())
            }
            fn mp_coeffs(&self, upto: usize, prec: u32) -> Arc<Vec<Float>> {
                ExpCoeffs.mp_coeffs(upto, prec)
            }
        }
        let c = SeriesConfig::<f32>::default();
        let v = sum_series(&ExpF32, 0, -5.0_f32, Scale::unit(), &c).unwrap();
        assert!((v.value - (-5.0_f32).exp()).abs() / (-5.0_f32).exp() < 1e-4);
    }
}
