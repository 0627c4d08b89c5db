use std::fmt;
use std::sync::{Arc, Mutex, RwLock};

use rug::Float;

use super::gamma::{ln_gamma_ratio, log_gamma_unchecked};
use super::series::CoefficientSeq;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// The fractality pair (μ, β) with 0 < μ ≤ 1 and -μ < β ≤ 1 - μ.
///
/// Clones share a memo of the series coefficients K_n, so passing the same
/// value (or a clone) around amortises the Gamma-product work.
#[derive(Clone)]
pub struct FractalityParams<T: Real> {
    mu: T,
    beta: T,
    memo: Arc<CoefficientMemo<T>>,
}

impl<T: Real> FractalityParams<T> {
    pub fn new(mu: T, beta: T) -> Result<Self> {
        if !(mu > T::zero() && mu <= T::one()) {
            return Err(Error::InvalidParameter(format!(
                "mu must satisfy 0 < mu <= 1 (got mu = {mu})"
            )));
        }
        // rounding slack so that grid values such as beta = 1 - mu are admitted
        let slack = T::lit(4.0) * T::epsilon();
        if !(beta > -mu && beta <= T::one() - mu + slack) {
            return Err(Error::InvalidParameter(format!(
                "beta must satisfy -mu < beta <= 1-mu (got mu = {mu}, beta = {beta})"
            )));
        }
        Ok(Self {
            mu,
            beta,
            memo: Arc::new(CoefficientMemo::default()),
        })
    }

    /// Poisson process: μ = 1, β = 0.
    pub fn poisson() -> Self {
        Self::new(T::one(), T::zero()).expect("valid")
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Exponent of time in λ t^(μ+β).
    pub fn rho(&self) -> T {
        self.mu + self.beta
    }

    /// σ = 1 + β, the stretching exponent of the μ = 1 family.
    pub fn sigma(&self) -> T {
        T::one() + self.beta
    }

    /// First Gamma argument of the k-th factor, kρ + β + 1.
    fn upper_arg(&self, k: usize) -> T {
        T::from_usize_lossy(k) * self.rho() + self.beta + T::one()
    }

    /// Second Gamma argument of the k-th factor, kρ + ρ + 1.
    fn lower_arg(&self, k: usize) -> T {
        T::from_usize_lossy(k + 1) * self.rho() + T::one()
    }

    /// ln Γ(kρ+β+1) - ln Γ(kρ+ρ+1), the log of one factor of K_n.
    pub(crate) fn ln_factor(&self, k: usize) -> T {
        ln_gamma_ratio(self.upper_arg(k), self.lower_arg(k))
    }

    /// The same factor via two independent log-gamma evaluations.
    pub(crate) fn ln_factor_direct(&self, k: usize) -> T {
        log_gamma_unchecked(self.upper_arg(k)) - log_gamma_unchecked(self.lower_arg(k))
    }

    /// `(ln K_n, error scale)` for n = 0..=upto; the error scale is an
    /// absolute error bound on ln K_n in units of machine epsilon.
    pub(crate) fn ln_coefficients(&self, upto: usize) -> Arc<Vec<(T, T)>> {
        {
            let guard = self.memo.native.read().expect("memo lock");
            if guard.len() > upto {
                return Arc::clone(&guard);
            }
        }
        let mut guard = self.memo.native.write().expect("memo lock");
        if guard.len() <= upto {
            let mut table: Vec<(T, T)> = guard.as_ref().clone();
            if table.is_empty() {
                table.push((T::zero(), T::zero()));
            }
            // grow geometrically so repeated small extensions stay cheap
            let target = (upto + 1).max(table.len() * 2).max(64);
            while table.len() < target {
                let k = table.len() - 1;
                let (prev, prev_err) = table[k];
                let b = self.lower_arg(k);
                let step_err = T::lit(6.0) + T::lit(2.0) * (T::one() + b).ln();
                table.push((prev + self.ln_factor(k), prev_err + step_err));
            }
            *guard = Arc::new(table);
        }
        Arc::clone(&guard)
    }

    /// K_0..=K_upto at `prec` bits.
    pub(crate) fn mp_coefficients(&self, upto: usize, prec: u32) -> Arc<Vec<Float>> {
        let mut guard = self.memo.extended.lock().expect("memo lock");
        let len = match guard.as_ref() {
            Some(table) if table.prec >= prec && table.values.len() > upto => {
                return Arc::clone(&table.values);
            }
            // too short: grow geometrically
            Some(table) if table.prec >= prec => (upto + 1).max(2 * table.values.len()),
            // too coarse: same length at the new precision
            Some(table) => (upto + 1).max(table.values.len()),
            None => upto + 1,
        }
        .max(64);
        // round up so that nearby requests share one table
        let prec = prec.div_ceil(128) * 128;
        let values = Arc::new(self.build_mp_coefficients(len, prec));
        *guard = Some(ExtendedTable {
            prec,
            values: Arc::clone(&values),
        });
        values
    }

    fn build_mp_coefficients(&self, len: usize, prec: u32) -> Vec<Float> {
        // guard bits for the rounding accumulated along the product
        let work = prec + 32 + usize::BITS - len.leading_zeros();
        let mu_f = self.mu.to_f64_lossy();
        let beta_f = self.beta.to_f64_lossy();
        let fractions = simple_fraction(mu_f).zip(simple_fraction(beta_f));
        let (mu, beta, step) = match fractions {
            Some(((mn, md), (bn, bd))) => {
                let mu = Float::with_val(work, mn) / md;
                let beta = Float::with_val(work, bn) / bd;
                let den = md * bd;
                let num = mn * bd as i64 + bn * md as i64;
                let g = gcd(num.unsigned_abs(), den);
                let (p, q) = (num.unsigned_abs() / g, den / g);
                let step = (p >= 1 && p <= 256 && q <= 1000).then_some((p as u32, q as u32));
                (mu, beta, step)
            }
            None => (Float::with_val(work, mu_f), Float::with_val(work, beta_f), None),
        };
        let rho = Float::with_val(work, &mu + &beta);
        let upper = |k: usize| Float::with_val(work, &rho * (k as u32)) + &beta + 1u32;
        let lower = |k: usize| Float::with_val(work, &rho * (k as u32 + 1)) + 1u32;
        let mut ratios: Vec<Float> = Vec::with_capacity(len);
        for k in 0..len.saturating_sub(1) {
            let r = match step {
                // Γ(a+p)/Γ(b+p) = Γ(a)/Γ(b) · Π_{j<p} (a+j)/(b+j), with a, b shifted by qρ = p
                Some((p, q)) if k >= q as usize => {
                    let a = upper(k - q as usize);
                    let b = lower(k - q as usize);
                    let mut num = Float::with_val(work, 1);
                    let mut den = Float::with_val(work, 1);
                    for j in 0..p {
                        num *= Float::with_val(work, &a + j);
                        den *= Float::with_val(work, &b + j);
                    }
                    Float::with_val(work, &ratios[k - q as usize] * num) / den
                }
                _ => upper(k).gamma() / lower(k).gamma(),
            };
            ratios.push(r);
        }
        let mut values = Vec::with_capacity(len);
        let mut acc = Float::with_val(work, 1);
        values.push(Float::with_val(prec, &acc));
        for r in &ratios {
            acc *= r;
            values.push(Float::with_val(prec, &acc));
        }
        values
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.max(1)
}

/// n/d with d ≤ 1000 when `v` equals that fraction to within a few units
/// in the last place, found from the continued-fraction convergents.
///
/// Grid values such as 0.3 or -0.9·0.7 are then carried into extended
/// precision as the decimals they denote; the exact fraction also keeps
/// μ + β rational, which enables the shift recurrence for the Gamma ratios.
fn simple_fraction(v: f64) -> Option<(i64, u64)> {
    const MAX_DEN: u64 = 1000;
    if v == 0.0 {
        return Some((0, 1));
    }
    let target = v.abs();
    let tol = 4.0 * f64::EPSILON * target;
    let (mut h0, mut h1, mut k0, mut k1) = (0u64, 1u64, 1u64, 0u64);
    let mut x = target;
    for _ in 0..40 {
        let a = x.floor();
        if a > 1e6 {
            return None;
        }
        let a = a as u64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > MAX_DEN {
            return None;
        }
        if (h2 as f64 / k2 as f64 - target).abs() <= tol {
            let n = h2 as i64;
            return Some((if v < 0.0 { -n } else { n }, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = x - a as f64;
        if frac == 0.0 {
            return None;
        }
        x = 1.0 / frac;
    }
    None
}

impl<T: Real> PartialEq for FractalityParams<T> {
    fn eq(&self, other: &Self) -> bool {
        self.mu == other.mu && self.beta == other.beta
    }
}

impl<T: Real> fmt::Debug for FractalityParams<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FractalityParams")
            .field("mu", &self.mu)
            .field("beta", &self.beta)
            .finish()
    }
}

impl<T: Real> CoefficientSeq<T> for FractalityParams<T> {
    fn ln_coeffs(&self, upto: usize) -> Arc<Vec<(T, T)>> {
        self.ln_coefficients(upto)
    }

    fn mp_coeffs(&self, upto: usize, prec: u32) -> Arc<Vec<Float>> {
        self.mp_coefficients(upto, prec)
    }
}

struct ExtendedTable {
    prec: u32,
    values: Arc<Vec<Float>>,
}

struct CoefficientMemo<T> {
    native: RwLock<Arc<Vec<(T, T)>>>,
    extended: Mutex<Option<ExtendedTable>>,
}

impl<T> Default for CoefficientMemo<T> {
    fn default() -> Self {
        Self {
            native: RwLock::new(Arc::new(Vec::new())),
            extended: Mutex::new(None),
        }
    }
}
