use super::distribution::survival_zero;
use super::spec::ProcessSpec;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::Real;
use crate::specialfn::series::{sum_series, Scale};
use crate::specialfn::{log_gamma_unchecked, SeriesConfig};

/// Interarrival density ψ(τ) = -d/dτ P(0, τ) = λρτ^(ρ-1)·E'(-λτ^ρ).
pub fn interarrival_pdf<T: Real>(spec: &ProcessSpec<T>, tau: T, cfg: &SeriesConfig<T>) -> Result<T> {
    if !(tau > T::zero() && tau.is_finite()) {
        return Err(Error::Domain(format!("interarrival time must be positive, got {tau}")));
    }
    let rho = spec.rho();
    let x = spec.scaled_time(tau)?;
    let factor = spec.rate() * rho * tau.powf(rho - T::one());
    let v = sum_series(spec.params(), 1, -x, Scale::factor(factor), cfg)?.value;
    if v < -T::lit(1e-10) * factor {
        return Err(Error::PrecisionLoss {
            estimated_error: v.abs().to_f64_lossy(),
            value: v.to_f64_lossy(),
        });
    }
    Ok(v.max(T::zero()))
}

/// ∫_a^b f(τ)·ψ(τ) dτ, integrated in the variable x = λτ^ρ so that the
/// τ^(ρ-1) singularity of ψ at the origin disappears.
fn integrate_against_pdf<T: Real, F: Fn(T) -> T>(
    spec: &ProcessSpec<T>,
    upper: T,
    weight: F,
    cfg: &SeriesConfig<T>,
    opts: &QuadOptions<T>,
) -> Result<T> {
    let x_max = spec.scaled_time(upper)?;
    let rho = spec.rho();
    let integrand = |x: T| -> Result<T> {
        let tau = spec.time_for_scaled(x);
        // ψ(τ)·dτ/dx with dτ/dx = τ/(ρx)
        let pdf = interarrival_pdf(spec, tau, cfg)?;
        Ok(weight(tau) * pdf * tau / (rho * x))
    };
    Ok(integrate(integrand, T::zero(), x_max, opts)?.value)
}

/// ∫_0^T ψ(τ) dτ by adaptive quadrature of the density.
pub fn interarrival_cdf_quadrature<T: Real>(spec: &ProcessSpec<T>, upper: T, cfg: &SeriesConfig<T>) -> Result<T> {
    if !(upper >= T::zero()) {
        return Err(Error::Domain(format!("upper limit must be non-negative, got {upper}")));
    }
    if upper == T::zero() {
        return Ok(T::zero());
    }
    integrate_against_pdf(spec, upper, |_| T::one(), cfg, &QuadOptions::default())
}

/// Partial sum of an asymptotic series with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticSum<T> {
    pub value: T,
    /// Magnitude of the first omitted term.
    pub error: T,
    /// Number of terms included.
    pub terms: usize,
}

/// Laplace transform φ(u) = Σ_l (-1)^l ρ(l+1)·λ^(l+1)·Γ(ρ(l+1))·K_{l+1}·u^(-ρ(l+1)).
///
/// The series is treated as asymptotic in large u: summation stops after
/// `terms` terms or as soon as the magnitudes start to grow. The value is
/// the partial sum plus half the first omitted term, which averages the
/// oscillation of the alternating partial sums.
pub fn interarrival_laplace_series<T: Real>(spec: &ProcessSpec<T>, u: T, terms: usize) -> Result<AsymptoticSum<T>> {
    if !(u > T::zero() && u.is_finite()) {
        return Err(Error::Domain(format!("Laplace variable must be positive, got {u}")));
    }
    if terms == 0 {
        return Err(Error::InvalidParameter("at least one term is required".into()));
    }
    let rho = spec.rho();
    let ln_rate = spec.rate().ln();
    let ln_u = u.ln();
    let table = spec.params().ln_coefficients(terms + 1);
    let ln_term = |l: usize| {
        let k = T::from_usize_lossy(l + 1);
        (rho * k).ln() + k * ln_rate + log_gamma_unchecked(rho * k) + table[l + 1].0 - rho * k * ln_u
    };
    let signed = |l: usize, ln_mag: T| {
        let mag = ln_mag.exp();
        if l % 2 == 0 {
            mag
        } else {
            -mag
        }
    };
    let first = ln_term(0);
    if ln_term(1) > first {
        return Err(Error::AsymptoticInvalid(format!(
            "terms grow from the start at u = {u}; the asymptotic series needs larger u"
        )));
    }
    let mut sum = crate::specialfn::series::Neumaier::new();
    let mut prev = first;
    sum.add(signed(0, first));
    let mut included = 1;
    loop {
        let l = included;
        let ln_next = ln_term(l);
        let next = signed(l, ln_next);
        let negligible = next.abs() <= T::epsilon() * T::lit(0.01) * sum.value().abs();
        if included >= terms || ln_next > prev || negligible {
            return Ok(AsymptoticSum {
                value: sum.value() + next * T::lit(0.5),
                error: next.abs(),
                terms: included,
            });
        }
        sum.add(next);
        prev = ln_next;
        included += 1;
    }
}

/// Laplace transform φ(u) = ∫_0^∞ e^{-uτ} ψ(τ) dτ by adaptive quadrature.
///
/// The integral is truncated at a horizon T where e^{-uT}·P(0, T), which
/// bounds the neglected tail, is below 1e-13.
pub fn interarrival_laplace_quadrature<T: Real>(spec: &ProcessSpec<T>, u: T, cfg: &SeriesConfig<T>) -> Result<T> {
    if !(u > T::zero() && u.is_finite()) {
        return Err(Error::Domain(format!("Laplace variable must be positive, got {u}")));
    }
    let tail_tol = T::lit(1e-13);
    let mut horizon = -tail_tol.ln() / u;
    // shrink the horizon into the evaluable range of the survival function
    let mut tail = None;
    for _ in 0..200 {
        match survival_zero(spec, horizon, cfg) {
            Ok(s) => {
                tail = Some((-u * horizon).exp() * s);
                break;
            }
            Err(Error::Domain(_)) | Err(Error::Convergence { .. }) | Err(Error::PrecisionLoss { .. }) => {
                horizon = horizon * T::lit(0.8);
            }
            Err(e) => return Err(e),
        }
    }
    match tail {
        Some(b) if b <= tail_tol => {}
        Some(b) => {
            return Err(Error::Integration(format!(
                "tail beyond the evaluable horizon {horizon} is bounded only by {b:e}"
            )))
        }
        None => return Err(Error::Integration("no evaluable truncation horizon".into())),
    }
    let opts = QuadOptions {
        rel_tol: T::lit(1e-11).max(T::lit(50.0) * T::epsilon()),
        abs_tol: T::lit(1e-14).max(T::lit(50.0) * T::epsilon() * T::epsilon()),
        max_intervals: 600,
    };
    integrate_against_pdf(spec, horizon, |tau| (-u * tau).exp(), cfg, &opts)
}

/// r(t) = σλt^(σ-1) for the μ = 1 family (σ = 1 + β).
pub fn rate_function<T: Real>(spec: &ProcessSpec<T>, t: T) -> Result<T> {
    require_poisson_family(spec)?;
    if !(t > T::zero() && t.is_finite()) {
        return Err(Error::Domain(format!("rate function requires t > 0, got {t}")));
    }
    let sigma = spec.params().sigma();
    Ok(sigma * spec.rate() * t.powf(sigma - T::one()))
}

/// Λ(t) = ∫_0^t r = λt^σ for the μ = 1 family.
///
/// The counting law is Poisson with mean Λ(t)/σ: the series coefficients
/// K_n = 1/(σ^n n!) absorb a factor σ per arrival.
pub fn cumulative_rate<T: Real>(spec: &ProcessSpec<T>, t: T) -> Result<T> {
    require_poisson_family(spec)?;
    spec.scaled_time(t)
}

fn require_poisson_family<T: Real>(spec: &ProcessSpec<T>) -> Result<()> {
    if !spec.is_poisson_family() {
        return Err(Error::Unsupported(format!(
            "rate functions are defined only for mu = 1 (got mu = {})",
            spec.mu()
        )));
    }
    Ok(())
}
