use super::spec::ProcessSpec;
use crate::combinatorics::frac_polynomial;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Highest raw moment order supported by [`raw_moment`].
pub const MAX_RAW_MOMENT: usize = 8;

/// ⟨N(t)⟩ = K_1·λt^(μ+β), with K_1 = Γ(β+1)/Γ(μ+β+1).
pub fn mean<T: Real>(spec: &ProcessSpec<T>, t: T) -> Result<T> {
    let x = spec.scaled_time(t)?;
    let ln_k1 = spec.params().ln_coefficients(1)[1].0;
    Ok(ln_k1.exp() * x)
}

/// ⟨N(t)^m⟩ = Σ_l S_{μ,β}(m, l)·(λt^(μ+β))^l for 1 ≤ m ≤ 8.
pub fn raw_moment<T: Real>(spec: &ProcessSpec<T>, t: T, m: usize) -> Result<T> {
    if m == 0 {
        return Err(Error::InvalidParameter("moment order must be at least 1".into()));
    }
    if m > MAX_RAW_MOMENT {
        return Err(Error::Unsupported(format!(
            "raw moments are available up to order {MAX_RAW_MOMENT}, requested {m}"
        )));
    }
    let x = spec.scaled_time(t)?;
    frac_polynomial(spec.params(), x, m)
}

/// r_j = K_j / K_1^j for j = 2..=4.
fn coefficient_ratios<T: Real>(spec: &ProcessSpec<T>) -> [T; 3] {
    let ln_k = spec.params().ln_coefficients(4);
    let l1 = ln_k[1].0;
    [2usize, 3, 4].map(|j| (ln_k[j].0 - T::from_usize_lossy(j) * l1).exp())
}

fn check_central_order(m: usize) -> Result<()> {
    match m {
        0 => Err(Error::InvalidParameter("moment order must be at least 1".into())),
        1..=4 => Ok(()),
        _ => Err(Error::Unsupported(format!(
            "central moments are available up to order 4, requested {m}"
        ))),
    }
}

/// ⟨(N - ⟨N⟩)^m⟩ for 1 ≤ m ≤ 4, as polynomials in the mean ⟨N⟩ whose
/// coefficients depend on r_j = K_j/K_1^j only.
pub fn central_moment<T: Real>(spec: &ProcessSpec<T>, t: T, m: usize) -> Result<T> {
    check_central_order(m)?;
    let n = mean(spec, t)?;
    let [r2, r3, r4] = coefficient_ratios(spec);
    let c = T::lit;
    let value = match m {
        1 => T::zero(),
        2 => (c(2.0) * r2 - c(1.0)) * n * n + n,
        3 => (c(6.0) * r3 - c(6.0) * r2 + c(2.0)) * n.powi(3) + (c(6.0) * r2 - c(3.0)) * n * n + n,
        _ => {
            c(3.0) * (c(8.0) * r4 - c(8.0) * r3 + c(4.0) * r2 - c(1.0)) * n.powi(4)
                + c(6.0) * (c(6.0) * r3 - c(4.0) * r2 + c(1.0)) * n.powi(3)
                + c(2.0) * (c(7.0) * r2 - c(2.0)) * n * n
                + n
        }
    };
    Ok(value)
}

/// The same central moment from the binomial expansion Σ_k C(m,k)⟨N^k⟩(-⟨N⟩)^(m-k).
pub fn central_moment_binomial<T: Real>(spec: &ProcessSpec<T>, t: T, m: usize) -> Result<T> {
    check_central_order(m)?;
    let n = mean(spec, t)?;
    let mut acc = (-n).powi(m as i32);
    let mut binom = T::one();
    for k in 1..=m {
        binom = binom * T::from_usize_lossy(m + 1 - k) / T::from_usize_lossy(k);
        acc = acc + binom * raw_moment(spec, t, k)? * (-n).powi((m - k) as i32);
    }
    Ok(acc)
}

pub fn variance<T: Real>(spec: &ProcessSpec<T>, t: T) -> Result<T> {
    Ok(central_moment(spec, t, 2)?.max(T::zero()))
}

fn positive_variance<T: Real>(spec: &ProcessSpec<T>, t: T) -> Result<T> {
    let v = variance(spec, t)?;
    if v <= T::zero() {
        return Err(Error::Degenerate(format!("variance is zero at t = {t}")));
    }
    Ok(v)
}

/// M(3)/M(2)^{3/2}.
pub fn skewness<T: Real>(spec: &ProcessSpec<T>, t: T) -> Result<T> {
    let v = positive_variance(spec, t)?;
    Ok(central_moment(spec, t, 3)? / v.powf(T::lit(1.5)))
}

/// M(4)/M(2)² - 3.
pub fn kurtosis_excess<T: Real>(spec: &ProcessSpec<T>, t: T) -> Result<T> {
    let v = positive_variance(spec, t)?;
    Ok(central_moment(spec, t, 4)? / (v * v) - T::lit(3.0))
}

/// Raw and central moments of orders 1..=4 with the derived shape statistics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentSet<T> {
    /// ⟨N^m⟩ at index m-1.
    pub raw: [T; 4],
    /// ⟨(N-⟨N⟩)^m⟩ at index m-1.
    pub central: [T; 4],
    pub variance: T,
    pub skewness: T,
    pub kurtosis_excess: T,
}

/// All moments at once; fails with a degenerate-distribution error at t = 0.
pub fn moment_set<T: Real>(spec: &ProcessSpec<T>, t: T) -> Result<MomentSet<T>> {
    let mut raw = [T::zero(); 4];
    let mut central = [T::zero(); 4];
    for m in 1..=4 {
        raw[m - 1] = raw_moment(spec, t, m)?;
        central[m - 1] = central_moment(spec, t, m)?;
    }
    Ok(MomentSet {
        raw,
        central,
        variance: variance(spec, t)?,
        skewness: skewness(spec, t)?,
        kurtosis_excess: kurtosis_excess(spec, t)?,
    })
}
