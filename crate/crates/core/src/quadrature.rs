//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
/// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOptions<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    /// Maximum number of subintervals kept by the adaptive refinement.
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10).max(T::lit(50.0) * T::epsilon()),
            abs_tol: T::lit(1e-14).max(T::lit(50.0) * T::epsilon() * T::epsilon()),
            max_intervals: 400,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn kronrod<T: Real, F: FnMut(T) -> Result<T>>(f: &mut F, a: T, b: T) -> Result<Segment<T>> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let radius = half * (b - a);
    let fc = f(center)?;
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = radius * T::lit(XGK[j]);
        let pair = f(center - dx)? + f(center + dx)?;
        kron = kron + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    Ok(Segment {
        a,
        b,
        value: kron * radius,
        error: ((kron - gauss) * radius).abs(),
    })
}

/// ∫_a^b f(x) dx. Errors raised by `f` abort the integration and are passed through.
pub fn integrate<T: Real, F: FnMut(T) -> Result<T>>(
    mut f: F,
    a: T,
    b: T,
    opts: &QuadOptions<T>,
) -> Result<QuadResult<T>> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(QuadResult {
            value: T::zero(),
            error: T::zero(),
            evaluations: 0,
        });
    }
    if b < a {
        let r = integrate(f, b, a, opts)?;
        return Ok(QuadResult { value: -r.value, ..r });
    }
    let mut segments = vec![kronrod(&mut f, a, b)?];
    let mut evaluations = 15;
    loop {
        let value: T = segments.iter().map(|s| s.value).sum();
        let error: T = segments.iter().map(|s| s.error).sum();
        if !value.is_finite() {
            return Err(Error::Integration("integrand produced a non-finite value".into()));
        }
        if error <= opts.abs_tol.max(opts.rel_tol * value.abs()) {
            return Ok(QuadResult {
                value,
                error,
                evaluations,
            });
        }
        if segments.len() >= opts.max_intervals {
            return Err(Error::Integration(format!(
                "no convergence with {} subintervals (estimated error {:e}, value {:e})",
                segments.len(),
                error.to_f64_lossy(),
                value.to_f64_lossy()
            )));
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |(bi, be), (i, s)| if s.error > be { (i, s.error) } else { (bi, be) });
        let seg = segments.swap_remove(worst);
        let mid = T::lit(0.5) * (seg.a + seg.b);
        if !(mid > seg.a && mid < seg.b) {
            return Err(Error::Integration("subinterval width reached machine resolution".into()));
        }
        segments.push(kronrod(&mut f, seg.a, mid)?);
        segments.push(kronrod(&mut f, mid, seg.b)?);
        evaluations += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x: f64| Ok(x.powi(5) - 3.0 * x * x), -1.0, 2.0, &QuadOptions::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 1.0 / 6.0 - 9.0)).abs() < 1e-13);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn endpoint_singularity_converges() {
        // ∫_0^1 x^{-1/2} dx = 2
        let r = integrate(|x: f64| Ok(1.0 / x.sqrt()), 0.0, 1.0, &QuadOptions::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn oscillatory_and_reversed() {
        let r = integrate(|x: f64| Ok(x.sin()), std::f64::consts::PI, 0.0, &QuadOptions::default()).unwrap();
        assert!((r.value + 2.0).abs() < 1e-12);
    }

    #[test]
    fn integrand_errors_propagate() {
        let r = integrate(|x: f64| if x > 0.5 { Err(Error::Domain("x".into())) } else { Ok(x) }, 0.0, 1.0, &QuadOptions::default());
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn interval_budget_is_reported() {
        let opts = QuadOptions {
            max_intervals: 2,
            ..QuadOptions::default()
        };
        let r = integrate(|x: f64| Ok((50.0 * x).sin().abs()), 0.0, 10.0, &opts);
        assert!(matches!(r, Err(Error::Integration(_))));
    }
}
