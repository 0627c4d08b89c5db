use proptest::prelude::*;

use fracount::combinatorics::{frac_polynomial, stirling1_signed, stirling2};
use fracount::counting::{mean, pmf_table, survival_zero, variance};
use fracount::montecarlo::{
    parallel_draws, CountSampler, FirstArrival, FirstArrivalSampler, MomentAccumulator, RngSpec,
};
use fracount::specialfn::kilbas_saigo;
use fracount::{Config, Params, Spec};

/// (μ, β) drawn uniformly from the admissible region, kept away from the
/// boundary β = -μ where the coefficients degenerate.
fn params() -> impl Strategy<Value = (f64, f64)> {
    (0.3f64..=1.0, 0.05f64..=1.0).prop_map(|(mu, frac)| {
        (mu, (frac - mu).min(1.0 - mu))
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn pmf_is_a_subprobability((mu, beta) in params(), t in 0.01f64..3.0) {
        let s = Spec::from_parts(mu, beta, 1.0).unwrap();
        let table = pmf_table(&s, t, 30, &Config::default()).unwrap();
        prop_assert!(table.probs.iter().all(|&p| (0.0..=1.0).contains(&p)));
        let total: f64 = table.probs.iter().sum();
        prop_assert!(total <= 1.0 + 1e-12, "sum {}", total);
        prop_assert!(table.tail_mass >= -1e-12);
    }

    #[test]
    fn survival_decreases_in_time((mu, beta) in params(), t in 0.01f64..3.0, dt in 0.01f64..1.0) {
        let s = Spec::from_parts(mu, beta, 1.0).unwrap();
        let cfg = Config::default();
        let a = survival_zero(&s, t, &cfg).unwrap();
        let b = survival_zero(&s, t + dt, &cfg).unwrap();
        prop_assert!(b < a, "{} then {}", a, b);
    }

    #[test]
    fn mean_scales_with_time_power((mu, beta) in params(), t in 0.1f64..3.0, c in 0.1f64..4.0) {
        let s = Spec::from_parts(mu, beta, 1.3).unwrap();
        let scaled = mean(&s, c * t).unwrap();
        prop_assert!(close(scaled, mean(&s, t).unwrap() * c.powf(mu + beta), 1e-12));
        prop_assert!(variance(&s, t).unwrap() > 0.0);
    }

    #[test]
    fn stretched_exponential_reduction(beta in -0.9f64..=0.0, z in -8.0f64..4.0) {
        let p = Params::new(1.0, beta).unwrap();
        let v = kilbas_saigo(&p, z, &Config::default()).unwrap();
        prop_assert!(close(v, (z / (1.0 + beta)).exp(), 1e-10));
    }

    #[test]
    fn unit_mu_bell_polynomials_rescale(beta in -0.9f64..=0.0, x in 0.0f64..3.0, m in 0usize..12) {
        // S_{1,β}(m, l) = S(m, l)/σ^l, so B_{1,β}(x, m) = B_{1,0}(x/σ, m)
        let sigma = 1.0 + beta;
        let lhs = frac_polynomial(&Params::new(1.0, beta).unwrap(), x, m).unwrap();
        let rhs = frac_polynomial(&Params::poisson(), x / sigma, m).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn stirling_recurrences(m in 1usize..=30, l in 1usize..=30) {
        let s2 = stirling2(m, l).unwrap();
        let expected2 = stirling2(m - 1, l).unwrap() * l as u32 + stirling2(m - 1, l - 1).unwrap();
        prop_assert_eq!(s2, expected2);
        let s1 = stirling1_signed(m, l).unwrap();
        let expected1 = stirling1_signed(m - 1, l - 1).unwrap() - stirling1_signed(m - 1, l).unwrap() * (m as u32 - 1);
        prop_assert_eq!(s1, expected1);
    }

    #[test]
    fn accumulator_merge_matches_single_pass(
        data in prop::collection::vec(-1e3f64..1e3, 4..200),
        split in 0.0f64..1.0,
    ) {
        let cut = ((data.len() as f64 * split) as usize).clamp(2, data.len() - 2);
        let mut left = MomentAccumulator::new();
        let mut right = MomentAccumulator::new();
        let mut whole = MomentAccumulator::new();
        left.extend(data[..cut].iter().copied());
        right.extend(data[cut..].iter().copied());
        whole.extend(data.iter().copied());
        let a = left.merge(&right).summary().unwrap();
        let b = whole.summary().unwrap();
        prop_assert!((a.mean - b.mean).abs() <= 1e-9 * (1.0 + b.mean.abs()));
        prop_assert!(close(a.variance, b.variance, 1e-9));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn first_arrival_inversion_is_monotone((mu, beta) in params(), u in 0.02f64..0.98, du in 1e-6f64..0.01) {
        let s = Spec::from_parts(mu, beta, 1.0).unwrap();
        let sampler = FirstArrivalSampler::new(&s, &Config::default()).unwrap();
        let (Ok(a), Ok(b)) = (sampler.invert(u), sampler.invert((u + du).min(0.999))) else {
            return Ok(());
        };
        if let (FirstArrival::Exact(a), FirstArrival::Exact(b)) = (a, b) {
            prop_assert!(b <= a, "S^-1({}) = {} but S^-1(larger) = {}", u, a, b);
        }
    }

    #[test]
    fn draws_depend_only_on_the_seed(seed in any::<u64>(), (mu, beta) in params()) {
        let s = Spec::from_parts(mu, beta, 1.0).unwrap();
        let sampler = CountSampler::new(&s, 1.0, &Config::default()).unwrap();
        let draw = |r: &mut fracount::montecarlo::SimRng| Ok(sampler.sample(r) as f64);
        let a = parallel_draws(&RngSpec::new(seed), 25_000, draw).unwrap();
        let b = parallel_draws(&RngSpec::new(seed), 25_000, draw).unwrap();
        prop_assert_eq!(a, b);
    }
}
