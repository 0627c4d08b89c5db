use super::*;
use crate::counting::{mean, survival_zero, DegenerateJump, ExponentialJump, ProcessSpec};
use crate::error::Error;
use crate::specialfn::{mittag_leffler, SeriesConfig};

fn spec(mu: f64, beta: f64, rate: f64) -> ProcessSpec<f64> {
    ProcessSpec::from_parts(mu, beta, rate).unwrap()
}

fn cfg() -> SeriesConfig<f64> {
    SeriesConfig::default()
}

fn within(summary: &SampleSummary, target: f64, k: f64) -> bool {
    (summary.mean - target).abs() <= k * summary.mean_se
}

#[test]
fn poisson_counts_have_unit_mean() {
    let sampler = CountSampler::new(&spec(1.0, 0.0, 1.0), 1.0, &cfg()).unwrap();
    let draws = parallel_draws(&RngSpec::new(7), 200_000, |r| Ok(sampler.sample(r) as f64)).unwrap();
    let s = summarize(&draws).unwrap();
    assert!(within(&s, 1.0, 3.0), "{s:?}");
    assert!((s.variance - 1.0).abs() <= 3.0 * s.variance_se, "{s:?}");
}

#[test]
fn counts_at_time_zero_vanish() {
    let mut rng = RngSpec::new(1).stream(0).unwrap();
    for _ in 0..100 {
        assert_eq!(sample_count(&spec(0.6, 0.2, 1.0), 0.0, &mut rng, &cfg()).unwrap(), 0);
    }
}

#[test]
fn fractional_count_mean() {
    let s = spec(0.7, 0.1, 1.0);
    let sampler = CountSampler::new(&s, 1.0, &cfg()).unwrap();
    let draws = parallel_draws(&RngSpec::new(11), 200_000, |r| Ok(sampler.sample(r) as f64)).unwrap();
    let sum = summarize(&draws).unwrap();
    assert!(within(&sum, mean(&s, 1.0).unwrap(), 3.0), "{sum:?}");
}

#[test]
fn exponential_first_arrival() {
    let sampler = FirstArrivalSampler::new(&spec(1.0, 0.0, 2.0), &cfg()).unwrap();
    let draws = parallel_draws(&RngSpec::new(3), 50_000, |r| Ok(sampler.sample(r)?.time())).unwrap();
    let s = summarize(&draws).unwrap();
    assert!(within(&s, 0.5, 3.0), "{s:?}");
}

fn fraction_above(draws: &[f64], tau: f64) -> f64 {
    draws.iter().filter(|&&d| d > tau).count() as f64 / draws.len() as f64
}

#[test]
fn stretched_and_mittag_leffler_first_arrivals() {
    let n = 40_000;
    let sampler = FirstArrivalSampler::new(&spec(1.0, -0.5, 1.0), &cfg()).unwrap();
    let draws = parallel_draws(&RngSpec::new(5), n, |r| Ok(sampler.sample(r)?.time())).unwrap();
    let p = (-2.0f64).exp();
    let sd = (p * (1.0 - p) / n as f64).sqrt();
    assert!((fraction_above(&draws, 1.0) - p).abs() < 3.0 * sd);

    let sampler = FirstArrivalSampler::new(&spec(0.5, 0.0, 1.0), &cfg()).unwrap();
    let draws = parallel_draws(&RngSpec::new(6), n, |r| Ok(sampler.sample(r)?.time())).unwrap();
    let p = mittag_leffler(0.5, -1.0, &cfg()).unwrap();
    let sd = (p * (1.0 - p) / n as f64).sqrt();
    assert!((fraction_above(&draws, 1.0) - p).abs() < 3.0 * sd);
}

#[test]
fn inversion_is_accurate() {
    for &(mu, beta) in &[(1.0, 0.0), (0.7, 0.2), (0.5, -0.4), (0.3, 0.35), (0.5, 0.5)] {
        let s = spec(mu, beta, 1.0);
        let sampler = FirstArrivalSampler::new(&s, &cfg()).unwrap();
        for &u in &[0.999_999, 0.9, 0.5, 0.2, 0.05] {
            match sampler.invert(u) {
                Err(Error::Range(_)) => {
                    assert!(survival_zero(&s, FIRST_ARRIVAL_MAX_TIME, &cfg()).unwrap() > u);
                }
                Err(e) => panic!("({mu},{beta}) u={u}: {e}"),
                Ok(FirstArrival::Exact(tau)) => {
                    let back = survival_zero(&s, tau, &cfg()).unwrap();
                    assert!((back - u).abs() <= 1e-9 * u, "({mu},{beta}) u={u}: {back}");
                }
                Ok(FirstArrival::Censored(tau)) => {
                    assert!(survival_zero(&s, tau, &cfg()).unwrap() > u);
                }
            }
        }
    }
}

#[test]
fn table_matches_exact_inversion() {
    for &(mu, beta) in &[(1.0, -0.9), (0.7, -0.63), (0.5, 0.25), (0.3, 0.0)] {
        let sampler = FirstArrivalSampler::new(&spec(mu, beta, 1.0), &cfg()).unwrap();
        assert!(sampler.interpolation_error() <= 0.1 * FIRST_ARRIVAL_REL_TOL);
        for i in 1..50 {
            let u = 1.0 - (i as f64 / 50.0).powi(3);
            match (sampler.invert(u), sampler.invert_exact(u)) {
                (Ok(FirstArrival::Exact(a)), Ok(FirstArrival::Exact(b))) => {
                    assert!(((a - b) / b).abs() <= FIRST_ARRIVAL_REL_TOL, "({mu},{beta}) u={u}: {a} vs {b}");
                }
                (Ok(a), Ok(b)) => assert!(a.is_censored() && b.is_censored()),
                (Err(Error::Range(_)), Err(Error::Range(_))) => assert!(u < sampler.horizon_survival()),
                (a, b) => panic!("({mu},{beta}) u={u}: {a:?} vs {b:?}"),
            }
        }
        let tiny = sampler.invert(1.0 - 1e-15).unwrap().time();
        let exact = sampler.invert_exact(1.0 - 1e-15).unwrap().time();
        assert!(((tiny - exact) / exact).abs() <= 1e-6, "({mu},{beta}) {tiny} vs {exact}");
    }
}

#[test]
fn heavy_tails_are_censored_not_invented() {
    let s = spec(0.3, 0.0, 1.0);
    let sampler = FirstArrivalSampler::new(&s, &cfg()).unwrap();
    let edge = sampler.horizon_survival();
    assert!(edge > 0.0);
    let out = sampler.invert(edge / 2.0).unwrap();
    assert!(out.is_censored());
    assert_eq!(out.time(), sampler.horizon());
}

#[test]
fn poisson_path_counts_pass_chi_square() {
    let s = spec(1.0, 0.0, 1.0);
    let draws = parallel_draws(&RngSpec::new(21), 20_000, |r| {
        Ok(simulate_path_classical(&s, 10.0, r)?.len() as f64)
    })
    .unwrap();
    let counts: Vec<usize> = draws.iter().map(|&d| d as usize).collect();
    let table = crate::counting::pmf_table(&s, 10.0, 40, &cfg()).unwrap();
    let test = chi_square_counts(&counts, &table.probs, 5.0).unwrap();
    assert!(test.p_value > 1e-3, "{test:?}");
}

#[test]
fn classical_path_means() {
    let s = spec(1.0, -0.5, 1.0);
    let draws = parallel_draws(&RngSpec::new(22), 40_000, |r| {
        Ok(simulate_path_classical(&s, 4.0, r)?.len() as f64)
    })
    .unwrap();
    assert!(within(&summarize(&draws).unwrap(), 4.0, 3.0));

    let s = spec(0.5, 0.0, 1.0);
    let draws = parallel_draws(&RngSpec::new(23), 40_000, |r| {
        Ok(simulate_path_classical(&s, 1.0, r)?.len() as f64)
    })
    .unwrap();
    let target = 1.0 / crate::specialfn::log_gamma(1.5f64).unwrap().exp();
    assert!(within(&summarize(&draws).unwrap(), target, 3.0));
}

#[test]
fn paths_are_increasing_and_bounded() {
    let mut rng = RngSpec::new(9).stream(0).unwrap();
    let times = simulate_path_classical(&spec(0.6, 0.0, 2.0), 5.0, &mut rng).unwrap();
    assert!(times.windows(2).all(|w| w[0] < w[1]));
    assert!(times.iter().all(|&t| t > 0.0 && t <= 5.0));
}

#[test]
fn general_paths_are_unsupported() {
    let mut rng = RngSpec::new(1).stream(0).unwrap();
    let r = simulate_path_classical(&spec(0.5, 0.2, 1.0), 1.0, &mut rng);
    assert!(matches!(r, Err(Error::Unsupported(_))));
}

#[test]
fn compound_sums() {
    let mut rng = RngSpec::new(2).stream(0).unwrap();
    let zero = DegenerateJump(0.0);
    for _ in 0..50 {
        assert_eq!(sample_compound(&spec(0.6, 0.1, 1.0), 1.5, &zero, &mut rng, &cfg()).unwrap(), 0.0);
    }
    let three = DegenerateJump(3.0);
    let sampler = CompoundSampler::new(&spec(1.0, 0.0, 1.0), 2.0, &three, &cfg()).unwrap();
    let draws = parallel_draws(&RngSpec::new(4), 100_000, |r| Ok(sampler.sample(r))).unwrap();
    assert!(within(&summarize(&draws).unwrap(), 6.0, 3.0));

    let exp = ExponentialJump::new(1.0).unwrap();
    let sampler = CompoundSampler::new(&spec(0.5, 0.0, 1.0), 1.0, &exp, &cfg()).unwrap();
    let draws = parallel_draws(&RngSpec::new(8), 100_000, |r| Ok(sampler.sample(r))).unwrap();
    let target = 1.0 / crate::specialfn::log_gamma(1.5f64).unwrap().exp();
    assert!(within(&summarize(&draws).unwrap(), target, 3.0));
}

#[test]
fn draws_do_not_depend_on_thread_count() {
    let sampler = CountSampler::new(&spec(0.7, 0.1, 1.0), 2.0, &cfg()).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| parallel_draws(&RngSpec::new(99), 35_000, |r| Ok(sampler.sample(r) as f64)).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a.len(), 35_000);
    assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn batched_shape_errors_are_finite() {
    let sampler = CountSampler::new(&spec(1.0, 0.0, 1.0), 1.0, &cfg()).unwrap();
    let draws = parallel_draws(&RngSpec::new(12), 100_000, |r| Ok(sampler.sample(r) as f64)).unwrap();
    let b = summarize_batched(&draws, 50).unwrap();
    // Poisson(1): skewness 1, excess kurtosis 1
    assert!((b.summary.skewness - 1.0).abs() < 4.0 * b.skewness_se, "{b:?}");
    assert!((b.summary.kurtosis_excess - 1.0).abs() < 4.0 * b.kurtosis_se, "{b:?}");
}

#[test]
fn ks_helpers() {
    assert!((ks_critical_value(100, 0.001) - 0.19495).abs() < 1e-4);
    let sorted: Vec<f64> = (1..=100).map(|i| i as f64 / 100.0).collect();
    let pts: Vec<(f64, f64)> = (1..10).map(|i| (i as f64 / 10.0, i as f64 / 10.0)).collect();
    assert!(ks_distance_at(&sorted, &pts) <= 0.0100001);
}
