//! One function per subcommand, each returning a [`Report`].

use serde_json::{json, Value};

use fracount::combinatorics::{frac_polynomial, stirling1_signed, stirling2, FracCombTable, Integer};
use fracount::counting::{
    compound_mean, interarrival_laplace_quadrature, interarrival_laplace_series, interarrival_pdf, moment_set,
    pmf_table, pmf_table_auto, survival_zero, DegenerateJump, ExponentialJump, JumpDistribution, NormalJump,
};
use fracount::montecarlo::{
    parallel_draws, simulate_path_classical, summarize, CompoundSampler, CountSampler, FirstArrival,
    FirstArrivalSampler, RngSpec, COUNT_TAIL_LIMIT, FIRST_ARRIVAL_REL_TOL,
};
use fracount::verify::{self, VerifyOptions};
use fracount::{Config, Params, Spec};

use crate::output::{Cell, Report};
use crate::{CliError, Command, Emit, Grid, ProcessArgs, SimKind, StirlingKind, TimeArgs, ToleranceArgs};

type Outcome = Result<(Report, Result<(), CliError>), CliError>;

pub fn series_config(args: &ToleranceArgs) -> Result<Config, CliError> {
    let mut cfg = Config::default();
    if let Some(v) = args.rel_tol {
        cfg.rel_tol = v;
    }
    if let Some(v) = args.max_terms {
        cfg.max_terms = v;
    }
    if let Some(v) = args.max_precision_bits {
        cfg.max_precision_bits = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn tolerances(cfg: &Config) -> Value {
    json!({
        "rel_tol": cfg.rel_tol,
        "abs_tol": cfg.abs_tol,
        "max_terms": cfg.max_terms,
        "z_abs_max": cfg.z_abs_max,
        "max_precision_bits": cfg.max_precision_bits,
    })
}

fn process(args: &ProcessArgs) -> Result<Spec, CliError> {
    Ok(Spec::from_parts(args.mu, args.beta, args.rate)?)
}

fn process_json(args: &ProcessArgs) -> Value {
    json!({ "mu": args.mu, "beta": args.beta, "rate": args.rate })
}

/// The requested time points, validated.
pub fn time_points(args: &TimeArgs) -> Result<Vec<f64>, CliError> {
    let times = match (args.time, args.time_start, args.time_stop, args.time_steps) {
        (Some(t), ..) => vec![t],
        (None, Some(a), Some(b), Some(n)) => {
            if n == 0 {
                return Err(CliError::Usage("--time-steps must be at least 1".into()));
            }
            if !(b >= a) {
                return Err(CliError::Usage(format!("--time-stop ({b}) must not be below --time-start ({a})")));
            }
            if n == 1 {
                vec![a]
            } else {
                (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
            }
        }
        _ => return Err(CliError::Usage("give --time or all of --time-start, --time-stop, --time-steps".into())),
    };
    if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(CliError::Usage(format!("time must be finite and non-negative, got {t}")));
    }
    Ok(times)
}

fn times_json(times: &[f64]) -> Value {
    json!(times)
}

pub fn dispatch(command: &Command, cfg: &Config) -> Outcome {
    match command {
        Command::Pmf { process, time, nmax } => pmf(process, time, *nmax, cfg),
        Command::Moments { process, time } => moments(process, time, cfg),
        Command::Interarrival {
            process,
            time,
            laplace,
            laplace_terms,
        } => interarrival(process, time, laplace, *laplace_terms, cfg),
        Command::Bell { mu, beta, max, x } => bell(*mu, *beta, *max, *x, cfg),
        Command::Stirling { kind, max, mu, beta } => stirling(*kind, *max, *mu, *beta, cfg),
        Command::Simulate {
            process,
            kind,
            time,
            samples,
            seed,
            rng,
            jump,
            emit,
        } => simulate(process, *kind, *time, *samples, *seed, rng, jump, *emit, cfg),
        Command::Verify {
            grid,
            samples,
            count_samples,
            compound_samples,
            seed,
            property,
        } => verify_cmd(*grid, *samples, *count_samples, *compound_samples, *seed, property, cfg),
    }
}

fn pmf(args: &ProcessArgs, time: &TimeArgs, nmax: Option<usize>, cfg: &Config) -> Outcome {
    let spec = process(args)?;
    let times = time_points(time)?;
    let single = times.len() == 1;
    let mut report = if single {
        Report::new("pmf", &["n", "probability"])
    } else {
        Report::new("pmf", &["time", "n", "probability"])
    };
    let mut tails = Vec::new();
    for &t in &times {
        let table = match nmax {
            Some(n) => pmf_table(&spec, t, n, cfg)?,
            None => pmf_table_auto(&spec, t, cfg)?,
        };
        for (n, &p) in table.probs.iter().enumerate() {
            let mut row = vec![Cell::from(n), Cell::from(p)];
            if !single {
                row.insert(0, t.into());
            }
            report.push(row);
        }
        let mut footer = vec![Cell::from("tail_mass"), table.tail_mass.into()];
        if !single {
            footer.insert(0, t.into());
        }
        report.footer.push(footer);
        tails.push(json!({ "time": t, "tail_mass": table.tail_mass }));
    }
    let tail_value = if single { tails[0]["tail_mass"].clone() } else { Value::Array(tails) };
    report.extras.insert("tail_mass".into(), tail_value);
    report.params = process_json(args);
    report.inputs = json!({ "times": times_json(&times), "nmax": nmax });
    report.tolerances = tolerances(cfg);
    Ok((report, Ok(())))
}

fn moments(args: &ProcessArgs, time: &TimeArgs, cfg: &Config) -> Outcome {
    let spec = process(args)?;
    let times = time_points(time)?;
    let mut report = Report::new(
        "moments",
        &[
            "time",
            "mean",
            "variance",
            "skewness",
            "kurtosis_excess",
            "raw_2",
            "raw_3",
            "raw_4",
            "central_3",
            "central_4",
        ],
    );
    for &t in &times {
        let m = moment_set(&spec, t)?;
        report.push(vec![
            t.into(),
            m.raw[0].into(),
            m.variance.into(),
            m.skewness.into(),
            m.kurtosis_excess.into(),
            m.raw[1].into(),
            m.raw[2].into(),
            m.raw[3].into(),
            m.central[2].into(),
            m.central[3].into(),
        ]);
    }
    report.params = process_json(args);
    report.inputs = json!({ "times": times_json(&times) });
    report.tolerances = tolerances(cfg);
    Ok((report, Ok(())))
}

fn interarrival(args: &ProcessArgs, time: &TimeArgs, laplace: &[f64], terms: usize, cfg: &Config) -> Outcome {
    let spec = process(args)?;
    let mut report;
    if laplace.is_empty() {
        let times = time_points(time)?;
        report = Report::new("interarrival", &["tau", "density", "survival"]);
        for &tau in &times {
            let density = if tau > 0.0 { Some(interarrival_pdf(&spec, tau, cfg)?) } else { None };
            report.push(vec![tau.into(), density.into(), survival_zero(&spec, tau, cfg)?.into()]);
        }
        report.inputs = json!({ "times": times_json(&times) });
    } else {
        report = Report::new(
            "interarrival",
            &["u", "laplace_quadrature", "laplace_series", "series_error"],
        );
        for &u in laplace {
            let quad = interarrival_laplace_quadrature(&spec, u, cfg)?;
            // the asymptotic series is only offered where its terms decay
            let series = match interarrival_laplace_series(&spec, u, terms) {
                Ok(s) => Some(s),
                Err(fracount::Error::AsymptoticInvalid(_)) => None,
                Err(e) => return Err(e.into()),
            };
            report.push(vec![
                u.into(),
                quad.into(),
                series.map(|s| s.value).into(),
                series.map(|s| s.error).into(),
            ]);
        }
        report.inputs = json!({ "laplace": laplace, "laplace_terms": terms });
    }
    report.params = process_json(args);
    report.tolerances = tolerances(cfg);
    Ok((report, Ok(())))
}

fn bell(mu: f64, beta: f64, max: usize, x: f64, cfg: &Config) -> Outcome {
    let params = Params::new(mu, beta)?;
    let mut report = Report::new("bell", &["m", "value"]);
    for m in 0..=max {
        report.push(vec![m.into(), frac_polynomial(&params, x, m)?.into()]);
    }
    report.params = json!({ "mu": mu, "beta": beta });
    report.inputs = json!({ "max": max, "x": x });
    report.tolerances = tolerances(cfg);
    Ok((report, Ok(())))
}

fn exact(v: Integer) -> Cell {
    match v.to_i128() {
        Some(i) => Cell::Int(i),
        None => Cell::Big(v.to_string()),
    }
}

fn stirling(kind: StirlingKind, max: usize, mu: f64, beta: f64, cfg: &Config) -> Outcome {
    let mut report = Report::new("stirling", &["m", "l", "value"]);
    match kind {
        StirlingKind::First | StirlingKind::Second => {
            for m in 0..=max {
                for l in 0..=m {
                    let v = if kind == StirlingKind::First {
                        stirling1_signed(m, l)?
                    } else {
                        stirling2(m, l)?
                    };
                    report.push(vec![m.into(), l.into(), exact(v)]);
                }
            }
        }
        StirlingKind::Frac => {
            let params = Params::new(mu, beta)?;
            let table = FracCombTable::new(&params, max)?;
            for m in 0..=max {
                for (l, &v) in table.row(m).expect("within cap").iter().enumerate() {
                    report.push(vec![m.into(), l.into(), v.into()]);
                }
            }
            report.params = json!({ "mu": mu, "beta": beta });
        }
    }
    let kind_name = match kind {
        StirlingKind::First => "first",
        StirlingKind::Second => "second",
        StirlingKind::Frac => "frac",
    };
    report.inputs = json!({ "kind": kind_name, "max": max });
    report.tolerances = tolerances(cfg);
    Ok((report, Ok(())))
}

/// Parses `degenerate:V`, `exp:RATE` or `normal:MEAN:SD`.
pub fn parse_jump(text: &str) -> Result<Box<dyn JumpDistribution<f64>>, CliError> {
    let bad = || CliError::Usage(format!("unrecognised jump law '{text}' (use degenerate:V, exp:RATE or normal:MEAN:SD)"));
    let mut parts = text.split(':');
    let name = parts.next().ok_or_else(bad)?;
    let nums: Vec<f64> = parts.map(|p| p.parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    Ok(match (name, nums.as_slice()) {
        ("degenerate", [v]) if v.is_finite() => Box::new(DegenerateJump(*v)),
        ("exp", [rate]) => Box::new(ExponentialJump::new(*rate)?),
        ("normal", [mean, sd]) => Box::new(NormalJump::new(*mean, *sd)?),
        _ => return Err(bad()),
    })
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    args: &ProcessArgs,
    kind: SimKind,
    t: f64,
    samples: usize,
    seed: u64,
    rng_name: &str,
    jump: &str,
    emit: Emit,
    cfg: &Config,
) -> Outcome {
    let spec = process(args)?;
    if samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(CliError::Usage(format!("time must be finite and non-negative, got {t}")));
    }
    let rng = RngSpec::with_algorithm(seed, rng_name)?;
    let mut theory_mean = None;
    let mut theory_variance = None;
    let mut censored = None;
    let mut inputs = json!({ "kind": format!("{kind:?}").to_lowercase(), "time": t, "samples": samples, "rng": rng_name });
    let draws: Vec<f64> = match kind {
        SimKind::Count | SimKind::Path => {
            if t > 0.0 {
                let m = moment_set(&spec, t)?;
                theory_mean = Some(m.raw[0]);
                theory_variance = Some(m.variance);
            }
            if kind == SimKind::Count {
                let sampler = CountSampler::new(&spec, t, cfg)?;
                parallel_draws(&rng, samples, |r| Ok(sampler.sample(r) as f64))?
            } else {
                parallel_draws(&rng, samples, |r| Ok(simulate_path_classical(&spec, t, r)?.len() as f64))?
            }
        }
        SimKind::FirstArrival => {
            let sampler = FirstArrivalSampler::new(&spec, cfg)?;
            let all = parallel_draws(&rng, samples, |r| match sampler.sample(r)? {
                FirstArrival::Exact(tau) => Ok(tau),
                FirstArrival::Censored(_) => Ok(f64::INFINITY),
            })?;
            censored = Some(all.iter().filter(|v| v.is_infinite()).count());
            inputs["censoring_time"] = json!(sampler.horizon());
            all
        }
        SimKind::Compound => {
            let law = parse_jump(jump)?;
            let sampler = CompoundSampler::new(&spec, t, law.as_ref(), cfg)?;
            theory_mean = Some(compound_mean(&spec, t, law.mean())?);
            inputs["jump"] = json!(jump);
            parallel_draws(&rng, samples, |r| Ok(sampler.sample(r)))?
        }
    };

    let mut report;
    match emit {
        Emit::Samples => {
            report = Report::new("simulate", &["index", "value"]);
            for (i, &v) in draws.iter().enumerate() {
                let cell = if v.is_infinite() { Cell::Text("censored".into()) } else { v.into() };
                report.push(vec![i.into(), cell]);
            }
        }
        Emit::Summary => {
            let exact: Vec<f64> = draws.iter().copied().filter(|v| v.is_finite()).collect();
            let s = summarize(&exact)?;
            report = Report::new("simulate", &["statistic", "value"]);
            let mut add = |name: &str, cell: Cell| report.push(vec![Cell::Text(name.into()), cell]);
            add("samples", s.n_samples.into());
            if let Some(c) = censored {
                add("censored", c.into());
            }
            add("mean", s.mean.into());
            add("variance", s.variance.into());
            add("skewness", s.skewness.into());
            add("kurtosis_excess", s.kurtosis_excess.into());
            add("mean_se", s.mean_se.into());
            add("variance_se", s.variance_se.into());
            add("theory_mean", theory_mean.into());
            add("theory_variance", theory_variance.into());
        }
    }
    report.params = process_json(args);
    report.inputs = inputs;
    let mut tol = tolerances(cfg);
    tol["count_tail_limit"] = json!(COUNT_TAIL_LIMIT);
    tol["first_arrival_rel_tol"] = json!(FIRST_ARRIVAL_REL_TOL);
    report.tolerances = tol;
    report.seed = Some(seed);
    Ok((report, Ok(())))
}

fn verify_cmd(
    grid: Grid,
    samples: usize,
    count_samples: usize,
    compound_samples: usize,
    seed: u64,
    properties: &[usize],
    cfg: &Config,
) -> Outcome {
    let count = verify::PROPERTY_NAMES.len();
    if let Some(bad) = properties.iter().find(|&&p| p == 0 || p > count) {
        return Err(CliError::Usage(format!("--property must lie in 1..={count}, got {bad}")));
    }
    if samples < 2 || count_samples < 2 || compound_samples < 2 {
        return Err(CliError::Usage("sample counts must be at least 2".into()));
    }
    let opts = VerifyOptions {
        grid: match grid {
            Grid::Default => verify::default_grid(),
            Grid::Small => verify::small_grid(),
        },
        count_samples,
        arrival_samples: samples,
        compound_samples,
        seed,
        config: *cfg,
        ..VerifyOptions::default()
    };
    let ids: Vec<usize> = if properties.is_empty() { (1..=count).collect() } else { properties.to_vec() };
    let start = std::time::Instant::now();
    let results: Vec<_> = ids
        .iter()
        .map(|&id| {
            let r = verify::run_property(id, &opts);
            eprintln!("[{}] {:>2} {} ({:.1} s)", if r.passed { "PASS" } else { "FAIL" }, r.id, r.name, r.seconds);
            r
        })
        .collect();
    let seconds = start.elapsed().as_secs_f64();
    let all_passed = results.iter().all(|r| r.passed);

    let mut report = Report::new("verify", &["property", "name", "passed", "seconds", "detail"]);
    for r in &results {
        report.push(vec![
            r.id.into(),
            r.name.into(),
            Cell::Bool(r.passed),
            r.seconds.into(),
            Cell::Text(r.detail.clone()),
        ]);
    }
    report.extras.insert("all_passed".into(), json!(all_passed));
    report.extras.insert("seconds".into(), json!(seconds));
    let grid_json: Vec<Value> = opts.grid.iter().map(|p| json!({ "mu": p.mu(), "beta": p.beta() })).collect();
    report.params = json!({ "grid": grid_json, "rate": opts.rate });
    report.inputs = json!({
        "times": opts.times,
        "samples": samples,
        "count_samples": count_samples,
        "compound_samples": compound_samples,
        "properties": ids,
    });
    report.tolerances = tolerances(cfg);
    report.seed = Some(seed);
    let verdict = if all_passed { Ok(()) } else { Err(CliError::VerifyFailed) };
    Ok((report, verdict))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_args(a: f64, b: f64, n: usize) -> TimeArgs {
        TimeArgs {
            time: None,
            time_start: Some(a),
            time_stop: Some(b),
            time_steps: Some(n),
        }
    }

    #[test]
    fn time_grids() {
        assert_eq!(time_points(&grid_args(0.0, 2.0, 5)).unwrap(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(time_points(&grid_args(1.0, 1.0, 1)).unwrap(), vec![1.0]);
        assert!(time_points(&grid_args(2.0, 1.0, 3)).is_err());
        assert!(time_points(&grid_args(-1.0, 1.0, 3)).is_err());
        assert!(time_points(&grid_args(0.0, 1.0, 0)).is_err());
    }

    #[test]
    fn jump_laws() {
        assert_eq!(parse_jump("degenerate:3").unwrap().mean(), 3.0);
        assert_eq!(parse_jump("exp:4").unwrap().mean(), 0.25);
        assert_eq!(parse_jump("normal:1.5:2").unwrap().mean(), 1.5);
        for bad in ["exp", "exp:0", "normal:1", "gamma:1", "degenerate:x"] {
            assert!(parse_jump(bad).is_err(), "{bad}");
        }
    }
}
