//! Implementations of the `fpq` subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use fpq::diffusion::{sample_hitting_time, CrossingRule};
use fpq::queue::{
    self, simulate_first_busy_period_fast, simulate_first_busy_period_slow, simulate_path,
    simulate_upper_bound, LambdaMode, QueueConfig,
};
use fpq::scaling::{diffusion_params, drift_coefficient, DiffusionParams};
use fpq::stats::{self, Bandwidth};
use fpq::{FptDensity, ServiceDistribution, Stream};
use serde::Serialize;

use crate::format::{f17, write_header, write_row};
use crate::opts::{
    parse_grid, parse_usize_list, require, AiryArgs, BusyPeriodArgs, CheckArgs, DiffusionArgs,
    DistArg, Figure2Args, SamplePathArgs,
};
use crate::{run_replications, CmdError};

fn out_writer(path: &Option<PathBuf>) -> Result<Box<dyn Write>, CmdError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Build the queue configuration shared by the two Monte Carlo modes: a
/// fixed λ selects the nonscaled queue, otherwise the analytic critical
/// regime.
pub fn queue_config_from(
    n: usize,
    alpha: f64,
    beta: f64,
    q: f64,
    dist: ServiceDistribution,
    lambda: Option<f64>,
) -> QueueConfig {
    let lambda_mode = match lambda {
        Some(lambda) => LambdaMode::Fixed { lambda },
        None => LambdaMode::Analytic,
    };
    QueueConfig {
        n,
        alpha,
        beta,
        q,
        dist,
        lambda_mode,
    }
}

fn map_queue_err(e: queue::QueueError) -> CmdError {
    CmdError::Usage(e.to_string())
}

/// Diffusion parameters either given directly (γ, σ²) or derived from a
/// service distribution at exponent α with the analytic arrival rate.
fn resolve_diffusion_params(
    gamma: Option<f64>,
    sigma2: Option<f64>,
    dist: &Option<DistArg>,
    alpha: Option<f64>,
    beta: f64,
    q: f64,
) -> Result<DiffusionParams, CmdError> {
    if gamma.is_some() || sigma2.is_some() {
        let gamma = require(&gamma, "gamma")?;
        let sigma2 = require(&sigma2, "sigma2")?;
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN-rejecting
        if !(sigma2 > 0.0) {
            return Err(CmdError::Usage("--sigma2 must be > 0".into()));
        }
        return Ok(DiffusionParams {
            q,
            beta,
            gamma,
            sigma: sigma2.sqrt(),
        });
    }
    let dist = require(dist, "dist")?.0;
    let alpha = require(&alpha, "alpha")?;
    let lambda = 1.0
        / dist
            .moment(1.0 + alpha)
            .map_err(|e| CmdError::Usage(e.to_string()))?;
    diffusion_params(&dist, alpha, lambda, beta, q).map_err(|e| CmdError::Usage(e.to_string()))
}

pub fn sample_path(args: SamplePathArgs) -> Result<(), CmdError> {
    let args = args.resolve()?;
    let n = require(&args.n, "n")?;
    let alpha = require(&args.alpha, "alpha")?;
    let dist = require(&args.dist, "dist")?.0;
    let seed = require(&args.seed, "seed")?;
    let config = queue_config_from(n, alpha, args.beta, args.q, dist.clone(), None);
    config.validate().map_err(map_queue_err)?;
    let horizon = args
        .horizon_steps
        .unwrap_or_else(|| (3.0 * (n as f64).powf(2.0 / 3.0)).ceil() as u64 + 1);

    let mut rng = Stream::new(seed);
    let path = simulate_path(&config, horizon, &mut rng).map_err(map_queue_err)?;

    let lambda = config.lambda().map_err(map_queue_err)?;
    let params =
        diffusion_params(&dist, alpha, lambda, args.beta, args.q).map_err(|e| CmdError::Usage(e.to_string()))?;
    let steps_per_t = if n > 0 { (n as f64).powf(2.0 / 3.0) } else { 1.0 };
    let space = if n > 0 { (n as f64).powf(1.0 / 3.0) } else { 1.0 };

    let mut w = out_writer(&args.out)?;
    write_header(&mut w, &["t", "q_scaled", "drift"])?;
    for (k, &qv) in path.queue.iter().enumerate() {
        let t = k as f64 / steps_per_t;
        let drift = args.q + args.beta * t - params.gamma * t * t;
        write_row(
            &mut w,
            &[f17(t), f17(qv as f64 / space), f17(drift)],
        )?;
    }
    w.flush()?;

    if let Some(raw) = &args.raw_out {
        let mut w = BufWriter::new(File::create(raw)?);
        write_header(&mut w, &["k", "A", "N", "Q", "served_index", "parent_index"])?;
        writeln!(w, "0,,{},{},,", path.unreflected[0], path.queue[0])?;
        for k in 1..path.queue.len() {
            let served = path.served_order[k - 1];
            let parent = path.parent[served as usize]
                .map(|p| p.to_string())
                .unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{}",
                k,
                path.arrivals[k - 1],
                path.unreflected[k],
                path.queue[k],
                served,
                parent
            )?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Summary printed by the Monte Carlo commands.
#[derive(Clone, Debug, Serialize)]
pub struct McReport {
    pub count: u64,
    pub mean: f64,
    pub std_error: Option<f64>,
    pub ci95: Option<(f64, f64)>,
    /// true when a single replication makes the interval degenerate
    pub degenerate: bool,
    pub mode: &'static str,
}

fn report(values: &[f64], mode: &'static str) -> McReport {
    if values.len() == 1 {
        return McReport {
            count: 1,
            mean: values[0],
            std_error: None,
            ci95: None,
            degenerate: true,
            mode,
        };
    }
    let s = stats::summarize(values).expect("len >= 2");
    McReport {
        count: s.count as u64,
        mean: s.mean,
        std_error: Some(s.std_error),
        ci95: Some(s.ci95),
        degenerate: false,
        mode,
    }
}

pub fn busy_period_mc(args: BusyPeriodArgs) -> Result<McReport, CmdError> {
    let args = args.resolve()?;
    let n = require(&args.n, "n")?;
    let alpha = require(&args.alpha, "alpha")?;
    let dist = require(&args.dist, "dist")?.0;
    let reps = require(&args.reps, "reps")?;
    let seed = require(&args.seed, "seed")?;
    if reps < 1 {
        return Err(CmdError::Usage("--reps must be >= 1".into()));
    }
    let config = queue_config_from(n, alpha, args.beta, args.q, dist, args.lambda);
    config.validate().map_err(map_queue_err)?;
    if config.initial_queue_len() == 0 {
        return Err(CmdError::Usage(
            "initial queue is empty; busy period undefined (increase --q)".into(),
        ));
    }

    let records = run_replications(seed, reps, args.threads, |_, rng| {
        simulate_first_busy_period_fast(&config, rng).expect("validated config")
    });

    if let Some(out) = &args.out {
        let mut w = BufWriter::new(File::create(out)?);
        write_header(&mut w, &["replication", "bp", "scaled_bp"])?;
        for (i, r) in records.iter().enumerate() {
            writeln!(w, "{},{},{}", i, r.customers_served, f17(r.scaled_value))?;
        }
        w.flush()?;
    }

    // scaled output in the critical regime, raw counts with fixed λ
    let scaled = args.lambda.is_none();
    let values: Vec<f64> = records
        .iter()
        .map(|r| {
            if scaled {
                r.scaled_value
            } else {
                r.customers_served as f64
            }
        })
        .collect();
    let rep = report(&values, if scaled { "critical-scaled" } else { "fixed-lambda" });
    println!("{}", serde_json::to_string_pretty(&rep).expect("serialize"));
    Ok(rep)
}

pub fn airy_cmd(args: AiryArgs) -> Result<(), CmdError> {
    let args = args.resolve()?;
    let params = resolve_diffusion_params(
        args.gamma, args.sigma2, &args.dist, args.alpha, args.beta, args.q,
    )?;
    let density = FptDensity::new(params).map_err(|e| CmdError::Numeric(e.to_string()))?;

    if let Some(grid_spec) = &args.grid {
        let grid = parse_grid(grid_spec)?;
        let mut w = out_writer(&args.out)?;
        write_header(&mut w, &["t", "density"])?;
        for &t in &grid {
            let v = if t > 0.0 {
                density
                    .density(t)
                    .map_err(|e| CmdError::Numeric(e.to_string()))?
            } else {
                0.0
            };
            write_row(&mut w, &[f17(t), f17(v)])?;
        }
        w.flush()?;
    }
    if args.mean || args.grid.is_none() {
        let mean = density
            .mean()
            .map_err(|e| CmdError::Numeric(e.to_string()))?;
        println!("{mean:.4}");
    }
    Ok(())
}

pub fn figure2(args: Figure2Args) -> Result<(), CmdError> {
    let args = args.resolve()?;
    let n_list = parse_usize_list(&require(&args.n_list, "n-list")?)?;
    let alpha = require(&args.alpha, "alpha")?;
    let reps = args.reps;
    let seed = require(&args.seed, "seed")?;
    let dist = args.dist.0.clone();
    let grid = parse_grid(&args.grid)?;
    if n_list.is_empty() {
        return Err(CmdError::Usage("--n-list must not be empty".into()));
    }

    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (ni, &n) in n_list.iter().enumerate() {
        let config = queue_config_from(n, alpha, args.beta, args.q, dist.clone(), None);
        config.validate().map_err(map_queue_err)?;
        if config.initial_queue_len() == 0 {
            return Err(CmdError::Usage(format!(
                "initial queue empty for n = {n}; increase --q"
            )));
        }
        // independent seed block per pool size
        let seed_n = seed ^ ((ni as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let samples: Vec<f64> = run_replications(seed_n, reps, args.threads, |_, rng| {
            simulate_first_busy_period_fast(&config, rng)
                .expect("validated config")
                .scaled_value
        });
        let kde = stats::kde_gaussian(&samples, Bandwidth::Silverman, &grid)
            .map_err(|e| CmdError::Numeric(e.to_string()))?;
        columns.push(kde);
    }

    let lambda = 1.0
        / dist
            .moment(1.0 + alpha)
            .map_err(|e| CmdError::Usage(e.to_string()))?;
    let params = diffusion_params(&dist, alpha, lambda, args.beta, args.q)
        .map_err(|e| CmdError::Usage(e.to_string()))?;
    let density = FptDensity::new(params).map_err(|e| CmdError::Numeric(e.to_string()))?;
    let exact: Vec<f64> = {
        let mut out = Vec::with_capacity(grid.len());
        for &t in &grid {
            out.push(if t > 0.0 {
                density
                    .density(t)
                    .map_err(|e| CmdError::Numeric(e.to_string()))?
            } else {
                0.0
            });
        }
        out
    };

    let mut header: Vec<String> = vec!["t".into()];
    header.extend(n_list.iter().map(|n| format!("kde_n{n}")));
    header.push("exact".into());
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut w = out_writer(&args.out)?;
    write_header(&mut w, &header_refs)?;
    for (i, &t) in grid.iter().enumerate() {
        let mut cells = vec![f17(t)];
        cells.extend(columns.iter().map(|col| f17(col[i])));
        cells.push(f17(exact[i]));
        write_row(&mut w, &cells)?;
    }
    w.flush()?;
    Ok(())
}

pub fn diffusion_mc(args: DiffusionArgs) -> Result<McReport, CmdError> {
    let args = args.resolve()?;
    let reps = require(&args.reps, "reps")?;
    let seed = require(&args.seed, "seed")?;
    if !(args.dt > 0.0 && args.dt <= args.horizon) {
        return Err(CmdError::Usage("need 0 < --dt <= --horizon".into()));
    }
    let params = resolve_diffusion_params(
        args.gamma, args.sigma2, &args.dist, args.alpha, args.beta, args.q,
    )?;
    let rule = if args.bridge {
        CrossingRule::BrownianBridge
    } else {
        CrossingRule::Grid
    };

    let outcomes = run_replications(seed, reps, args.threads, |_, rng| {
        sample_hitting_time(&params, args.dt, args.horizon, rule, rng)
    });
    let exceeded = outcomes.iter().filter(|o| o.is_none()).count();
    let fraction = exceeded as f64 / reps as f64;
    if fraction > 0.01 {
        return Err(CmdError::Numeric(format!(
            "{:.2}% of replications exceeded the horizon {}; extend --horizon",
            100.0 * fraction,
            args.horizon
        )));
    }
    let samples: Vec<f64> = outcomes.into_iter().flatten().collect();

    if let Some(out) = &args.out {
        let mut w = BufWriter::new(File::create(out)?);
        write_header(&mut w, &["hitting_time"])?;
        for &t in &samples {
            writeln!(w, "{}", f17(t))?;
        }
        w.flush()?;
    }
    if exceeded > 0 {
        eprintln!(
            "note: {exceeded} of {reps} replications exceeded the horizon and were dropped"
        );
    }
    let rep = report(&samples, "diffusion-hitting-time");
    println!("{}", serde_json::to_string_pretty(&rep).expect("serialize"));
    Ok(rep)
}

pub fn check(args: CheckArgs) -> Result<(), CmdError> {
    let args = args.resolve()?;
    let seed = args.seed;
    let mut failures = 0usize;
    let mut run = |name: &str, ok: bool| {
        println!("check {name}: {}", if ok { "ok" } else { "FAILED" });
        if !ok {
            failures += 1;
        }
    };

    // Airy Wronskian
    let inv_pi = 1.0 / std::f64::consts::PI;
    let wronskian_ok = [-10.0, -1.0, 0.0, 1.0, 5.0].iter().all(|&x| {
        let v = fpq::airy::airy(x).expect("in range");
        (v.ai * v.bi_prime - v.ai_prime * v.bi - inv_pi).abs() < 1e-9
    });
    run("airy wronskian", wronskian_ok);

    // density normalization
    let d = FptDensity::new(DiffusionParams {
        q: 1.0,
        beta: 1.0,
        gamma: 0.5,
        sigma: 2.0f64.sqrt(),
    })
    .expect("valid");
    let mass_ok = d.normalization().map(|m| (m - 1.0).abs() < 1e-3).unwrap_or(false);
    run("density normalization", mass_ok);

    // reflection identity on a simulated path
    let config = queue_config_from(
        300,
        0.5,
        1.0,
        1.0,
        ServiceDistribution::exponential(1.0).expect("valid"),
        None,
    );
    let mut rng = Stream::substream(seed, 1);
    let path = simulate_path(&config, 250, &mut rng).expect("valid config");
    let mut running_min = 0i64;
    let reflect_ok = (0..path.queue.len()).all(|k| {
        running_min = running_min.min(path.unreflected[k]);
        path.queue[k] as i64 == path.unreflected[k] - running_min.min(0)
    });
    run("reflection identity", reflect_ok);

    // coupling dominance
    let mut coupling_ok = true;
    let mut rng = Stream::substream(seed, 2);
    for _ in 0..10 {
        let small = queue_config_from(
            200,
            0.5,
            1.0,
            1.0,
            ServiceDistribution::exponential(1.0).expect("valid"),
            None,
        );
        let (p, upper) = simulate_upper_bound(&small, 150, &mut rng).expect("valid");
        coupling_ok &= p
            .unreflected
            .iter()
            .zip(upper.iter())
            .all(|(n, nu)| n <= nu);
    }
    run("upper-bound coupling", coupling_ok);

    // drift coefficient monotone in alpha
    let mono_ok = [
        ServiceDistribution::exponential(1.0).expect("valid"),
        ServiceDistribution::table_hyperexponential(),
    ]
    .iter()
    .all(|dist| {
        let mut prev = f64::NEG_INFINITY;
        (0..=20).all(|j| {
            let f = drift_coefficient(dist, j as f64 / 20.0).expect("valid order");
            let ok = f >= prev;
            prev = f;
            ok
        })
    });
    run("drift coefficient monotone", mono_ok);

    // the two busy-period simulators agree in law
    let small = queue_config_from(
        50,
        0.5,
        1.0,
        1.0,
        ServiceDistribution::exponential(1.0).expect("valid"),
        None,
    );
    let mut rng = Stream::substream(seed, 3);
    let mut fast = Vec::with_capacity(20_000);
    let mut slow = Vec::with_capacity(20_000);
    for _ in 0..20_000 {
        fast.push(simulate_first_busy_period_fast(&small, &mut rng).expect("valid").customers_served as f64);
        slow.push(simulate_first_busy_period_slow(&small, &mut rng).expect("valid").customers_served as f64);
    }
    let (_, p) = stats::two_sample_ks(&fast, &slow);
    run("fast/slow simulator equivalence", p > 1e-4);

    // size-biased pick frequencies
    let weights = [1.0, 2.0f64.sqrt(), 3.0f64.sqrt()];
    let total: f64 = weights.iter().sum();
    let mut counts = [0u64; 3];
    let mut rng = Stream::substream(seed, 4);
    for _ in 0..20_000 {
        counts[queue::size_biased_pick(&weights, &mut rng)] += 1;
    }
    let observed: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let expected: Vec<f64> = weights.iter().map(|w| w / total * 20_000.0).collect();
    run(
        "size-biased pick frequencies",
        stats::chi_square_p(&observed, &expected) > 1e-4,
    );

    // graph-criticality diagnostic on a unit-mean exponential sample
    let dist = ServiceDistribution::exponential(1.0).expect("valid");
    let mut rng = Stream::substream(seed, 6);
    let sample = dist.sample(200_000, &mut rng);
    let diag = queue::criticality_diagnostic(&sample);
    run("criticality diagnostic", (diag - 2.0).abs() < 0.05);

    // noiseless hitting time against the quadratic root
    let mut rng = Stream::substream(seed, 5);
    let hit = sample_hitting_time(
        &DiffusionParams {
            q: 1.0,
            beta: 1.0,
            gamma: 0.5,
            sigma: 0.0,
        },
        1e-4,
        5.0,
        CrossingRule::Grid,
        &mut rng,
    );
    let root_ok = hit.map(|h| (h - 2.732_050_807_568_877).abs() <= 1e-4 + 1e-12) == Some(true);
    run("noiseless hitting time", root_ok);

    if failures > 0 {
        Err(CmdError::Numeric(format!("{failures} check(s) failed")))
    } else {
        println!("all checks passed");
        Ok(())
    }
}
