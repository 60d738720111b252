use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use pvw_core::alt::{exponential_weights, filter_weights, FilterSpec};
use pvw_core::power::power_ratio_grid;
use pvw_core::sim::{compare_sweep, linear_grid, random_priors, SparseDesign};
use pvw_core::study::{
    map_prior, read_study, weighted_bh, weighted_bonferroni, write_outcomes, write_weights,
    OutcomeMeta, ReadOptions, StudyRow, Tail,
};
use pvw_core::weights::{check_simple_condition, check_small_q_condition, PriorEffect};
use pvw_core::{bayes_weights_general, spjotvoll_weights, WeightSolution};

use crate::args::{
    CheckArgs, Design, Level, Procedure, Scheme, SchemeArgs, SimulateArgs, SparsePowerArgs,
    StudyInput, TailArg, TestArgs, WeightsArgs,
};

/// Invalid flag combination; reported with exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn check_scheme_flags(s: &SchemeArgs) -> Result<()> {
    let given = |flag: &str, present: bool, scheme: Scheme| -> Result<()> {
        if present && s.scheme != scheme {
            return Err(usage(format!(
                "{flag} applies only to --scheme {}, not {}",
                scheme.name(),
                s.scheme.name()
            )));
        }
        Ok(())
    };
    given("--phi", s.phi.is_some(), Scheme::Bayes)?;
    given("--beta", s.beta.is_some(), Scheme::Exponential)?;
    given("--filter-M", s.filter_m.is_some(), Scheme::Filter)?;
    match s.scheme {
        Scheme::Exponential if s.beta.is_none() => Err(usage("--scheme exponential needs --beta")),
        Scheme::Filter if s.filter_m.is_none() => Err(usage("--scheme filter needs --filter-M")),
        _ => Ok(()),
    }
}

fn check_phi(phi: Option<f64>) -> Result<f64> {
    let phi = phi.unwrap_or(1.0);
    if !(phi > 0.0) || !phi.is_finite() {
        return Err(usage(format!("--phi must be positive, got {phi}")));
    }
    Ok(phi)
}

fn resolve_q(level: &Level, tests: usize) -> Result<f64> {
    let q = match (level.q, level.alpha) {
        (Some(q), None) => q,
        (None, Some(alpha)) => {
            if tests == 0 {
                bail!("--alpha needs at least one test");
            }
            alpha / tests as f64
        }
        _ => unreachable!("clap enforces exactly one of --q and --alpha"),
    };
    if !(q > 0.0 && q < 1.0) {
        return Err(usage(format!("per-test level q must lie in (0, 1), got {q}")));
    }
    Ok(q)
}

struct Study {
    rows: Vec<StudyRow>,
    tail: Tail,
}

fn load(input: &StudyInput) -> Result<Study> {
    for (flag, v) in [("--n-prior", input.n_prior), ("--n-current", input.n_current)] {
        if let Some(n) = v {
            if !(n > 0.0) || !n.is_finite() {
                return Err(usage(format!("{flag} must be positive, got {n}")));
            }
        }
    }
    let opts = ReadOptions {
        n_prior: input.n_prior,
        n_current: input.n_current,
    };
    let rows = read_study(&input.input, &opts)
        .with_context(|| format!("reading {}", input.input.display()))?;
    let tail = match input.tail {
        Some(TailArg::One) => Tail::One,
        Some(TailArg::Two) => Tail::Two,
        None => Tail::default_for(&rows),
    };
    log::info!("{} rows, {:?}-tailed", rows.len(), tail);
    Ok(Study { rows, tail })
}

/// Weights for the study under the chosen scheme, with the run metadata.
fn solve(study: &Study, level: &Level, s: &SchemeArgs) -> Result<(WeightSolution, OutcomeMeta)> {
    check_scheme_flags(s)?;
    let phi = check_phi(s.phi)?;
    let effs: Vec<PriorEffect> = map_prior(&study.rows, phi, study.tail)?;
    let q = resolve_q(level, effs.len())?;
    let etas: Vec<f64> = effs.iter().map(|e| e.eta()).collect();
    let sol = match s.scheme {
        Scheme::Bayes => {
            let cond = check_small_q_condition(&effs, q);
            log::info!(
                "small-q condition {} (slack {:.3e})",
                if cond.holds { "holds" } else { "fails" },
                cond.slack
            );
            bayes_weights_general(&effs, q)?
        }
        Scheme::Spjotvoll => spjotvoll_weights(&etas, q)?,
        Scheme::Exponential => {
            WeightSolution::fixed(exponential_weights(&etas, s.beta.unwrap_or(0.0), q)?, q)
        }
        Scheme::Filter => {
            let spec = FilterSpec::new(s.filter_m.unwrap_or(0.0), q)
                .map_err(|e| usage(e.to_string()))?;
            WeightSolution::fixed(filter_weights(&etas, &spec), q)
        }
        Scheme::Unweighted => WeightSolution::fixed(vec![1.0; effs.len()], q),
    };
    log::info!(
        "scheme {}: path {}, q = {q}, q* = {}, exact = {}",
        s.scheme.name(),
        sol.path.as_str(),
        sol.q_star,
        sol.exact
    );
    let phi_meta = (s.scheme == Scheme::Bayes).then_some(phi);
    let meta = OutcomeMeta::from_solution(&sol, phi_meta, s.scheme.name());
    Ok((sol, meta))
}

pub fn weights(args: &WeightsArgs) -> Result<()> {
    let study = load(&args.study)?;
    let (sol, meta) = solve(&study, &args.level, &args.scheme)?;
    let ids: Vec<String> = study.rows.iter().map(|r| r.id.clone()).collect();
    write_weights(&args.output, &ids, &sol, &meta)
        .with_context(|| format!("writing {}", args.output.display()))?;
    eprintln!(
        "wrote {} weights ({}, q* = {:e}, exact = {})",
        sol.len(),
        sol.path.as_str(),
        sol.q_star,
        sol.exact
    );
    Ok(())
}

pub fn test(args: &TestArgs) -> Result<()> {
    let study = load(&args.study)?;
    let (sol, meta) = solve(&study, &args.level, &args.scheme)?;
    let outcomes = match args.procedure {
        Procedure::Bonferroni => weighted_bonferroni(&study.rows, &sol)?,
        Procedure::Bh => {
            let q_fdr = sol.q_star * sol.len() as f64;
            if !(q_fdr < 1.0) {
                return Err(usage(format!(
                    "--procedure bh uses FDR level J q* = {q_fdr}, which must be below 1"
                )));
            }
            weighted_bh(&study.rows, &sol.weights, q_fdr)?
        }
    };
    write_outcomes(&args.output, &outcomes, &meta)
        .with_context(|| format!("writing {}", args.output.display()))?;
    let rejected = outcomes.iter().filter(|o| o.rejected).count();
    eprintln!("rejected {rejected} of {} hypotheses", outcomes.len());
    Ok(())
}

fn csv_out(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn csv_float(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x}")
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    if !(args.q > 0.0 && args.q < 1.0) {
        return Err(usage(format!("--q must lie in (0, 1), got {}", args.q)));
    }
    if args.j == 0 || args.points == 0 {
        return Err(usage("--j and --points must be positive"));
    }
    let mut out = csv_out(&args.output)?;
    match args.design {
        Design::Compare => {
            let reps = args.reps.unwrap_or(1);
            if reps == 0 {
                return Err(usage("--reps must be positive"));
            }
            let grid = linear_grid(0.0, 4.0, args.points);
            let mut total: Vec<(&'static str, f64, f64)> = Vec::new();
            for rep in 0..reps as u64 {
                let effs = random_priors(args.j, args.seed.wrapping_add(rep));
                let pts = compare_sweep(&effs, args.q, &grid, &grid, &grid)?;
                if total.is_empty() {
                    total = pts.iter().map(|p| (p.scheme, p.parameter, 0.0)).collect();
                }
                for (acc, p) in total.iter_mut().zip(&pts) {
                    acc.2 += p.power;
                }
            }
            writeln!(out, "scheme,parameter,power")?;
            for (scheme, parameter, power) in total {
                writeln!(out, "{scheme},{},{}", csv_float(parameter), power / reps as f64)?;
            }
        }
        Design::Sparse => {
            if args.reps.is_some() {
                return Err(usage("--reps applies only to --design compare"));
            }
            let design = SparseDesign {
                j: args.j,
                q: args.q,
                ..SparseDesign::default()
            };
            let pi1s = linear_grid(0.0, 0.1, args.points);
            writeln!(out, "pi1,scheme,deterministic_power,average_power,w_large,w_small")?;
            for p in design.sweep(&pi1s)? {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    p.pi1,
                    p.scheme,
                    p.deterministic,
                    p.average,
                    csv_float(p.w_large),
                    csv_float(p.w_small)
                )?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Cell midpoints of `n` equal cells covering `[lo, hi]`.
pub fn midpoints(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo + (hi - lo) * (k as f64 + 0.5) / n as f64)
        .collect()
}

pub fn sparse_power(args: &SparsePowerArgs) -> Result<()> {
    if !(args.q > 0.0 && args.q < 1.0) {
        return Err(usage(format!("--q must lie in (0, 1), got {}", args.q)));
    }
    if !(args.m_min < args.m_max && args.m_max <= 0.0) {
        return Err(usage("need --m-min < --m-max <= 0"));
    }
    if !(0.0 <= args.pi1_min && args.pi1_min < args.pi1_max && args.pi1_max <= 1.0) {
        return Err(usage("need 0 <= --pi1-min < --pi1-max <= 1"));
    }
    if args.m_points == 0 || args.pi1_points == 0 {
        return Err(usage("grid sizes must be positive"));
    }
    let ms = midpoints(args.m_min, args.m_max, args.m_points);
    let pis = midpoints(args.pi1_min, args.pi1_max, args.pi1_points);
    let grid = power_ratio_grid(&ms, &pis, args.q)?;
    let mut out = csv_out(&args.output)?;
    writeln!(out, "M,pi1,ratio")?;
    for (m, row) in ms.iter().zip(&grid) {
        for (pi1, r) in pis.iter().zip(row) {
            writeln!(out, "{m},{pi1},{r}")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn check_condition(args: &CheckArgs) -> Result<()> {
    let study = load(&args.study)?;
    let phi = check_phi(args.phi)?;
    let effs = map_prior(&study.rows, phi, study.tail)?;
    let q = resolve_q(&args.level, effs.len())?;
    if args.k == 0 {
        return Err(usage("--k must be at least 1"));
    }
    let alpha = args.level.alpha.unwrap_or(q * effs.len() as f64);
    let small = check_small_q_condition(&effs, q);
    let simple = check_simple_condition(&effs, alpha, args.k)?;
    let mut out: Box<dyn Write> = match &args.output {
        Some(p) => Box::new(csv_out(p)?),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(out, "tests\t{}", effs.len())?;
    writeln!(out, "q\t{q:e}")?;
    writeln!(out, "small_q_condition\t{}", small.holds)?;
    writeln!(out, "small_q_slack\t{:e}", small.slack)?;
    writeln!(out, "simple_condition\t{}", simple.holds)?;
    writeln!(out, "simple_alpha\t{alpha:e}")?;
    writeln!(out, "simple_k\t{}", args.k)?;
    writeln!(out, "simple_z_abs\t{}", simple.z_abs)?;
    writeln!(out, "simple_count\t{}", simple.count)?;
    out.flush()?;
    Ok(())
}
