mod config;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use augarch_core::asymptotics::assemble_gamma;
use augarch_core::conditions::{
    check_exponential_with, check_moment, check_polynomial_with, check_positivity, regenerate_table2, McSettings,
};
use augarch_core::estimators::{estimate, signed_power_coeff};
use augarch_core::harness::ExperimentReport;
use augarch_core::numeric::format_sig;
use augarch_core::oracle::{targets, OracleConfig};
use augarch_core::{
    estimate_tricov, ned_decay, run_clt, run_fclt, simulate_path, ConditionReport, FcltTarget, Scaling, Verdict,
};
use clap::{Parser, Subcommand, ValueEnum};

use crate::config::{ConfigError, RunConfig};

const AFTER_HELP: &str = "\
CSV schemas (numbers use 17 significant digits unless output.precision is set):
  simulate      t,x,sigma2
  check         condition,r,s,lhs,std_err,threshold,relation,verdict,method
  check --table2
                family,r,printed,printed_exponent,printed_value,closed_form,mc_value,mc_std_err,reproduced,theorem_s,verdict,discrepancy
  estimate      p,q_hat,r,m_hat,mean,n
  gamma         block,entry,value
  verify-clt    entry,empirical,target,relative_error,abs_diff,std_err,pass
  verify-fclt   s,t,entry,empirical,target,relative_error,abs_diff,std_err,pass
  ned-decay     delta,rms_gap

Exit status: 0 all verdicts pass, 1 a verdict failed, 2 usage or config error, 3 numeric abort.";

#[derive(Debug, Parser)]
#[command(name = "augarch", version, about = "Augmented GARCH simulation and limit-theory checks", after_help = AFTER_HELP)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `experiment.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV artifacts; CSV goes to stdout when absent and no `output.csv` is set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides `experiment.scaling`.
    #[arg(long, global = true, value_enum)]
    scaling: Option<ScalingArg>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScalingArg {
    Literal,
    Prefix,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one path.
    Simulate,
    /// Evaluate the moment, positivity and contraction conditions.
    Check {
        /// Regenerate the GARCH(1,1) inequality table for r = 1, 2 instead.
        #[arg(long)]
        table2: bool,
    },
    /// Sample quantile and absolute centred moment of a series.
    Estimate {
        /// CSV with an `x` column, or a single numeric column.
        #[arg(long)]
        input: PathBuf,
    },
    /// Long-run covariance structure and the limit covariance matrix.
    Gamma {
        /// Series to analyse; simulates from the model when absent.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Monte Carlo check of the bivariate CLT.
    VerifyClt,
    /// Monte Carlo check of the functional CLT on `experiment.t_grid`.
    VerifyFclt {
        /// Compare against min(s,t) times the empirical unit-time covariance.
        #[arg(long)]
        proportional: bool,
    },
    /// Near-epoch dependence decay over `experiment.delta_list`.
    NedDecay,
}

impl Command {
    fn artifact(&self) -> &'static str {
        match self {
            Command::Simulate => "path",
            Command::Check { table2: false } => "conditions",
            Command::Check { table2: true } => "table2",
            Command::Estimate { .. } => "estimate",
            Command::Gamma { .. } => "gamma",
            Command::VerifyClt => "clt",
            Command::VerifyFclt { .. } => "fclt",
            Command::NedDecay => "ned",
        }
    }
}

#[derive(Debug, thiserror::Error)]
enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] augarch_core::Error),
    #[error("io: {0}")]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Input(String),
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Core(e) if e.is_numeric_abort() => 3,
            _ => 2,
        }
    }
}

struct Outcome {
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => ExitCode::from(if o.pass { 0 } else { 1 }),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, AppError> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| AppError::Input(format!("--threads: {e}")))?;
    }
    let mut cfg = match &cli.config {
        Some(path) => config::load(path)?,
        None => config::parse("")?,
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.defaults.retain(|d| !d.starts_with("experiment.seed"));
    }
    if let Some(s) = cli.scaling {
        cfg.scaling = match s {
            ScalingArg::Literal => Scaling::Literal,
            ScalingArg::Prefix => Scaling::Prefix,
        };
        cfg.defaults.retain(|d| !d.starts_with("experiment.scaling"));
    }
    for d in &cfg.defaults {
        eprintln!("# default applied: {d}");
    }
    let csv_path = match (&cli.out, &cfg.csv) {
        (Some(dir), _) => {
            fs::create_dir_all(dir)?;
            Some(dir.join(format!("{}.csv", cli.command.artifact())))
        }
        (None, Some(p)) => Some(p.clone()),
        (None, None) => None,
    };
    let mut sink: Box<dyn Write> = match &csv_path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let out = dispatch(cli, &cfg, &mut *sink)?;
    sink.flush()?;
    if let Some(p) = csv_path {
        eprintln!("wrote {}", p.display());
    }
    Ok(out)
}

fn dispatch(cli: &Cli, cfg: &RunConfig, w: &mut dyn Write) -> Result<Outcome, AppError> {
    let d = cfg.precision;
    let num = |x: f64| format_sig(x, d);
    match &cli.command {
        Command::Simulate => {
            let path = simulate_path(cfg.model()?, &cfg.dist, cfg.n, cfg.burn_in, cfg.seed)?;
            path.write_csv(&mut *w, d)?;
            eprintln!("simulated {} observations after {} burn-in", path.n(), path.burn_in);
            Ok(Outcome { pass: true })
        }
        Command::Check { table2: false } => {
            let spec = cfg.model()?;
            let mc = mc_settings(cfg);
            let mut reports = vec![check_moment(&cfg.dist, cfg.r)?, check_positivity(spec, &cfg.dist)];
            reports.push(if spec.family().is_exponential() {
                check_exponential_with(spec, &cfg.dist, cfg.r, &mc)?
            } else {
                check_polynomial_with(spec, &cfg.dist, cfg.r, &mc)?
            });
            writeln!(w, "condition,r,s,lhs,std_err,threshold,relation,verdict,method")?;
            for rep in &reports {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{}",
                    rep.condition,
                    rep.r,
                    rep.s.map(num).unwrap_or_default(),
                    num(rep.lhs_value),
                    rep.std_err.map(num).unwrap_or_default(),
                    num(rep.threshold),
                    relation(rep),
                    rep.verdict,
                    rep.method
                )?;
            }
            print_condition_table(&reports);
            Ok(Outcome {
                pass: reports.iter().all(ConditionReport::satisfied),
            })
        }
        Command::Check { table2: true } => {
            let rows = regenerate_table2(&cfg.dist, &[1, 2], &mc_settings(cfg))?;
            let mut table = csv::Writer::from_writer(&mut *w);
            table.write_record([
                "family",
                "r",
                "printed",
                "printed_exponent",
                "printed_value",
                "closed_form",
                "mc_value",
                "mc_std_err",
                "reproduced",
                "theorem_s",
                "verdict",
                "discrepancy",
            ])?;
            for row in &rows {
                table.write_record([
                    row.family.name().to_string(),
                    row.r.to_string(),
                    row.printed.to_string(),
                    num(row.printed_exponent),
                    num(row.printed_value),
                    num(row.closed_form),
                    num(row.mc_value),
                    num(row.mc_std_err),
                    row.reproduced.to_string(),
                    row.theorem_s.map(num).unwrap_or_default(),
                    row.verdict_report.verdict.to_string(),
                    row.discrepancy.clone().unwrap_or_default(),
                ])?;
                eprintln!(
                    "{:<10} r={} closed={:<12.6} mc={:<12.6} reproduced={:<5} verdict={}",
                    row.family.name(),
                    row.r,
                    row.closed_form,
                    row.mc_value,
                    row.reproduced,
                    row.verdict_report.verdict
                );
                if let Some(note) = &row.discrepancy {
                    eprintln!("           note: {note}");
                }
            }
            table.flush()?;
            Ok(Outcome {
                pass: rows.iter().all(|r| r.reproduced),
            })
        }
        Command::Estimate { input } => {
            let xs = read_series(input)?;
            let e = estimate(&xs, cfg.p, cfg.r)?;
            writeln!(w, "p,q_hat,r,m_hat,mean,n")?;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                num(e.quantile_p),
                num(e.q_hat),
                e.r,
                num(e.m_hat),
                num(e.mean_hat),
                e.n
            )?;
            eprintln!(
                "q_hat({}) = {:.6}  m_hat(r={}) = {:.6}  n = {}",
                e.quantile_p, e.q_hat, e.r, e.m_hat, e.n
            );
            Ok(Outcome { pass: true })
        }
        Command::Gamma { input } => {
            let xs = match input {
                Some(p) => read_series(p)?,
                None => simulate_path(cfg.model()?, &cfg.dist, cfg.n, cfg.burn_in, cfg.seed)?.x,
            };
            let tc = estimate_tricov(&xs, cfg.p, cfg.r, cfg.lag)?;
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let a = signed_power_coeff(&xs, cfg.r, mean)?;
            let g = assemble_gamma(&tc, a, cfg.r);
            let rows = [
                ("tricov", "var_u", tc.var_u),
                ("tricov", "var_v", tc.var_v),
                ("tricov", "var_w", tc.var_w),
                ("tricov", "cov_uv", tc.cov_uv),
                ("tricov", "cov_uw", tc.cov_uw),
                ("tricov", "cov_vw", tc.cov_vw),
                ("tricov", "q_p", tc.q_p),
                ("tricov", "f_at_q", tc.f_at_q),
                ("tricov", "lag", tc.lag_l as f64),
                ("gamma", "a", a),
                ("gamma", "g11", g.g11),
                ("gamma", "g12", g.g12),
                ("gamma", "g22", g.g22),
            ];
            writeln!(w, "block,entry,value")?;
            for (block, entry, v) in rows {
                writeln!(w, "{block},{entry},{}", num(v))?;
            }
            eprintln!("TriCov (lag {}, q = {:.6}, f(q) = {:.6})", tc.lag_l, tc.q_p, tc.f_at_q);
            eprintln!("  {:>8} {:>14} {:>14} {:>14}", "", "u", "v", "w");
            eprintln!(
                "  {:>8} {:>14.6} {:>14.6} {:>14.6}",
                "u", tc.var_u, tc.cov_uv, tc.cov_uw
            );
            eprintln!(
                "  {:>8} {:>14.6} {:>14.6} {:>14.6}",
                "v", tc.cov_uv, tc.var_v, tc.cov_vw
            );
            eprintln!(
                "  {:>8} {:>14.6} {:>14.6} {:>14.6}",
                "w", tc.cov_uw, tc.cov_vw, tc.var_w
            );
            eprintln!("Gamma (a = {a:.6})");
            eprintln!("  {:>14.6} {:>14.6}", g.g11, g.g12);
            eprintln!("  {:>14.6} {:>14.6}", g.g12, g.g22);
            if let Some(warn) = &g.warning {
                eprintln!("warning: {warn}");
            }
            Ok(Outcome { pass: true })
        }
        Command::VerifyClt | Command::VerifyFclt { .. } => {
            let exp = cfg.experiment()?;
            let oracle = oracle_config(cfg);
            let cache = cli.out.as_ref().map(|d| d.join("oracle-cache"));
            let t = targets(&exp.spec, &exp.dist, exp.p, exp.r, &oracle, cache.as_deref())?;
            let premises = premises_hold(cfg)?;
            let mut report = match &cli.command {
                Command::VerifyFclt { proportional } => {
                    let target = if *proportional {
                        FcltTarget::EmpiricalUnitTime
                    } else {
                        FcltTarget::Gamma
                    };
                    run_fclt(&exp, &t, target)?
                }
                _ => run_clt(&exp, &t)?,
            };
            report.premises_unchecked = !premises;
            write_report(w, &report, matches!(cli.command, Command::VerifyFclt { .. }), &num)?;
            summarize(&report);
            Ok(Outcome {
                pass: report.all_pass(),
            })
        }
        Command::NedDecay => {
            let rep = ned_decay(cfg.model()?, &cfg.dist, &cfg.delta_list, cfg.n, cfg.burn_in, cfg.seed)?;
            writeln!(w, "delta,rms_gap")?;
            for p in &rep.points {
                writeln!(w, "{},{}", p.delta, num(p.rms_gap))?;
            }
            match &rep.fit {
                Some(f) => eprintln!(
                    "log rms_gap ~ Δ: slope {:.6}, intercept {:.6}, R² {:.4}",
                    f.slope, f.intercept, f.r_squared
                ),
                None if rep.all_zero() => eprintln!("all gaps are exactly zero"),
                None => eprintln!("too few positive gaps for a fit"),
            }
            Ok(Outcome { pass: true })
        }
    }
}

fn mc_settings(cfg: &RunConfig) -> McSettings {
    let base = McSettings::default();
    McSettings {
        draws: cfg.mc_draws.unwrap_or(base.draws),
        ..base
    }
}

fn oracle_config(cfg: &RunConfig) -> OracleConfig {
    let base = OracleConfig::default();
    OracleConfig {
        n: cfg.oracle_n.unwrap_or(base.n),
        lag: cfg.oracle_lag.unwrap_or(base.lag),
        ..base
    }
}

/// Moment, positivity and contraction conditions for the configured model.
fn premises_hold(cfg: &RunConfig) -> Result<bool, AppError> {
    let spec = cfg.model()?;
    let mc = mc_settings(cfg);
    let contraction = if spec.family().is_exponential() {
        check_exponential_with(spec, &cfg.dist, cfg.r, &mc)?
    } else {
        check_polynomial_with(spec, &cfg.dist, cfg.r, &mc)?
    };
    let ok = [
        check_moment(&cfg.dist, cfg.r)?,
        check_positivity(spec, &cfg.dist),
        contraction,
    ]
    .iter()
    .all(|r| r.verdict == Verdict::Satisfied);
    if !ok {
        eprintln!("warning: premises not established; results flagged");
    }
    Ok(ok)
}

fn relation(rep: &ConditionReport) -> &'static str {
    match rep.relation {
        augarch_core::conditions::Relation::Below => "<",
        augarch_core::conditions::Relation::AtLeast => ">=",
    }
}

fn print_condition_table(reports: &[ConditionReport]) {
    for rep in reports {
        eprintln!(
            "{:<4} | {:<12} | {:<3} {:<4} | {:<13} | {}",
            rep.condition.to_string(),
            format!("{:.6}", rep.lhs_value),
            relation(rep),
            rep.threshold,
            rep.verdict.to_string(),
            rep.method
        );
    }
}

fn write_report(w: &mut dyn Write, rep: &ExperimentReport, fclt: bool, num: &dyn Fn(f64) -> String) -> io::Result<()> {
    if fclt {
        writeln!(w, "s,t,entry,empirical,target,relative_error,abs_diff,std_err,pass")?;
        for c in &rep.fclt {
            let e = &c.entry;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                num(c.s),
                num(c.t),
                e.label,
                num(e.empirical),
                num(e.target),
                num(e.relative_error),
                num(e.abs_diff),
                num(e.std_err),
                e.pass
            )?;
        }
    }
    if !fclt {
        writeln!(w, "entry,empirical,target,relative_error,abs_diff,std_err,pass")?;
    }
    for e in &rep.entries {
        let prefix = if fclt {
            format!("{},{},", num(1.0), num(1.0))
        } else {
            String::new()
        };
        writeln!(
            w,
            "{prefix}{},{},{},{},{},{},{}",
            e.label,
            num(e.empirical),
            num(e.target),
            num(e.relative_error),
            num(e.abs_diff),
            num(e.std_err),
            e.pass
        )?;
    }
    Ok(())
}

fn summarize(rep: &ExperimentReport) {
    eprintln!("replications: {}", rep.replications);
    for e in &rep.entries {
        eprintln!(
            "  {:<4} empirical {:>12.6} target {:>12.6} rel.err {:>8.4} {}",
            e.label,
            e.empirical,
            e.target,
            e.relative_error,
            if e.pass { "ok" } else { "FAIL" }
        );
    }
    if !rep.fclt.is_empty() {
        let failed = rep.fclt.iter().filter(|c| !c.entry.pass).count();
        eprintln!("  cross-time entries: {} checked, {} failed", rep.fclt.len(), failed);
    }
    for n in &rep.normality {
        eprintln!(
            "  normality[{}]: A² = {:.4} (1% critical {:.4}) {}",
            n.coordinate,
            n.statistic,
            n.critical_1pct,
            if n.pass { "ok" } else { "rejected" }
        );
    }
    if rep.premises_unchecked {
        eprintln!("  premises unchecked");
    }
    eprintln!("verdict: {}", if rep.all_pass() { "pass" } else { "fail" });
}

/// Reads the `x` column of a CSV file, or its only column.
fn read_series(path: &Path) -> Result<Vec<f64>, AppError> {
    let bad = |msg: String| AppError::Input(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut records = reader.records();
    let first = records.next().ok_or_else(|| bad("no data".into()))??;
    let numeric = |r: &csv::StringRecord| r.iter().all(|c| c.parse::<f64>().is_ok());
    let col = if numeric(&first) {
        if first.len() != 1 {
            return Err(bad("headerless input must have a single column".into()));
        }
        0
    } else {
        first
            .iter()
            .position(|c| c == "x")
            .or((first.len() == 1).then_some(0))
            .ok_or_else(|| bad("header has no `x` column".into()))?
    };
    let data = numeric(&first).then_some(Ok(first));
    data.into_iter()
        .chain(records)
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec?;
            let cell = rec.get(col).unwrap_or("");
            cell.parse::<f64>()
                .map_err(|_| bad(format!("data row {}: cannot parse {cell:?}", i + 1)))
        })
        .collect()
}
