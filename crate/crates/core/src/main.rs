use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use colombeau_core::assoc::{build_formula, default_params, extrapolate, registry, sweep, Arity};
use colombeau_core::cli::{emit, run_suite, Format, FormulaSelection, SuiteConfig};
use colombeau_core::dist_core::{oracle_pair, DistTerm, LinearCombo};
use colombeau_core::embedding::Embedder;
use colombeau_core::smooth_kit::{fit_mollifier, TestFunction, Variant};
use colombeau_core::{Complex64, Error, Result};

/// Numerical certification of balanced products of singular distributions.
#[derive(Parser)]
#[command(name = "colombeau", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the registered formulas.
    List,
    /// Run the verification suite.
    Verify(SuiteArgs),
    /// Print the raw ε-series of one formula.
    Sweep(SuiteArgs),
    /// Print the exact pairing of a distribution with the test functions.
    Oracle(OracleArgs),
    /// Print mollifier diagnostics.
    Moments(MomentsArgs),
}

#[derive(Args)]
struct SuiteArgs {
    /// TOML suite configuration; built-in defaults otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Restrict to one formula.
    #[arg(long)]
    formula: Option<String>,
    /// Single value of the formula's first parameter (`a` for XX_PROP).
    #[arg(long, requires = "formula", allow_negative_numbers = true)]
    p: Option<i32>,
    /// Single value of the second parameter (FSTEP, XPDQ).
    #[arg(long, requires = "formula")]
    q: Option<u32>,
    /// Largest ε of the sweep (at most 0.2).
    #[arg(long)]
    eps0: Option<f64>,
    /// Number of ε levels.
    #[arg(long)]
    levels: Option<usize>,
    /// Directory for report files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format to write under --out; repeatable.
    #[arg(long, value_enum)]
    format: Vec<Format>,
    /// Worker threads.
    #[arg(long)]
    parallel: Option<usize>,
    /// Relative tolerance on the limit.
    #[arg(long)]
    tol_rel: Option<f64>,
    /// Absolute tolerance on the limit.
    #[arg(long)]
    tol_abs: Option<f64>,
    /// Print every verdict, not only failures.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct OracleArgs {
    /// Catalogue term such as `x_+^{-2}`, `delta^(1)`, `ln|x|`; repeatable, summed.
    #[arg(long = "term", required_unless_present = "formula")]
    terms: Vec<String>,
    /// Use the predicted side of a registered formula instead.
    #[arg(long, conflicts_with = "terms")]
    formula: Option<String>,
    #[arg(long, requires = "formula", allow_negative_numbers = true)]
    p: Option<i32>,
    #[arg(long, requires = "formula")]
    q: Option<u32>,
}

#[derive(Args)]
struct MomentsArgs {
    /// Moment order.
    #[arg(long, default_value_t = 2)]
    q: usize,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long)]
    radius: Option<f64>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum VariantArg {
    Plain,
    Weighted,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Plain => Variant::Plain,
            VariantArg::Weighted => Variant::Weighted,
        }
    }
}

fn suite_config(a: &SuiteArgs) -> Result<SuiteConfig> {
    let mut cfg = match &a.config {
        Some(p) => SuiteConfig::load(p)?,
        None => SuiteConfig::default(),
    };
    if let Some(id) = &a.formula {
        cfg.formulas = vec![FormulaSelection {
            id: id.clone(),
            p: a.p.map(|p| vec![p]),
            q: a.q.map(|q| vec![q]),
        }];
    }
    if let Some(e) = a.eps0 {
        cfg.schedule.eps0 = e;
    }
    if let Some(k) = a.levels {
        cfg.schedule.count = k;
    }
    if let Some(n) = a.parallel {
        cfg.parallel = Some(n);
    }
    if let Some(t) = a.tol_rel {
        cfg.tolerances.rel = t;
    }
    if let Some(t) = a.tol_abs {
        cfg.tolerances.abs = t;
    }
    if let Some(d) = &a.out {
        cfg.output.dir = Some(d.clone());
    }
    if !a.format.is_empty() {
        cfg.output.formats = a.format.clone();
    }
    Ok(cfg)
}

fn fmt_c(c: Option<Complex64>) -> String {
    match c {
        Some(c) if c.im == 0.0 => format!("{:.9e}", c.re),
        Some(c) => format!("{:.9e}{:+.9e}i", c.re, c.im),
        None => "-".into(),
    }
}

fn params_label(p: Option<i32>, q: Option<u32>) -> String {
    match (p, q) {
        (Some(p), Some(q)) => format!("p={p} q={q}"),
        (Some(p), None) => format!("p={p}"),
        _ => String::new(),
    }
}

fn cmd_list() -> Result<ExitCode> {
    for f in registry() {
        let arity = match f.arity {
            Arity::Fixed => "-".to_string(),
            Arity::P { min } => format!("p>={min}"),
            Arity::PQ => "p,q>=1".to_string(),
            Arity::Exponent => "a (as p)".to_string(),
        };
        let defaults: Vec<String> = default_params(f.id)?
            .iter()
            .map(|p| params_label(p.p, p.q))
            .filter(|s| !s.is_empty())
            .collect();
        println!("{:<8} {:<9} {}", f.id, arity, f.statement);
        if !defaults.is_empty() {
            println!("{:<18} defaults: {}", "", defaults.join(", "));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(a: &SuiteArgs) -> Result<ExitCode> {
    let cfg = suite_config(a)?;
    let report = run_suite(&cfg)?;
    for r in &report.records {
        if a.verbose || !r.pass {
            println!(
                "{} {:<8} {:<10} {:<12} {:<16} limit {} oracle {} gap {}{}",
                if r.pass { "PASS" } else { "FAIL" },
                r.formula_id,
                params_label(r.params.p, r.params.q),
                r.psi,
                r.mollifier,
                fmt_c(r.limit_estimate),
                fmt_c(r.oracle_value),
                r.abs_gap.map_or("-".into(), |g| format!("{g:.2e}")),
                r.reason
                    .as_ref()
                    .map_or(String::new(), |s| format!(" ({s})")),
            );
        }
    }
    let s = &report.summary;
    println!("{} of {} verdicts passed", s.passed, s.verdicts);
    if let Some(dir) = &cfg.output.dir {
        for &f in &cfg.output.formats {
            let path = emit(&report, f, dir)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(if s.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_sweep(a: &SuiteArgs) -> Result<ExitCode> {
    let cfg = suite_config(a)?;
    let id = a
        .formula
        .as_deref()
        .ok_or_else(|| Error::Config(vec!["sweep needs --formula".into()]))?;
    let suite = cfg.resolve()?;
    for f in &suite.instances {
        let oracles: Vec<Complex64> = suite
            .test_functions
            .iter()
            .map(|psi| oracle_pair(&f.predicted, psi))
            .collect::<Result<_>>()?;
        for m in &cfg.mollifiers {
            let emb = Embedder::new(fit_mollifier(m.order_for(f.params), m.radius(), m.variant)?);
            for (psi, oracle) in suite.test_functions.iter().zip(&oracles) {
                println!(
                    "# {id} {} psi={} mollifier={}",
                    params_label(f.params.p, f.params.q),
                    psi.id(),
                    emb.mollifier().id()
                );
                let series = sweep(&f.expr, psi, &emb, &cfg.schedule, &cfg.quadrature)?;
                for pt in &series.points {
                    println!(
                        "{:<12.6e} {:>40} err {:.1e}{}",
                        pt.eps,
                        fmt_c(pt.value),
                        pt.error_estimate.unwrap_or(f64::NAN),
                        if pt.converged { "" } else { " (excluded)" }
                    );
                }
                match extrapolate(&series) {
                    Ok(fit) => println!(
                        "limit {} ± {:.1e}  oracle {}",
                        fmt_c(Some(fit.limit)),
                        fit.uncertainty,
                        fmt_c(Some(*oracle))
                    ),
                    Err(e) => println!("limit - ({e})  oracle {}", fmt_c(Some(*oracle))),
                }
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_oracle(a: &OracleArgs) -> Result<ExitCode> {
    let u = match &a.formula {
        Some(id) => build_formula(id, a.p, a.q)?.predicted,
        None => {
            let terms = a
                .terms
                .iter()
                .map(|t| t.parse::<DistTerm>())
                .collect::<Result<Vec<_>>>()?;
            LinearCombo::from_real(terms.into_iter().map(|t| (1.0, t)).collect())
        }
    };
    println!("u = {u}");
    for psi in TestFunction::defaults() {
        println!("{:<12} {}", psi.id(), fmt_c(Some(oracle_pair(&u, &psi)?)));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_moments(a: &MomentsArgs) -> Result<ExitCode> {
    let variants = match a.variant {
        Some(v) => vec![Variant::from(v)],
        None => vec![Variant::Plain, Variant::Weighted],
    };
    for v in variants {
        let spec = fit_mollifier(a.q, a.radius.unwrap_or_else(|| v.default_radius()), v)?;
        println!("{}", serde_json::to_string_pretty(&spec.summary())?);
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match &cli.command {
        Command::List => cmd_list(),
        Command::Verify(a) => cmd_verify(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Moments(a) => cmd_moments(a),
    };
    match out {
        Ok(code) => code,
        Err(Error::Config(errs)) => {
            eprintln!("configuration error:");
            for e in errs {
                eprintln!("  {e}");
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
