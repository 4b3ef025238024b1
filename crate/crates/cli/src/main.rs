use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rescue_mkp::bounds::{cardinality_range, hyperplane_relaxation, HyperplaneStatus};
use rescue_mkp::driver::{greedy_lb, solve, Policy, ProofStatus, SolveConfig};
use rescue_mkp::generate::{random_suite, run_verification, RandomSpec};
use rescue_mkp::model::{parse_orlib, Instance, KnownOptimaRegistry, RegistryCheck};
use rescue_mkp::report::ReportDocument;
use rescue_mkp::GapConvention;

const EXIT_PROVED: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_TIME_LIMIT: u8 = 2;
const EXIT_MISMATCH: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rescue-mkp",
    version,
    about = "Exact 0-1 multidimensional knapsack solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance of an OR-Library file and print a report.
    Solve(SolveArgs),
    /// Compare the solver against brute force on random instances.
    Verify(VerifyArgs),
    /// Print the greedy bound, cardinality range and hyperplane bounds.
    Bounds(BoundsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Rr,
    Seq,
}

#[derive(Args, Clone)]
struct SearchFlags {
    /// Free variables left to branch and bound.
    #[arg(long)]
    spb_size: Option<usize>,
    /// Free variables below which branch and bound enumerates plainly.
    #[arg(long)]
    dfs_size: Option<usize>,
    /// Descents per hyperplane visit.
    #[arg(long, default_value_t = rescue_mkp::driver::DEFAULT_NB_ITER)]
    nb_iter: usize,
    #[arg(long, value_enum, default_value_t = PolicyArg::Rr)]
    policy: PolicyArg,
    /// Measure the reduced-cost budget against LB + 1 instead of LB.
    #[arg(long)]
    strict_gap: bool,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

impl SearchFlags {
    fn config(&self) -> SolveConfig {
        SolveConfig {
            spb_size: self.spb_size,
            final_dfs_size: self.dfs_size,
            nb_iter: self.nb_iter,
            policy: match self.policy {
                PolicyArg::Rr => Policy::RoundRobin,
                PolicyArg::Seq => Policy::Sequential,
            },
            gap: if self.strict_gap {
                GapConvention::Strict
            } else {
                GapConvention::Standard
            },
            threads: self.threads.max(1),
            ..SolveConfig::default()
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    path: PathBuf,
    /// Zero-based problem index within the file.
    #[arg(long, default_value_t = 0)]
    instance: usize,
    /// Wall-clock budget, e.g. `60`, `2.5s` or `500ms`.
    #[arg(long, value_parser = parse_duration)]
    time_limit: Option<Duration>,
    #[command(flatten)]
    search: SearchFlags,
    /// Print clause updates to standard error.
    #[arg(long)]
    trace: bool,
    /// Known-optima table; defaults to $RESCUE_MKP_DATA or the bundled one.
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 8)]
    n_min: usize,
    #[arg(long, default_value_t = 18)]
    n_max: usize,
    #[arg(long, default_value_t = 1)]
    m_min: usize,
    #[arg(long, default_value_t = 5)]
    m_max: usize,
    #[arg(long, default_value_t = 100)]
    coef_max: i64,
    #[command(flatten)]
    search: SearchFlags,
    /// Corrupts every solver answer; checks that the harness notices.
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct BoundsArgs {
    path: PathBuf,
    #[arg(long, default_value_t = 0)]
    instance: usize,
    /// Lower bound to use instead of the greedy value.
    #[arg(long, allow_hyphen_values = true)]
    lb: Option<i64>,
    /// Also report these hyperplanes even when outside the range.
    #[arg(long = "k")]
    extra_k: Vec<usize>,
}

fn parse_duration(s: &str) -> Result<Duration, String> {
    let (num, scale) = if let Some(v) = s.strip_suffix("ms") {
        (v, 1e-3)
    } else if let Some(v) = s.strip_suffix('s') {
        (v, 1.0)
    } else {
        (s, 1.0)
    };
    let secs: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("invalid duration {s:?}"))?;
    Duration::try_from_secs_f64(secs * scale).map_err(|e| format!("invalid duration {s:?}: {e}"))
}

fn load_instance(path: &Path, index: usize) -> Result<(Instance, Vec<Instance>)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let all = parse_orlib(&text).with_context(|| format!("parsing {}", path.display()))?;
    let Some(inst) = all.get(index).cloned() else {
        bail!(
            "{} holds {} problems, no index {index}",
            path.display(),
            all.len()
        );
    };
    Ok((inst, all))
}

fn cmd_solve(args: &SolveArgs) -> Result<u8> {
    let (inst, all) = load_instance(&args.path, args.instance)?;
    let mut registry = match &args.registry {
        Some(p) => KnownOptimaRegistry::from_file(p)?,
        None => KnownOptimaRegistry::load_default()?,
    };
    registry.absorb_declared(&all);
    let cfg = SolveConfig {
        time_limit: args.time_limit,
        trace: args.trace,
        ..args.search.config()
    };
    let report = solve(&inst, &cfg)?;
    for line in &report.trace {
        eprintln!("{line}");
    }
    let mut doc = ReportDocument::from_report(&report);
    let mut code = match report.status {
        ProofStatus::Proved => EXIT_PROVED,
        ProofStatus::TimeLimited => EXIT_TIME_LIMIT,
    };
    let registry_field = match (report.status, registry.check(inst.name(), report.optimum)) {
        (_, RegistryCheck::Unknown) => "unknown".to_string(),
        (
            ProofStatus::TimeLimited,
            RegistryCheck::Match(v) | RegistryCheck::Mismatch { expected: v, .. },
        ) => {
            format!("unchecked(expected={v})")
        }
        (ProofStatus::Proved, RegistryCheck::Match(v)) => format!("match({v})"),
        (ProofStatus::Proved, RegistryCheck::Mismatch { expected, got }) => {
            eprintln!(
                "error: proved {got} but the registry lists {expected} for {}",
                inst.name()
            );
            code = EXIT_MISMATCH;
            format!("mismatch(expected={expected})")
        }
    };
    doc.set("registry", registry_field);
    let text = doc.render();
    match &args.output {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(code)
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    if args.n_min > args.n_max || args.m_min > args.m_max || args.m_min == 0 || args.n_min == 0 {
        bail!("invalid size ranges");
    }
    let spec = RandomSpec {
        n: args.n_min..=args.n_max,
        m: args.m_min..=args.m_max,
        coef_max: args.coef_max,
    };
    let suite = random_suite(args.seed, args.count, &spec);
    let cfg = args.search.config();
    let summary = run_verification(&suite, |inst| {
        let r = solve(inst, &cfg).map_err(|e| e.to_string())?;
        if !r.is_proved() {
            return Err("not proved".into());
        }
        Ok(r.optimum + i64::from(args.inject_fault))
    })?;
    for m in &summary.mismatches {
        let got = m.got.map_or("-".to_string(), |g| g.to_string());
        println!(
            "MISMATCH {} expected={} got={} {}",
            m.instance, m.expected, got, m.detail
        );
    }
    println!(
        "checked={} mismatches={} seed={}",
        summary.checked,
        summary.mismatches.len(),
        args.seed
    );
    Ok(if summary.passed() { 0 } else { EXIT_ERROR })
}

fn cmd_bounds(args: &BoundsArgs) -> Result<u8> {
    let (inst, _) = load_instance(&args.path, args.instance)?;
    let greedy = greedy_lb(&inst);
    let lb = args.lb.unwrap_or(greedy.value);
    println!("instance={}", inst.name());
    println!("greedy={}", greedy.value);
    println!("lb={lb}");
    let range = cardinality_range(&inst, lb)?;
    let mut ks: Vec<usize> = Vec::new();
    match range {
        Some(r) => {
            println!("k_range={}..{}", r.k_min, r.k_max);
            ks.extend(r.iter());
        }
        None => println!("k_range=none"),
    }
    for &k in &args.extra_k {
        if k > inst.n() {
            bail!("k={k} exceeds n={}", inst.n());
        }
        if !ks.contains(&k) {
            ks.push(k);
        }
    }
    ks.sort_unstable();
    for k in ks {
        let h = hyperplane_relaxation(&inst, k)?;
        let in_range = range.is_some_and(|r| r.contains(k));
        let tag = if in_range { "" } else { " outside_range" };
        match h.status {
            HyperplaneStatus::Infeasible => println!("k={k} infeasible{tag}"),
            _ => println!("k={k} ub_int={} ub={:.6}{tag}", h.ub_int, h.ub_real),
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bounds(a) => cmd_bounds(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
