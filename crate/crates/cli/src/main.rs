use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_rational::BigRational;
use num_traits::One;

use expcert::exact::{self, approx, extreme_lemma_check, union_bound_exhaustive, ExactError, LemmaCase, RegionSpec};
use expcert::graphs::{self, expansion_report, violation_rate};
use expcert::interval::{parse_rational, Interval};
use expcert::profiles::{builtin_profile, PiecewiseLinearProfile};
use expcert::verifier::{convexity_check, level_curve, level_curve_csv, verify_task, VerificationTask, CLAIM_BOUND};

/// Certified checks for random d-regular bipartite expanders.
#[derive(Debug, Parser)]
#[command(name = "expcert", version)]
struct Cli {
    /// Worker threads for bisection and sampling (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Certify Q < bound along the profile boundary.
    Verify(VerifyArgs),
    /// Certify the second-derivative inequality on the convexity triangle.
    Convexity(ConvexityArgs),
    /// Exact structural checks of a profile.
    FdProps(FdPropsArgs),
    /// Exact corner induction, plus the exhaustive union bound for small v.
    Exact(ExactArgs),
    /// Sample one multigraph and write its edge list.
    Sample(SampleArgs),
    /// Sampled-graph violation rate by exhaustive subset enumeration.
    Expansion(ExpansionArgs),
    /// Certified brackets on the curve Q = 1.
    LevelCurve(LevelCurveArgs),
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(5..=8))]
    d: u32,
    /// Interval literal, `[a]` or `[a,b]`.
    #[arg(long, default_value = CLAIM_BOUND)]
    bound: String,
    /// Bisection depth budget.
    #[arg(long)]
    depth: Option<u32>,
    /// Transcript path.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvexityArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(3..))]
    d: u32,
    /// Exact decimal or `p/q`.
    #[arg(long, default_value = "1e-6")]
    margin: String,
    #[arg(long, default_value_t = 40)]
    depth: u32,
}

#[derive(Debug, Args)]
struct FdPropsArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(5..=8))]
    d: u32,
    /// Check this profile file instead of the builtin one.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Write the profile in text form.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExactArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    v: u64,
    #[arg(long, value_parser = clap::value_parser!(u32).range(5..=8))]
    d: u32,
    #[arg(long, default_value = "1e-5")]
    delta: String,
    /// Write the lemma table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    v: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    d: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge list path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExpansionArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=i64::from(graphs::EXHAUSTIVE_MAX_V)))]
    v: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(5..=8))]
    d: u32,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Expansion CSV of the graph sampled from `--seed`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LevelCurveArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(5..=8))]
    d: u32,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(2..))]
    samples: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Outcome {
    Pass,
    Fail,
    Usage(String),
}

impl From<bool> for Outcome {
    fn from(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

fn rational_flag(name: &str, text: &str) -> Result<BigRational, Outcome> {
    parse_rational(text).ok_or_else(|| Outcome::Usage(format!("--{name}: cannot parse {text:?} as a rational")))
}

fn write_out(path: &Path, text: &str) -> Result<(), Outcome> {
    fs::write(path, text).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        Outcome::Fail
    })
}

fn failed(e: impl std::fmt::Display) -> Outcome {
    eprintln!("error: {e}");
    Outcome::Fail
}

fn cmd_verify(args: VerifyArgs) -> Result<Outcome, Outcome> {
    let bound = Interval::parse_decimal(&args.bound).map_err(|e| Outcome::Usage(format!("--bound: {e}")))?;
    let mut task = VerificationTask::claim_with_bound(args.d, bound).map_err(|e| Outcome::Usage(e.to_string()))?;
    if let Some(depth) = args.depth {
        task.max_depth = depth;
    }
    let start = Instant::now();
    let transcript = verify_task(&task);
    let elapsed = start.elapsed();
    if let Some(path) = &args.log {
        write_out(path, &transcript.to_log())?;
    }
    let preimage = task.preimage().expect("claim tasks have segments");
    println!("d={} preimage {preimage} bound {}", args.d, task.bound);
    println!("{} ({:.2?})", transcript.summary(), elapsed);
    if transcript.verified() {
        println!("Claim is true for d=={}.", args.d);
    } else if let Some(f) = &transcript.failure {
        println!("failing subinterval {}", f.subinterval);
    }
    Ok(transcript.verified().into())
}

fn cmd_convexity(args: ConvexityArgs) -> Result<Outcome, Outcome> {
    let margin = rational_flag("margin", &args.margin)?;
    let start = Instant::now();
    let report = convexity_check(args.d, &margin, args.depth).map_err(|e| Outcome::Usage(e.to_string()))?;
    println!("{report} ({:.2?})", start.elapsed());
    Ok(report.certified().into())
}

fn cmd_fd_props(args: FdPropsArgs) -> Result<Outcome, Outcome> {
    let profile = match &args.profile {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(failed)?;
            PiecewiseLinearProfile::from_text(&text).map_err(failed)?
        }
        None => builtin_profile(args.d).map_err(failed)?,
    };
    if profile.degree() != args.d {
        return Err(Outcome::Usage(format!(
            "profile is for d={}, not d={}",
            profile.degree(),
            args.d
        )));
    }
    if let Some(path) = &args.out {
        write_out(path, &profile.to_text())?;
    }
    let report = profile.check_structure();
    println!("{report}");
    Ok(report.passed().into())
}

fn cmd_exact(args: ExactArgs) -> Result<Outcome, Outcome> {
    let delta = rational_flag("delta", &args.delta)?;
    let case = LemmaCase::for_degree(args.d).map_err(|e| Outcome::Usage(e.to_string()))?;
    let mut ok = true;
    match extreme_lemma_check(case, args.v, &delta) {
        Ok(report) => {
            println!(
                "lemma {case} v={}: u up to {}, bound {}, induction {}, monotone {} ({} lattice points)",
                args.v,
                report.rows.len(),
                verdict(report.bound_holds()),
                verdict(report.induction_holds()),
                verdict(report.monotone_holds()),
                report.monotone.len()
            );
            if let Some(path) = &args.out {
                write_out(path, &report.to_table())?;
            }
            ok &= report.passed();
        }
        Err(ExactError::EmptyRange { .. }) => {
            println!(
                "lemma {case} v={}: no u with 1 <= u <= delta*v, nothing to check",
                args.v
            );
        }
        Err(e) => return Err(Outcome::Usage(e.to_string())),
    }
    if args.v <= exact::EXHAUSTIVE_MAX_V {
        let profile = builtin_profile(args.d).map_err(failed)?;
        let spec = RegionSpec::new(args.v, profile).with_delta(delta);
        let total = union_bound_exhaustive(&spec).map_err(failed)?;
        let below_one = total < BigRational::one();
        println!(
            "exhaustive union bound at v={}: {:e} ({})",
            args.v,
            approx(&total),
            if below_one { "< 1" } else { "NOT < 1" }
        );
        ok &= below_one;
    }
    Ok(ok.into())
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

fn cmd_sample(args: SampleArgs) -> Result<Outcome, Outcome> {
    let g = graphs::sample(args.v, args.d, args.seed).map_err(|e| Outcome::Usage(e.to_string()))?;
    match &args.out {
        Some(path) => write_out(path, &g.to_edge_list())?,
        None => print!("{}", g.to_edge_list()),
    }
    Ok(g.is_regular().into())
}

fn cmd_expansion(args: ExpansionArgs) -> Result<Outcome, Outcome> {
    let profile = builtin_profile(args.d).map_err(failed)?;
    let rate = violation_rate(args.v, args.d, &profile, args.trials, args.seed).map_err(failed)?;
    println!("v={} d={} violation rate {rate}", args.v, args.d);
    if let Some(path) = &args.out {
        let g = graphs::sample(args.v, args.d, args.seed).map_err(failed)?;
        let report = expansion_report(&g).map_err(failed)?;
        write_out(path, &report.to_csv(&profile).map_err(failed)?)?;
    }
    Ok(Outcome::Pass)
}

fn cmd_level_curve(args: LevelCurveArgs) -> Result<Outcome, Outcome> {
    let samples = usize::try_from(args.samples).map_err(|e| Outcome::Usage(e.to_string()))?;
    let points = level_curve(args.d, samples).map_err(failed)?;
    let csv = level_curve_csv(&points);
    match &args.out {
        Some(path) => write_out(path, &csv)?,
        None => print!("{csv}"),
    }
    let profile = builtin_profile(args.d).map_err(failed)?;
    let mut ok = true;
    for p in &points {
        let f = profile.eval_interval(&p.alpha).map_err(failed)?;
        if !f.clt(&p.beta) {
            eprintln!("level curve at alpha {} is not above the profile ({f})", p.alpha);
            ok = false;
        }
    }
    Ok(ok.into())
}

fn run(cli: Cli) -> Outcome {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Outcome::Usage("--jobs must be at least 1".into());
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            return failed(e);
        }
    }
    let result = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Convexity(a) => cmd_convexity(a),
        Command::FdProps(a) => cmd_fd_props(a),
        Command::Exact(a) => cmd_exact(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Expansion(a) => cmd_expansion(a),
        Command::LevelCurve(a) => cmd_level_curve(a),
    };
    result.unwrap_or_else(|o| o)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Outcome::Pass => ExitCode::SUCCESS,
        Outcome::Fail => ExitCode::from(1),
        Outcome::Usage(msg) => {
            eprintln!("error: {msg}\n\nFor more information, try '--help'.");
            ExitCode::from(2)
        }
    }
}
