use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use trilayer::harness::{
    report_csv, report_text, run_sweep, sweep_csv, validate_result, RunReport, SweepSpec, SweepTarget,
};
use trilayer::joint::{build_joint_milp, solve_joint, JointOptions, Variant};
use trilayer::market::{generate_case, load_case, save_case, Case, CaseError, GenSpec};
use trilayer::optimizer::{export_mps, MilpOptions, MilpStatus};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_LIMIT: u8 = 3;
const EXIT_INVALID: u8 = 4;

#[derive(Parser)]
#[command(name = "trilayer", version, about = "Joint bidding and retail pricing for a load-serving entity")]
struct Cli {
    /// Log solver progress (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a case from a generator spec.
    Gen {
        spec: PathBuf,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the joint model and write a report.
    Solve {
        case: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
        /// Output prefix; writes PREFIX.csv, PREFIX.txt and PREFIX.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-solve over a grid of offsets and write one CSV row per point.
    Sweep {
        case: PathBuf,
        /// Sweep spec file; the target/grid flags are used when absent.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Target::AlphaOffset)]
        target: Target,
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 21)]
        points: usize,
        #[arg(long)]
        fix_beta: bool,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a stored solve result against its case.
    Validate {
        case: PathBuf,
        result: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Write the joint model in MPS format.
    Export {
        case: PathBuf,
        #[arg(long, default_value = "full")]
        variant: Variant,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value = "full")]
    variant: Variant,
    /// Seed used when the case argument is a generator spec.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1e-6)]
    gap: f64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    /// Branch-and-bound nodes.
    #[arg(long)]
    node_limit: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    AlphaOffset,
    EucBenefitOffset,
    RivalBidOffset,
}

impl From<Target> for SweepTarget {
    fn from(t: Target) -> Self {
        match t {
            Target::AlphaOffset => SweepTarget::AlphaOffset,
            Target::EucBenefitOffset => SweepTarget::EucBenefitOffset,
            Target::RivalBidOffset => SweepTarget::RivalBidOffset,
        }
    }
}

impl SolverArgs {
    fn options(&self, workers: usize) -> JointOptions {
        let milp = MilpOptions {
            gap: self.gap,
            workers,
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            node_limit: self.node_limit,
            ..MilpOptions::default()
        };
        JointOptions { milp, ..JointOptions::default() }
    }
}

/// Reads a case file, or draws one when the file is a generator spec.
fn read_case(path: &Path, seed: u64) -> Result<Case> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    match load_case(&text) {
        Ok(c) => Ok(c),
        Err(case_err) => match GenSpec::from_toml(&text) {
            Ok(spec) => Ok(generate_case(&spec, seed)?),
            Err(_) => Err(case_err).with_context(|| format!("loading {}", path.display())),
        },
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn status_code(status: MilpStatus, has_result: bool) -> ExitCode {
    match (status, has_result) {
        (MilpStatus::Optimal, true) => ExitCode::SUCCESS,
        (MilpStatus::LimitReached, true) => ExitCode::from(EXIT_LIMIT),
        (MilpStatus::Infeasible, _) => ExitCode::from(EXIT_INFEASIBLE),
        _ => ExitCode::FAILURE,
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Command::Gen { spec, seed, out } => {
            let text = fs::read_to_string(&spec).with_context(|| format!("reading {}", spec.display()))?;
            let case = generate_case(&GenSpec::from_toml(&text)?, seed)?;
            write_or_print(out.as_deref(), &save_case(&case)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve { case, solver, out } => {
            let case = read_case(&case, solver.seed)?;
            let outcome = solve_joint(&case, solver.variant, &solver.options(solver.workers))?;
            let report = RunReport::from_outcome(solver.variant, &outcome);
            if let Some(k) = &outcome.kkt {
                if !k.passed() {
                    log::warn!("KKT residuals above tolerance:\n{k}");
                }
            }
            if !outcome.audit.clean && outcome.result.is_some() {
                log::warn!("big-M audit: duals still at their bound after {} rounds", outcome.audit.rounds.len());
            }
            let text = report_text(&case, &report);
            match out {
                Some(prefix) => {
                    fs::write(with_ext(&prefix, "csv"), report_csv(&case, &report))?;
                    fs::write(with_ext(&prefix, "txt"), &text)?;
                    fs::write(with_ext(&prefix, "json"), report.to_json())?;
                    print!("{text}");
                }
                None => print!("{text}"),
            }
            Ok(status_code(report.status, report.result.is_some()))
        }
        Command::Sweep { case, spec, target, from, to, points, fix_beta, solver, out } => {
            let sweep = match spec {
                Some(p) => {
                    SweepSpec::from_toml(&fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?)?
                }
                None => {
                    let mut s = SweepSpec::linspace(target.into(), from, to, points);
                    s.variant = solver.variant;
                    s.seed = solver.seed;
                    s.fix_beta = fix_beta;
                    s
                }
            };
            sweep.check()?;
            let case = read_case(&case, sweep.seed)?;
            // grid points run side by side; each solve stays single-worker
            let res = run_sweep(&case, &sweep, &solver.options(1), solver.workers)?;
            let failed = res.rows.iter().filter(|r| r.result.is_none()).count();
            if failed > 0 {
                log::warn!("{failed} of {} grid points returned no decision", res.rows.len());
            }
            write_or_print(out.as_deref(), &sweep_csv(&res.rows, case.areas.len()))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { case, result, tol, seed } => {
            let case = read_case(&case, seed)?;
            let text = fs::read_to_string(&result).with_context(|| format!("reading {}", result.display()))?;
            let report = RunReport::from_json(&text).with_context(|| format!("parsing {}", result.display()))?;
            let v = validate_result(&case, &report, tol);
            print!("{v}");
            Ok(if v.passed() { ExitCode::SUCCESS } else { ExitCode::from(EXIT_INVALID) })
        }
        Command::Export { case, variant, seed, out } => {
            let case = read_case(&case, seed)?;
            let jm = build_joint_milp(&case, variant)?;
            let mps = export_mps(&jm.model);
            match out {
                Some(p) => {
                    fs::write(&p, &mps.text)?;
                    fs::write(with_ext(&p, "names"), mps.name_map())?;
                }
                None => print!("{}", mps.text),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().format_timestamp(None).init();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.downcast_ref::<CaseError>().is_some()) {
                return ExitCode::from(EXIT_INVALID);
            }
            ExitCode::FAILURE
        }
    }
}
