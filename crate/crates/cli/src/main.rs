//! Batch front end: validate problem files, run the solvers, and emit
//! iterate logs, summaries, and geometry reports.
//!
//! Exit codes are a stable contract:
//!   0  success (ε reached or exact optimum)
//!   2  validation failure (bad file, bad flags, violated assumptions)
//!   3  numerical error or a run that ended without reaching its target
//!   4  i/o failure

use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use supcone::io::{
    emit_report, parse_problem, render_findings_summary, render_geometry, render_iterate_log,
    render_summary, IoError, ParsedProblem,
};
use supcone::oracles::{geometry_report, lp_brute_force, random_lp, EnumLimits};
use supcone::solvers::{run, Algorithm, RunConfig, SolverError, Termination};
use supcone::transform::relative_error;

#[derive(Parser)]
#[command(
    name = "supcone",
    version,
    about = "conic optimization via radial supgradient methods"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a problem file and report findings
    Validate { file: PathBuf },
    /// Solve a problem file with Algorithm 1 or 2
    Solve(SolveArgs),
    /// Emit the geometry constants and iteration budgets for a problem file
    Geometry {
        file: PathBuf,
        /// accuracy used for the budget formulas
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
    },
    /// Run a seeded batch of random instances against the oracle
    Bench {
        /// suite name; `random-lp` is the only one
        #[arg(long, default_value = "random-lp")]
        suite: String,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
    },
}

#[derive(Args)]
struct SolveArgs {
    file: PathBuf,
    /// 1 = Polyak steps with known z*, 2 = ε-steps with restarts
    #[arg(long)]
    alg: u8,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// stop Algorithm 2 when the projected supgradient norm falls below this
    #[arg(long, default_value_t = 1e-10)]
    stall_tol: f64,
    /// write the JSONL iterate log here
    #[arg(long)]
    log: Option<PathBuf>,
    /// write the JSON run summary here
    #[arg(long)]
    summary: Option<PathBuf>,
}

const EXIT_OK: u8 = 0;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_IO: u8 = 4;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap usage problems are validation failures of the invocation,
            // except the help/version pseudo-errors
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_VALIDATION,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let code = match cli.command {
        Command::Validate { file } => cmd_validate(&file),
        Command::Solve(args) => cmd_solve(&args),
        Command::Geometry { file, eps } => cmd_geometry(&file, eps),
        Command::Bench {
            suite,
            count,
            seed,
            eps,
        } => cmd_bench(&suite, count, seed, eps),
    };
    ExitCode::from(code)
}

fn io_exit(err: &IoError) -> u8 {
    match err {
        IoError::Io(_) => EXIT_IO,
        IoError::Validation(_) | IoError::Parse { .. } | IoError::Epigraph(_) => EXIT_VALIDATION,
        IoError::Unsupported(_) => EXIT_NUMERICAL,
    }
}

fn cmd_validate(file: &Path) -> u8 {
    match parse_problem(file) {
        Ok(ParsedProblem::Conic(inst)) => {
            println!(
                "ok: conic instance with n = {}, m = {}, cone blocks = {}",
                inst.dim(),
                inst.a.rows(),
                inst.cone.blocks().len()
            );
            EXIT_OK
        }
        Ok(ParsedProblem::Epigraph(model)) => {
            println!(
                "ok: epigraph model with n = {}, pieces = {}, lifted dimension = {}",
                model.n(),
                model.pieces.len(),
                model.lifted.dim()
            );
            EXIT_OK
        }
        Err(IoError::Validation(findings)) => {
            println!("{}", render_findings_summary(&findings));
            EXIT_VALIDATION
        }
        Err(err) => {
            eprintln!("{err}");
            io_exit(&err)
        }
    }
}

fn cmd_solve(args: &SolveArgs) -> u8 {
    let algorithm = match args.alg {
        1 => Algorithm::Alg1,
        2 => Algorithm::Alg2,
        other => {
            eprintln!("--alg must be 1 or 2, got {other}");
            return EXIT_VALIDATION;
        }
    };
    let parsed = match parse_problem(&args.file) {
        Ok(p) => p,
        Err(IoError::Validation(findings)) => {
            let summary = render_findings_summary(&findings);
            if let Some(path) = &args.summary {
                if std::fs::write(path, &summary).is_err() {
                    return EXIT_IO;
                }
            }
            println!("{summary}");
            return EXIT_VALIDATION;
        }
        Err(err) => {
            eprintln!("{err}");
            return io_exit(&err);
        }
    };
    let (inst, model) = match parsed {
        ParsedProblem::Conic(inst) => (inst, None),
        ParsedProblem::Epigraph(model) => (model.lifted.clone(), Some(model)),
    };
    let cfg = RunConfig {
        algorithm,
        epsilon: args.eps,
        max_iterations: args.max_iters,
        stall_tolerance: args.stall_tol,
        seed: 0,
    };
    let report = match run(&inst, &cfg) {
        Ok(r) => r,
        Err(SolverError::Validation(findings)) => {
            let summary = render_findings_summary(&findings);
            if let Some(path) = &args.summary {
                if std::fs::write(path, &summary).is_err() {
                    return EXIT_IO;
                }
            }
            println!("{summary}");
            return EXIT_VALIDATION;
        }
        Err(SolverError::BadConfig(msg)) => {
            eprintln!("bad run configuration: {msg}");
            return EXIT_VALIDATION;
        }
        Err(err) => {
            eprintln!("{err}");
            return EXIT_NUMERICAL;
        }
    };
    let geometry = geometry_report(&inst, args.eps, EnumLimits::default()).ok();
    if let Err(err) = emit_report(
        &report,
        geometry.as_ref(),
        args.log.as_deref(),
        args.summary.as_deref(),
    ) {
        eprintln!("{err}");
        return EXIT_IO;
    }
    if args.summary.is_none() && args.log.is_none() {
        print!("{}", render_iterate_log(&report));
    }
    println!("{}", render_summary(&report, geometry.as_ref()));
    if let Some(model) = &model {
        match supcone::epigraph::recover_solution(model, &report.best_pi) {
            Ok((x, t)) => {
                let coords: Vec<String> = x.iter().map(|&v| supcone::io::fmt_f64(v)).collect();
                println!(
                    "{{\"recovered_x\":[{}],\"recovered_t\":{}}}",
                    coords.join(","),
                    supcone::io::fmt_f64(t)
                );
            }
            Err(err) => {
                eprintln!("solution recovery failed: {err}");
                return EXIT_NUMERICAL;
            }
        }
    }
    match report.termination {
        Termination::EpsilonReached | Termination::OptimalExact => EXIT_OK,
        Termination::MaxIterations | Termination::ZTargetInfeasibleSignal => EXIT_NUMERICAL,
    }
}

fn cmd_geometry(file: &Path, eps: f64) -> u8 {
    let parsed = match parse_problem(file) {
        Ok(p) => p,
        Err(err) => {
            eprintln!("{err}");
            return io_exit(&err);
        }
    };
    let inst = match parsed {
        ParsedProblem::Conic(inst) => inst,
        ParsedProblem::Epigraph(model) => model.lifted,
    };
    match geometry_report(&inst, eps, EnumLimits::default()) {
        Ok(g) => {
            println!("{}", render_geometry(&g));
            EXIT_OK
        }
        Err(err) => {
            eprintln!("{err}");
            EXIT_NUMERICAL
        }
    }
}

fn cmd_bench(suite: &str, count: usize, seed: u64, eps: f64) -> u8 {
    if suite != "random-lp" {
        eprintln!("unknown suite \"{suite}\"; available: random-lp");
        return EXIT_VALIDATION;
    }
    let mut failures = 0usize;
    for i in 0..count {
        let mut inst = random_lp(seed.wrapping_add(i as u64), 8, 3);
        let (z_star, _) =
            lp_brute_force(&inst.a, &inst.b, &inst.c, EnumLimits::default()).expect("oracle");
        inst.z_star = Some(z_star);
        let geometry = geometry_report(&inst, eps, EnumLimits::default()).ok();
        let budget = geometry.as_ref().and_then(|g| g.budget_alg2);
        let max_iters = budget.map(|b| b.ceil() as usize).unwrap_or(200_000).max(1);
        let cfg = RunConfig {
            algorithm: Algorithm::Alg2,
            epsilon: eps,
            max_iterations: max_iters,
            stall_tolerance: 1e-10,
            seed: 0,
        };
        match run(&inst, &cfg) {
            Ok(report) => {
                let rel = relative_error(&inst, &report.best_pi).unwrap_or(f64::NAN);
                let ok = rel <= eps;
                if !ok {
                    failures += 1;
                }
                println!(
                    "instance {i}: n={} m={} z_star={} iterations={} budget={} rel_err={} {}",
                    inst.dim(),
                    inst.a.rows(),
                    supcone::io::fmt_f64(z_star),
                    report.records.len(),
                    budget
                        .map(|b| format!("{:.1}", b))
                        .unwrap_or_else(|| "-".into()),
                    supcone::io::fmt_f64(rel),
                    if ok { "ok" } else { "FAIL" }
                );
            }
            Err(err) => {
                failures += 1;
                println!("instance {i}: error {err}");
            }
        }
    }
    if failures == 0 {
        EXIT_OK
    } else {
        EXIT_NUMERICAL
    }
}
