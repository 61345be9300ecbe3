use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cosserat_core::catalog::{self, MinimizeConfig};
use cosserat_core::harness::{self, MinimizeStatus};
use cosserat_core::json::to_canonical;
use cosserat_core::validate::{self, Fault, Suite};
use cosserat_core::Error;

#[derive(Parser)]
#[command(name = "cosserat", version, about = "Cosserat strain and curvature measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-check every invariant over the built-in catalog.
    Validate {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Corrupt one route on purpose: shell_cross_sign, nye_trace or curl_transpose.
        #[arg(long)]
        inject_fault: Option<String>,
    },
    /// Evaluate all measures of a configuration at the given points.
    Eval {
        #[arg(long)]
        config: PathBuf,
        /// A JSON file, or inline JSON, holding an array of points.
        #[arg(long)]
        points: String,
    },
    /// Relax a clamped shell and write report.json and trace.csv.
    Minimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_FAIL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_STALLED: u8 = 3;

fn input_error(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_INPUT)
}

fn read(path: &Path) -> Result<String, ExitCode> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_INPUT)
    })
}

fn configure_threads() {
    let n = std::env::var("COSSERAT_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    // 0 lets rayon pick; a failure means the pool already exists
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
}

fn cmd_validate(suite: &str, samples: usize, seed: u64, fault: Option<&str>) -> ExitCode {
    let Some(suite) = Suite::parse(suite) else {
        eprintln!("error: unknown suite {suite:?}");
        return ExitCode::from(EXIT_INPUT);
    };
    let fault = match fault.map(|f| (f, Fault::parse(f))) {
        None => None,
        Some((_, Some(f))) => Some(f),
        Some((name, None)) => {
            eprintln!("error: unknown fault {name:?}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let report = validate::run(suite, samples, seed, fault);
    let value = serde_json::to_value(&report).expect("report serializes");
    print!("{}", to_canonical(&value));
    for c in report.failed() {
        eprintln!(
            "FAIL {}: residual {:e} > {:e}{}",
            c.name,
            c.max_residual,
            c.tolerance,
            c.first_failure
                .as_deref()
                .map(|s| format!(" at {s}"))
                .unwrap_or_default()
        );
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn cmd_eval(config: &Path, points: &str) -> ExitCode {
    let cfg = match read(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let points_text = if Path::new(points).is_file() {
        match read(Path::new(points)) {
            Ok(p) => p,
            Err(code) => return code,
        }
    } else {
        points.to_string()
    };
    let result = harness::parse_points(&points_text).and_then(|p| harness::eval_text(&cfg, &p));
    match result {
        Ok(v) => {
            print!("{}", to_canonical(&v));
            ExitCode::SUCCESS
        }
        Err(e) => input_error(&e),
    }
}

fn cmd_minimize(config: &Path, out: &Path) -> ExitCode {
    let text = match read(config) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let cfg: MinimizeConfig = match catalog::parse(&text) {
        Ok(c) => c,
        Err(e) => return input_error(&e),
    };
    let outcome = match harness::run_minimize(&cfg) {
        Ok(o) => o,
        Err(e) => return input_error(&e),
    };
    let write = fs::create_dir_all(out)
        .and_then(|_| {
            fs::write(
                out.join("report.json"),
                to_canonical(&harness::minimize_report_json(&cfg, &outcome)),
            )
        })
        .and_then(|_| fs::write(out.join("trace.csv"), harness::trace_csv(&outcome.report)));
    if let Err(e) = write {
        eprintln!("error: cannot write to {}: {e}", out.display());
        return ExitCode::from(EXIT_INPUT);
    }
    let r = &outcome.report;
    eprintln!(
        "{:?} after {} iterations: energy {:e} -> {:e}, |grad| {:e}",
        outcome.status,
        r.iterations(),
        r.initial_energy(),
        r.final_energy(),
        r.final_grad_norm()
    );
    match outcome.status {
        MinimizeStatus::Converged => ExitCode::SUCCESS,
        MinimizeStatus::NotConverged => ExitCode::from(EXIT_FAIL),
        MinimizeStatus::Stalled => {
            eprintln!(
                "error: {}",
                Error::LineSearchStalled {
                    iteration: outcome.stalled_at.unwrap_or(0)
                }
            );
            ExitCode::from(EXIT_STALLED)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    match cli.command {
        Command::Validate {
            suite,
            samples,
            seed,
            inject_fault,
        } => cmd_validate(&suite, samples, seed, inject_fault.as_deref()),
        Command::Eval { config, points } => cmd_eval(&config, &points),
        Command::Minimize { config, out } => cmd_minimize(&config, &out),
    }
}
