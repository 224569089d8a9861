//! The `hullproj` command line: `query`, `bench`, `verify` and `gen`.
//!
//! Exit codes: 0 on success, 2 when a solve did not converge (its record is
//! still written), 1 on usage, input or verification errors.

pub mod args;
pub mod bench;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use hullproj::io::{generate, load_dataset, parse_query, save_dataset, DatasetFormat, ResultRecord};
use hullproj::oracle::{Solver, Tolerances};
use hullproj::{project, HullError, QueryPoint, SolverConfig};

use args::{BenchArgs, Cli, Command, GenArgs, QueryArgs, VerifyArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_ERROR
                }
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Query(a) => cmd_query(&a, out),
        Command::Bench(a) => cmd_bench(&a, out, err),
        Command::Verify(a) => cmd_verify(&a, verify::default_solvers(), out, err),
        Command::Gen(a) => cmd_gen(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn io_err(e: std::io::Error) -> HullError {
    HullError::from(e)
}

fn dataset_format(path: &Path, flag: Option<args::FormatArg>) -> DatasetFormat {
    flag.map(Into::into).unwrap_or_else(|| DatasetFormat::from_path(path))
}

/// Reads the query from a file when `arg` names one, otherwise parses it inline.
pub fn read_query(arg: &str) -> Result<QueryPoint, HullError> {
    let path = Path::new(arg);
    if path.is_file() {
        parse_query(&std::fs::read_to_string(path)?)
    } else {
        parse_query(arg)
    }
}

pub fn cmd_query(a: &QueryArgs, out: &mut dyn Write) -> Result<i32, HullError> {
    let data = load_dataset(&a.data, dataset_format(&a.data, a.format))?;
    let q = read_query(&a.query)?;
    let cfg = SolverConfig {
        kkt_tol: a.tol,
        early_exit: a.early_exit,
        ..SolverConfig::default()
            .with_eta(usize::try_from(a.partitions).unwrap_or(usize::MAX))
            .with_solver(a.solver.into())
    };
    let start = Instant::now();
    let sol = project(&data, &q, &cfg)?;
    let record = ResultRecord::new(&q, &sol, &cfg, start.elapsed().as_secs_f64());
    let json = serde_json::to_string_pretty(&record).expect("record serializes");
    match &a.out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None if !a.table => writeln!(out, "{json}").map_err(io_err)?,
        None => {}
    }
    if a.table {
        write!(out, "{}", record.table()).map_err(io_err)?;
    }
    Ok(if sol.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, HullError> {
    let opts = bench::BenchOptions {
        generator: a.generator.into(),
        n: a.n,
        d: a.d,
        eta_sweep: a.eta_sweep.clone(),
        repeats: usize::try_from(a.repeats).unwrap_or(usize::MAX),
        seed: a.seed,
    };
    let report = bench::run_bench(&opts)?;
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match &a.out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => writeln!(out, "{json}").map_err(io_err)?,
    }
    write!(err, "{}", report.table()).map_err(io_err)?;
    Ok(if !report.agree {
        EXIT_ERROR
    } else if !report.all_converged() {
        EXIT_NOT_CONVERGED
    } else {
        EXIT_OK
    })
}

/// `verify` with an explicit solver list, so a broken solver can be injected.
pub fn cmd_verify(
    a: &VerifyArgs,
    solvers: Vec<Solver>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<i32, HullError> {
    let opts = verify::VerifyOptions {
        instances: a.instances,
        max_n: a.max_n,
        max_d: a.max_d,
        seed: a.seed,
        parallel: a.parallel_instances,
    };
    let instances = verify::build_instances(&opts);
    match verify::verify_instances(&instances, &solvers, Tolerances::default(), opts.parallel) {
        Ok(report) => {
            writeln!(
                out,
                "verify passed: {} instances, {} comparisons, max x* deviation {:.3e}, max distance deviation {:.3e}",
                report.instances, report.comparisons, report.max_x_deviation, report.max_distance_deviation
            )
            .map_err(io_err)?;
            Ok(EXIT_OK)
        }
        Err(d) => {
            std::fs::write(&a.replay_out, &d.replay)?;
            writeln!(err, "verify failed: {d}").map_err(io_err)?;
            writeln!(err, "replay written to {}", a.replay_out.display()).map_err(io_err)?;
            Ok(EXIT_ERROR)
        }
    }
}

pub fn cmd_gen(a: &GenArgs) -> Result<i32, HullError> {
    let data = generate(a.generator.into(), a.n, a.d, a.seed)?;
    save_dataset(&data, &a.out, dataset_format(&a.out, a.format))?;
    Ok(EXIT_OK)
}
