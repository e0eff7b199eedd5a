//! Command-line front end for the check suites.
//!
//! Configuration comes from an optional TOML file overridden by flags; the
//! calibration cache lives in the directory named by LOOPEXT_CACHE.  Exit
//! codes: 0 all checks pass, 1 at least one check failed, 2 configuration
//! error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Deserialize;

use loopext::algebra::GridSize;
use loopext::error::Error;
use loopext::groupoid::Level;
use loopext::verifier::{
    emit_report, load_or_calibrate, run_suite, ReportFormat, RunConfig, SuiteId, TolerancePolicy,
};

#[derive(Parser)]
#[command(name = "loopext", about = "Numerical checks for level-k loop-group extension structures", version)]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Grid N_theta x N_s x N_u (repeatable for convergence sweeps).
    #[arg(long, global = true, value_name = "NTxNSxNU")]
    grid: Vec<String>,

    /// Level k: an integer, a fraction like 1/2, or "golden" (repeatable).
    #[arg(long = "k", global = true, value_name = "LEVEL")]
    levels: Vec<String>,

    /// Fixture seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Multiplier on every tolerance floor.
    #[arg(long = "tol-scale", global = true)]
    tol_scale: Option<f64>,

    /// Output directory for reports and tables.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_name = "json|csv")]
    format: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Compute and cache the normalisation constants for each grid.
    Calibrate,
    /// Periods of the left-invariant form: generator, degree, integrality.
    Periods,
    /// Group-cocycle suite: kappa identity, product identity, derived
    /// cocycle, Cech relations.
    Cocycles,
    /// Well-definedness dichotomy of the candidate normal subgroups.
    Nk,
    /// Action-groupoid axioms, orbits, and the quotient interpolation.
    Groupoid,
    /// Structure 2-group, trivialisations, and bundle axioms.
    Bundle,
    /// Band quotients U(1)/k for rational k.
    Band,
    /// Everything, in suite order.
    All,
}

#[derive(Deserialize, Default)]
struct FileTolerance {
    scale: Option<f64>,
    convergence_multiplier: Option<f64>,
}

#[derive(Deserialize, Default)]
struct FileGrid {
    n_theta: usize,
    n_s: usize,
    n_u: usize,
}

/// On-disk configuration: key/value with nested tables.
#[derive(Deserialize, Default)]
struct FileConfig {
    seed: Option<u64>,
    levels: Option<Vec<String>>,
    grids: Option<Vec<String>>,
    grid: Option<FileGrid>,
    out: Option<String>,
    format: Option<String>,
    suites: Option<Vec<String>>,
    tolerance: Option<FileTolerance>,
}

fn parse_grid(text: &str) -> Result<GridSize, Error> {
    let parts: Vec<&str> = text.split(['x', ',']).collect();
    if parts.len() != 3 {
        return Err(Error::Config(format!("grid '{text}' is not NTxNSxNU")));
    }
    let dims = parts
        .iter()
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| Error::Config(format!("grid '{text}' has non-numeric parts")))?;
    Ok(GridSize::new(dims[0], dims[1], dims[2]))
}

struct Resolved {
    run: RunConfig,
    format: ReportFormat,
    out: PathBuf,
}

fn resolve(cli: &Cli) -> Result<Resolved, Error> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("bad config file: {e}")))?
        }
        None => FileConfig::default(),
    };

    let defaults = RunConfig::default();

    let mut grids = Vec::new();
    if !cli.grid.is_empty() {
        for g in &cli.grid {
            grids.push(parse_grid(g)?);
        }
    } else if let Some(list) = &file.grids {
        for g in list {
            grids.push(parse_grid(g)?);
        }
    } else if let Some(g) = &file.grid {
        grids.push(GridSize::new(g.n_theta, g.n_s, g.n_u));
    } else {
        grids = defaults.grids.clone();
    }

    let levels = if !cli.levels.is_empty() {
        cli.levels.iter().map(|t| Level::parse(t)).collect::<Result<Vec<_>, _>>()?
    } else if let Some(list) = &file.levels {
        list.iter().map(|t| Level::parse(t)).collect::<Result<Vec<_>, _>>()?
    } else {
        defaults.levels.clone()
    };

    let suites = match cli.command {
        Command::All => SuiteId::ALL.to_vec(),
        Command::Calibrate => Vec::new(),
        Command::Periods => vec![SuiteId::Periods],
        Command::Cocycles => vec![SuiteId::Cocycles],
        Command::Nk => vec![SuiteId::Nk],
        Command::Groupoid => vec![SuiteId::Groupoid],
        Command::Bundle => vec![SuiteId::Bundle],
        Command::Band => vec![SuiteId::Band],
    };
    // a config file may restrict `all` to a subset
    let suites = if matches!(cli.command, Command::All) {
        match &file.suites {
            Some(names) => {
                let mut set = Vec::new();
                for n in names {
                    for s in SuiteId::parse(n)? {
                        if !set.contains(&s) {
                            set.push(s);
                        }
                    }
                }
                set
            }
            None => suites,
        }
    } else {
        suites
    };

    let file_tol = file.tolerance.unwrap_or_default();
    let tolerance = TolerancePolicy {
        scale: cli.tol_scale.or(file_tol.scale).unwrap_or(1.0),
        convergence_multiplier: file_tol.convergence_multiplier.unwrap_or(10.0),
    };

    let out = cli
        .out
        .clone()
        .or_else(|| file.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let format = match cli.format.as_deref().or(file.format.as_deref()) {
        Some(f) => ReportFormat::parse(f)?,
        None => ReportFormat::Json,
    };

    let run = RunConfig {
        grids,
        levels,
        seed: cli.seed.or(file.seed).unwrap_or(defaults.seed),
        tolerance,
        suites,
        out_dir: Some(out.clone()),
    };
    Ok(Resolved { run, format, out })
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    let resolved = resolve(cli)?;

    if matches!(cli.command, Command::Calibrate) {
        for &grid in &resolved.run.grids {
            let cal = load_or_calibrate(grid)?;
            println!(
                "calibrated {}: c_killing = {:.9e}, sign = {:+.0}, c_kappa = {:.6}, \
                 quadrature estimate = {:.3e}, murray residual = {:.3e}",
                grid.label(),
                cal.record.c_killing,
                cal.record.sign,
                cal.record.c_kappa,
                cal.record.quad_error,
                cal.record.murray_residual,
            );
            for row in &cal.table {
                println!(
                    "  grid {:>12}  raw {:>12.6}  calibrated {:>10.6}  richardson {:>12.6}",
                    row.grid, row.raw_value, row.calibrated_value, row.richardson_estimate
                );
            }
            std::fs::create_dir_all(&resolved.out)?;
            let path = resolved.out.join("convergence.csv");
            let mut text = String::from("grid,raw_value,calibrated_value,richardson_estimate\n");
            for row in &cal.table {
                text.push_str(&format!(
                    "{},{},{},{}\n",
                    row.grid, row.raw_value, row.calibrated_value, row.richardson_estimate
                ));
            }
            std::fs::write(path, text)?;
        }
        return Ok(true);
    }

    let output = run_suite(&resolved.run)?;
    for r in &output.reports {
        let status = if r.pass { "PASS" } else { "FAIL" };
        let residual = r
            .residual
            .map(|x| format!("{x:.3e}"))
            .unwrap_or_else(|| r.error.clone().unwrap_or_else(|| "error".into()));
        println!(
            "{status} {:<44} k={:<7} grid={:<12} residual={residual} tol={:.1e} ({} ms)",
            r.check_id, r.k, r.grid, r.tolerance, r.runtime_ms
        );
    }
    let passed = output.reports.iter().filter(|r| r.pass).count();
    println!(
        "{} of {} checks passed at seed {}",
        passed,
        output.reports.len(),
        resolved.run.seed
    );
    let files = emit_report(&output, resolved.format, &resolved.out)?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(output.all_passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
