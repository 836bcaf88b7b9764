//! Command-line front end: config files in, CSV, SVG and reports out.

pub mod commands;
pub mod config;
pub mod ini;
pub mod plot;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands::CommandError;
use crate::config::{load_config, ConfigError, RunConfig};
use crate::plot::{line_plot, Series};
use crate::report::VerificationReport;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "blocksep", version, about = "Block-separable twisted Hamiltonian systems: simulate, compare, verify")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the full system and write a CSV table (and phase portraits).
    Simulate(RunArgs),
    /// Compare a block projection of the full orbit with the reduced orbit.
    Compare(RunArgs),
    /// Run the residual battery at seeded probe points.
    Verify(RunArgs),
    /// Flatness and leaf-curvature checks for an E3 family.
    Curvature(RunArgs),
    /// List catalog systems.
    List,
}

#[derive(Debug, Args, Clone, Default)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Block for `compare`, 1-based.
    #[arg(long, value_name = "R")]
    pub block: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    pub svg: bool,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Override(String),
    #[error(transparent)]
    Command(#[from] CommandError),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Override(_) | RunError::Command(CommandError::Usage(_)) | RunError::Io { .. } => {
                EXIT_CONFIG
            }
            RunError::Command(CommandError::Numerical(_)) => EXIT_NUMERICAL,
        }
    }
}

/// Loads the configuration and applies command-line overrides.
pub fn resolve(args: &RunArgs) -> Result<RunConfig, ConfigError> {
    let mut cfg = load_config(&args.config)?;
    let bad = |message: String| ConfigError::Invalid { line: None, message };
    if let Some(b) = args.block {
        if b == 0 || b > cfg.system.n_blocks() {
            return Err(bad(format!("--block {b} out of range 1..={}", cfg.system.n_blocks())));
        }
        cfg.block = b - 1;
    }
    for (flag, v) in [("--rtol", args.rtol), ("--atol", args.atol)] {
        if let Some(v) = v {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("{flag} must be positive, got {v}")));
            }
        }
    }
    if let Some(r) = args.rtol {
        cfg.integrator.rtol = r;
    }
    if let Some(a) = args.atol {
        cfg.integrator.atol = a;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(d) = &args.out {
        cfg.output.dir = d.clone();
    }
    cfg.output.svg |= args.svg;
    Ok(cfg)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), RunError> {
    std::fs::write(path, contents).map_err(|source| RunError::Io { path: path.to_path_buf(), source })
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, RunError> {
    let dir = cfg.output.dir.as_path();
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.to_path_buf(), source })?;
    Ok(dir)
}

fn csv_bytes(header: &[String], rows: &[Vec<f64>]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        // 17 significant digits round-trip every f64
        w.write_record(r.iter().map(|x| format!("{x:.16e}")))?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<f64>]) -> Result<(), RunError> {
    let bytes = csv_bytes(header, rows).map_err(|e| RunError::Io { path: path.to_path_buf(), source: e.into() })?;
    write_file(path, &bytes)
}

fn write_report(cfg: &RunConfig, name: &str, report: &VerificationReport) -> Result<PathBuf, RunError> {
    let path = out_dir(cfg)?.join(format!("{name}.json"));
    let mut json = report.to_json();
    json["config"] = serde_json::Value::String(cfg.render());
    write_file(&path, serde_json::to_string_pretty(&json).expect("report serialises").as_bytes())?;
    Ok(path)
}

fn echo(cfg: &RunConfig, stdout: &mut dyn Write) {
    let _ = writeln!(stdout, "# resolved configuration");
    for line in cfg.render().lines() {
        let _ = writeln!(stdout, "# {line}");
    }
    let _ = writeln!(stdout);
}

fn finish(report: &VerificationReport, stdout: &mut dyn Write) -> i32 {
    let _ = write!(stdout, "{}", report.render_text());
    if report.pass() {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    }
}

fn run_simulate(cfg: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, RunError> {
    let sim = commands::simulate(cfg)?;
    let dir = out_dir(cfg)?;
    let csv = dir.join("simulate.csv");
    write_csv(&csv, &sim.header, &sim.rows)?;
    let _ = writeln!(stdout, "wrote {}", csv.display());
    if cfg.output.svg {
        for (a, b) in &cfg.output.pairs {
            let (Some(x), Some(y)) = (sim.column(a), sim.column(b)) else {
                return Err(RunError::Override(format!("phase-portrait pair ({a}, {b}) names an unknown column")));
            };
            let path = dir.join(format!("simulate_{a}_{b}.svg"));
            let svg = line_plot(&format!("orbit projection ({a}, {b})"), a, b, &[Series::new("full orbit", x.into_iter().zip(y).collect())]);
            write_file(&path, svg.as_bytes())?;
            let _ = writeln!(stdout, "wrote {}", path.display());
        }
    }
    if let Some(msg) = &sim.failure {
        let _ = writeln!(stderr, "FAILED integration: {msg}");
        let _ = writeln!(stderr, "partial output: {} rows in {}", sim.rows.len(), csv.display());
        let _ = write!(stdout, "{}", sim.report.render_text());
        return Err(RunError::Command(CommandError::Numerical(msg.clone())));
    }
    write_report(cfg, "simulate", &sim.report)?;
    Ok(finish(&sim.report, stdout))
}

fn run_compare(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<i32, RunError> {
    let (rep, report) = commands::compare(cfg)?;
    let dir = out_dir(cfg)?;
    let r = cfg.block + 1;
    let mut header = vec!["t".to_string(), format!("tau_{r}")];
    header.extend(rep.labels.iter().cloned());
    header.extend(rep.labels.iter().map(|l| format!("{l}_reduced")));
    let rows: Vec<Vec<f64>> = (0..rep.series.t.len())
        .map(|k| {
            let mut row = vec![rep.series.t[k], rep.series.tau[k]];
            row.extend(&rep.series.full[k]);
            row.extend(&rep.series.reduced[k]);
            row
        })
        .collect();
    let csv = dir.join(format!("compare_block{r}.csv"));
    write_csv(&csv, &header, &rows)?;
    let _ = writeln!(stdout, "wrote {}", csv.display());
    if cfg.output.svg {
        let m = rep.labels.len() / 2;
        let (q, p) = (&rep.labels[0], &rep.labels[m]);
        let col = |v: &Vec<Vec<f64>>, j: usize| v.iter().map(|s| s[j]).collect::<Vec<_>>();
        let phase = |v: &Vec<Vec<f64>>| col(v, 0).into_iter().zip(col(v, m)).collect::<Vec<_>>();
        let plots = [
            (
                format!("compare_block{r}_phase.svg"),
                line_plot(
                    &format!("block {r}: projected vs reduced orbit"),
                    q,
                    p,
                    &[Series::new("projection of full orbit", phase(&rep.series.full)), Series::new("reduced orbit", phase(&rep.series.reduced)).dashed()],
                ),
            ),
            (
                format!("compare_block{r}_t.svg"),
                line_plot(&format!("{q} against t"), "t", q, &[Series::new("full orbit", rep.series.t.iter().copied().zip(col(&rep.series.full, 0)).collect())]),
            ),
            (
                format!("compare_block{r}_tau.svg"),
                line_plot(
                    &format!("{q} against tau_{r}"),
                    &format!("tau_{r}"),
                    q,
                    &[Series::new("reduced orbit", rep.series.tau.iter().copied().zip(col(&rep.series.reduced, 0)).collect())],
                ),
            ),
        ];
        for (name, svg) in plots {
            let path = dir.join(name);
            write_file(&path, svg.as_bytes())?;
            let _ = writeln!(stdout, "wrote {}", path.display());
        }
    }
    write_report(cfg, &format!("compare_block{r}"), &report)?;
    Ok(finish(&report, stdout))
}

fn dispatch(command: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, RunError> {
    let args = match command {
        Command::List => {
            for (name, about) in commands::list() {
                let _ = writeln!(stdout, "{name:<12} {about}");
            }
            return Ok(EXIT_OK);
        }
        Command::Simulate(a) | Command::Compare(a) | Command::Verify(a) | Command::Curvature(a) => a,
    };
    let cfg = resolve(args)?;
    echo(&cfg, stdout);
    match command {
        Command::Simulate(_) => run_simulate(&cfg, stdout, stderr),
        Command::Compare(_) => run_compare(&cfg, stdout),
        Command::Verify(_) => {
            let report = commands::verify(&cfg)?;
            write_report(&cfg, "verify", &report)?;
            Ok(finish(&report, stdout))
        }
        Command::Curvature(_) => {
            let report = commands::curvature(&cfg)?;
            write_report(&cfg, "curvature", &report)?;
            Ok(finish(&report, stdout))
        }
        Command::List => unreachable!(),
    }
}

/// Runs one command and returns the process exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match dispatch(&cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let kind = match e.exit_code() {
                EXIT_NUMERICAL => "numerical failure",
                _ => "error",
            };
            let _ = writeln!(stderr, "{kind}: {e}");
            e.exit_code()
        }
    }
}
