//! Command-line layer: configuration, orchestration, sweeps and self-tests.
//!
//! Exit codes: 0 ok, 1 self-test failure, 2 usage or configuration error,
//! 3 computation error.

pub mod config;
pub mod run;
pub mod selftest;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use config::{GeometryConfig, ModelConfig, NumericsConfig, RunConfig, SelftestKind, Task};
pub use run::{oracle, prepare, run, sweep_radius, OracleReport, RunReport, SweepResult, SweepRow};
pub use selftest::{selftest, SelftestSummary};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Compute(#[from] crate::error::Error),
    #[error("self-test failed")]
    SelftestFailed,
    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::SelftestFailed => 1,
            CliError::Config(_) => 2,
            CliError::Compute(_) | CliError::Output(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "twistlab", version, about = "Topological indices of free-fermion lattice models")]
pub struct Cli {
    /// JSON run configuration; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Omit wall-clock times so that outputs are byte-reproducible.
    #[arg(long, global = true)]
    pub no_timing: bool,
    /// Model family: qwz, pip or trivial.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// Model parameter, e.g. `--param u=1.0`.
    #[arg(long = "param", global = true, value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Real-space Chern number.
    Chern,
    /// Z/2 and Z/8 parity indices.
    Parity,
    /// Twist-defect statistics of N stacked copies.
    Twist {
        #[arg(long)]
        copies: Option<usize>,
    },
    /// Momentum-space Chern number of the bulk model.
    OracleTknn {
        #[arg(long)]
        kgrid: Option<usize>,
    },
    /// Convergence sweep over disk radii, written as CSV.
    Sweep {
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
    },
    /// Randomized property suites.
    Selftest {
        kind: SelftestArg,
        #[arg(long)]
        trials: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SelftestArg {
    Wick,
    Algebraic,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got '{s}'"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value for {k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Defaults, then the config file, then flags.
pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut c = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    c.task = match &cli.command {
        Command::Chern | Command::Sweep { .. } => Task::Chern,
        Command::Parity => Task::Parity,
        Command::Twist { .. } => Task::Twist,
        Command::OracleTknn { .. } => Task::Oracle,
        Command::Selftest { .. } => Task::Selftest,
    };
    match &cli.command {
        Command::Twist { copies: Some(n) } => c.copies = *n,
        Command::OracleTknn { kgrid: Some(k) } => c.numerics.kgrid = *k,
        Command::Sweep { radii: Some(r) } => c.radii = r.clone(),
        Command::Selftest { kind, trials } => {
            c.selftest = match kind {
                SelftestArg::Wick => SelftestKind::Wick,
                SelftestArg::Algebraic => SelftestKind::Algebraic,
            };
            if let Some(t) = trials {
                c.trials = *t;
            }
        }
        _ => {}
    }
    if let Some(m) = &cli.model {
        c.model = ModelConfig::family(m)?;
    }
    for (k, v) in &cli.params {
        c.model.set(k, *v)?;
    }
    if let Some(r) = cli.radius {
        c.geometry.radius = r;
    }
    if let Some(s) = cli.seed {
        c.seed = s;
    }
    if let Some(out) = &cli.out {
        c.output = Some(out.display().to_string());
    }
    c.validate()?;
    Ok(c)
}

fn emit(config: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &config.output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Output(format!("cannot write {path}: {e}"))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::Output(e.to_string())),
    }
}

fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = resolve(cli)?;
    let timing = !cli.no_timing;
    match &cli.command {
        Command::Chern | Command::Parity | Command::Twist { .. } => emit(&config, &json(&run(&config, timing)?), stdout),
        Command::OracleTknn { .. } => emit(&config, &json(&oracle(&config)?), stdout),
        Command::Sweep { .. } => emit(&config, &sweep_radius(&config, cli.jobs, timing)?.to_csv(), stdout),
        Command::Selftest { .. } => {
            let summary = selftest(config.selftest, config.seed, config.trials)?;
            for line in summary.lines() {
                writeln!(stdout, "{line}").map_err(|e| CliError::Output(e.to_string()))?;
            }
            if let Some(path) = &config.output {
                std::fs::write(path, json(&summary)).map_err(|e| CliError::Output(format!("cannot write {path}: {e}")))?;
            }
            if summary.passed() {
                Ok(())
            } else {
                if let Some(c) = &summary.counterexample {
                    writeln!(stdout, "counterexample: {c}").map_err(|e| CliError::Output(e.to_string()))?;
                }
                Err(CliError::SelftestFailed)
            }
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes") + "\n"
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(&cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = main_with_args(std::iter::once("twistlab").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(call(&["frobnicate"]).0, 2);
        let (code, _, err) = call(&["twist", "--copies", "4", "--model", "trivial", "--radius", "4"]);
        assert_eq!(code, 2);
        assert!(err.contains("copies must be odd"));
        assert_eq!(call(&["selftest", "wick", "--trials", "0"]).0, 2);
        assert_eq!(call(&["sweep", "--model", "trivial"]).0, 2);
        assert_eq!(call(&["chern", "--model", "qwz", "--param", "mu=1"]).0, 2);
    }

    #[test]
    fn computation_errors_exit_three() {
        let (code, _, err) = call(&["chern", "--model", "qwz", "--param", "u=2", "--radius", "4"]);
        assert_eq!(code, 3);
        assert!(err.contains("gapless"), "{err}");
    }

    #[test]
    fn chern_report_on_stdout() {
        let (code, out, _) = call(&["chern", "--model", "trivial", "--radius", "5", "--no-timing"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!(v["nu"].as_f64().unwrap().abs() <= 1e-10);
        assert_eq!(v["config"]["geometry"]["radius"], 5.0);
        assert!(v["sign_convention"].as_str().unwrap().contains("qwz"));
    }

    #[test]
    fn selftest_exit_codes() {
        let (code, out, _) = call(&["selftest", "algebraic", "--trials", "5", "--seed", "3"]);
        assert_eq!(code, 0);
        assert!(out.contains("parity_generator_commutes: 5/5 passed"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("sweep"));
    }
}
