//! Batch experiment driver behind the `zeno-aqc` binary.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 frustration-freeness check failed,
//! 3 the path has no spectral gap, 4 any other runtime error.

pub mod config;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::path::{verify_frustration_free, FrustrationFreeReport};
use crate::protocol::{run, ProtocolReport};
use crate::schedule::{analyze_schedule, gap_profile, required_steps, DEFAULT_PROBE_STEPS};

pub use config::{ExperimentConfig, Format, InstanceSource, Verbosity};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY_FAILED: i32 = 2;
pub const EXIT_GAPLESS: i32 = 3;
pub const EXIT_RUNTIME: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "zeno-aqc",
    version,
    about = "Measurement-driven adiabatic state preparation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check that the instance path is frustration-free on a sample grid.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of grid points in [0, 1].
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// Largest accepted ground energy.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Choose the number of steps for a target failure probability.
    Schedule {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Run the protocol and write its report.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        trajectories: Option<usize>,
    },
    /// Tabulate the gap and ground energy along the path.
    GapScan {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 101)]
        samples: usize,
    },
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Experiment config (TOML), bare instance file, or DIMACS `.cnf`.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, overriding `outputs.directory`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output formats, overriding `outputs.formats`.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Option<Vec<Format>>,
}

/// Error with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => EXIT_USAGE,
            Error::NoGap | Error::NoGapAtStep { .. } => EXIT_GAPLESS,
            _ => EXIT_RUNTIME,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError {
        code: EXIT_RUNTIME,
        message: format!("{}: {e}", path.display()),
    }
}

/// JSON file layout of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEnvelope {
    /// Seconds since the Unix epoch; the only field that varies between identical runs.
    pub generated_at: u64,
    pub report: ProtocolReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub instance: String,
    pub path_kind: String,
    pub report: FrustrationFreeReport,
}

struct Session {
    config: ExperimentConfig,
    out_dir: PathBuf,
    formats: Vec<Format>,
}

impl Session {
    fn open(common: &CommonArgs) -> Result<Self, CliError> {
        let config = ExperimentConfig::load(&common.config)?;
        let out_dir = common
            .out
            .clone()
            .unwrap_or_else(|| config.outputs.directory.clone());
        let formats = common
            .format
            .clone()
            .unwrap_or_else(|| config.outputs.formats.clone());
        Ok(Self {
            config,
            out_dir,
            formats,
        })
    }

    fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }

    fn verbose(&self) -> bool {
        self.config.outputs.verbosity == Verbosity::Verbose
    }

    fn write(&self, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        fs::create_dir_all(&self.out_dir).map_err(|e| io_error(&self.out_dir, e))?;
        let path = self.out_dir.join(name);
        fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
        if self.verbose() {
            eprintln!("wrote {}", path.display());
        }
        Ok(path)
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError {
        code: EXIT_RUNTIME,
        message: e.to_string(),
    })?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn to_csv(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<Vec<u8>, CliError> {
    let csv_error = |e: csv::Error| CliError {
        code: EXIT_RUNTIME,
        message: e.to_string(),
    };
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).map_err(csv_error)?;
    for row in rows {
        writer.write_record(&row).map_err(csv_error)?;
    }
    writer.into_inner().map_err(|e| CliError {
        code: EXIT_RUNTIME,
        message: e.to_string(),
    })
}

pub fn cmd_verify(common: &CommonArgs, samples: usize, tol: f64) -> Result<i32, CliError> {
    let session = Session::open(common)?;
    let checked = session.config.instance.build()?;
    let report = verify_frustration_free(&checked.path, samples, tol)?;
    let output = VerifyOutput {
        instance: session.config.instance.label().to_string(),
        path_kind: checked.path.kind_name().to_string(),
        report: report.clone(),
    };
    if session.wants(Format::Json) {
        session.write("verify_report.json", &to_json(&output)?)?;
    }
    println!(
        "passed={} max_residual={:e} worst_s={} samples={}",
        report.passed, report.max_residual, report.worst_s, report.samples
    );
    Ok(if report.passed {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

pub fn cmd_schedule(common: &CommonArgs, epsilon: Option<f64>) -> Result<i32, CliError> {
    let session = Session::open(common)?;
    let checked = session.config.instance.build()?;
    let protocol = &session.config.protocol;
    let epsilon = epsilon.unwrap_or(protocol.epsilon);
    let n = required_steps(
        &checked.path,
        epsilon,
        DEFAULT_PROBE_STEPS,
        protocol.degeneracy_tol,
    )?;
    let analysis = analyze_schedule(&checked.path, n, protocol.degeneracy_tol)?;
    if session.wants(Format::Csv) {
        let rows = analysis.per_step.iter().map(|r| {
            vec![
                r.n.to_string(),
                r.s.to_string(),
                r.gap.to_string(),
                r.delta_norm.to_string(),
                r.ratio.to_string(),
            ]
        });
        session.write(
            "schedule.csv",
            &to_csv(&["n", "s", "gap", "delta_norm", "ratio"], rows)?,
        )?;
    }
    if session.wants(Format::Json) {
        session.write("schedule.json", &to_json(&analysis)?)?;
    }
    let time = crate::protocol::compute_conventional_time(&analysis)
        .map_or_else(|_| "none".to_string(), |t| t.to_string());
    println!(
        "N={n} epsilon={epsilon} epsilon_bound={} T={time}",
        analysis.epsilon_bound
    );
    Ok(EXIT_OK)
}

pub fn cmd_run(
    common: &CommonArgs,
    seed: Option<u64>,
    epsilon: Option<f64>,
    trajectories: Option<usize>,
) -> Result<i32, CliError> {
    let mut session = Session::open(common)?;
    let protocol = &mut session.config.protocol;
    if let Some(seed) = seed {
        protocol.seed = seed;
    }
    if let Some(epsilon) = epsilon {
        protocol.epsilon = epsilon;
    }
    if let Some(trajectories) = trajectories {
        protocol.trajectories = trajectories;
    }
    protocol.validate().map_err(|e| CliError {
        code: EXIT_USAGE,
        message: e.to_string(),
    })?;
    let checked = session.config.instance.build()?;
    if !checked.report.passed && session.config.outputs.verbosity != Verbosity::Quiet {
        eprintln!(
            "warning: path is not frustration-free (ground energy {:e} at s = {}); step bounds do not apply",
            checked.report.max_residual, checked.report.worst_s
        );
    }
    let result = run(&checked.path, &session.config.protocol)?;
    let report = &result.report;
    if session.wants(Format::Json) {
        let envelope = ReportEnvelope {
            generated_at: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
            report: report.clone(),
        };
        session.write("report.json", &to_json(&envelope)?)?;
    }
    if session.wants(Format::Csv) {
        session.write("steps.csv", &steps_csv(report)?)?;
    }
    println!(
        "success_exact={} bound={} N={} mode={} seed={}",
        report.overall_success_exact,
        report.success_lower_bound,
        report.n_used,
        report.mode.as_str(),
        report.seed
    );
    if session.verbose() {
        if let Some(e) = &report.overall_success_empirical {
            eprintln!(
                "empirical={} std_error={} trajectories={}",
                e.rate, e.std_error, e.n_trajectories
            );
        }
    }
    Ok(EXIT_OK)
}

/// Per-step table of a report.
pub fn steps_csv(report: &ProtocolReport) -> Result<Vec<u8>, CliError> {
    let rows = report.per_step.iter().map(|r| {
        vec![
            r.n.to_string(),
            r.s.to_string(),
            r.p_n.to_string(),
            r.epsilon_n.to_string(),
            r.bound_epsilon_n.to_string(),
            r.overlap_after.to_string(),
            r.k_used.to_string(),
            r.distance_to_ground.to_string(),
        ]
    });
    to_csv(
        &[
            "n",
            "s",
            "p_n",
            "epsilon_n",
            "bound_epsilon_n",
            "overlap_after",
            "k_used",
            "distance_to_ground",
        ],
        rows,
    )
}

pub fn cmd_gap_scan(common: &CommonArgs, samples: usize) -> Result<i32, CliError> {
    let session = Session::open(common)?;
    let checked = session.config.instance.build()?;
    let profile = gap_profile(
        &checked.path,
        samples,
        session.config.protocol.degeneracy_tol,
    )?;
    if session.wants(Format::Csv) {
        let rows = profile.iter().map(|p| {
            vec![
                p.s.to_string(),
                p.gap.map_or_else(String::new, |g| g.to_string()),
                p.ground_energy.to_string(),
            ]
        });
        session.write(
            "gap_scan.csv",
            &to_csv(&["s", "gap", "ground_energy"], rows)?,
        )?;
    }
    if session.wants(Format::Json) {
        session.write("gap_scan.json", &to_json(&profile)?)?;
    }
    let min_gap = profile
        .iter()
        .filter_map(|p| p.gap)
        .fold(f64::INFINITY, f64::min);
    let gapless = profile.iter().filter(|p| p.gap.is_none()).count();
    println!(
        "samples={} min_gap={min_gap} gapless_points={gapless}",
        profile.len()
    );
    Ok(EXIT_OK)
}

pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Verify {
            common,
            samples,
            tol,
        } => cmd_verify(common, *samples, *tol),
        Command::Schedule { common, epsilon } => cmd_schedule(common, *epsilon),
        Command::Run {
            common,
            seed,
            epsilon,
            trajectories,
        } => cmd_run(common, *seed, *epsilon, *trajectories),
        Command::GapScan { common, samples } => cmd_gap_scan(common, *samples),
    }
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {}", e.message);
            e.code
        }
    }
}
