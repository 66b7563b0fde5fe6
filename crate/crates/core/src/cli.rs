//! Command-line front end. Exit codes: 0 success, 1 numeric failure,
//! 2 usage or configuration error.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::parse_config;
use crate::error::Error;
use crate::sweep::{self, CacheStats, ResultCache, RunOptions, SweepConfig};

/// Environment variable naming the default cache directory.
pub const CACHE_ENV: &str = "NCQPT_CACHE_DIR";
const CONFIG_COPY: &str = "config.txt";

#[derive(Parser, Debug)]
#[command(name = "ncqpt", version, about = "Scan XY spin chains for phase transitions with geometric nonclassicality measures")]
pub struct Cli {
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    pub parallelism: usize,
    /// Result cache directory (default: <out>/cache)
    #[arg(long, global = true, env = CACHE_ENV)]
    pub cache: Option<PathBuf>,
    /// Do not read or write the result cache
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sweep the curve and write CSV rows plus a critical-point report
    Scan {
        config: PathBuf,
        #[arg(long, default_value = "ncqpt-out")]
        out: PathBuf,
    },
    /// Print every configured measure at one parameter value
    Measure {
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
    },
    /// Re-render the report of an earlier scan from its directory
    Report { run_dir: PathBuf },
    /// Run the built-in acceptance checks
    Selftest,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 1,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Expression(_) | Error::InvalidSplit(_) => Failure::Usage(e.to_string()),
            other => Failure::Numeric(other.to_string()),
        }
    }
}

fn load_config(path: &Path) -> Result<(String, SweepConfig), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let config = parse_config(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok((text, config))
}

fn open_cache(dir: Option<&Path>) -> Result<Option<ResultCache>, Failure> {
    dir.map(|d| ResultCache::open(d).map_err(|e| Failure::Numeric(format!("cache {}: {e}", d.display()))))
        .transpose()
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Numeric(format!("{}: {e}", path.display()))
}

#[derive(Debug)]
pub struct ScanSummary {
    pub rows: usize,
    pub criticals: usize,
    pub cache: CacheStats,
    pub flagged_errors: usize,
    pub csv_path: PathBuf,
    pub report_path: PathBuf,
}

/// Runs a sweep and writes the CSV, the report and a copy of the config into `out`.
pub fn scan(config_path: &Path, out: &Path, cache: Option<&Path>, parallelism: usize) -> Result<ScanSummary, Failure> {
    let (text, config) = load_config(config_path)?;
    std::fs::create_dir_all(out).map_err(|e| io_failure(out, e))?;
    let options = RunOptions { parallelism, cache: open_cache(cache)? };
    let outcome = sweep::run_sweep(&config, &options)?;

    let csv_path = out.join(&config.output.csv);
    let mut csv = Vec::new();
    sweep::emit_csv(&outcome.rows, &mut csv)?;
    std::fs::write(&csv_path, csv).map_err(|e| io_failure(&csv_path, e))?;
    let report_path = out.join(&config.output.report);
    let report = sweep::emit_report(&outcome.criticals, &config)?;
    std::fs::write(&report_path, report).map_err(|e| io_failure(&report_path, e))?;
    let copy = out.join(CONFIG_COPY);
    std::fs::write(&copy, text).map_err(|e| io_failure(&copy, e))?;

    Ok(ScanSummary {
        rows: outcome.rows.len(),
        criticals: outcome.criticals.len(),
        cache: outcome.cache,
        flagged_errors: outcome.rows.iter().filter(|r| r.has(sweep::Flag::Error)).count(),
        csv_path,
        report_path,
    })
}

/// Report document for the scan stored in `run_dir`, recomputed through the cache.
pub fn report(run_dir: &Path, cache: Option<&Path>, parallelism: usize) -> Result<String, Failure> {
    let (_, config) = load_config(&run_dir.join(CONFIG_COPY))?;
    let options = RunOptions { parallelism, cache: open_cache(cache)? };
    let outcome = sweep::run_sweep(&config, &options)?;
    Ok(sweep::emit_report(&outcome.criticals, &config)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cache_for = |default: &Path| -> Option<PathBuf> {
        if cli.no_cache {
            None
        } else {
            Some(cli.cache.clone().unwrap_or_else(|| default.join("cache")))
        }
    };
    match &cli.command {
        Command::Scan { config, out } => {
            let s = scan(config, out, cache_for(out).as_deref(), cli.parallelism)?;
            eprintln!(
                "{} rows, {} critical points, cache {} hits / {} misses; wrote {} and {}",
                s.rows,
                s.criticals,
                s.cache.hits,
                s.cache.misses,
                s.csv_path.display(),
                s.report_path.display()
            );
            if s.flagged_errors > 0 {
                eprintln!("warning: {} rows carry the error flag", s.flagged_errors);
            }
        }
        Command::Measure { config, lambda } => {
            let (_, cfg) = load_config(config)?;
            let cache = if cli.no_cache { None } else { cli.cache.clone() };
            let options = RunOptions { parallelism: cli.parallelism, cache: open_cache(cache.as_deref())? };
            let rows = sweep::measure_at(&cfg, *lambda, &options).map_err(|e| match e {
                Error::OutOfRange { .. } => Failure::Usage(format!("--lambda: {e}")),
                other => other.into(),
            })?;
            let mut stdout = std::io::stdout().lock();
            sweep::emit_csv(&rows, &mut stdout)?;
            stdout.flush().map_err(|e| Failure::Numeric(e.to_string()))?;
            for r in &rows {
                if let Some(note) = &r.note {
                    eprintln!("{}: {note}", r.measure);
                }
            }
        }
        Command::Report { run_dir } => {
            let doc = report(run_dir, cache_for(run_dir).as_deref(), cli.parallelism)?;
            print!("{doc}");
        }
        Command::Selftest => {
            let mut failed = 0;
            for c in crate::acceptance::CRITERIA {
                let r = c();
                println!("{r}");
                failed += usize::from(!r.passed);
            }
            if failed > 0 {
                return Err(Failure::Numeric(format!("{failed} selftest checks failed")));
            }
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {f}");
            f.exit_code()
        }
    }
}
