//! `fracstokes` command-line driver.
//!
//! `fracstokes <subcommand> [--config FILE] [--key value ...]`. Keys come
//! from the config file first and flags override them. Exit status: 0 when
//! every check passes, 1 when one fails, 2 on usage or configuration errors.

mod commands;
mod selftest;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use fracstokes::config::Config;
use fracstokes::report::write_reports_csv;
use fracstokes::CheckReport;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Keys accepted by every subcommand.
pub const COMMON_KEYS: &[&str] = &["output_dir", "seed"];

const SUBCOMMANDS: &[&str] = &[
    "ml",
    "fracint",
    "fracdiff",
    "solve-ode",
    "solve-stokes",
    "verify-embeddings",
    "verify-energy",
    "shift-scaling",
    "convergence",
    "selftest",
];

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or configuration: exit 2.
    Usage(String),
    /// Failure while computing or writing results: exit 1.
    Run(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(format!("i/o: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage<T>(r: fracstokes::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Usage(e.to_string()))
}

pub fn run_err<T>(r: fracstokes::Result<T>) -> CliResult<T> {
    r.map_err(|e| CliError::Run(e.to_string()))
}

/// What a subcommand produced: checks to print plus files to write.
#[derive(Default)]
pub struct Output {
    pub reports: Vec<CheckReport>,
    pub files: Vec<(String, Vec<u8>)>,
    pub lines: Vec<String>,
}

fn parse_args(args: &[String]) -> CliResult<(String, Config)> {
    let Some(sub) = args.first() else {
        return Err(CliError::Usage(format!("missing subcommand; expected one of {}", SUBCOMMANDS.join(", "))));
    };
    if !SUBCOMMANDS.contains(&sub.as_str()) {
        return Err(CliError::Usage(format!("unknown subcommand '{sub}'; expected one of {}", SUBCOMMANDS.join(", "))));
    }
    let mut flags = Config::new();
    let mut file: Option<String> = None;
    let mut it = args[1..].iter();
    while let Some(a) = it.next() {
        let Some(key) = a.strip_prefix("--") else {
            return Err(CliError::Usage(format!("unexpected argument '{a}'; flags take the form --key value")));
        };
        let (key, value) = match key.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| CliError::Usage(format!("flag '--{key}' needs a value")))?;
                (key.to_string(), v.clone())
            }
        };
        if key == "config" {
            file = Some(value);
        } else {
            flags.set(&key, &value);
        }
    }
    let mut cfg = match file {
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::Usage(format!("key 'config': cannot read '{path}': {e}")))?;
            usage(Config::parse(&text))?
        }
        None => Config::new(),
    };
    cfg.merge(&flags);
    Ok((sub.clone(), cfg))
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("FRACSTOKES_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("FRACSTOKES_THREADS must be a non-negative integer, got '{v}'")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Run(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn manifest(sub: &str, cfg: &Config) -> String {
    let config: serde_json::Map<String, serde_json::Value> =
        cfg.iter().map(|(k, v)| (k.to_string(), serde_json::Value::String(v.to_string()))).collect();
    let m = serde_json::json!({
        "tool": "fracstokes",
        "version": VERSION,
        "subcommand": sub,
        "config": config,
    });
    serde_json::to_string_pretty(&m).expect("manifest serializes") + "\n"
}

fn write_outputs(sub: &str, cfg: &Config, out: &Output) -> CliResult<()> {
    let dir = PathBuf::from(cfg.get("output_dir").unwrap_or("fracstokes-out"));
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("manifest.json"), manifest(sub, cfg))?;
    if !out.reports.is_empty() {
        let mut buf = Vec::new();
        write_reports_csv(&mut buf, &out.reports)?;
        fs::write(dir.join("reports.csv"), buf)?;
    }
    for (name, bytes) in &out.files {
        fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

fn run(args: &[String]) -> CliResult<bool> {
    let (sub, mut cfg) = parse_args(args)?;
    configure_threads()?;
    let out = commands::dispatch(&sub, &mut cfg)?;
    write_outputs(&sub, &cfg, &out)?;
    for l in &out.lines {
        println!("{l}");
    }
    for r in &out.reports {
        println!("{r}");
    }
    Ok(out.reports.iter().all(|r| r.passed))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(m)) => {
            eprintln!("fracstokes: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Run(m)) => {
            eprintln!("fracstokes: {m}");
            ExitCode::from(1)
        }
    }
}
