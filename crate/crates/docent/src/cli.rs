//! Command-line entry points.
//!
//! Exit codes: 0 success, 1 bad input or runtime failure (messages carry
//! file line numbers where they apply), 2 usage error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use docent_core::analysis::{code_events, export_timeline, paired_t_test, session_stats};
use docent_core::session::{Session, SessionConfig};
use docent_core::SimTime;

use crate::config::{load_template, ServiceConfig};
use crate::gateway::{build_gateway, GatewayConfig};
use crate::logfile::{load_log, to_ndjson};
use crate::mapfile::read_map;
use crate::script::{parse_script, run_script};

#[derive(Debug, Parser)]
#[command(name = "docent", version, about = "Museum tour-guide robot simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    Scripted,
    Remote,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Play a tour script headlessly on the virtual clock and write the log.
    Run {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        script: PathBuf,
        #[arg(long, value_enum, default_value_t = Backend::Scripted)]
        backend: Backend,
        /// Rule file for the scripted backend.
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Log destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Stop at this many seconds instead of when the tour goes quiet.
        #[arg(long)]
        duration: Option<f64>,
        /// TOML file of session settings.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        template: Option<PathBuf>,
    },
    /// Code a recorded log and report statistics.
    Analyze {
        #[arg(long)]
        log: PathBuf,
        /// Map used to resolve exhibit names in suggestion answers.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Write the timeline rows (JSON) here.
        #[arg(long)]
        timeline: Option<PathBuf>,
        /// Write the statistics (JSON) here instead of standard output.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Write every coded utterance (JSON) here.
        #[arg(long)]
        coded: Option<PathBuf>,
    },
    /// Paired t-test over two files of per-subject values.
    Ttest { a: PathBuf, b: PathBuf },
    /// Start the HTTP service.
    Serve {
        #[arg(long)]
        config: PathBuf,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Run {
            map,
            script,
            backend,
            rules,
            seed,
            out,
            duration,
            config,
            template,
        } => {
            let log = run(&RunArgs {
                map,
                script,
                backend,
                rules,
                seed,
                duration,
                config,
                template,
            })?;
            write_out(out.as_deref(), &log)
        }
        Cmd::Analyze {
            log,
            map,
            timeline,
            stats,
            coded,
        } => analyze(&log, map.as_deref(), timeline.as_deref(), stats.as_deref(), coded.as_deref()),
        Cmd::Ttest { a, b } => {
            let (a, b) = (read_values(&a)?, read_values(&b)?);
            let r = paired_t_test(&a, &b)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(())
        }
        Cmd::Serve { config } => {
            let mut cfg = ServiceConfig::read(&config)?;
            cfg.apply_env(|k| std::env::var(k).ok());
            crate::service::serve_blocking(cfg)
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunArgs {
    pub map: PathBuf,
    pub script: PathBuf,
    pub backend: Backend,
    pub rules: Option<PathBuf>,
    pub seed: u64,
    pub duration: Option<f64>,
    pub config: Option<PathBuf>,
    pub template: Option<PathBuf>,
}

/// Executes a headless run and returns the log text.
pub fn run(args: &RunArgs) -> Result<String> {
    let map = read_map(&args.map).with_context(|| format!("map {}", args.map.display()))?;
    let text = std::fs::read_to_string(&args.script).with_context(|| format!("script {}", args.script.display()))?;
    let steps = parse_script(&text).with_context(|| format!("script {}", args.script.display()))?;
    let session_cfg = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("config {}", p.display()))?;
            toml::from_str::<SessionConfig>(&text).with_context(|| format!("config {}", p.display()))?
        }
        None => SessionConfig::default(),
    };
    let duration = match args.duration {
        Some(d) if !(d >= 0.0) || !d.is_finite() => bail!("--duration must be a non-negative number of seconds"),
        d => d.map(SimTime::from_secs_f64),
    };
    let gateway = match args.backend {
        Backend::Scripted => GatewayConfig::Scripted {
            rules: args.rules.clone(),
        },
        Backend::Remote => GatewayConfig::remote_from_env()?,
    };
    let llm = build_gateway(&gateway, args.seed)?;
    let template = load_template(args.template.as_deref())?;
    let mut session = Session::new(format!("run-{}", args.seed), map.into(), session_cfg, template)
        .map_err(|e| anyhow::anyhow!("config: {e}"))?;
    run_script(&mut session, &steps, llm.as_ref(), duration).with_context(|| format!("script {}", args.script.display()))?;
    Ok(to_ndjson(session.transcript()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn analyze(
    log: &Path,
    map: Option<&Path>,
    timeline: Option<&Path>,
    stats: Option<&Path>,
    coded_out: Option<&Path>,
) -> Result<()> {
    let bytes = std::fs::read(log).with_context(|| format!("log {}", log.display()))?;
    let events = load_log(&bytes).with_context(|| format!("log {}", log.display()))?;
    let map = map
        .map(|p| read_map(p).with_context(|| format!("map {}", p.display())))
        .transpose()?;
    let coded = code_events(&events, map.as_ref());
    if let Some(p) = timeline {
        write_out(Some(p), &json_line(&export_timeline(&coded))?)?;
    }
    if let Some(p) = coded_out {
        write_out(Some(p), &json_line(&coded)?)?;
    }
    write_out(stats, &json_line(&session_stats(&events, map.as_ref()))?)
}

fn json_line<T: serde::Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Numbers separated by whitespace or commas; `#` starts a comment.
fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()) {
            let v: f64 = tok
                .parse()
                .with_context(|| format!("{}: line {}: not a number: {tok:?}", path.display(), i + 1))?;
            out.push(v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(main_with(["docent", "run"]), ExitCode::from(2));
        assert_eq!(main_with(["docent", "fly"]), ExitCode::from(2));
        assert_eq!(main_with(["docent", "run", "--map", "m", "--script", "s", "--backend", "carrier-pigeon"]), ExitCode::from(2));
    }

    #[test]
    fn values_parse_with_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        std::fs::write(&p, "1, 2\n# note\n3.5 4e1\n").unwrap();
        assert_eq!(read_values(&p).unwrap(), vec![1.0, 2.0, 3.5, 40.0]);
        std::fs::write(&p, "1\n2\nx\n").unwrap();
        let e = read_values(&p).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
    }
}
