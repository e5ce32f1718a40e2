//! `ripscan` command line: run the whole pipeline or individual stage
//! bundles against a deterministic simulated platform.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 stage failure,
//! 3 transport exhaustion.

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ripscan::pipeline::{
    ecosystem_spec, ConfigError, Pipeline, PipelineConfig, PipelineError, RunSummary, Stage,
};
use ripscan::platform::sim::Simulator;
use ripscan::taxonomy::{serve_stdio, RuleClassifier};

#[derive(Parser)]
#[command(
    name = "ripscan",
    version,
    about = "Discover, classify, and report video piracy communities on a simulated broadcast platform"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file (defaults apply when omitted).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override one config key (repeatable), e.g. --set seed=7.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every stage in order (resumes a partial run).
    Run,
    /// Synthesize candidate handles from the seed lexicon.
    Synth,
    /// Probe, gate, expand, and hydrate the ecosystem.
    Discover,
    /// Detect piracy posts and assign taxonomy labels.
    Classify,
    /// Match piracy posts against the rights-holder catalog.
    Match,
    /// Build the promotion graph and classify channel roles.
    Graph,
    /// Estimate the subscription-loss lower bound.
    Estimate,
    /// Assemble abuse reports and write the outbox.
    Report {
        /// One report per detection (`event`) or per recipient-day (`batched`).
        #[arg(long, value_name = "MODE")]
        mode: Option<String>,
        /// Evidence detail: `contextual` or `url_only`.
        #[arg(long, value_name = "VARIANT")]
        variant: Option<String>,
    },
    /// Re-check reported entities and summarize removal outcomes.
    Track {
        /// Days an entity stays eligible for checks after reporting.
        #[arg(long, value_name = "DAYS")]
        window_days: Option<u32>,
        /// Number of daily tracking passes to run.
        #[arg(long, value_name = "N")]
        passes: Option<u32>,
    },
    /// Generate the simulated ecosystem and save it to a directory.
    Simulate {
        /// Output directory (usable later via `--set sim=dir:<path>`).
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Serve the rule classifier over the stdin/stdout adapter protocol.
    AdapterStdio,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), PipelineError> {
    match cli.cmd {
        Cmd::Run => stages(&cli.common, vec![], &Stage::ALL),
        Cmd::Synth => stages(&cli.common, vec![], &[Stage::Synth]),
        Cmd::Discover => stages(
            &cli.common,
            vec![],
            &[Stage::Probe, Stage::Gate, Stage::Expand, Stage::Hydrate],
        ),
        Cmd::Classify => stages(&cli.common, vec![], &[Stage::Detect, Stage::Categorize]),
        Cmd::Match => stages(&cli.common, vec![], &[Stage::Match]),
        Cmd::Graph => stages(&cli.common, vec![], &[Stage::Graph]),
        Cmd::Estimate => stages(&cli.common, vec![], &[Stage::Estimate]),
        Cmd::Report { mode, variant } => {
            let mut extra = Vec::new();
            if let Some(m) = mode {
                extra.push(("report_mode".to_string(), m));
            }
            if let Some(v) = variant {
                extra.push(("report_variant".to_string(), v));
            }
            stages(&cli.common, extra, &[Stage::Report])
        }
        Cmd::Track { window_days, passes } => {
            let mut extra = Vec::new();
            if let Some(w) = window_days {
                extra.push(("tracking_window_days".to_string(), w.to_string()));
            }
            if let Some(p) = passes {
                extra.push(("track_passes".to_string(), p.to_string()));
            }
            stages(&cli.common, extra, &[Stage::Track])
        }
        Cmd::Simulate { out } => {
            let cfg = load_config(&cli.common, vec![])?;
            let spec = ecosystem_spec(&cfg)?;
            let sim = Simulator::generate(&spec).map_err(|e| PipelineError::Stage {
                stage: "simulate",
                message: e.to_string(),
            })?;
            sim.save_dir(&out)?;
            println!("ecosystem saved to {}", out.display());
            Ok(())
        }
        Cmd::AdapterStdio => {
            let rules = RuleClassifier::default();
            let stdin = io::stdin().lock();
            let stdout = io::stdout().lock();
            serve_stdio(&rules, stdin, stdout)?;
            Ok(())
        }
    }
}

fn load_config(
    common: &Common,
    extra: Vec<(String, String)>,
) -> Result<PipelineConfig, PipelineError> {
    let mut overrides = Vec::with_capacity(common.set.len() + extra.len());
    for raw in &common.set {
        let Some((k, v)) = raw.split_once('=') else {
            return Err(ConfigError::Syntax { line: 0, got: raw.clone() }.into());
        };
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    overrides.extend(extra);
    Ok(PipelineConfig::load(common.config.as_deref(), &overrides)?)
}

fn stages(
    common: &Common,
    extra: Vec<(String, String)>,
    which: &[Stage],
) -> Result<(), PipelineError> {
    let cfg = load_config(common, extra)?;
    let mut pipeline = Pipeline::new(cfg)?;
    let summary = pipeline.run_stages(which)?;
    print_summary(&summary, pipeline.run_dir().display());
    Ok(())
}

fn print_summary(summary: &RunSummary, run_dir: impl std::fmt::Display) {
    let mut out = io::stdout().lock();
    let _ = writeln!(out, "run {}", summary.run_id);
    for name in &summary.executed {
        let _ = writeln!(out, "  {name}: done");
    }
    for name in &summary.skipped {
        let _ = writeln!(out, "  {name}: skipped (already complete)");
    }
    let _ = writeln!(out, "artifacts: {run_dir}");
}
