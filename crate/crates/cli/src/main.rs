use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use splinter_cli::app::{load_jobs, run_jobs, unique_labels, worst, write_file, Job};
use splinter_cli::commands::{finish, run};
use splinter_cli::suites::{demo_config, selftest, selftest_config};
use splinter_cli::{emit_plot_data, Format, Outcome, RunTrace};
use splinter_core::random::DEFAULT_SEED;

#[derive(Parser, Debug)]
#[command(name = "splinter", version, about = "Exact splinter experiments on measure-preserving maps")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,

    /// Config file or directory of `*.cfg` files; repeatable.
    #[arg(long, global = true)]
    config: Vec<PathBuf>,

    /// Seed for randomized suites; overrides any seed in the configs.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for independent configs.
    #[arg(long, global = true, default_value_t = 1)]
    parallel: usize,

    /// Output directory; traces go to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// csv or structured (JSON lines).
    #[arg(long, global = true)]
    format: Option<Format>,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Run experiment configs.
    Run,
    /// Tower measure, preservation battery, tower splinter and ψ breakpoints.
    DemoKakutani {
        #[arg(long, default_value_t = 4)]
        depth: u32,
    },
    /// Seeded randomized checks on every system.
    Selftest {
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Plot columns plus an exact sidecar, from trace files or configs.
    EmitPlot {
        /// Structured trace files.
        traces: Vec<PathBuf>,
    },
}

fn usage_error(message: &str) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(Outcome::ConfigError.exit_code() as u8)
}

fn report(label: &str, t: &RunTrace) {
    let s = &t.summary;
    match &s.error {
        Some(e) => eprintln!("{label}: {} ({}): {e}", s.status, s.outcome),
        None => eprintln!("{label}: {} ({})", s.status, s.outcome),
    }
    for a in s.assertions.iter().filter(|a| !a.pass) {
        eprintln!("  assertion {} failed: {}", a.name, a.detail);
    }
}

/// Writes traces to `--out` or stdout and returns the process exit code.
fn deliver(cli: &Cli, labelled: Vec<(String, RunTrace, Option<Format>)>) -> ExitCode {
    let labels = unique_labels(labelled.iter().map(|(l, _, _)| l.as_str()));
    let mut outcome = Outcome::Pass;
    for (label, (_, trace, own)) in labels.iter().zip(&labelled) {
        let format = cli.format.or(*own).unwrap_or_default();
        let text = trace.render(format);
        report(label, trace);
        outcome = outcome.worst(trace.summary.outcome);
        match &cli.out {
            Some(dir) => {
                if let Err(e) = write_file(dir, &format!("{label}.{}", format.extension()), &text) {
                    return usage_error(&format!("cannot write to {}: {e}", dir.display()));
                }
            }
            None => print!("{text}"),
        }
    }
    ExitCode::from(outcome.exit_code() as u8)
}

fn jobs(cli: &Cli) -> Result<Vec<Job>, ExitCode> {
    load_jobs(&cli.config, cli.seed).map_err(|e| usage_error(&format!("cannot list configs: {e}")))
}

fn emit_plot(cli: &Cli, traces: &[PathBuf]) -> ExitCode {
    if traces.is_empty() && cli.config.is_empty() {
        return usage_error("emit-plot needs trace files or --config");
    }
    let mut labelled: Vec<(String, RunTrace)> = Vec::new();
    for path in traces {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return usage_error(&format!("cannot read {}: {e}", path.display())),
        };
        match RunTrace::from_structured(&text) {
            Ok(t) => {
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                labelled.push((stem, t));
            }
            Err(e) => return usage_error(&format!("{}: {e}", path.display())),
        }
    }
    let jobs = match jobs(cli) {
        Ok(j) => j,
        Err(code) => return code,
    };
    let ran = run_jobs(&jobs, cli.parallel);
    let outcome = worst(&ran);
    labelled.extend(jobs.iter().map(|j| j.label.clone()).zip(ran));

    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let format = cli.format.unwrap_or(Format::Csv);
    let labels = unique_labels(labelled.iter().map(|(l, _)| l.as_str()));
    for (label, (_, trace)) in labels.iter().zip(&labelled) {
        let p = emit_plot_data(trace, format);
        let written = write_file(&dir, &format!("{label}.plot.{}", format.extension()), &p.plot)
            .and_then(|_| write_file(&dir, &format!("{label}.exact.csv"), &p.sidecar));
        if let Err(e) = written {
            return usage_error(&format!("cannot write to {}: {e}", dir.display()));
        }
        eprintln!("{label}: {} rows of plot data in {}", trace.records.len(), dir.display());
    }
    ExitCode::from(outcome.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let informational = !e.use_stderr();
            let _ = e.print();
            return if informational { ExitCode::SUCCESS } else { ExitCode::from(3) };
        }
    };
    if cli.parallel == 0 {
        return usage_error("--parallel must be at least 1");
    }
    match &cli.verb {
        Verb::Run => {
            if cli.config.is_empty() {
                return usage_error("run needs --config");
            }
            let jobs = match jobs(&cli) {
                Ok(j) => j,
                Err(code) => return code,
            };
            let traces = run_jobs(&jobs, cli.parallel);
            let labelled = jobs.iter().zip(traces).map(|(j, t)| (j.label.clone(), t, j.format())).collect();
            deliver(&cli, labelled)
        }
        Verb::DemoKakutani { depth } => {
            let trace = run(&demo_config(*depth));
            deliver(&cli, vec![("demo-kakutani".into(), trace, None)])
        }
        Verb::Selftest { samples } => {
            let seed = cli.seed.unwrap_or(DEFAULT_SEED);
            let config = selftest_config(seed, *samples);
            let mut trace = finish(&config, selftest(seed, *samples));
            trace.header.command = "selftest".into();
            deliver(&cli, vec![("selftest".into(), trace, None)])
        }
        Verb::EmitPlot { traces } => emit_plot(&cli, traces),
    }
}
