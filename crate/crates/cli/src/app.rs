//! Job loading, fan-out and output files for the binary.

use std::collections::HashMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::commands::{config_error_trace, run};
use crate::config::{ConfigError, ExperimentConfig, Format};
use crate::trace::{Outcome, RunTrace};

/// One config file, parsed or not.
#[derive(Clone, Debug)]
pub struct Job {
    pub label: String,
    pub source: PathBuf,
    pub config: Result<ExperimentConfig, (String, ConfigError)>,
}

impl Job {
    pub fn run(&self) -> RunTrace {
        match &self.config {
            Ok(c) => run(c),
            Err((raw, e)) => config_error_trace(raw, e),
        }
    }

    pub fn format(&self) -> Option<Format> {
        self.config.as_ref().ok().and_then(|c| c.format)
    }
}

/// Expands directories to their `*.cfg` files, sorted by name.
pub fn config_paths(paths: &[PathBuf]) -> io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "cfg"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

/// Reads and parses each config; `seed` overrides the file's seed.
pub fn load_jobs(paths: &[PathBuf], seed: Option<u64>) -> io::Result<Vec<Job>> {
    let mut jobs = Vec::new();
    for path in config_paths(paths)? {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "config".into());
        let config = match fs::read_to_string(&path) {
            Ok(raw) => ExperimentConfig::parse(&raw)
                .map(|mut c| {
                    if seed.is_some() {
                        c.seed = seed;
                    }
                    c
                })
                .map_err(|e| (raw, e)),
            Err(e) => {
                let err = ConfigError { line: None, key: None, message: format!("cannot read: {e}") };
                Err((String::new(), err))
            }
        };
        let label = match &config {
            Ok(c) if c.stem.is_some() || c.name.is_some() => c.label(),
            _ => stem,
        };
        jobs.push(Job { label, source: path, config });
    }
    Ok(jobs)
}

/// Runs jobs on up to `parallel` threads. Results come back in job order.
pub fn run_jobs(jobs: &[Job], parallel: usize) -> Vec<RunTrace> {
    if parallel <= 1 || jobs.len() <= 1 {
        return jobs.iter().map(Job::run).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<RunTrace>>> = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..parallel.min(jobs.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(job) = jobs.get(i) else { break };
                let trace = job.run();
                slots.lock().expect("no poisoned slots")[i] = Some(trace);
            });
        }
    });
    slots.into_inner().expect("no poisoned slots").into_iter().map(|t| t.expect("every job ran")).collect()
}

/// Gives repeated labels a numeric suffix so files do not collide.
pub fn unique_labels<'a>(labels: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    labels
        .into_iter()
        .map(|l| {
            let n = seen.entry(l).or_insert(0);
            *n += 1;
            if *n == 1 {
                l.to_string()
            } else {
                format!("{l}-{n}")
            }
        })
        .collect()
}

pub fn write_file(dir: &Path, name: &str, text: &str) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, text)?;
    Ok(path)
}

pub fn worst(traces: &[RunTrace]) -> Outcome {
    traces.iter().map(|t| t.summary.outcome).fold(Outcome::Pass, Outcome::worst)
}
