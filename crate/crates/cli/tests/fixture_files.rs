//! The config files under `fixtures/` stay canonical and in step with the
//! fixture table in the core crate.

use std::fs;
use std::path::PathBuf;

use splinter_cli::app::config_paths;
use splinter_cli::{Command, ExperimentConfig};
use splinter_core::fixtures::{GOLDEN_CONVERGENCE_STEP, SPLINTER_FIXTURES};
use splinter_core::Scalar;

fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load(name: &str) -> (String, ExperimentConfig) {
    let raw = fs::read_to_string(fixture_dir().join(format!("{name}.cfg"))).unwrap();
    let c = ExperimentConfig::parse(&raw).unwrap_or_else(|e| panic!("{name}: {e}"));
    (raw, c)
}

#[test]
fn every_file_is_canonical() {
    let paths = config_paths(&[fixture_dir()]).unwrap();
    assert!(paths.len() >= SPLINTER_FIXTURES.len());
    for p in paths {
        let raw = fs::read_to_string(&p).unwrap();
        let c = ExperimentConfig::parse(&raw).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        assert_eq!(c.to_canonical(), raw, "{}", p.display());
        assert_eq!(c.name.as_deref(), p.file_stem().and_then(|s| s.to_str()), "{}", p.display());
    }
}

#[test]
fn splinter_files_match_the_table() {
    for f in SPLINTER_FIXTURES {
        let (_, c) = load(f.name);
        assert_eq!(c.command, Command::Splinter, "{}", f.name);
        assert_eq!(c.system, f.descriptor().unwrap(), "{}", f.name);
        let tag = c.system.tag();
        assert_eq!(c.epsilon, Some(Scalar::parse(f.epsilon, tag).unwrap()), "{}", f.name);
        assert_eq!(c.n_max, Some(f.n_max), "{}", f.name);
        assert_eq!(c.expect, Some(f.expected), "{}", f.name);
        for (key, text) in [("J1", f.j1), ("J2", f.j2)] {
            let from_table = match c.set(key).unwrap() {
                splinter_cli::NamedSet::Interval(_) => {
                    splinter_cli::NamedSet::Interval(splinter_core::IntervalSet::parse(text, tag).unwrap())
                }
                splinter_cli::NamedSet::Tower(_) => {
                    splinter_cli::NamedSet::Tower(splinter_core::TowerSet::parse(text, tag).unwrap())
                }
            };
            assert_eq!(c.set(key), Some(&from_table), "{} {key}", f.name);
        }
    }
}

#[test]
fn golden_budget_is_frozen() {
    let (_, c) = load("golden-quarter");
    assert_eq!(c.n_max, Some(GOLDEN_CONVERGENCE_STEP));
    assert_eq!(GOLDEN_CONVERGENCE_STEP, 224);
}
