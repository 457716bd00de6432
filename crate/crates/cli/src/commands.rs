//! Command dispatch: config in, trace out.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use splinter_core::caratheodory::{
    correlations, density_pair, density_search, gap_theta, reduction_check, PairSearch, RESTRICTION_NOTICE,
};
use splinter_core::dynamics::verify_measure_preserving;
use splinter_core::random::{SetSampler, DEFAULT_SEED};
use splinter_core::splinter::{
    splinter, verify_mass_conservation, verify_residual_identity, verify_splinters_disjoint, Check,
    DEFAULT_COMPONENT_BUDGET,
};
use splinter_core::{
    Dynamics, Error, IntervalMap, IntervalSet, KakutaniTower, Rational, Scalar, SetAlgebra, SplinterConfig,
    SplinterStatus, SystemDescriptor, TowerSet,
};

use crate::config::{Command, ConfigError, ExperimentConfig, NamedSet};
use crate::suites;
use crate::trace::{exact, Assertion, Column, ColumnKind, Header, Outcome, Record, RunTrace, Summary, ARTIFACT_VERSION};

/// What a command produced before it is wrapped into a trace.
#[derive(Clone, Debug, Default)]
pub struct Body {
    pub columns: Vec<Column>,
    pub records: Vec<Record>,
    pub assertions: Vec<Assertion>,
    pub values: BTreeMap<String, Value>,
    pub status: String,
    /// Set when the command ran out of a budget without failing a check.
    pub exhausted: bool,
}

impl Body {
    pub fn with_columns(columns: &[(&str, ColumnKind)]) -> Self {
        Body { columns: columns.iter().map(|(n, k)| Column::new(n, *k)).collect(), ..Body::default() }
    }

    pub fn value(&mut self, key: &str, v: Value) {
        self.values.insert(key.to_string(), v);
    }

    pub fn assert(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.assertions.push(Assertion::new(name, pass, detail));
    }

    fn assert_checks(&mut self, name: &str, checks: &[Check]) {
        match checks.iter().find(|c| !c.pass) {
            None => self.assert(name, true, format!("exact at {} steps", checks.len())),
            Some(c) => self.assert(name, false, format!("step {}: {} != {}", c.step, c.lhs, c.rhs)),
        }
    }
}

fn record(pairs: Vec<(&str, Value)>) -> Record {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

/// Errors that mean a budget ran out rather than something being wrong.
fn is_budget(e: &Error) -> bool {
    matches!(
        e,
        Error::ComponentBudget { .. } | Error::RefinementBudgetExhausted { .. } | Error::RepresentationOverflow(_)
    )
}

/// Header for a config, with the command's columns.
pub fn header(config: &ExperimentConfig, columns: Vec<Column>) -> Header {
    Header {
        artifact: ARTIFACT_VERSION.to_string(),
        config_hash: config.hash(),
        config: config.to_canonical(),
        command: config.command.to_string(),
        fixture: config.name.clone(),
        notice: RESTRICTION_NOTICE.to_string(),
        columns,
    }
}

/// Trace for a config that could not be read or parsed.
pub fn config_error_trace(raw: &str, error: &ConfigError) -> RunTrace {
    RunTrace {
        header: Header {
            artifact: ARTIFACT_VERSION.to_string(),
            config_hash: crate::config::hash_text(raw),
            config: raw.to_string(),
            command: String::new(),
            fixture: None,
            notice: RESTRICTION_NOTICE.to_string(),
            columns: Vec::new(),
        },
        records: Vec::new(),
        summary: Summary {
            status: "config-error".into(),
            outcome: Outcome::ConfigError,
            assertions: Vec::new(),
            values: BTreeMap::new(),
            error: Some(error.to_string()),
        },
    }
}

/// Runs a config. Never panics on bad input; failures land in the summary.
pub fn run(config: &ExperimentConfig) -> RunTrace {
    let result = match config.command {
        Command::Splinter => run_splinter(config),
        Command::Verify => run_verify(config),
        Command::Density => run_density(config),
        Command::Gap => run_gap(config),
        Command::Mixing => run_mixing(config),
        Command::Reduction => run_reduction(config),
        Command::Demo => suites::demo_kakutani(config.depth.unwrap_or(4)),
    };
    finish(config, result)
}

/// Wraps a command result into a trace and settles the outcome.
pub fn finish(config: &ExperimentConfig, result: Result<Body, Error>) -> RunTrace {
    match result {
        Ok(body) => {
            let outcome = if body.assertions.iter().any(|a| !a.pass) {
                Outcome::AssertionFailure
            } else if body.exhausted {
                Outcome::BudgetExhausted
            } else {
                Outcome::Pass
            };
            RunTrace {
                header: header(config, body.columns),
                records: body.records,
                summary: Summary {
                    status: body.status,
                    outcome,
                    assertions: body.assertions,
                    values: body.values,
                    error: None,
                },
            }
        }
        Err(e) => {
            let (status, outcome) = match &e {
                e if is_budget(e) => ("budget-exhausted", Outcome::BudgetExhausted),
                Error::Parse(_) | Error::Precondition(_) | Error::InvalidInterval(_) | Error::InvalidTowerSet(_) => {
                    ("config-error", Outcome::ConfigError)
                }
                _ => ("error", Outcome::AssertionFailure),
            };
            RunTrace {
                header: header(config, Vec::new()),
                records: Vec::new(),
                summary: Summary {
                    status: status.into(),
                    outcome,
                    assertions: Vec::new(),
                    values: BTreeMap::new(),
                    error: Some(e.to_string()),
                },
            }
        }
    }
}

fn interval_map(config: &ExperimentConfig) -> Result<&IntervalMap, Error> {
    match &config.system {
        SystemDescriptor::Interval(map) => Ok(map),
        SystemDescriptor::Kakutani => Err(Error::Precondition(format!("{} needs an interval system", config.command))),
    }
}

fn interval_set<'a>(config: &'a ExperimentConfig, name: &str) -> Result<&'a IntervalSet, Error> {
    config
        .set(name)
        .and_then(NamedSet::as_interval)
        .ok_or_else(|| Error::Precondition(format!("set {name} must be an interval set")))
}

fn tower_set<'a>(config: &'a ExperimentConfig, name: &str) -> Result<&'a TowerSet, Error> {
    config
        .set(name)
        .and_then(NamedSet::as_tower)
        .ok_or_else(|| Error::Precondition(format!("set {name} must be a tower set")))
}

fn component_budget(config: &ExperimentConfig) -> usize {
    config.component_budget.unwrap_or(DEFAULT_COMPONENT_BUDGET)
}

// ---------------------------------------------------------------------------
// splinter
// ---------------------------------------------------------------------------

pub const SPLINTER_COLUMNS: [(&str, ColumnKind); 5] = [
    ("step", ColumnKind::Index),
    ("measure_A", ColumnKind::Exact),
    ("measure_B", ColumnKind::Exact),
    ("covered", ColumnKind::Exact),
    ("components_B", ColumnKind::Integer),
];

fn splinter_config(config: &ExperimentConfig) -> SplinterConfig {
    let mut c = SplinterConfig::new(config.epsilon.clone().unwrap_or_else(|| Scalar::dyadic(10)), config.n_max.unwrap_or(64));
    if let Some(w) = config.stall_window {
        c.stall_window = w;
    }
    c.component_budget = component_budget(config);
    c
}

/// Splinter run with its identity checks, for any system.
pub fn splinter_body<D: Dynamics>(
    system: &D,
    j1: &D::Set,
    j2: &D::Set,
    config: &SplinterConfig,
    expect: Option<SplinterStatus>,
) -> Result<Body, Error> {
    let d = splinter(system, j1, j2, config)?;
    let mut body = Body::with_columns(&SPLINTER_COLUMNS);
    for r in &d.trace {
        body.records.push(record(vec![
            ("step", json!(r.step)),
            ("measure_A", exact(&r.measure_a)),
            ("measure_B", exact(&r.measure_b)),
            ("covered", exact(&r.covered)),
            ("components_B", json!(r.components_b)),
        ]));
    }
    body.assert_checks("residual-identity", &verify_residual_identity(&d)?);
    body.assert_checks("mass-conservation", &verify_mass_conservation(&d)?);
    body.assert("splinters-disjoint", verify_splinters_disjoint(&d)?, "pairwise empty intersections");
    if let Some(want) = expect {
        body.assert("expected-status", d.status == want, format!("expected {want}, got {}", d.status));
    }
    let hits: Vec<usize> = d.trace.iter().filter(|r| !r.measure_a.is_zero()).map(|r| r.step).collect();
    body.value("system", json!(system.name()));
    body.value("steps", json!(d.steps()));
    body.value("measure_J1", exact(&j1.measure()?));
    body.value("nonempty_splinter_steps", json!(hits));
    body.value("stall_window", json!(d.stall_window));
    if let Some(b) = d.final_residual_measure() {
        body.value("final_measure_B", exact(b));
    }
    if let Some(a1) = d.splinters.first() {
        body.value("A_1", json!(a1.to_string()));
    }
    body.status = d.status.to_string();
    body.exhausted = d.status == SplinterStatus::BudgetExhausted;
    Ok(body)
}

fn run_splinter(config: &ExperimentConfig) -> Result<Body, Error> {
    let sc = splinter_config(config);
    match &config.system {
        SystemDescriptor::Interval(map) => {
            splinter_body(map, interval_set(config, "J1")?, interval_set(config, "J2")?, &sc, config.expect)
        }
        SystemDescriptor::Kakutani => {
            splinter_body(&KakutaniTower, tower_set(config, "J1")?, tower_set(config, "J2")?, &sc, config.expect)
        }
    }
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn preservation_rows<D: Dynamics>(system: &D, sets: &[(String, D::Set)], body: &mut Body) -> Result<(), Error> {
    let mut failures = 0;
    for (i, (name, s)) in sets.iter().enumerate() {
        let r = verify_measure_preserving(system, s)?;
        failures += usize::from(!r.pass);
        body.records.push(record(vec![
            ("index", json!(i)),
            ("name", json!(name)),
            ("set", json!(s.to_string())),
            ("measure", exact(&r.measure)),
            ("preimage_measure", exact(&r.preimage_measure)),
            ("pass", json!(r.pass)),
        ]));
    }
    body.assert("measure-preserved", failures == 0, format!("{failures} of {} sets differ", sets.len()));
    Ok(())
}

fn run_verify(config: &ExperimentConfig) -> Result<Body, Error> {
    let mut body = Body::with_columns(&[
        ("index", ColumnKind::Index),
        ("name", ColumnKind::Text),
        ("set", ColumnKind::Text),
        ("measure", ColumnKind::Exact),
        ("preimage_measure", ColumnKind::Exact),
        ("pass", ColumnKind::Flag),
    ]);
    let seed = config.seed.unwrap_or(DEFAULT_SEED);
    let sample = config.sample.unwrap_or(0);
    let mut sampler = SetSampler::new(seed);
    match &config.system {
        SystemDescriptor::Interval(map) => {
            let mut sets: Vec<(String, IntervalSet)> = Vec::new();
            for name in config.sets.keys() {
                sets.push((name.clone(), interval_set(config, name)?.clone()));
            }
            for i in 0..sample {
                let s = match (map, config.system.tag()) {
                    (_, Some(tag)) => sampler.irrational_set(tag)?,
                    (IntervalMap::Rotation(_), None) => sampler.dyadic_set()?,
                    _ => sampler.tailed_set()?,
                };
                sets.push((format!("sample-{i}"), s));
            }
            preservation_rows(map, &sets, &mut body)?;
        }
        SystemDescriptor::Kakutani => {
            let mut sets: Vec<(String, TowerSet)> = Vec::new();
            for name in config.sets.keys() {
                sets.push((name.clone(), tower_set(config, name)?.clone()));
            }
            for i in 0..sample {
                sets.push((format!("sample-{i}"), sampler.tower_set()?));
            }
            preservation_rows(&KakutaniTower, &sets, &mut body)?;
        }
    }
    body.value("seed", json!(seed));
    body.status = "verified".into();
    Ok(body)
}

// ---------------------------------------------------------------------------
// density
// ---------------------------------------------------------------------------

fn run_density(config: &ExperimentConfig) -> Result<Body, Error> {
    interval_map(config)?;
    let eps = config.epsilon.clone().expect("validated");
    let basis = config.basis.expect("validated");
    let (a1, a2) = (interval_set(config, "A1")?, interval_set(config, "A2")?);
    let mut body = Body::with_columns(&[
        ("index", ColumnKind::Index),
        ("name", ColumnKind::Text),
        ("witness", ColumnKind::Text),
        ("density", ColumnKind::Exact),
    ]);
    let density = |s: &IntervalSet, j: &splinter_core::Interval| -> Result<Scalar, Error> {
        s.intersect(&IntervalSet::from_interval(j.clone()))?.measure()?.try_div(&j.length()?)
    };
    let pair = density_pair(a1, a2, &eps, &basis)?;
    let (w1, w2) = match &pair {
        PairSearch::Found { j1, j2, level } => {
            body.value("level", json!(level));
            body.status = "found".into();
            (Some(j1.clone()), Some(j2.clone()))
        }
        PairSearch::NotFound { .. } => {
            body.status = "not-found".into();
            body.exhausted = true;
            (density_search(a1, &eps, &basis)?, density_search(a2, &eps, &basis)?)
        }
    };
    for (i, (name, s, w)) in [("A1", a1, w1), ("A2", a2, w2)].into_iter().enumerate() {
        let (witness, d) = match &w {
            Some(j) => (json!(j.to_string()), exact(&density(s, j)?)),
            None => (Value::Null, Value::Null),
        };
        body.records.push(record(vec![("index", json!(i)), ("name", json!(name)), ("witness", witness), ("density", d)]));
    }
    body.value("basis", json!(basis.to_string()));
    body.value("epsilon", exact(&eps));
    Ok(body)
}

// ---------------------------------------------------------------------------
// gap
// ---------------------------------------------------------------------------

fn run_gap(config: &ExperimentConfig) -> Result<Body, Error> {
    let basis = config.basis.expect("validated");
    let b = interval_set(config, "B")?;
    let mut body = Body::with_columns(&[
        ("index", ColumnKind::Index),
        ("J", ColumnKind::Text),
        ("inside", ColumnKind::Exact),
        ("outside", ColumnKind::Exact),
        ("theta", ColumnKind::Exact),
    ]);
    let level = basis.levels() - 1;
    let mut unequal = 0;
    for (i, j) in basis.level(level).into_iter().enumerate() {
        let r = gap_theta(b, &IntervalSet::from_interval(j.clone()))?;
        unequal += usize::from(!r.caratheodory_equality);
        body.records.push(record(vec![
            ("index", json!(i)),
            ("J", json!(j.to_string())),
            ("inside", exact(&r.parts.0)),
            ("outside", exact(&r.parts.1)),
            ("theta", exact(&r.theta)),
        ]));
    }
    let n = body.records.len();
    body.assert("caratheodory-equality", unequal == 0, format!("theta = 1 on {} of {n} windows", n - unequal));
    body.value("basis", json!(basis.to_string()));
    body.value("level", json!(level));
    body.status = "measured".into();
    Ok(body)
}

// ---------------------------------------------------------------------------
// mixing
// ---------------------------------------------------------------------------

fn mixing_body<D: Dynamics>(system: &D, c: &D::Set, d: &D::Set, config: &ExperimentConfig) -> Result<Body, Error> {
    let m = config.m.expect("validated");
    let product = c.measure()?.try_mul(&d.measure()?)?;
    let values = correlations(system, c, d, m, component_budget(config))?;
    let mut body = Body::with_columns(&[
        ("j", ColumnKind::Index),
        ("correlation", ColumnKind::Exact),
        ("mixing_defect", ColumnKind::Exact),
    ]);
    let mut total = Scalar::zero();
    for (j, x) in values.iter().enumerate() {
        total = total.try_add(x)?;
        body.records.push(record(vec![
            ("j", json!(j + 1)),
            ("correlation", exact(x)),
            ("mixing_defect", exact(&x.try_sub(&product)?)),
        ]));
    }
    let average = total.scale(&Rational::new(1.into(), (m as i64).into()));
    let gap = average.try_sub(&product)?.abs()?;
    if let Some(tol) = &config.tolerance {
        body.assert("cesaro-average", gap.le(tol)?, format!("|average - product| = {gap}, tolerance {tol}"));
    }
    let zero = values.iter().all(|x| *x == product);
    body.value("system", json!(system.name()));
    body.value("product", exact(&product));
    body.value("cesaro_average", exact(&average));
    body.value("cesaro_gap", exact(&gap));
    body.value("trace_identically_zero", json!(zero));
    body.status = "measured".into();
    Ok(body)
}

fn run_mixing(config: &ExperimentConfig) -> Result<Body, Error> {
    match &config.system {
        SystemDescriptor::Interval(map) => mixing_body(map, interval_set(config, "C")?, interval_set(config, "D")?, config),
        SystemDescriptor::Kakutani => mixing_body(&KakutaniTower, tower_set(config, "C")?, tower_set(config, "D")?, config),
    }
}

// ---------------------------------------------------------------------------
// reduction
// ---------------------------------------------------------------------------

fn run_reduction(config: &ExperimentConfig) -> Result<Body, Error> {
    let map = interval_map(config)?;
    let b = interval_set(config, "B")?;
    let eps = config.epsilon.clone().expect("validated");
    let r = reduction_check(
        map,
        b,
        &config.basis.expect("validated"),
        config.sample.expect("validated"),
        &eps,
        config.n_max.expect("validated"),
    )?;
    let mut body = Body::with_columns(&[
        ("index", ColumnKind::Index),
        ("J", ColumnKind::Text),
        ("K", ColumnKind::Text),
        ("status", ColumnKind::Text),
        ("measure_BK", ColumnKind::Exact),
        ("measure_BJ_minus_eps", ColumnKind::Exact),
        ("transport", ColumnKind::Flag),
        ("pass", ColumnKind::Flag),
    ]);
    for (i, p) in r.pairs.iter().enumerate() {
        body.records.push(record(vec![
            ("index", json!(i)),
            ("J", json!(p.j.to_string())),
            ("K", json!(p.k.to_string())),
            ("status", json!(p.status.to_string())),
            ("measure_BK", exact(&p.inequality.0)),
            ("measure_BJ_minus_eps", exact(&p.inequality.1)),
            ("transport", json!(p.transport_holds)),
            ("pass", json!(p.pass)),
        ]));
    }
    let failing = r.pairs.iter().filter(|p| !p.pass).count();
    body.assert("reduction-inequality", r.pass(), format!("{failing} of {} pairs fail", r.pairs.len()));
    body.value("invariant", json!(r.invariant));
    body.value("unconverged_pairs", json!(r.unconverged()));
    body.status = if r.invariant { "invariant" } else { "not-invariant" }.into();
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trace(text: &str) -> RunTrace {
        run(&ExperimentConfig::parse(text).unwrap())
    }

    #[test]
    fn gap_on_dyadic_level_three() {
        let t = trace("command = gap\nsystem = doubling\nset.B = 0..1/2\nbasis = dyadic:3\n");
        assert_eq!(t.records.len(), 8);
        assert!(t.records.iter().all(|r| r["theta"]["exact"] == "1"));
        assert_eq!(t.exit_code(), 0);
    }

    #[test]
    fn splinter_status_drives_exit_code() {
        let base = "command = splinter\nsystem = rotation:1/3\nset.J1 = 0..1/6\nset.J2 = 1/2..2/3\nepsilon = 1/1024\n";
        let stalled = trace(&format!("{base}n_max = 100\n"));
        assert_eq!((stalled.summary.status.as_str(), stalled.exit_code()), ("stalled", 0));
        let exhausted = trace(&format!("{base}n_max = 4\n"));
        assert_eq!((exhausted.summary.status.as_str(), exhausted.exit_code()), ("budget-exhausted", 2));
        let wrong = trace(&format!("{base}n_max = 100\nexpect = converged\n"));
        assert_eq!(wrong.exit_code(), 1);
    }

    #[test]
    fn component_budget_exhaustion_is_reported() {
        let t = trace("command = mixing\nsystem = doubling\nset.C = 0..1/2\nset.D = 0..1/2\nm = 12\ncomponent_budget = 64\n");
        assert_eq!(t.exit_code(), 2);
        assert!(t.summary.error.as_deref().unwrap().contains("component budget"));
    }

    #[test]
    fn mixing_tolerance_assertion() {
        let text = "command = mixing\nsystem = odometer\nset.C = 0..1/2\nset.D = 0..1/2\nm = 64\ntolerance = 1/100\n";
        let t = trace(text);
        assert_eq!(t.exit_code(), 0);
        assert_eq!(t.summary.values["cesaro_average"]["exact"], "1/4");
    }

    #[test]
    fn density_and_reduction_run() {
        let d = trace("command = density\nsystem = doubling\nset.A1 = 0..1/3\nset.A2 = 1/2..1\nepsilon = 1/10\nbasis = dyadic:6\n");
        assert_eq!((d.summary.status.as_str(), d.exit_code()), ("found", 0));
        let r = trace(
            "command = reduction\nsystem = rotation:1/3\nset.B = 0..1/6, 1/3..1/2, 2/3..5/6\nepsilon = 1/64\n\
             n_max = 16\nbasis = dyadic:2\nsample = 6\n",
        );
        assert_eq!(r.exit_code(), 0, "{:?}", r.summary);
        assert_eq!(r.summary.values["invariant"], true);
    }

    #[test]
    fn verify_samples_are_seeded() {
        let text = "command = verify\nsystem = rotation:golden\nsample = 20\nseed = 7\n";
        let (a, b) = (trace(text), trace(text));
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 20);
        assert_eq!(a.exit_code(), 0);
    }
}
