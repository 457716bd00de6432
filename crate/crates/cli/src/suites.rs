//! Canned suites behind `demo-kakutani` and `selftest`.

use serde_json::json;
use splinter_core::caratheodory::{gap_theta, MeasureBasis};
use splinter_core::dynamics::verify_measure_preserving;
use splinter_core::fixtures::{fixture, FixtureRun, SPLINTER_FIXTURES};
use splinter_core::random::SetSampler;
use splinter_core::splinter::{all_pass, verify_mass_conservation, verify_residual_identity};
use splinter_core::{
    Doubling, Dynamics, Error, IntervalSet, IrrationalTag, KakutaniTower, Odometer, Rotation, Scalar, SetAlgebra,
    TowerSet,
};

use crate::commands::Body;
use crate::config::{Command, ExperimentConfig};
use crate::trace::{exact, ColumnKind, Record};

const SUITE_COLUMNS: [(&str, ColumnKind); 5] = [
    ("index", ColumnKind::Index),
    ("check", ColumnKind::Text),
    ("detail", ColumnKind::Text),
    ("value", ColumnKind::Exact),
    ("pass", ColumnKind::Flag),
];

fn push(body: &mut Body, check: &str, detail: String, value: Option<&Scalar>, pass: bool) {
    let index = body.records.len();
    let mut r = Record::new();
    r.insert("index".into(), json!(index));
    r.insert("check".into(), json!(check));
    r.insert("detail".into(), json!(detail));
    r.insert("value".into(), value.map(exact).unwrap_or(serde_json::Value::Null));
    r.insert("pass".into(), json!(pass));
    body.records.push(r);
}

/// Fixed tower sets for the preservation battery.
pub fn tower_battery() -> Result<Vec<TowerSet>, Error> {
    let a = IntervalSet::kakutani_base();
    let p = |s: &str| TowerSet::parse(s, None);
    Ok(vec![
        TowerSet::full(),
        TowerSet::base_only(IntervalSet::full()),
        TowerSet::base_only(a.clone()),
        TowerSet::new(IntervalSet::empty(), a)?,
        p("base: 1/2..3/4; top: empty")?,
        p("base: 0..1/4; top: empty")?,
        p("base: 0..1/2; top: 3/4..7/8")?,
        p("base: 1/8..5/8; top: 0..1/4")?,
        p("base: 7/8..1; top: 15/16..31/32")?,
    ])
}

/// Total measure, preservation battery, a tower splinter run and the
/// breakpoints of ψ up to `depth`.
pub fn demo_kakutani(depth: u32) -> Result<Body, Error> {
    let mut body = Body::with_columns(&SUITE_COLUMNS);

    let total = TowerSet::full().tower_measure()?;
    let five_thirds = Scalar::from_ratio(5, 3);
    push(&mut body, "total-measure", "measure of the whole tower".into(), Some(&total), total == five_thirds);
    body.assert("total-measure", total == five_thirds, format!("{total}"));
    body.value("total_measure", exact(&total));

    let battery = tower_battery()?;
    let mut preserved = 0;
    for s in &battery {
        let r = verify_measure_preserving(&KakutaniTower, s)?;
        preserved += usize::from(r.pass);
        push(&mut body, "preservation", s.to_string(), Some(&r.preimage_measure), r.pass);
    }
    body.assert("preservation-battery", preserved == battery.len(), format!("{preserved} of {}", battery.len()));

    let f = fixture("kakutani-cells").expect("shipped fixture");
    if let FixtureRun::Tower(d) = f.run()? {
        let identities = all_pass(&verify_residual_identity(&d)?) && all_pass(&verify_mass_conservation(&d)?);
        let detail = format!("{} -> {}: {} after {} steps", f.j1, f.j2, d.status, d.steps());
        let last = d.final_residual_measure().cloned().unwrap_or_else(Scalar::zero);
        push(&mut body, "tower-splinter", detail, Some(&last), identities);
        body.assert("tower-splinter", identities && d.status == f.expected, format!("{}", d.status));
        body.value("tower_splinter_status", json!(d.status.to_string()));
    }

    let points = Odometer.discontinuities(depth);
    let expected: Vec<Scalar> =
        (0..=depth.min(62)).map(|n| Scalar::from_ratio((1i64 << n) - 1, 1i64 << n)).collect();
    for x in &points {
        push(&mut body, "discontinuity", "breakpoint of psi".into(), Some(x), true);
    }
    body.assert("discontinuities", points == expected, format!("{} points to depth {depth}", points.len()));
    body.value("discontinuities", json!(points.iter().map(ToString::to_string).collect::<Vec<_>>()));
    body.status = "demo".into();
    Ok(body)
}

/// The config `demo-kakutani` runs under.
pub fn demo_config(depth: u32) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(Command::Demo, splinter_core::SystemDescriptor::Kakutani);
    c.name = Some("demo-kakutani".into());
    c.depth = Some(depth);
    c
}

/// Seeded randomized checks: measure preservation on every system, θ = 1,
/// and the splinter identities on the cheap fixtures.
pub fn selftest(seed: u64, samples: usize) -> Result<Body, Error> {
    let mut body = Body::with_columns(&SUITE_COLUMNS);
    let mut s = SetSampler::new(seed);
    let mut failures = 0;

    let mut tally = |body: &mut Body, check: &str, detail: String, ok: bool| {
        failures += usize::from(!ok);
        push(body, check, detail, None, ok);
    };

    let golden = Rotation::golden();
    let mut counts = [0usize; 4];
    for _ in 0..samples {
        let g = s.irrational_set(IrrationalTag::GoldenConjugate)?;
        counts[0] += usize::from(golden.preimage(&g)?.measure()? == g.measure()?);
        let a = s.tailed_set()?;
        counts[1] += usize::from(Doubling.preimage(&a)?.measure()? == a.measure()?);
        let b = s.tailed_set()?;
        counts[2] += usize::from(Odometer.preimage(&b)?.measure()? == b.measure()?);
        let t = s.tower_set()?;
        counts[3] += usize::from(KakutaniTower.preimage(&t)?.measure()? == t.measure()?);
    }
    for (name, n) in ["rotation:golden", "doubling", "odometer", "kakutani"].iter().zip(counts) {
        tally(&mut body, "measure-preservation", format!("{name}: {n} of {samples}"), n == samples);
    }

    let cells: Vec<_> = MeasureBasis::Dyadic { depth_max: 8 }.elements().collect();
    let mut equal = 0;
    for i in 0..samples {
        let b = s.tailed_set()?;
        let j = IntervalSet::from_interval(cells[i * 7 % cells.len()].clone());
        equal += usize::from(gap_theta(&b, &j)?.caratheodory_equality);
    }
    tally(&mut body, "caratheodory-equality", format!("{equal} of {samples} pairs"), equal == samples);

    for f in SPLINTER_FIXTURES.iter().filter(|f| f.name != "golden-quarter") {
        let run = f.run()?;
        let ok = match &run {
            FixtureRun::Interval(_, d) => {
                all_pass(&verify_residual_identity(d)?) && all_pass(&verify_mass_conservation(d)?)
            }
            FixtureRun::Tower(d) => {
                all_pass(&verify_residual_identity(d)?) && all_pass(&verify_mass_conservation(d)?)
            }
        };
        let detail = format!("{}: {} after {} steps", f.name, run.status(), run.steps());
        tally(&mut body, "splinter-identities", detail, ok && run.status() == f.expected);
    }

    let total = body.records.len();
    body.assert("selftest", failures == 0, format!("{} of {total} checks pass", total - failures));
    body.value("seed", json!(seed));
    body.value("samples", json!(samples));
    body.status = "selftest".into();
    Ok(body)
}

/// The config `selftest` runs under.
pub fn selftest_config(seed: u64, samples: usize) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(Command::Verify, splinter_core::SystemDescriptor::Kakutani);
    c.name = Some("selftest".into());
    c.seed = Some(seed);
    c.sample = Some(samples);
    c
}
