//! Plot-ready columns from a trace.
//!
//! The plot file holds the index column and every numeric column as
//! decimals. The sidecar is always CSV and holds the same columns as exact
//! strings. Both open with the trace's header line.

use serde_json::{json, Map, Value};

use crate::config::Format;
use crate::trace::{exact_parts, ColumnKind, RunTrace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlotData {
    pub plot: String,
    pub sidecar: String,
}

fn numeric(kind: ColumnKind) -> bool {
    matches!(kind, ColumnKind::Index | ColumnKind::Exact | ColumnKind::Integer)
}

fn cells(trace: &RunTrace, exact_strings: bool) -> (Vec<String>, Vec<Vec<String>>) {
    let columns: Vec<_> = trace.header.columns.iter().filter(|c| numeric(c.kind)).collect();
    let names = columns.iter().map(|c| c.name.clone()).collect();
    let rows = trace
        .records
        .iter()
        .map(|r| {
            columns
                .iter()
                .map(|c| match r.get(&c.name) {
                    None | Some(Value::Null) => String::new(),
                    Some(v) => match exact_parts(v) {
                        Some((e, d)) => if exact_strings { e } else { d }.to_string(),
                        None => v.to_string(),
                    },
                })
                .collect()
        })
        .collect();
    (names, rows)
}

fn csv_text(header: &str, names: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(names).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
    format!("{header}\n{body}")
}

pub fn emit_plot_data(trace: &RunTrace, format: Format) -> PlotData {
    let header = trace.header_line();
    let (names, decimals) = cells(trace, false);
    let (_, exacts) = cells(trace, true);
    let plot = match format {
        Format::Csv => csv_text(&header, &names, &decimals),
        Format::Structured => {
            let mut columns = Map::new();
            for (i, name) in names.iter().enumerate() {
                let values: Vec<Value> = decimals
                    .iter()
                    .map(|row| row[i].parse::<f64>().map(|x| json!(x)).unwrap_or(Value::Null))
                    .collect();
                columns.insert(name.clone(), Value::Array(values));
            }
            let head = json!({ "header": { "artifact": trace.header.artifact, "config_hash": trace.header.config_hash } });
            format!("{head}\n{}\n", json!({ "columns": columns }))
        }
    };
    PlotData { plot, sidecar: csv_text(&header, &names, &exacts) }
}
