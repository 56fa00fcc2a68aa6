//! File formats: series CSV, versioned JSON documents and TOML scenario files.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detector::{MethodParams, RecurrenceResult};
use crate::error::{Error, Result};
use crate::persistence::PersistenceDiagram;
use crate::series::{ScalarSeries, TimeSeries};
use crate::synthgen::{LabeledSeries, NamedScenario, ScenarioSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// Reads `t,v1,...,vm` CSV. Row numbers in errors are 1-based file lines.
pub fn read_csv(reader: impl Read) -> Result<TimeSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::Parse {
            row: 1,
            reason: "empty file".into(),
        });
    }
    if header.len() < 2 || !header[0].eq_ignore_ascii_case("t") {
        return Err(Error::Parse {
            row: 1,
            reason: format!(
                "header must be `t,v1,...,vm`, got `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let dim = header.len() - 1;
    let mut timestamps = Vec::new();
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let row = record.position().map_or(0, |p| p.line() as usize);
        let mut fields = record.iter().map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse {
                    row,
                    reason: format!("`{f}` is not a finite number"),
                })
        });
        let t = fields.next().expect("record has the header width")?;
        if let Some(&prev) = timestamps.last() {
            if !(t > prev) {
                return Err(Error::Parse {
                    row,
                    reason: format!("timestamp {t} does not exceed {prev}"),
                });
            }
        }
        timestamps.push(t);
        for v in fields {
            values.push(v?);
        }
    }
    if timestamps.len() < 2 {
        return Err(Error::Parse {
            row: 2 + timestamps.len(),
            reason: "a series needs at least 2 data rows".into(),
        });
    }
    TimeSeries::new(timestamps, values, dim)
}

fn csv_error(e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    let reason = match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => format!("expected {expected_len} fields, found {len}"),
        _ => e.to_string(),
    };
    Error::Parse { row, reason }
}

pub fn read_csv_path(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let file =
        std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_csv(std::io::BufReader::new(file))
}

/// Writes `t,v1,...,vm` with shortest round-trip float formatting.
pub fn write_csv(x: &TimeSeries, writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=x.dim()).map(|c| format!("v{c}")))
        .collect();
    w.write_record(&header)
        .map_err(|e| Error::Io(e.to_string()))?;
    let mut line = Vec::with_capacity(x.dim() + 1);
    for (t, row) in x.timestamps().iter().zip(x.rows()) {
        line.clear();
        line.push(t.to_string());
        line.extend(row.iter().map(f64::to_string));
        w.write_record(&line)
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_path(x: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path.as_ref())?;
    write_csv(x, std::io::BufWriter::new(file))
}

/// Detection output as written by `detect`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema_version: u32,
    #[serde(flatten)]
    pub result: RecurrenceResult,
}

impl ResultDocument {
    pub fn new(result: RecurrenceResult) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            result,
        }
    }
}

/// A surrogate and its persistence diagram, for external plotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramDocument {
    pub schema_version: u32,
    pub method: MethodParams,
    pub surrogate: ScalarSeries,
    pub diagram: PersistenceDiagram,
}

impl DiagramDocument {
    pub fn new(method: MethodParams, surrogate: ScalarSeries, diagram: PersistenceDiagram) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            method,
            surrogate,
            diagram,
        }
    }
}

/// Ground truth written next to every generated CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSidecar {
    pub schema_version: u32,
    pub name: String,
    pub seed: u64,
    pub true_times: Vec<f64>,
    pub true_lengths: Vec<f64>,
    pub n_samples: usize,
    pub mean_spacing: f64,
    pub spec: ScenarioSpec,
}

impl TruthSidecar {
    pub fn new(name: impl Into<String>, g: &LabeledSeries) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            seed: g.seed,
            true_times: g.true_times.clone(),
            true_lengths: g.true_lengths.clone(),
            n_samples: g.series.len(),
            mean_spacing: g.series.mean_spacing(),
            spec: g.spec.clone(),
        }
    }
}

/// Deserializes a versioned JSON document, rejecting unknown versions.
pub fn from_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    #[derive(Deserialize)]
    struct Version {
        schema_version: Option<u32>,
    }
    let row_of = |e: &serde_json::Error| e.line();
    let v: Version = serde_json::from_str(text).map_err(|e| Error::Parse {
        row: row_of(&e),
        reason: e.to_string(),
    })?;
    match v.schema_version {
        Some(SCHEMA_VERSION) => {}
        other => {
            return Err(Error::Parse {
                row: 1,
                reason: format!("unsupported schema_version {other:?}, expected {SCHEMA_VERSION}"),
            })
        }
    }
    serde_json::from_str(text).map_err(|e| Error::Parse {
        row: row_of(&e),
        reason: e.to_string(),
    })
}

pub fn to_json<T: Serialize>(doc: &T, pretty: bool) -> String {
    let out = if pretty {
        serde_json::to_string_pretty(doc)
    } else {
        serde_json::to_string(doc)
    };
    out.expect("documents contain only finite or null-encoded numbers")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ScenarioFile {
    scenario: Vec<NamedScenario>,
}

/// Parses a TOML file of `[[scenario]]` tables and validates each entry.
pub fn parse_scenarios(text: &str) -> Result<Vec<NamedScenario>> {
    let file: ScenarioFile = toml::from_str(text).map_err(|e| Error::InvalidSpec {
        field: "scenario".into(),
        reason: e.message().to_string(),
    })?;
    let mut names = std::collections::BTreeSet::new();
    for s in &file.scenario {
        if !names.insert(s.name.as_str()) {
            return Err(Error::InvalidSpec {
                field: "name".into(),
                reason: format!("duplicate scenario `{}`", s.name),
            });
        }
        s.spec.validate().map_err(|e| match e {
            Error::InvalidSpec { field, reason } => Error::InvalidSpec {
                field: format!("{}.{field}", s.name),
                reason,
            },
            other => other,
        })?;
    }
    Ok(file.scenario)
}

pub fn scenarios_to_toml(scenarios: &[NamedScenario]) -> String {
    toml::to_string(&ScenarioFile {
        scenario: scenarios.to_vec(),
    })
    .expect("scenario specs serialize to TOML")
}
