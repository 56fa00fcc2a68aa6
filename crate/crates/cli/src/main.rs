//! `topocycle`: detect recurrence times, inspect diagrams, generate and score benchmarks.
//!
//! Exit codes: 0 success, 2 usage, 3 parse or input error, 4 no recurrence found.

mod batch;
mod config;

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use topocycle::eval::{boxplot_csv, default_sectioning, evaluate_run, render_table, RunEntry};
use topocycle::io::{
    from_json, parse_scenarios, read_csv_path, scenarios_to_toml, to_json, write_csv_path,
    DiagramDocument, ResultDocument, TruthSidecar, SCHEMA_VERSION,
};
use topocycle::synthgen::{benchmark_suite, generate};
use topocycle::{detect, sublevel_persistence, surrogate, Error, RecurrenceResult};

use config::MethodArgs;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INPUT: u8 = 3;
pub const EXIT_NO_RECURRENCE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "topocycle",
    version,
    about = "Recurrence times and cycle lengths of multi-variate time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Detect recurrence times in one or more CSV series.
    Detect(DetectArgs),
    /// Emit the surrogate series and its persistence diagram.
    Diagram(DiagramArgs),
    /// Generate labelled synthetic series from a scenario file.
    Generate(GenerateArgs),
    /// Print the built-in eighteen-section benchmark as a scenario file.
    Scenarios {
        #[arg(long, default_value_t = 2000)]
        samples_per_cycle: usize,
    },
    /// Score detection results against ground-truth sidecars.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct DetectArgs {
    /// Input CSV files with header `t,v1,...,vm`.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    method: MethodArgs,
    /// Write `<name>.result.json` per input here instead of printing.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Number of inputs processed concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Human-readable cycle table instead of JSON.
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct DiagramArgs {
    input: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
    /// Human-readable point list instead of JSON.
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct GenerateArgs {
    /// TOML file of `[[scenario]]` tables.
    scenarios: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    /// Only generate the named scenarios.
    #[arg(long)]
    only: Vec<String>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Directory of `<name>.result.json` (and `<name>.error.json`) files.
    estimates: PathBuf,
    /// Directory of `<name>.truth.json` sidecars.
    truth: PathBuf,
    /// Row label in the text table.
    #[arg(long, default_value = "estimates")]
    label: String,
    /// Also write per-cycle errors as CSV.
    #[arg(long)]
    boxplot: Option<PathBuf>,
    /// Text table instead of JSON.
    #[arg(long)]
    pretty: bool,
}

/// Written in batch mode when detection fails for one input.
#[derive(Debug, Serialize, Deserialize)]
pub struct ErrorDocument {
    pub schema_version: u32,
    pub input: String,
    pub kind: String,
    pub message: String,
}

pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoRecurrence(_) => EXIT_NO_RECURRENCE,
            Error::InvalidParameter(_) => EXIT_USAGE,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn kind_of(e: &Error) -> &'static str {
    match e {
        Error::NoRecurrence(_) => "no_recurrence",
        Error::Parse { .. } => "parse",
        Error::InvalidParameter(_) => "invalid_parameter",
        _ => "input",
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into())
}

fn print(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    if !text.ends_with('\n') {
        let _ = out.write_all(b"\n");
    }
}

fn cycle_table(r: &RecurrenceResult) -> String {
    let mut s = String::from("cycle       start         end      length\n");
    for (i, w) in r.recurrence_times.windows(2).enumerate() {
        s.push_str(&format!(
            "{:>5} {:>11.6} {:>11.6} {:>11.6}\n",
            i + 1,
            w[0],
            w[1],
            w[1] - w[0]
        ));
    }
    for w in &r.warnings {
        s.push_str(&format!("warning: {w}\n"));
    }
    s
}

fn detect_one(path: &Path, method: &MethodArgs) -> Result<RecurrenceResult, Error> {
    let x = read_csv_path(path)?;
    let params = method
        .params(&x)
        .map_err(|f| Error::InvalidParameter(f.message))?;
    detect(&x, &params)
}

fn cmd_detect(args: DetectArgs) -> Result<(), Failure> {
    args.method.check()?;
    if args.jobs == 0 {
        return Err(Failure::usage("--jobs must be at least 1"));
    }
    let Some(out_dir) = &args.out_dir else {
        if args.inputs.len() > 1 {
            return Err(Failure::usage("several inputs need --out-dir"));
        }
        let r = detect_one(&args.inputs[0], &args.method)?;
        if args.pretty {
            print(&cycle_table(&r));
        } else {
            print(&to_json(&ResultDocument::new(r), false));
        }
        return Ok(());
    };

    std::fs::create_dir_all(out_dir)
        .map_err(|e| Failure::input(format!("{}: {e}", out_dir.display())))?;
    let outcomes = batch::run(&args.inputs, args.jobs, |path| {
        let name = stem(path);
        let outcome = detect_one(path, &args.method);
        match &outcome {
            Ok(r) => write_file(
                &out_dir.join(format!("{name}.result.json")),
                &to_json(&ResultDocument::new(r.clone()), true),
            )?,
            Err(e) => {
                let doc = ErrorDocument {
                    schema_version: SCHEMA_VERSION,
                    input: path.display().to_string(),
                    kind: kind_of(e).into(),
                    message: e.to_string(),
                };
                write_file(
                    &out_dir.join(format!("{name}.error.json")),
                    &to_json(&doc, true),
                )?;
            }
        }
        Ok(outcome.err())
    });
    let mut code = 0;
    for (path, outcome) in args.inputs.iter().zip(outcomes) {
        match outcome {
            Err(f) => return Err(f),
            Ok(Some(e)) => {
                eprintln!("{}: {e}", path.display());
                let c = Failure::from(e).code;
                code = if code == 0 { c } else { code.min(c) };
            }
            Ok(None) => {}
        }
    }
    match code {
        0 => Ok(()),
        c => Err(Failure {
            code: c,
            message: "some inputs failed; see the .error.json files".into(),
        }),
    }
}

fn cmd_diagram(args: DiagramArgs) -> Result<(), Failure> {
    args.method.check()?;
    let x = read_csv_path(&args.input)?;
    let method = args.method.params(&x)?.method;
    let v = surrogate(&x, &method)?;
    let d = sublevel_persistence(v.values())?;
    if args.pretty {
        let mut s = String::from("   birth       death  min_index        time\n");
        for p in d.points() {
            let death = if p.is_essential() {
                "inf".to_string()
            } else {
                format!("{:.6}", p.death)
            };
            s.push_str(&format!(
                "{:>8.6} {:>11} {:>10} {:>11.6}\n",
                p.birth,
                death,
                p.min_index,
                v.timestamps()[p.min_index]
            ));
        }
        print(&s);
    } else {
        print(&to_json(&DiagramDocument::new(method, v, d), false));
    }
    Ok(())
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.scenarios)
        .map_err(|e| Failure::input(format!("{}: {e}", args.scenarios.display())))?;
    let scenarios = parse_scenarios(&text)?;
    for name in &args.only {
        if !scenarios.iter().any(|s| &s.name == name) {
            return Err(Failure::usage(format!("no scenario named `{name}`")));
        }
    }
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Failure::input(format!("{}: {e}", args.out_dir.display())))?;
    for s in &scenarios {
        if !args.only.is_empty() && !args.only.contains(&s.name) {
            continue;
        }
        let g = generate(&s.spec, args.seed)?;
        write_csv_path(&g.series, args.out_dir.join(format!("{}.csv", s.name)))?;
        write_file(
            &args.out_dir.join(format!("{}.truth.json", s.name)),
            &to_json(&TruthSidecar::new(&s.name, &g), true),
        )?;
    }
    Ok(())
}

/// Files in `dir` ending in `suffix`, keyed by the name before it.
fn files_with_suffix(dir: &Path, suffix: &str) -> Result<BTreeMap<String, PathBuf>, Failure> {
    let entries =
        std::fs::read_dir(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    let mut out = BTreeMap::new();
    for entry in entries.flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(base) = name.strip_suffix(suffix) {
            out.insert(base.to_string(), entry.path());
        }
    }
    Ok(out)
}

fn read_doc<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    from_json(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let truths = files_with_suffix(&args.truth, ".truth.json")?;
    let results = files_with_suffix(&args.estimates, ".result.json")?;
    let errors = files_with_suffix(&args.estimates, ".error.json")?;

    let mut orphans: Vec<String> = truths
        .keys()
        .filter(|n| !results.contains_key(*n) && !errors.contains_key(*n))
        .map(|n| format!("{n} (no estimate)"))
        .collect();
    orphans.extend(
        results
            .keys()
            .chain(errors.keys())
            .filter(|n| !truths.contains_key(*n))
            .map(|n| format!("{n} (no ground truth)")),
    );
    if !orphans.is_empty() {
        return Err(Failure::input(format!(
            "unpaired series: {}",
            orphans.join(", ")
        )));
    }
    if truths.is_empty() {
        return Err(Failure::input(format!(
            "no .truth.json files in {}",
            args.truth.display()
        )));
    }

    let mut entries = Vec::new();
    for (name, path) in &truths {
        let truth: TruthSidecar = read_doc(path)?;
        let estimated_times = match results.get(name) {
            Some(p) => Some(read_doc::<ResultDocument>(p)?.result.recurrence_times),
            None => None,
        };
        entries.push(RunEntry {
            name: name.clone(),
            true_times: truth.true_times,
            mean_spacing: truth.mean_spacing,
            estimated_times,
        });
    }
    let sectioning = default_sectioning(&entries);
    let report = evaluate_run(&entries, &sectioning);
    if let Some(path) = &args.boxplot {
        write_file(path, &boxplot_csv(&entries, &sectioning))?;
    }
    if args.pretty {
        print(&render_table(&[(args.label.as_str(), &report)]));
        for f in &report.failures {
            for p in &report.sections[f].problems {
                eprintln!("section {f} failed: {p}");
            }
        }
    } else {
        print(&to_json(&report, false));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Detect(a) => cmd_detect(a),
        Command::Diagram(a) => cmd_diagram(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Scenarios { samples_per_cycle } => {
            if samples_per_cycle < 2 {
                Err(Failure::usage("--samples-per-cycle must be at least 2"))
            } else {
                print(&scenarios_to_toml(&benchmark_suite(samples_per_cycle)));
                Ok(())
            }
        }
        Command::Evaluate(a) => cmd_evaluate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
