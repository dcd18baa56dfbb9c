//! Argument parsing and subcommands of the `ppgdx` binary.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::dataset::{load_dataset, DatasetError};
use crate::eval::{figures::report_figures, EvaluationReport};
use crate::pipeline::{evaluate, extract_cohort, feature_names, PipelineConfig, PipelineError, EXIT_OK};
use crate::synth::{generate, write_dataset, SynthSpec};

/// Environment variable naming a dataset directory used when no data flag
/// is given.
pub const DATA_ENV: &str = "PPG_BP_DATA";

const EXIT_CODES: &str = "Exit codes:
  0  success
  2  bad input: missing or malformed file, invalid configuration
  3  too little data for the evaluation (e.g. fewer subjects per class than folds)
  4  internal failure (solver error, unwritable output)
On failure a JSON error record is printed to stderr and, when --out is set,
written to <out>/error.json.";

#[derive(Parser, Debug)]
#[command(name = "ppgdx", version, about = "PPG heartbeat features and subject-grouped diabetes classification", after_help = EXIT_CODES)]
struct Cli {
    /// Log progress (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full pipeline: cohort, signal chain, features, 5-fold grouped CV of both models, report and figures.
    Run {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Generate a synthetic cohort in the dataset layout plus truth.json.
    Synth {
        /// TOML file of generator settings.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override a setting, e.g. --set noise_level=0.05 (repeatable).
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one CSV row per accepted cycle: subject_id, label, 110 features.
    Features {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "features.csv")]
        out: PathBuf,
    },
    /// Regenerate all figures from a stored report.json.
    Report {
        #[arg(long)]
        report: PathBuf,
        #[arg(long, default_value = "figures")]
        out: PathBuf,
    },
    /// Print the cohort summary table.
    Summarize {
        #[command(flatten)]
        data: DataArgs,
        /// Also write summary.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct DataArgs {
    /// TOML pipeline configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset directory holding subjects.csv and signals/.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    metadata: Option<PathBuf>,
    #[arg(long)]
    signals: Option<PathBuf>,
    #[arg(long)]
    sample_rate: Option<f64>,
    /// Comma-separated subject ids to drop after cohort selection.
    #[arg(long, value_delimiter = ',')]
    exclude_ids: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Override a config key, e.g. --set model.gbt.rounds=50 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

fn config_error(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Config(e.to_string())
}

fn read_table(path: Option<&Path>) -> Result<toml::Table, PipelineError> {
    let Some(path) = path else {
        return Ok(toml::Table::new());
    };
    if !path.is_file() {
        return Err(DatasetError::MissingFile(path.to_path_buf()).into());
    }
    let text = fs::read_to_string(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    text.parse::<toml::Table>().map_err(config_error)
}

/// Parse a `--set` value as TOML, falling back to a bare string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Set `a.b.c = value` in `table`, creating intermediate tables.
fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), PipelineError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| config_error(format!("empty key in `{key}`")))?;
    let mut t = table;
    for p in parts {
        let entry = t.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        t = entry
            .as_table_mut()
            .ok_or_else(|| config_error(format!("`{p}` in `{key}` is not a table")))?;
    }
    t.insert(last.to_string(), value);
    Ok(())
}

fn apply_sets(table: &mut toml::Table, sets: &[String]) -> Result<(), PipelineError> {
    for s in sets {
        let (k, v) = s.split_once('=').ok_or_else(|| config_error(format!("--set expects KEY=VALUE, got `{s}`")))?;
        set_path(table, k.trim(), parse_value(v.trim()))?;
    }
    Ok(())
}

fn deserialize<T: DeserializeOwned>(table: toml::Table) -> Result<T, PipelineError> {
    toml::Value::Table(table).try_into().map_err(config_error)
}

fn path_value(p: &Path) -> toml::Value {
    toml::Value::String(p.display().to_string())
}

/// Config file, then `--set`, then dedicated flags; later wins.
fn resolve_config(args: &DataArgs) -> Result<PipelineConfig, PipelineError> {
    let mut table = read_table(args.config.as_deref())?;
    apply_sets(&mut table, &args.sets)?;
    let data_dir = args.data.clone().or_else(|| {
        let none_given = args.metadata.is_none() && args.signals.is_none() && !table.contains_key("paths");
        none_given.then(|| std::env::var_os(DATA_ENV).map(PathBuf::from)).flatten()
    });
    if let Some(dir) = data_dir {
        set_path(&mut table, "paths.metadata", path_value(&dir.join("subjects.csv")))?;
        set_path(&mut table, "paths.signals", path_value(&dir.join("signals")))?;
    }
    if let Some(p) = &args.metadata {
        set_path(&mut table, "paths.metadata", path_value(p))?;
    }
    if let Some(p) = &args.signals {
        set_path(&mut table, "paths.signals", path_value(p))?;
    }
    if let Some(r) = args.sample_rate {
        set_path(&mut table, "paths.sample_rate", toml::Value::Float(r))?;
    }
    if let Some(s) = args.seed {
        set_path(&mut table, "seed", toml::Value::Integer(s as i64))?;
    }
    let mut cfg: PipelineConfig = deserialize(table)?;
    cfg.exclude_ids.extend(args.exclude_ids.iter().cloned());
    Ok(cfg)
}

fn load_records(cfg: &PipelineConfig) -> Result<Vec<crate::dataset::SubjectRecord>, PipelineError> {
    let metadata = cfg
        .paths
        .metadata
        .clone()
        .ok_or_else(|| config_error(format!("no dataset: pass --data, --metadata/--signals or set {DATA_ENV}")))?;
    let signals = cfg
        .paths
        .signals
        .clone()
        .or_else(|| metadata.parent().map(|p| p.join("signals")))
        .unwrap_or_else(|| PathBuf::from("signals"));
    let loaded = load_dataset(&metadata, &signals, cfg.paths.sample_rate)?;
    for e in &loaded.row_errors {
        log::warn!("metadata row {} column {}: {}", e.row, e.column, e.message);
    }
    Ok(loaded.records)
}

fn write(path: &Path, text: &str) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_figures(report: &EvaluationReport, dir: &Path) -> Result<usize, PipelineError> {
    let figures = report_figures(report);
    for (name, svg) in &figures {
        write(&dir.join(name), svg)?;
    }
    Ok(figures.len())
}

fn cmd_run(data: &DataArgs, out: &Path) -> Result<(), PipelineError> {
    let cfg = resolve_config(data)?;
    let records = load_records(&cfg)?;
    let features = extract_cohort(&records, &cfg)?;
    log::info!("{:?}", features.stats);
    let report = evaluate(&features, &cfg)?;
    write(&out.join("report.json"), &(report.to_json() + "\n"))?;
    let n = write_figures(&report, &out.join("figures"))?;
    print!("{}", features.summary().to_table());
    println!("cycles used: {}, subjects: {}", report.n_cycles, report.n_subjects);
    for m in &report.models {
        let fmt = |name: &str| {
            let s = &m.aggregate[name];
            match (s.mean, s.std) {
                (Some(a), Some(b)) => format!("{:.1} ± {:.1}", 100.0 * a, 100.0 * b),
                (Some(a), None) => format!("{:.1}", 100.0 * a),
                _ => "n/a".into(),
            }
        };
        println!(
            "{:<7} AUC {}  Acc {}  Se {}  Sp {}  F1 {}  PPV {}",
            m.kind.name(),
            fmt("auc"),
            fmt("acc"),
            fmt("se"),
            fmt("sp"),
            fmt("f1"),
            fmt("ppv")
        );
    }
    println!("report: {} ({} figures), sha256 {}", out.join("report.json").display(), n, report.hash());
    Ok(())
}

fn cmd_synth(config: Option<&Path>, sets: &[String], seed: Option<u64>, out: &Path) -> Result<(), PipelineError> {
    let mut table = read_table(config)?;
    apply_sets(&mut table, sets)?;
    if let Some(s) = seed {
        table.insert("seed".into(), toml::Value::Integer(s as i64));
    }
    let spec: SynthSpec = deserialize(table)?;
    let data = generate(&spec);
    write_dataset(&data, out).map_err(|source| PipelineError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    println!(
        "wrote {} subjects, {} segments to {}",
        data.records.len(),
        data.truth.segments.len(),
        out.display()
    );
    Ok(())
}

fn cmd_features(data: &DataArgs, out: &Path) -> Result<(), PipelineError> {
    let cfg = resolve_config(data)?;
    let features = extract_cohort(&load_records(&cfg)?, &cfg)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["subject_id".to_string(), "label".to_string()];
    header.extend(feature_names());
    w.write_record(&header).map_err(config_error)?;
    for v in &features.vectors {
        let mut row = vec![v.subject_id.clone(), v.label.to_string()];
        row.extend(v.values.iter().map(|x| x.to_string()));
        w.write_record(&row).map_err(config_error)?;
    }
    let bytes = w.into_inner().map_err(config_error)?;
    write(out, &String::from_utf8(bytes).expect("utf-8 csv"))?;
    println!("wrote {} rows × {} columns to {}", features.vectors.len(), header.len(), out.display());
    Ok(())
}

fn cmd_report(report: &Path, out: &Path) -> Result<(), PipelineError> {
    if !report.is_file() {
        return Err(DatasetError::MissingFile(report.to_path_buf()).into());
    }
    let text = fs::read_to_string(report).map_err(|source| PipelineError::Io {
        path: report.to_path_buf(),
        source,
    })?;
    let r = EvaluationReport::from_json(&text).map_err(config_error)?;
    let n = write_figures(&r, out)?;
    println!("wrote {n} figures to {}", out.display());
    Ok(())
}

fn cmd_summarize(data: &DataArgs, out: Option<&Path>) -> Result<(), PipelineError> {
    let cfg = resolve_config(data)?;
    let features = extract_cohort(&load_records(&cfg)?, &cfg)?;
    let summary = features.summary();
    print!("{}", summary.to_table());
    println!(
        "excluded subjects: {}; segments {} ({} failed); cycles used {}, rejected {}, degenerate {}",
        features.cohort.excluded.len(),
        features.stats.segments,
        features.stats.segments_failed,
        features.stats.cycles_used,
        features.stats.cycles_rejected,
        features.stats.cycles_degenerate
    );
    if let Some(out) = out {
        let json = serde_json::json!({
            "summary": summary,
            "stats": features.stats,
            "excluded": features.cohort.excluded,
        });
        write(&out.join("summary.json"), &(serde_json::to_string_pretty(&json).expect("json") + "\n"))?;
    }
    Ok(())
}

fn report_error(e: &PipelineError, out: Option<&Path>) -> i32 {
    let code = e.exit_code();
    let record = serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": code,
    });
    eprintln!("{record}");
    if let Some(dir) = out {
        let _ = fs::create_dir_all(dir).and_then(|_| fs::write(dir.join("error.json"), record.to_string() + "\n"));
    }
    code
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();

    let (result, out) = match &cli.command {
        Command::Run { data, out } => (cmd_run(data, out), Some(out.as_path())),
        Command::Synth { config, sets, seed, out } => (cmd_synth(config.as_deref(), sets, *seed, out), Some(out.as_path())),
        Command::Features { data, out } => (cmd_features(data, out), None),
        Command::Report { report, out } => (cmd_report(report, out), Some(out.as_path())),
        Command::Summarize { data, out } => (cmd_summarize(data, out.as_deref()), out.as_deref()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => report_error(&e, out),
    }
}
