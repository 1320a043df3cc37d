//! The `syneval` command line.
//!
//! Every run resolves flags and the optional JSON config into a
//! [`RunConfig`], validates and loads all inputs, and only then computes the
//! enabled axes. Errors go to stderr as `error[CODE]: message`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use indexmap::IndexMap;
use serde::Deserialize;
use serde_json::Value;

use crate::dataset::{infer_schema, load_table, load_table_partial, ColumnKind, DatasetError, Schema, Table};
use crate::fidelity::evaluate_fidelity;
use crate::privacy::{mia_success_rate, FeatureSubsample, ForestParams, MiaConfig, TransformOptions};
use crate::report::{assemble_report, render_markdown, InputFingerprint, ReportParts, SynEvalReport, Timestamps};
use crate::textfid::{text_fidelity_tables, SentimentLexicon, Stopwords};
use crate::utility::{evaluate_utility, LogRegHyper, UtilityConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_GATE: i32 = 3;

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "SYNEVAL_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    Config,
    Input,
    Runtime,
    Io,
    Gate,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Config => "E_CONFIG",
            ErrorCode::Input => "E_INPUT",
            ErrorCode::Runtime => "E_RUNTIME",
            ErrorCode::Io => "E_IO",
            ErrorCode::Gate => "E_GATE",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCode::Config | ErrorCode::Input => EXIT_VALIDATION,
            ErrorCode::Runtime | ErrorCode::Io => EXIT_RUNTIME,
            ErrorCode::Gate => EXIT_GATE,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: ErrorCode,
    pub message: String,
}

impl CliError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "error[{}]: {}", self.code.as_str(), self.message)
    }
}

fn config_err(m: impl Into<String>) -> CliError {
    CliError::new(ErrorCode::Config, m)
}

fn input_err(m: impl Into<String>) -> CliError {
    CliError::new(ErrorCode::Input, m)
}

fn runtime_err(m: impl std::fmt::Display) -> CliError {
    CliError::new(ErrorCode::Runtime, m.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "syneval", version, about = "Evaluate synthetic tabular data against a real reference")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every enabled axis (privacy when member tables are given).
    Evaluate(EvalArgs),
    Fidelity(EvalArgs),
    Text(EvalArgs),
    Utility(EvalArgs),
    Privacy(EvalArgs),
    /// Print the inferred schema of a CSV or JSONL file.
    SchemaInfer(SchemaInferArgs),
}

#[derive(Debug, Args)]
pub struct SchemaInferArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub real: Option<PathBuf>,
    #[arg(long)]
    pub synthetic: Option<PathBuf>,
    #[arg(long)]
    pub members: Option<PathBuf>,
    #[arg(long = "non-members")]
    pub non_members: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Master seed; falls back to $SYNEVAL_SEED, then 42.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Zero the report timestamps so identical runs give identical bytes.
    #[arg(long)]
    pub deterministic: bool,
    /// JSON file with the same keys as the long flags (snake_case).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long = "out-md")]
    pub out_md: Option<PathBuf>,
    /// KEY=VALUE: exit 3 when the report value at KEY is below VALUE.
    #[arg(long = "fail-below", value_name = "KEY=VALUE")]
    pub fail_below: Vec<String>,
    #[arg(long = "text-col")]
    pub text_col: Option<String>,
    #[arg(long = "rating-col")]
    pub rating_col: Option<String>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Share of the real table held out for utility testing.
    #[arg(long)]
    pub holdout: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long = "min-df")]
    pub min_df: Option<usize>,
    #[arg(long = "max-features")]
    pub max_features: Option<usize>,
    #[arg(long = "id-cols", value_delimiter = ',')]
    pub id_cols: Vec<String>,
    #[arg(long = "n-trees")]
    pub n_trees: Option<usize>,
    #[arg(long = "max-depth")]
    pub max_depth: Option<usize>,
    #[arg(long = "min-samples-leaf")]
    pub min_samples_leaf: Option<usize>,
    #[arg(long = "drop-text")]
    pub drop_text: bool,
    /// Require the privacy axis in `evaluate`.
    #[arg(long)]
    pub privacy: bool,
    /// Axes to leave out: fidelity, text, utility, privacy.
    #[arg(long, value_delimiter = ',')]
    pub skip: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    real: Option<PathBuf>,
    synthetic: Option<PathBuf>,
    members: Option<PathBuf>,
    non_members: Option<PathBuf>,
    schema: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    stopwords: Option<PathBuf>,
    seed: Option<u64>,
    deterministic: Option<bool>,
    out: Option<PathBuf>,
    out_md: Option<PathBuf>,
    #[serde(default)]
    fail_below: Vec<String>,
    text_col: Option<String>,
    rating_col: Option<String>,
    tolerance: Option<f64>,
    holdout: Option<f64>,
    epochs: Option<usize>,
    lr: Option<f64>,
    l2: Option<f64>,
    min_df: Option<usize>,
    max_features: Option<usize>,
    id_cols: Option<Vec<String>>,
    n_trees: Option<usize>,
    max_depth: Option<usize>,
    min_samples_leaf: Option<usize>,
    drop_text: Option<bool>,
    privacy: Option<bool>,
    #[serde(default)]
    skip: Vec<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Axes {
    pub fidelity: bool,
    pub text: bool,
    pub utility: bool,
    pub privacy: bool,
}

impl Axes {
    fn enabled(&self, name: &str) -> bool {
        match name {
            "fidelity" => self.fidelity,
            "text" | "text_fidelity" => self.text,
            "utility" => self.utility,
            "privacy" => self.privacy,
            _ => false,
        }
    }
}

const AXIS_NAMES: [&str; 4] = ["fidelity", "text", "utility", "privacy"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub real: Option<PathBuf>,
    pub synthetic: Option<PathBuf>,
    pub members: Option<PathBuf>,
    pub non_members: Option<PathBuf>,
    pub schema: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub out_md: Option<PathBuf>,
    pub axes: Axes,
    pub utility: UtilityConfig,
    pub mia: MiaConfig,
    pub seed: u64,
    pub deterministic: bool,
    pub gates: IndexMap<String, f64>,
}

fn parse_gate(s: &str) -> Result<(String, f64), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| config_err(format!("--fail-below expects KEY=VALUE, got {s:?}")))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| config_err(format!("--fail-below {s:?}: {v:?} is not a number")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(config_err(format!("--fail-below {s:?}: empty key")));
    }
    Ok((k.to_string(), v))
}

fn read_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
    let mut cfg: FileConfig = serde_json::from_str(&text)
        .map_err(|e| config_err(format!("invalid config {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new(""));
    for p in [
        &mut cfg.real,
        &mut cfg.synthetic,
        &mut cfg.members,
        &mut cfg.non_members,
        &mut cfg.schema,
        &mut cfg.lexicon,
        &mut cfg.stopwords,
        &mut cfg.out,
        &mut cfg.out_md,
    ] {
        if let Some(rel) = p.as_ref().filter(|p| p.is_relative()) {
            *p = Some(base.join(rel));
        }
    }
    Ok(cfg)
}

/// Flags win over the config file, which wins over $SYNEVAL_SEED and
/// built-in defaults. Relative paths in the config file are resolved
/// against its directory.
pub fn resolve(command: &Command, args: &EvalArgs) -> Result<RunConfig, CliError> {
    let file = match &args.config {
        Some(p) => read_file_config(p)?,
        None => FileConfig::default(),
    };
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(s) => Some(
            s.trim()
                .parse::<u64>()
                .map_err(|_| config_err(format!("{SEED_ENV}={s:?} is not an unsigned integer")))?,
        ),
        Err(_) => None,
    };
    let seed = args.seed.or(file.seed).or(env_seed).unwrap_or(DEFAULT_SEED);

    let pick = |flag: &Option<PathBuf>, file: &Option<PathBuf>| flag.clone().or_else(|| file.clone());
    let real = pick(&args.real, &file.real);
    let synthetic = pick(&args.synthetic, &file.synthetic);
    let members = pick(&args.members, &file.members);
    let non_members = pick(&args.non_members, &file.non_members);

    let mut skip: Vec<String> = file.skip.clone();
    skip.extend(args.skip.iter().cloned());
    for s in &skip {
        if !AXIS_NAMES.contains(&s.as_str()) {
            return Err(config_err(format!(
                "--skip {s:?}: expected one of {}",
                AXIS_NAMES.join(", ")
            )));
        }
    }
    let want_privacy = args.privacy || file.privacy.unwrap_or(false);
    let mut axes = match command {
        Command::Evaluate(_) => Axes {
            fidelity: true,
            text: true,
            utility: true,
            privacy: want_privacy || (members.is_some() && non_members.is_some()),
        },
        Command::Fidelity(_) => Axes {
            fidelity: true,
            ..Axes::default()
        },
        Command::Text(_) => Axes {
            text: true,
            ..Axes::default()
        },
        Command::Utility(_) => Axes {
            utility: true,
            ..Axes::default()
        },
        Command::Privacy(_) => Axes {
            privacy: true,
            ..Axes::default()
        },
        Command::SchemaInfer(_) => unreachable!("schema-infer has no run config"),
    };
    for s in &skip {
        match s.as_str() {
            "fidelity" => axes.fidelity = false,
            "text" => axes.text = false,
            "utility" => axes.utility = false,
            _ => axes.privacy = false,
        }
    }
    if want_privacy && !axes.privacy {
        return Err(config_err("--privacy conflicts with --skip privacy"));
    }
    if !(axes.fidelity || axes.text || axes.utility || axes.privacy) {
        return Err(config_err("every axis is skipped"));
    }

    let defaults = UtilityConfig::default();
    let hyper_defaults = LogRegHyper::default();
    let utility = UtilityConfig {
        text_col: args.text_col.clone().or(file.text_col).unwrap_or(defaults.text_col),
        rating_col: args.rating_col.clone().or(file.rating_col).unwrap_or(defaults.rating_col),
        tolerance: args.tolerance.or(file.tolerance).unwrap_or(defaults.tolerance),
        hyper: LogRegHyper {
            learning_rate: args.lr.or(file.lr).unwrap_or(hyper_defaults.learning_rate),
            epochs: args.epochs.or(file.epochs).unwrap_or(hyper_defaults.epochs),
            l2: args.l2.or(file.l2).unwrap_or(hyper_defaults.l2),
        },
        min_df: args.min_df.or(file.min_df).unwrap_or(defaults.min_df),
        max_features: args.max_features.or(file.max_features).unwrap_or(defaults.max_features),
        holdout_fraction: args.holdout.or(file.holdout).unwrap_or(defaults.holdout_fraction),
        seed,
    };
    if !(utility.tolerance >= 0.0 && utility.tolerance.is_finite()) {
        return Err(config_err(format!("--tolerance must be >= 0, got {}", utility.tolerance)));
    }
    if !(utility.hyper.learning_rate > 0.0 && utility.hyper.learning_rate.is_finite()) {
        return Err(config_err(format!("--lr must be > 0, got {}", utility.hyper.learning_rate)));
    }
    if !(utility.hyper.l2 >= 0.0 && utility.hyper.l2.is_finite()) {
        return Err(config_err(format!("--l2 must be >= 0, got {}", utility.hyper.l2)));
    }
    if !(utility.holdout_fraction > 0.0 && utility.holdout_fraction < 1.0) {
        return Err(config_err(format!(
            "--holdout must be in (0, 1), got {}",
            utility.holdout_fraction
        )));
    }
    if utility.max_features == 0 {
        return Err(config_err("--max-features must be >= 1"));
    }

    let forest_defaults = ForestParams::default();
    let forest = ForestParams {
        n_trees: args.n_trees.or(file.n_trees).unwrap_or(forest_defaults.n_trees),
        max_depth: args.max_depth.or(file.max_depth).or(forest_defaults.max_depth),
        min_samples_leaf: args
            .min_samples_leaf
            .or(file.min_samples_leaf)
            .unwrap_or(forest_defaults.min_samples_leaf),
        feature_subsample: FeatureSubsample::Sqrt,
        bootstrap: true,
    };
    if forest.n_trees == 0 {
        return Err(config_err("--n-trees must be >= 1"));
    }
    if forest.min_samples_leaf == 0 {
        return Err(config_err("--min-samples-leaf must be >= 1"));
    }
    let id_columns = if args.id_cols.is_empty() {
        file.id_cols.unwrap_or_default()
    } else {
        args.id_cols.clone()
    };
    let mia = MiaConfig {
        forest,
        transform: TransformOptions {
            drop_text: args.drop_text || file.drop_text.unwrap_or(false),
            id_columns,
        },
    };

    let mut gates = IndexMap::new();
    for g in file.fail_below.iter().chain(&args.fail_below) {
        let (k, v) = parse_gate(g)?;
        let axis = k.split('.').next().unwrap_or_default();
        if !axes.enabled(axis) {
            return Err(config_err(format!("--fail-below {k}: axis {axis:?} is not enabled")));
        }
        gates.insert(k, v);
    }

    Ok(RunConfig {
        real,
        synthetic,
        members,
        non_members,
        schema: pick(&args.schema, &file.schema),
        lexicon: pick(&args.lexicon, &file.lexicon),
        stopwords: pick(&args.stopwords, &file.stopwords),
        out: pick(&args.out, &file.out),
        out_md: pick(&args.out_md, &file.out_md),
        axes,
        utility,
        mia,
        seed,
        deterministic: args.deterministic || file.deterministic.unwrap_or(false),
        gates,
    })
}

fn require(cfg: &RunConfig) -> Result<(), CliError> {
    let mut missing = Vec::new();
    let a = cfg.axes;
    if (a.fidelity || a.text || a.utility) && cfg.real.is_none() {
        missing.push("--real");
    }
    if (a.fidelity || a.text || a.utility || a.privacy) && cfg.synthetic.is_none() {
        missing.push("--synthetic");
    }
    if a.privacy && cfg.members.is_none() {
        missing.push("--members");
    }
    if a.privacy && cfg.non_members.is_none() {
        missing.push("--non-members");
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(config_err(format!("missing required input(s): {}", missing.join(", "))))
    }
}

fn check_paths(cfg: &RunConfig) -> Result<(), CliError> {
    let inputs = [
        ("--real", &cfg.real),
        ("--synthetic", &cfg.synthetic),
        ("--members", &cfg.members),
        ("--non-members", &cfg.non_members),
        ("--schema", &cfg.schema),
        ("--lexicon", &cfg.lexicon),
        ("--stopwords", &cfg.stopwords),
    ];
    for (flag, p) in inputs {
        if let Some(p) = p {
            if !p.is_file() {
                return Err(input_err(format!("{flag} {}: no such file", p.display())));
            }
        }
    }
    for (flag, p) in [("--out", &cfg.out), ("--out-md", &cfg.out_md)] {
        if let Some(dir) = p.as_ref().and_then(|p| p.parent()) {
            if !dir.as_os_str().is_empty() && !dir.is_dir() {
                return Err(input_err(format!("{flag}: directory {} does not exist", dir.display())));
            }
        }
    }
    Ok(())
}

struct Loaded {
    table: Table,
    fingerprint: InputFingerprint,
}

fn fingerprint(role: &str, path: &Path, table: Table) -> Result<Loaded, CliError> {
    let fingerprint = InputFingerprint::of_file(role, path, &table).map_err(|e| input_err(e.to_string()))?;
    Ok(Loaded { table, fingerprint })
}

fn load_err(role: &str, e: DatasetError) -> CliError {
    input_err(format!("{role}: {e}"))
}

/// Loads against a user-supplied schema; schema columns absent from the
/// file become warnings.
fn load_with_schema(role: &str, path: &Path, schema: &Schema, warnings: &mut Vec<String>) -> Result<Loaded, CliError> {
    let (table, missing) = load_table_partial(path, schema).map_err(|e| load_err(role, e))?;
    if !missing.is_empty() {
        warnings.push(format!("{role}: schema columns missing from file: {}", missing.join(", ")));
    }
    fingerprint(role, path, table)
}

/// Loads using the column kinds of a reference table so shared columns
/// compare like with like. Falls back to independent inference when the
/// file does not fit those kinds.
fn load_like(role: &str, path: &Path, reference: &Schema, warnings: &mut Vec<String>) -> Result<Loaded, CliError> {
    let relaxed = Schema::new(
        reference
            .columns()
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.nullable = true;
                c
            })
            .collect(),
    )
    .expect("same names as a valid schema");
    let table = match load_table_partial(path, &relaxed) {
        Ok((t, _)) => t,
        Err(e @ DatasetError::KindViolation { .. }) => {
            warnings.push(format!("{role}: {e}; column kinds inferred from this file instead"));
            load_table(path, None).map_err(|e| load_err(role, e))?
        }
        Err(e) => return Err(load_err(role, e)),
    };
    fingerprint(role, path, table)
}

fn load_fresh(role: &str, path: &Path) -> Result<Loaded, CliError> {
    let table = load_table(path, None).map_err(|e| load_err(role, e))?;
    fingerprint(role, path, table)
}

struct Inputs {
    real: Option<Loaded>,
    synthetic: Option<Loaded>,
    members: Option<Loaded>,
    non_members: Option<Loaded>,
    lexicon: SentimentLexicon,
    stopwords: Stopwords,
    warnings: Vec<String>,
}

fn load_inputs(cfg: &RunConfig) -> Result<Inputs, CliError> {
    let mut warnings = Vec::new();
    let schema = cfg
        .schema
        .as_deref()
        .map(|p| Schema::load(p).map_err(|e| input_err(format!("--schema: {e}"))))
        .transpose()?;
    let load_one = |role: &str, path: &Path, reference: Option<&Schema>, warnings: &mut Vec<String>| match (
        &schema, reference,
    ) {
        (Some(s), _) => load_with_schema(role, path, s, warnings),
        (None, Some(r)) => load_like(role, path, r, warnings),
        (None, None) => load_fresh(role, path),
    };
    let a = cfg.axes;
    let need_real = a.fidelity || a.text || a.utility;
    let real = match (&cfg.real, need_real) {
        (Some(p), true) => Some(load_one("real", p, None, &mut warnings)?),
        _ => None,
    };
    let members = match (&cfg.members, a.privacy) {
        (Some(p), true) => Some(load_one(
            "members",
            p,
            real.as_ref().map(|r| r.table.schema()),
            &mut warnings,
        )?),
        _ => None,
    };
    let reference = real.as_ref().or(members.as_ref()).map(|l| l.table.schema().clone());
    let synthetic = match &cfg.synthetic {
        Some(p) => Some(load_one("synthetic", p, reference.as_ref(), &mut warnings)?),
        None => None,
    };
    let non_members = match (&cfg.non_members, a.privacy) {
        (Some(p), true) => Some(load_one(
            "non-members",
            p,
            members.as_ref().map(|m| m.table.schema()),
            &mut warnings,
        )?),
        _ => None,
    };

    let lexicon = match &cfg.lexicon {
        Some(p) => SentimentLexicon::load(p).map_err(|e| input_err(format!("--lexicon: {e}")))?,
        None => SentimentLexicon::bundled(),
    };
    let stopwords = match &cfg.stopwords {
        Some(p) => Stopwords::load(p).map_err(|e| input_err(format!("--stopwords: {e}")))?,
        None => Stopwords::bundled(),
    };

    if a.utility {
        for (role, l) in [("real", &real), ("synthetic", &synthetic)] {
            let t = &l.as_ref().expect("required inputs checked").table;
            for col in [&cfg.utility.text_col, &cfg.utility.rating_col] {
                if t.column(col).is_none() {
                    return Err(input_err(format!("{role}: utility column {col:?} not found")));
                }
            }
        }
    }
    for id in &cfg.mia.transform.id_columns {
        if members.as_ref().is_some_and(|m| m.table.column(id).is_none()) {
            return Err(input_err(format!("members: --id-cols column {id:?} not found")));
        }
    }
    Ok(Inputs {
        real,
        synthetic,
        members,
        non_members,
        lexicon,
        stopwords,
        warnings,
    })
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn compute(cfg: &RunConfig, inputs: Inputs) -> Result<SynEvalReport, CliError> {
    let started_at = if cfg.deterministic { 0 } else { now() };
    let Inputs {
        real,
        synthetic,
        members,
        non_members,
        lexicon,
        stopwords,
        mut warnings,
    } = inputs;
    fn table(l: &Option<Loaded>) -> Option<&Table> {
        l.as_ref().map(|l| &l.table)
    }
    let mut parts = ReportParts::default();

    if cfg.axes.fidelity {
        let (r, s) = (table(&real).expect("checked"), table(&synthetic).expect("checked"));
        parts.fidelity = Some(evaluate_fidelity(r, s).map_err(|e| runtime_err(format!("fidelity: {e}")))?);
    }
    if cfg.axes.text {
        let (r, s) = (table(&real).expect("checked"), table(&synthetic).expect("checked"));
        let mut reports = Vec::new();
        for col in r.iter_columns().filter(|c| c.kind() == ColumnKind::Text) {
            match s.column(col.name()) {
                Some(sc) if sc.kind() == ColumnKind::Text => {
                    let rep = text_fidelity_tables(r, s, col.name(), &lexicon, &stopwords)
                        .map_err(|e| runtime_err(format!("text fidelity {:?}: {e}", col.name())))?;
                    reports.push(rep);
                }
                Some(sc) => warnings.push(format!(
                    "text fidelity: column {:?} is {} in the synthetic table; skipped",
                    col.name(),
                    sc.kind()
                )),
                None => warnings.push(format!(
                    "text fidelity: column {:?} missing from the synthetic table; skipped",
                    col.name()
                )),
            }
        }
        if reports.is_empty() {
            warnings.push("text fidelity: no text column shared by both tables".into());
        }
        parts.text_fidelity = Some(reports);
    }
    if cfg.axes.utility {
        let (r, s) = (table(&real).expect("checked"), table(&synthetic).expect("checked"));
        parts.utility = Some(evaluate_utility(r, Some(s), &cfg.utility).map_err(|e| runtime_err(format!("utility: {e}")))?);
    }
    if cfg.axes.privacy {
        let rep = mia_success_rate(
            table(&members).expect("checked"),
            table(&non_members).expect("checked"),
            table(&synthetic).expect("checked"),
            &cfg.mia,
            cfg.seed,
        )
        .map_err(|e| runtime_err(format!("privacy: {e}")))?;
        parts.privacy = Some(rep);
    }
    parts.warnings = warnings;

    let inputs: Vec<InputFingerprint> = [real, synthetic, members, non_members]
        .into_iter()
        .flatten()
        .map(|l| l.fingerprint)
        .collect();
    let finished_at = if cfg.deterministic { 0 } else { now() };
    assemble_report(
        parts,
        inputs,
        cfg.seed,
        Timestamps {
            started_at,
            finished_at,
        },
    )
    .map_err(runtime_err)
}

/// Looks up a dotted key in the report JSON. Array elements are addressed
/// by index, by `column` name, or by `mode` (so `utility.runs.tstr.accuracy`
/// and `utility.tstr.accuracy` both work).
pub fn lookup(report: &Value, key: &str) -> Option<f64> {
    let mut cur = report;
    for seg in key.split('.') {
        cur = match cur {
            Value::Object(m) => match m.get(seg) {
                Some(v) => v,
                None => m
                    .get("runs")
                    .and_then(|runs| find_in_array(runs, seg))?,
            },
            Value::Array(_) => find_in_array(cur, seg)?,
            _ => return None,
        };
    }
    cur.as_f64()
}

fn find_in_array<'a>(v: &'a Value, seg: &str) -> Option<&'a Value> {
    let arr = v.as_array()?;
    if let Ok(i) = seg.parse::<usize>() {
        return arr.get(i);
    }
    arr.iter().find(|e| {
        e.get("column").and_then(Value::as_str) == Some(seg)
            || e.get("mode")
                .and_then(Value::as_str)
                .is_some_and(|m| m.eq_ignore_ascii_case(seg))
    })
}

pub fn check_gates(report: &SynEvalReport, gates: &IndexMap<String, f64>) -> Result<(), CliError> {
    let value = serde_json::to_value(report).expect("report serializes");
    let mut failures = Vec::new();
    for (key, &threshold) in gates {
        let v = lookup(&value, key)
            .ok_or_else(|| config_err(format!("--fail-below {key}: no numeric value at that key in the report")))?;
        if v < threshold {
            failures.push(format!("{key} = {v} is below {threshold}"));
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::new(ErrorCode::Gate, failures.join("; ")))
    }
}

fn write_out(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::new(ErrorCode::Io, format!("cannot write {}: {e}", path.display())))
}

/// Validates, computes, writes outputs, then applies gates.
pub fn execute(command: &Command, args: &EvalArgs) -> Result<SynEvalReport, CliError> {
    let cfg = resolve(command, args)?;
    require(&cfg)?;
    check_paths(&cfg)?;
    let inputs = load_inputs(&cfg)?;
    let report = compute(&cfg, inputs)?;
    if let Some(p) = &cfg.out {
        write_out(p, &report.to_json())?;
    }
    let md = render_markdown(&report);
    match &cfg.out_md {
        Some(p) => write_out(p, &md)?,
        None => print!("{md}"),
    }
    check_gates(&report, &cfg.gates)?;
    Ok(report)
}

fn schema_infer(args: &SchemaInferArgs) -> Result<(), CliError> {
    if !args.input.is_file() {
        return Err(input_err(format!("{}: no such file", args.input.display())));
    }
    let schema = infer_schema(&args.input).map_err(|e| input_err(e.to_string()))?;
    let mut json = schema.to_json_pretty();
    json.push('\n');
    match &args.out {
        Some(p) => write_out(p, &json),
        None => {
            print!("{json}");
            Ok(())
        }
    }
}

/// Parses `args` (program name first) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                    let _ = e.print();
                    if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                        EXIT_VALIDATION
                    } else {
                        EXIT_OK
                    }
                }
                _ => {
                    eprint!("error[{}]: {}", ErrorCode::Config.as_str(), e.render());
                    EXIT_VALIDATION
                }
            };
        }
    };
    let result = match &cli.command {
        Command::SchemaInfer(a) => schema_infer(a),
        Command::Evaluate(a) | Command::Fidelity(a) | Command::Text(a) | Command::Utility(a) | Command::Privacy(a) => {
            execute(&cli.command, a).map(|_| ())
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("{e}");
            e.code.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_parsing() {
        assert_eq!(parse_gate("fidelity.column_shapes=0.7").unwrap(), ("fidelity.column_shapes".into(), 0.7));
        assert_eq!(parse_gate("x=abc").unwrap_err().code, ErrorCode::Config);
        assert_eq!(parse_gate("novalue").unwrap_err().code, ErrorCode::Config);
    }

    #[test]
    fn lookup_paths() {
        let v = serde_json::json!({
            "fidelity": {"column_shapes": 0.62},
            "utility": {"runs": [{"mode": "TSTR", "accuracy": 0.5}, {"mode": "TRTR", "accuracy": 0.6}]},
            "text_fidelity": [{"column": "text", "comparison": {"length_ratio": 0.9}}]
        });
        assert_eq!(lookup(&v, "fidelity.column_shapes"), Some(0.62));
        assert_eq!(lookup(&v, "utility.tstr.accuracy"), Some(0.5));
        assert_eq!(lookup(&v, "utility.runs.1.accuracy"), Some(0.6));
        assert_eq!(lookup(&v, "text_fidelity.text.comparison.length_ratio"), Some(0.9));
        assert_eq!(lookup(&v, "fidelity.nope"), None);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(ErrorCode::Config.exit_code(), 2);
        assert_eq!(ErrorCode::Input.exit_code(), 2);
        assert_eq!(ErrorCode::Runtime.exit_code(), 1);
        assert_eq!(ErrorCode::Gate.exit_code(), 3);
    }

    #[test]
    fn privacy_flag_without_members_is_a_config_error() {
        let args = EvalArgs {
            real: Some("r.csv".into()),
            synthetic: Some("s.csv".into()),
            privacy: true,
            seed: Some(1),
            ..Default::default()
        };
        let cmd = Command::Evaluate(EvalArgs::default());
        let cfg = resolve(&cmd, &args).unwrap();
        assert!(cfg.axes.privacy);
        let err = require(&cfg).unwrap_err();
        assert_eq!(err.code, ErrorCode::Config);
        assert!(err.message.contains("--members"));
    }

    #[test]
    fn gate_on_disabled_axis_rejected() {
        let args = EvalArgs {
            fail_below: vec!["privacy.success_rate=0.1".into()],
            seed: Some(1),
            ..Default::default()
        };
        let err = resolve(&Command::Fidelity(EvalArgs::default()), &args).unwrap_err();
        assert_eq!(err.code, ErrorCode::Config);
    }
}
