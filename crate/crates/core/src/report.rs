//! The combined evaluation report: JSON for machines, markdown for people.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dataset::Table;
use crate::fidelity::FidelityReport;
use crate::privacy::PrivacyReport;
use crate::textfid::{TextProfile, TextReport, WordCount};
use crate::utility::{UtilityMode, UtilitySection};

pub const SCHEMA_VERSION: &str = "syneval_report_v1";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("report has no axis results")]
    NoResults,
    #[error("unsupported report schema version {0:?}")]
    UnsupportedVersion(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFingerprint {
    pub role: String,
    pub path: String,
    pub rows: usize,
    pub columns: Vec<String>,
    /// Hex SHA-256 of the file bytes.
    pub sha256: String,
}

impl InputFingerprint {
    pub fn of_file(role: &str, path: &Path, table: &Table) -> Result<Self, ReportError> {
        let bytes = std::fs::read(path).map_err(|source| ReportError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Ok(InputFingerprint {
            role: role.to_string(),
            path: path.display().to_string(),
            rows: table.row_count(),
            columns: table.schema().names().map(str::to_string).collect(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        })
    }
}

/// Unix seconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timestamps {
    pub started_at: u64,
    pub finished_at: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynEvalReport {
    pub schema_version: String,
    pub tool_version: String,
    pub timestamps: Timestamps,
    pub inputs: Vec<InputFingerprint>,
    pub seed: u64,
    pub fidelity: Option<FidelityReport>,
    pub text_fidelity: Option<Vec<TextReport>>,
    pub utility: Option<UtilitySection>,
    pub privacy: Option<PrivacyReport>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportParts {
    pub fidelity: Option<FidelityReport>,
    pub text_fidelity: Option<Vec<TextReport>>,
    pub utility: Option<UtilitySection>,
    pub privacy: Option<PrivacyReport>,
    pub warnings: Vec<String>,
}

impl ReportParts {
    fn is_empty(&self) -> bool {
        self.fidelity.is_none()
            && self.text_fidelity.as_ref().is_none_or(Vec::is_empty)
            && self.utility.is_none()
            && self.privacy.is_none()
    }
}

pub fn assemble_report(
    parts: ReportParts,
    inputs: Vec<InputFingerprint>,
    seed: u64,
    timestamps: Timestamps,
) -> Result<SynEvalReport, ReportError> {
    if parts.is_empty() {
        return Err(ReportError::NoResults);
    }
    Ok(SynEvalReport {
        schema_version: SCHEMA_VERSION.to_string(),
        tool_version: TOOL_VERSION.to_string(),
        timestamps,
        inputs,
        seed,
        fidelity: parts.fidelity,
        text_fidelity: parts.text_fidelity.filter(|t| !t.is_empty()),
        utility: parts.utility,
        privacy: parts.privacy,
        warnings: parts.warnings,
    })
}

impl SynEvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, ReportError> {
        let report: SynEvalReport = serde_json::from_str(s)?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(ReportError::UnsupportedVersion(report.schema_version));
        }
        Ok(report)
    }
}

/// Two decimals, half-up, with a percent sign.
pub fn format_percent(v: f64) -> String {
    format!("{:.2}%", (v * 10_000.0).round() / 100.0)
}

pub fn format_mae(v: f64) -> String {
    format!("{v:.4}")
}

fn cell(s: &str) -> String {
    s.replace('|', "\\|").replace('\n', " ")
}

fn words(ws: &[WordCount]) -> String {
    if ws.is_empty() {
        return "-".into();
    }
    ws.iter().map(|w| cell(&w.word)).collect::<Vec<_>>().join(", ")
}

fn dominant(p: &TextProfile) -> String {
    format!(
        "{} ({})",
        p.dominant_sentiment.label.label(),
        format_percent(p.dominant_sentiment.proportion)
    )
}

fn fidelity_md(out: &mut String, f: &FidelityReport) {
    out.push_str("## Fidelity\n\n| Metric | Synthetic |\n| --- | --- |\n");
    let _ = writeln!(out, "| Structure Preserving Score | {} |", format_percent(f.sps));
    let _ = writeln!(out, "| Integrity Score | {} |", format_percent(f.integrity));
    let _ = writeln!(out, "| Column Shapes | {} |", format_percent(f.column_shapes));
    if !f.shapes_by_column.is_empty() {
        out.push_str("\n| Column | Method | Score |\n| --- | --- | --- |\n");
        for (name, shape) in &f.shapes_by_column {
            let method = serde_json::to_value(shape.method).ok();
            let method = method.as_ref().and_then(|m| m.as_str()).unwrap_or("?");
            let _ = writeln!(out, "| {} | {} | {} |", cell(name), method, format_percent(shape.score));
        }
    }
    out.push('\n');
}

fn text_md(out: &mut String, t: &TextReport) {
    let _ = writeln!(out, "## Text Fidelity: {}\n", cell(&t.column));
    out.push_str("| Metric | Real | Synthetic |\n| --- | --- | --- |\n");
    let _ = writeln!(out, "| Dominant Sentiment | {} | {} |", dominant(&t.real), dominant(&t.synthetic));
    let _ = writeln!(
        out,
        "| Top 3 Keywords | {} | {} |",
        words(&t.real.top_keywords),
        words(&t.synthetic.top_keywords)
    );
    let _ = writeln!(
        out,
        "| Top 3 Sentiment Words | {} | {} |",
        words(&t.real.top_sentiment_words),
        words(&t.synthetic.top_sentiment_words)
    );
    let _ = writeln!(
        out,
        "| Average Length (words) | {:.2} | {:.2} |",
        t.real.average_length_words, t.synthetic.average_length_words
    );
    out.push('\n');
}

fn utility_md(out: &mut String, u: &UtilitySection) {
    out.push_str("## Utility\n\n| Data Type | MAE | Accuracy |\n| --- | --- | --- |\n");
    for mode in [UtilityMode::Tstr, UtilityMode::Trtr] {
        if let Some(r) = u.run(mode) {
            let name = match mode {
                UtilityMode::Tstr => "Synthetic (TSTR)",
                UtilityMode::Trtr => "Real (TRTR)",
            };
            let _ = writeln!(out, "| {} | {} | {} |", name, format_mae(r.mae), format_percent(r.accuracy));
        }
    }
    out.push('\n');
}

fn privacy_md(out: &mut String, p: &PrivacyReport) {
    out.push_str("## Privacy\n\n| MIA Model | Successful Rate |\n| --- | --- |\n");
    let _ = writeln!(out, "| Random Forest | {} |", format_percent(p.success_rate));
    let c = &p.confusion;
    let _ = writeln!(out, "\nConfusion (real = positive): TP {} / FP {} / TN {} / FN {}\n", c.tp, c.fp, c.tn, c.fn_);
}

pub fn render_markdown(report: &SynEvalReport) -> String {
    let mut out = String::from("# SynEval Report\n\n");
    if let Some(f) = &report.fidelity {
        fidelity_md(&mut out, f);
    }
    for t in report.text_fidelity.iter().flatten() {
        text_md(&mut out, t);
    }
    if let Some(u) = &report.utility {
        utility_md(&mut out, u);
    }
    if let Some(p) = &report.privacy {
        privacy_md(&mut out, p);
    }
    if !report.warnings.is_empty() {
        out.push_str("## Warnings\n\n");
        for w in &report.warnings {
            let _ = writeln!(out, "- {}", w.replace('\n', " "));
        }
        out.push('\n');
    }
    out
}
