//! Report and export writing: tables in markdown/CSV, the run manifest,
//! feature-matrix and prediction CSVs, and the corpus summary.

use crate::config::{ReportFormat, RunConfig};
use anyhow::{Context, Result};
use oddspeech_core::corpus::DemographicSummary;
use oddspeech_core::experiments::{
    render_label_table_csv, render_label_table_markdown, render_table_csv, render_table_markdown,
    LabelTable, PhaseSource, Table,
};
use oddspeech_core::stats::PredictionResult;
use oddspeech_core::{Corpus, FeatureVector, FEATURES};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating {}", parent.display()))?;
    }
    std::fs::write(path, content).with_context(|| format!("writing {}", path.display()))
}

/// Writes `<id>.md` / `<id>.csv` per the configured format; returns the
/// paths written.
pub fn write_table(out_dir: &Path, table: &Table, format: ReportFormat) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if format.wants_csv() {
        let path = out_dir.join(format!("{}.csv", table.id));
        write_file(&path, &render_table_csv(table))?;
        written.push(path);
    }
    if format.wants_md() {
        let path = out_dir.join(format!("{}.md", table.id));
        write_file(&path, &render_table_markdown(table))?;
        written.push(path);
    }
    Ok(written)
}

pub fn write_label_table(
    out_dir: &Path,
    table: &LabelTable,
    format: ReportFormat,
) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    if format.wants_csv() {
        let path = out_dir.join("table2_label_corr.csv");
        write_file(&path, &render_label_table_csv(table))?;
        written.push(path);
    }
    if format.wants_md() {
        let path = out_dir.join("table2_label_corr.md");
        write_file(&path, &render_label_table_markdown(table))?;
        written.push(path);
    }
    Ok(written)
}

/// Feature matrix CSV: session metadata, the 22 feature values, and one
/// `<name>_undefined` flag column per feature (1 marks an undefined value;
/// its value cell is left empty rather than invented).
pub fn features_csv(corpus: &Corpus, features: &[FeatureVector]) -> String {
    let mut out = String::from("session_id,participant_id,task,duration_limit_s");
    for def in FEATURES {
        let _ = write!(out, ",{}", def.name);
    }
    for def in FEATURES {
        let _ = write!(out, ",{}_undefined", def.name);
    }
    out.push('\n');
    for (session, fv) in corpus.sessions().iter().zip(features) {
        let _ = write!(
            out,
            "{},{},{},{}",
            session.session_id, session.participant_id, session.task, session.duration_limit_s
        );
        for (value, &defined) in fv.values.iter().zip(&fv.defined) {
            if defined {
                let _ = write!(out, ",{value}");
            } else {
                out.push(',');
            }
        }
        for &defined in &fv.defined {
            let _ = write!(out, ",{}", if defined { 0 } else { 1 });
        }
        out.push('\n');
    }
    out
}

/// Prediction export: one row per held-out session.
pub fn predictions_csv(result: &PredictionResult) -> String {
    let mut out =
        String::from("participant_id,session_id,ground_truth,prediction,fold_index,k_selected\n");
    for row in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            row.participant_id,
            row.session_id,
            row.ground_truth,
            row.prediction,
            row.fold_index,
            row.k_selected
        );
    }
    out
}

pub fn summary_markdown(summary: &DemographicSummary) -> String {
    let mut out = String::from("# Corpus summary\n\n");
    let _ = writeln!(
        out,
        "{} participants, {} sessions\n",
        summary.participant_count, summary.session_count
    );
    out.push_str("| label | n | mean | sd | min | max |\n");
    out.push_str("| --- | --- | --- | --- | --- | --- |\n");
    for stat in &summary.stats {
        let _ = writeln!(
            out,
            "| {} | {} | {:.2} | {:.2} | {} | {} |",
            stat.axis, stat.n, stat.mean, stat.sd, stat.min, stat.max
        );
    }
    out.push_str("\n| gender | count |\n| --- | --- |\n");
    for (gender, count) in &summary.gender_counts {
        let _ = writeln!(out, "| {gender} | {count} |");
    }
    out
}

pub fn summary_csv(summary: &DemographicSummary) -> String {
    let mut out = String::from("label,n,mean,sd,min,max\n");
    for stat in &summary.stats {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            stat.axis, stat.n, stat.mean, stat.sd, stat.min, stat.max
        );
    }
    out.push_str("gender,count\n");
    for (gender, count) in &summary.gender_counts {
        let _ = writeln!(out, "{gender},{count}");
    }
    out
}

#[derive(Debug, Serialize)]
pub struct ManifestCell {
    pub row: String,
    pub target: String,
    pub n_sessions: usize,
    pub n_participants: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub significant: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct ManifestPhaseSource {
    pub task: String,
    pub duration_limit_s: u32,
    pub phase_count: usize,
}

/// Run manifest: seed, provider identity, corpus digest, and per-cell sample
/// sizes. Deliberately excludes anything machine- or schedule-dependent so
/// reruns are byte-identical.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub seed: u64,
    pub alpha: f64,
    pub provider: String,
    pub corpus_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_source: Option<ManifestPhaseSource>,
    pub tables: BTreeMap<String, Vec<ManifestCell>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Manifest {
    pub fn new(config: &RunConfig, provider_identity: String, corpus_hash: String) -> Manifest {
        Manifest {
            seed: config.seed,
            alpha: config.alpha,
            provider: provider_identity,
            corpus_hash,
            phase_source: None,
            tables: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn add_table(&mut self, table: &Table) {
        let mut cells = Vec::new();
        for row in &table.rows {
            for (cell, target) in row.cells.iter().zip(&table.targets) {
                cells.push(ManifestCell {
                    row: row.label.clone(),
                    target: target.as_str().to_string(),
                    n_sessions: cell.n_sessions,
                    n_participants: cell.n_participants,
                    rho: cell.report.as_ref().map(|r| r.rho),
                    p_value: cell.report.as_ref().map(|r| r.p_value),
                    significant: cell.report.as_ref().map(|r| r.significant),
                    degenerate: cell.degenerate.clone(),
                });
            }
        }
        self.tables.insert(table.id.to_string(), cells);
    }

    pub fn add_label_table(&mut self, table: &LabelTable) {
        let mut cells = Vec::new();
        for (row_axis, row) in &table.rows {
            for cell in row {
                match &cell.report {
                    Ok(report) => cells.push(ManifestCell {
                        row: row_axis.as_str().to_string(),
                        target: cell.b.as_str().to_string(),
                        n_sessions: report.n,
                        n_participants: report.n,
                        rho: Some(report.rho),
                        p_value: Some(report.p_value),
                        significant: Some(report.significant),
                        degenerate: None,
                    }),
                    Err(e) => cells.push(ManifestCell {
                        row: row_axis.as_str().to_string(),
                        target: cell.b.as_str().to_string(),
                        n_sessions: 0,
                        n_participants: 0,
                        rho: None,
                        p_value: None,
                        significant: None,
                        degenerate: Some(e.to_string()),
                    }),
                }
            }
        }
        self.tables.insert("table2_label_corr".to_string(), cells);
    }

    pub fn set_phase_source(&mut self, source: PhaseSource) {
        self.phase_source = Some(ManifestPhaseSource {
            task: source.task.as_str().to_string(),
            duration_limit_s: source.duration_limit_s,
            phase_count: source.phase_count,
        });
    }

    pub fn write(&self, out_dir: &Path) -> Result<PathBuf> {
        let path = out_dir.join("manifest.json");
        let mut body = serde_json::to_string_pretty(self)?;
        body.push('\n');
        write_file(&path, &body)?;
        Ok(path)
    }
}
