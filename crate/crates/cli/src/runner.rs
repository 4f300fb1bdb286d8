//! Subcommand implementations. Cells are independent jobs scheduled over a
//! bounded rayon pool; results are reassembled in fixed order, so the output
//! bytes do not depend on the job count.

use crate::config::{ProviderKind, RunConfig};
use crate::load::{load_corpus, LoadOutcome};
use crate::providers::{CachingProvider, FileProvider, ServiceProvider};
use crate::reports;
use anyhow::{bail, Context, Result};
use oddspeech_core::corpus::summarize;
use oddspeech_core::experiments::{
    compute_cell, phase_source, plan_ablation, plan_duration_comparison, plan_task_comparison,
    prepare_phases, prepare_session, run_label_correlations, run_phase_comparison, run_spec,
    CellOutcome, ExperimentSpec, PreparedCorpus, Table, TablePlan,
};
use oddspeech_core::labels::LabelAxis;
use oddspeech_core::session::Task;
use oddspeech_core::text::TextConfig;
use oddspeech_core::{corpus_digest, Corpus, EmbeddingProvider, FeatureVector, TestEmbedder};
use rayon::prelude::*;
use std::path::PathBuf;

pub enum Command {
    Validate,
    Summarize {
        srs_cutoff: u32,
        spq_cutoff: u32,
    },
    Features {
        export_embeddings: Option<PathBuf>,
    },
    CorrelateLabels,
    Predict {
        target: LabelAxis,
        task: Option<Task>,
        duration: Option<u32>,
    },
    Tasks,
    Durations {
        task: Task,
    },
    Phases {
        task: Task,
    },
    Ablate {
        task: Task,
        duration: Option<u32>,
    },
    All,
}

pub fn run(config: &RunConfig, command: Command) -> Result<()> {
    match command {
        Command::Validate => validate(config),
        Command::Summarize {
            srs_cutoff,
            spq_cutoff,
        } => summarize_cmd(config, srs_cutoff, spq_cutoff),
        Command::Features { export_embeddings } => features_cmd(config, export_embeddings),
        Command::CorrelateLabels => correlate_labels(config),
        Command::Predict {
            target,
            task,
            duration,
        } => predict(config, target, task, duration),
        Command::Tasks => single_table(config, TableKind::Tasks),
        Command::Durations { task } => single_table(config, TableKind::Durations { task }),
        Command::Phases { task } => phases_cmd(config, task),
        Command::Ablate { task, duration } => {
            single_table(config, TableKind::Ablate { task, duration })
        }
        Command::All => all_cmd(config),
    }
}

fn load(config: &RunConfig) -> Result<LoadOutcome> {
    load_corpus(&config.corpus, &config.labels, config.corpus_format)
}

fn load_clean(config: &RunConfig) -> Result<Corpus> {
    load(config)?.require_clean()
}

fn build_provider(config: &RunConfig) -> Result<Box<dyn EmbeddingProvider>> {
    Ok(match config.provider {
        ProviderKind::Test => Box::new(CachingProvider::new(TestEmbedder::new(
            config.seed,
            config.embed_dim,
        ))),
        ProviderKind::File => {
            let path = config
                .embedding_file
                .as_ref()
                .expect("validated by RunConfig");
            Box::new(CachingProvider::new(FileProvider::load(path)?))
        }
        ProviderKind::Service => {
            let endpoint = config
                .service_endpoint
                .as_ref()
                .expect("validated by RunConfig");
            Box::new(CachingProvider::new(ServiceProvider::connect(
                endpoint,
                config.service_timeout_ms,
                config.service_retries,
            )?))
        }
    })
}

fn build_pool(config: &RunConfig) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .context("building worker pool")
}

/// Extracts features for every session, in parallel, preserving order.
fn prepare<'a>(
    pool: &rayon::ThreadPool,
    corpus: &'a Corpus,
    text_config: &TextConfig,
    provider: &dyn EmbeddingProvider,
) -> Result<PreparedCorpus<'a>> {
    let features: Vec<FeatureVector> = pool.install(|| {
        corpus
            .sessions()
            .par_iter()
            .map(|s| prepare_session(s, text_config, provider))
            .collect::<std::result::Result<Vec<_>, _>>()
    })?;
    Ok(PreparedCorpus { corpus, features })
}

/// Runs a table plan with its cells scheduled over the pool.
fn run_plan(
    pool: &rayon::ThreadPool,
    prepared: &PreparedCorpus<'_>,
    plan: &TablePlan,
    seed: u64,
    alpha: f64,
) -> Result<Table> {
    let cells: Vec<(usize, usize, CellOutcome)> = pool.install(|| {
        plan.jobs
            .par_iter()
            .map(|job| {
                compute_cell(
                    prepared,
                    &job.rows,
                    job.target,
                    &job.excluded_groups,
                    seed,
                    alpha,
                )
                .map(|cell| (job.row_index, job.col_index, cell))
            })
            .collect::<std::result::Result<Vec<_>, _>>()
    })?;
    Ok(plan.assemble(cells))
}

fn validate(config: &RunConfig) -> Result<()> {
    let outcome = load(config)?;
    println!(
        "loaded {} sessions, {} label sets, {} rejects",
        outcome.sessions_loaded,
        outcome.labels_loaded,
        outcome.rejects.len()
    );
    let by_task = outcome.corpus.session_count_by_task();
    for (task, count) in &by_task {
        println!("  task {task}: {count} sessions");
    }
    println!("  durations: {:?}", outcome.corpus.duration_buckets());
    if outcome.rejects.is_empty() {
        return Ok(());
    }
    for reject in &outcome.rejects {
        eprintln!("reject {reject}");
    }
    bail!("{} rejected row(s)", outcome.rejects.len());
}

fn summarize_cmd(config: &RunConfig, srs_cutoff: u32, spq_cutoff: u32) -> Result<()> {
    let corpus = load_clean(config)?;
    let summary = summarize(&corpus).map_err(|e| anyhow::anyhow!("{e}"))?;
    let flags = oddspeech_core::corpus::flag_cutoffs(&corpus, srs_cutoff, spq_cutoff);
    let srs_candidates = flags.values().filter(|f| f.srs_candidate).count();
    let spq_candidates = flags.values().filter(|f| f.spq_candidate).count();
    let mut md = reports::summary_markdown(&summary);
    md.push_str(&format!(
        "\nScreening candidates (inclusive cutoffs): {srs_candidates} at srs_total >= {srs_cutoff}, {spq_candidates} at spq_total >= {spq_cutoff}\n"
    ));
    print!("{md}");
    if config.format.wants_md() {
        reports::write_file(&config.out_dir.join("summary.md"), &md)?;
    }
    if config.format.wants_csv() {
        let mut csv = reports::summary_csv(&summary);
        csv.push_str(&format!(
            "cutoff_candidates,srs>={srs_cutoff}:{srs_candidates};spq>={spq_cutoff}:{spq_candidates}\n"
        ));
        reports::write_file(&config.out_dir.join("summary.csv"), &csv)?;
    }
    Ok(())
}

fn features_cmd(config: &RunConfig, export_embeddings: Option<PathBuf>) -> Result<()> {
    let corpus = load_clean(config)?;
    let provider = build_provider(config)?;
    let pool = build_pool(config)?;
    let text_config = config.text_config()?;
    let prepared = prepare(&pool, &corpus, &text_config, provider.as_ref())?;
    let csv = reports::features_csv(&corpus, &prepared.features);
    let path = config.out_dir.join("features.csv");
    reports::write_file(&path, &csv)?;
    println!(
        "wrote {} ({} sessions x {} features)",
        path.display(),
        corpus.sessions().len(),
        oddspeech_core::FEATURES.len()
    );
    if let Some(export_path) = export_embeddings {
        let texts = embeddable_texts(&corpus, &text_config)?;
        let refs: Vec<&str> = texts.iter().map(|s| s.as_str()).collect();
        let written =
            crate::providers::write_embedding_file(provider.as_ref(), &refs, &export_path)?;
        println!(
            "wrote {} ({written} vectors, dim {})",
            export_path.display(),
            provider.dim()
        );
    }
    Ok(())
}

fn correlate_labels(config: &RunConfig) -> Result<()> {
    let corpus = load_clean(config)?;
    let table = run_label_correlations(&corpus, config.alpha);
    let written = reports::write_label_table(&config.out_dir, &table, config.format)?;
    let mut manifest = reports::Manifest::new(
        config,
        "none (label-only analysis)".to_string(),
        corpus_digest(&corpus),
    );
    manifest.add_label_table(&table);
    let manifest_path = manifest.write(&config.out_dir)?;
    for path in written.iter().chain(std::iter::once(&manifest_path)) {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn predict(
    config: &RunConfig,
    target: LabelAxis,
    task: Option<Task>,
    duration: Option<u32>,
) -> Result<()> {
    if !LabelAxis::TARGETS.contains(&target) {
        bail!("target must be one of spq_total, odd_speech, srs_total; got {target}");
    }
    let corpus = load_clean(config)?;
    let provider = build_provider(config)?;
    let text_config = config.text_config()?;
    let mut spec = ExperimentSpec::new(target, config.seed);
    spec.task_filter = task;
    spec.duration_filter = duration;
    let cell = run_spec(
        &corpus,
        &text_config,
        provider.as_ref(),
        &spec,
        config.alpha,
    )
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let slice_name = format!(
        "{}_{}_{}",
        target,
        task.map_or("all".to_string(), |t| t.to_string()),
        duration.map_or("all".to_string(), |d| format!("{d}s"))
    );
    match (&cell.report, &cell.predictions) {
        (Some(report), Some(result)) => {
            println!(
                "{slice_name}: rho={:.2} p={:.4} n={} participants={} significant={}",
                report.rho,
                report.p_value,
                cell.n_sessions,
                cell.n_participants,
                report.significant
            );
            let path = config.out_dir.join(format!("predictions_{slice_name}.csv"));
            reports::write_file(&path, &reports::predictions_csv(result))?;
            println!("wrote {}", path.display());
        }
        _ => {
            println!(
                "{slice_name}: degenerate ({})",
                cell.degenerate.as_deref().unwrap_or("unknown")
            );
        }
    }
    let mut manifest = reports::Manifest::new(config, provider.identity(), corpus_digest(&corpus));
    manifest.tables.insert(
        format!("predict_{slice_name}"),
        vec![reports::ManifestCell {
            row: slice_name.clone(),
            target: target.as_str().to_string(),
            n_sessions: cell.n_sessions,
            n_participants: cell.n_participants,
            rho: cell.report.as_ref().map(|r| r.rho),
            p_value: cell.report.as_ref().map(|r| r.p_value),
            significant: cell.report.as_ref().map(|r| r.significant),
            degenerate: cell.degenerate.clone(),
        }],
    );
    manifest.write(&config.out_dir)?;
    Ok(())
}

enum TableKind {
    Tasks,
    Durations { task: Task },
    Ablate { task: Task, duration: Option<u32> },
}

fn single_table(config: &RunConfig, kind: TableKind) -> Result<()> {
    let corpus = load_clean(config)?;
    let provider = build_provider(config)?;
    let pool = build_pool(config)?;
    let text_config = config.text_config()?;
    let prepared = prepare(&pool, &corpus, &text_config, provider.as_ref())?;
    let plan = match kind {
        TableKind::Tasks => plan_task_comparison(&corpus, &LabelAxis::TARGETS),
        TableKind::Durations { task } => {
            plan_duration_comparison(&corpus, &LabelAxis::TARGETS, task)
        }
        TableKind::Ablate { task, duration } => {
            plan_ablation(&corpus, &LabelAxis::TARGETS, task, duration)
        }
    };
    let table = run_plan(&pool, &prepared, &plan, config.seed, config.alpha)?;
    let written = reports::write_table(&config.out_dir, &table, config.format)?;
    let mut manifest = reports::Manifest::new(config, provider.identity(), corpus_digest(&corpus));
    manifest.add_table(&table);
    let manifest_path = manifest.write(&config.out_dir)?;
    for path in written.iter().chain(std::iter::once(&manifest_path)) {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn phases_cmd(config: &RunConfig, task: Task) -> Result<()> {
    let corpus = load_clean(config)?;
    let provider = build_provider(config)?;
    let pool = build_pool(config)?;
    let text_config = config.text_config()?;
    let source = phase_source(&corpus, task).map_err(|e| anyhow::anyhow!("{e}"))?;
    let (table, dropped) = pool.install(|| -> Result<_> {
        let prep = prepare_phases(&corpus, &text_config, provider.as_ref(), source)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let table = run_phase_comparison(&prep, &LabelAxis::TARGETS, config.seed, config.alpha)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok((table, prep.dropped))
    })?;
    let written = reports::write_table(&config.out_dir, &table, config.format)?;
    let mut manifest = reports::Manifest::new(config, provider.identity(), corpus_digest(&corpus));
    manifest.set_phase_source(source);
    manifest.add_table(&table);
    for (phase, session, reason) in &dropped {
        manifest.notes.push(format!(
            "phase {phase}: dropped session {session}: {reason}"
        ));
    }
    let manifest_path = manifest.write(&config.out_dir)?;
    for path in written.iter().chain(std::iter::once(&manifest_path)) {
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// The full report suite: label correlations plus the four prediction tables,
/// one manifest covering everything.
fn all_cmd(config: &RunConfig) -> Result<()> {
    let corpus = load_clean(config)?;
    let provider = build_provider(config)?;
    let pool = build_pool(config)?;
    let text_config = config.text_config()?;

    let label_table = run_label_correlations(&corpus, config.alpha);
    let mut written = reports::write_label_table(&config.out_dir, &label_table, config.format)?;

    let prepared = prepare(&pool, &corpus, &text_config, provider.as_ref())?;
    let mut manifest = reports::Manifest::new(config, provider.identity(), corpus_digest(&corpus));
    manifest.add_label_table(&label_table);

    let plans = [
        plan_task_comparison(&corpus, &LabelAxis::TARGETS),
        plan_duration_comparison(&corpus, &LabelAxis::TARGETS, Task::Negative),
        plan_ablation(&corpus, &LabelAxis::TARGETS, Task::Negative, None),
    ];
    for plan in &plans {
        let table = run_plan(&pool, &prepared, plan, config.seed, config.alpha)?;
        written.extend(reports::write_table(
            &config.out_dir,
            &table,
            config.format,
        )?);
        manifest.add_table(&table);
    }

    let source = phase_source(&corpus, Task::Negative).map_err(|e| anyhow::anyhow!("{e}"))?;
    let (phase_table, dropped) = pool.install(|| -> Result<_> {
        let prep = prepare_phases(&corpus, &text_config, provider.as_ref(), source)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let table = run_phase_comparison(&prep, &LabelAxis::TARGETS, config.seed, config.alpha)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok((table, prep.dropped))
    })?;
    written.extend(reports::write_table(
        &config.out_dir,
        &phase_table,
        config.format,
    )?);
    manifest.set_phase_source(source);
    manifest.add_table(&phase_table);
    for (phase, session, reason) in &dropped {
        manifest.notes.push(format!(
            "phase {phase}: dropped session {session}: {reason}"
        ));
    }

    let manifest_path = manifest.write(&config.out_dir)?;
    for path in written.iter().chain(std::iter::once(&manifest_path)) {
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Exports every text the pipeline would embed for this corpus; used to
/// build precomputed embedding files that cover a full run.
pub fn embeddable_texts(corpus: &Corpus, text_config: &TextConfig) -> Result<Vec<String>> {
    use oddspeech_core::experiments::tokenize_session;
    let mut texts = std::collections::BTreeSet::new();
    for session in corpus.sessions() {
        let t = tokenize_session(session, text_config).map_err(|e| anyhow::anyhow!("{e}"))?;
        for i in 0..t.sentence_count() {
            texts.insert(t.sentence_text(i));
        }
        for word in t.content_word_surfaces() {
            texts.insert(word.to_string());
        }
    }
    Ok(texts.into_iter().collect())
}

pub fn parse_target(s: &str) -> Result<LabelAxis> {
    LabelAxis::parse(s).with_context(|| format!("unknown target '{s}'"))
}

pub fn parse_task(s: &str) -> Result<Task> {
    Task::parse(s).with_context(|| format!("unknown task '{s}'"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ReportFormat;

    fn synthetic_files(dir: &std::path::Path) -> (PathBuf, PathBuf) {
        let corpus =
            oddspeech_core::synthetic::generate_corpus(&oddspeech_core::synthetic::SyntheticSpec {
                participants: 8,
                ..Default::default()
            });
        let sessions_path = dir.join("sessions.jsonl");
        let labels_path = dir.join("labels.jsonl");
        crate::synth::write_corpus_files(&corpus, &sessions_path, &labels_path).unwrap();
        (sessions_path, labels_path)
    }

    fn config_for(dir: &std::path::Path, jobs: usize) -> RunConfig {
        let (corpus, labels) = synthetic_files(dir);
        RunConfig {
            corpus,
            labels,
            corpus_format: None,
            provider: ProviderKind::Test,
            embed_dim: 8,
            embedding_file: None,
            service_endpoint: None,
            service_timeout_ms: 1000,
            service_retries: 0,
            seed: 42,
            alpha: 0.05,
            jobs,
            format: ReportFormat::Both,
            out_dir: dir.join("reports"),
            tagset: None,
            negation_lexicon: None,
            strict_tags: false,
        }
    }

    #[test]
    fn all_reports_identical_across_job_counts() {
        let dir = tempfile::tempdir().unwrap();
        let mut config = config_for(dir.path(), 1);
        run(&config, Command::All).unwrap();
        let read_all = |out: &std::path::Path| {
            let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
                .unwrap()
                .map(|e| {
                    let e = e.unwrap();
                    (
                        e.file_name().to_string_lossy().into_owned(),
                        std::fs::read(e.path()).unwrap(),
                    )
                })
                .collect();
            files.sort();
            files
        };
        let first = read_all(&config.out_dir);
        assert!(first.iter().any(|(n, _)| n == "manifest.json"));
        assert!(first.iter().any(|(n, _)| n == "table5_phase.md"));

        config.jobs = 4;
        config.out_dir = dir.path().join("reports4");
        run(&config, Command::All).unwrap();
        let second = read_all(&config.out_dir);
        let names_a: Vec<&String> = first.iter().map(|(n, _)| n).collect();
        let names_b: Vec<&String> = second.iter().map(|(n, _)| n).collect();
        assert_eq!(names_a, names_b);
        for ((_, a), (_, b)) in first.iter().zip(&second) {
            assert_eq!(a, b, "outputs differ between jobs=1 and jobs=4");
        }
    }

    #[test]
    fn predict_writes_cell_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        let config = config_for(dir.path(), 2);
        run(
            &config,
            Command::Predict {
                target: LabelAxis::OddSpeech,
                task: Some(Task::Negative),
                duration: Some(180),
            },
        )
        .unwrap();
        let csv = std::fs::read_to_string(
            config
                .out_dir
                .join("predictions_odd_speech_negative_180s.csv"),
        )
        .unwrap();
        assert!(csv.starts_with(
            "participant_id,session_id,ground_truth,prediction,fold_index,k_selected"
        ));
        // 8 participants x 1 session in the slice.
        assert_eq!(csv.lines().count(), 1 + 8);
    }

    #[test]
    fn embeddable_texts_cover_sentences_and_content_words() {
        let corpus =
            oddspeech_core::synthetic::generate_corpus(&oddspeech_core::synthetic::SyntheticSpec {
                participants: 2,
                ..Default::default()
            });
        let texts = embeddable_texts(&corpus, &TextConfig::default()).unwrap();
        assert!(!texts.is_empty());
        assert!(texts.iter().any(|t| t.ends_with("。")));
        assert!(texts.iter().any(|t| !t.contains("。")));
    }
}
