//! Experiment orchestration: slicing the corpus, running nested-CV score
//! prediction per cell, and assembling the report tables.
//!
//! Every cell is a pure function of (corpus slice, feature subset, target,
//! seed), so cells can be scheduled in any order or in parallel and the
//! tables come out identical.

mod render;

pub use render::{
    render_label_table_csv, render_label_table_markdown, render_table_csv, render_table_markdown,
};

use crate::corpus::{label_correlations, Corpus, LabelCorrelation};
use crate::embed::EmbeddingProvider;
use crate::features::{assemble, FeatureError, FeatureGroup, FeatureVector, FEATURES};
use crate::labels::LabelAxis;
use crate::session::{SessionRecord, Task};
use crate::stats::{
    lopo_cv, spearman, CorrelationReport, LopoConfig, PredictionResult, SessionRow, StatsError,
};
use crate::text::{
    naive_tokenize, parse_tagged, TextConfig, TextError, Token, TokenizedTranscript,
};
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentError {
    Feature {
        session_id: String,
        source: FeatureError,
    },
    Text {
        session_id: String,
        source: TextError,
    },
    InvalidPhaseRange {
        start_s: f64,
        end_s: f64,
        total_s: f64,
    },
    EmptySlice {
        description: String,
    },
    /// No sessions remain after filtering.
    NoSessions {
        description: String,
    },
    ExcludedAllGroups,
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::Feature { session_id, source } => {
                write!(f, "session '{session_id}': {source}")
            }
            ExperimentError::Text { session_id, source } => {
                write!(f, "session '{session_id}': {source}")
            }
            ExperimentError::InvalidPhaseRange {
                start_s,
                end_s,
                total_s,
            } => write!(
                f,
                "invalid phase range [{start_s}, {end_s}) for total {total_s}"
            ),
            ExperimentError::EmptySlice { description } => {
                write!(f, "empty slice: {description}")
            }
            ExperimentError::NoSessions { description } => {
                write!(f, "no sessions: {description}")
            }
            ExperimentError::ExcludedAllGroups => f.write_str("every feature group was excluded"),
        }
    }
}

impl core::error::Error for ExperimentError {}

/// Experiment selection: target score, filters, excluded feature groups.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub target: LabelAxis,
    pub task_filter: Option<Task>,
    pub duration_filter: Option<u32>,
    pub phase_filter: Option<(f64, f64)>,
    pub excluded_groups: BTreeSet<FeatureGroup>,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(target: LabelAxis, seed: u64) -> ExperimentSpec {
        ExperimentSpec {
            target,
            task_filter: None,
            duration_filter: None,
            phase_filter: None,
            excluded_groups: BTreeSet::new(),
            seed,
        }
    }

    /// A phase window needs a duration filter that covers it.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if let Some((start, end)) = self.phase_filter {
            let total = match self.duration_filter {
                Some(d) => d as f64,
                None => {
                    return Err(ExperimentError::InvalidPhaseRange {
                        start_s: start,
                        end_s: end,
                        total_s: f64::NAN,
                    })
                }
            };
            if !(0.0 <= start && start < end && end <= total) {
                return Err(ExperimentError::InvalidPhaseRange {
                    start_s: start,
                    end_s: end,
                    total_s: total,
                });
            }
        }
        Ok(())
    }
}

/// Runs a single experiment cell described by a spec: filters sessions,
/// extracts features (phase-sliced when a phase window is set), and runs the
/// nested-CV prediction cell.
pub fn run_spec(
    corpus: &Corpus,
    config: &TextConfig,
    provider: &dyn EmbeddingProvider,
    spec: &ExperimentSpec,
    alpha: f64,
) -> Result<CellOutcome, ExperimentError> {
    spec.validate()?;
    let rows = session_indices(corpus, |s| {
        spec.task_filter.is_none_or(|t| s.task == t)
            && spec
                .duration_filter
                .is_none_or(|d| s.duration_limit_s == d)
    });
    if rows.is_empty() {
        return Err(ExperimentError::NoSessions {
            description: String::from("no sessions match the requested slice"),
        });
    }
    let mut features: Vec<FeatureVector> = Vec::with_capacity(corpus.sessions().len());
    let placeholder = FeatureVector {
        values: alloc::vec![0.0; FEATURES.len()],
        defined: alloc::vec![false; FEATURES.len()],
    };
    features.resize(corpus.sessions().len(), placeholder);
    let mut kept = Vec::with_capacity(rows.len());
    for &i in &rows {
        let session = &corpus.sessions()[i];
        let fv = match spec.phase_filter {
            None => prepare_session(session, config, provider)?,
            Some((start, end)) => {
                let total =
                    spec.duration_filter
                        .expect("validated: phase requires duration") as f64;
                let t = tokenize_session(session, config)?;
                let sliced = slice_phase(
                    &t,
                    session.token_timestamps.as_deref(),
                    start,
                    end,
                    total,
                    config,
                )?;
                assemble(&sliced, end - start, provider).map_err(|source| {
                    ExperimentError::Feature {
                        session_id: session.session_id.clone(),
                        source,
                    }
                })?
            }
        };
        features[i] = fv;
        kept.push(i);
    }
    let prepared = PreparedCorpus { corpus, features };
    compute_cell(
        &prepared,
        &kept,
        spec.target,
        &spec.excluded_groups,
        spec.seed,
        alpha,
    )
}

/// Tokenizes a session: pre-tagged interchange tokens when present,
/// otherwise the test-grade built-in tokenizer.
pub fn tokenize_session(
    session: &SessionRecord,
    config: &TextConfig,
) -> Result<TokenizedTranscript, ExperimentError> {
    match &session.tokens {
        Some(entries) => parse_tagged(entries, config).map_err(|source| ExperimentError::Text {
            session_id: session.session_id.clone(),
            source,
        }),
        None => Ok(naive_tokenize(&session.transcript, config)),
    }
}

/// Extracts the full feature vector for one session.
pub fn prepare_session(
    session: &SessionRecord,
    config: &TextConfig,
    provider: &dyn EmbeddingProvider,
) -> Result<FeatureVector, ExperimentError> {
    let t = tokenize_session(session, config)?;
    assemble(&t, session.effective_duration_s(), provider).map_err(|source| {
        ExperimentError::Feature {
            session_id: session.session_id.clone(),
            source,
        }
    })
}

/// A corpus with features extracted once per session, index-aligned with
/// `corpus.sessions()`.
pub struct PreparedCorpus<'a> {
    pub corpus: &'a Corpus,
    pub features: Vec<FeatureVector>,
}

impl<'a> PreparedCorpus<'a> {
    /// Single-threaded extraction; callers wanting parallelism can build the
    /// `features` vector themselves with [`prepare_session`].
    pub fn build(
        corpus: &'a Corpus,
        config: &TextConfig,
        provider: &dyn EmbeddingProvider,
    ) -> Result<PreparedCorpus<'a>, ExperimentError> {
        let features = corpus
            .sessions()
            .iter()
            .map(|s| prepare_session(s, config, provider))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PreparedCorpus { corpus, features })
    }
}

/// Selects tokens inside a phase window.
///
/// With timestamps: tokens whose onset satisfies `start_s <= t < end_s`.
/// Without: the token-index range `[floor(N*start/total), floor(N*end/total))`
/// so consecutive phases partition the token sequence exactly. Sentences are
/// re-segmented within the slice.
pub fn slice_phase(
    t: &TokenizedTranscript,
    timestamps: Option<&[(usize, f64)]>,
    start_s: f64,
    end_s: f64,
    total_s: f64,
    config: &TextConfig,
) -> Result<TokenizedTranscript, ExperimentError> {
    if !(0.0 <= start_s && start_s < end_s && end_s <= total_s) {
        return Err(ExperimentError::InvalidPhaseRange {
            start_s,
            end_s,
            total_s,
        });
    }
    let n = t.len();
    let selected: Vec<usize> = match timestamps {
        Some(ts) => {
            let mut onset: BTreeMap<usize, f64> = BTreeMap::new();
            for &(idx, at) in ts {
                onset.insert(idx, at);
            }
            (0..n)
                .filter(|i| {
                    onset
                        .get(i)
                        .map(|&at| start_s <= at && at < end_s)
                        .unwrap_or(false)
                })
                .collect()
        }
        None => {
            let lo = (n as f64 * start_s / total_s) as usize;
            let hi = (n as f64 * end_s / total_s) as usize;
            (lo..hi.min(n)).collect()
        }
    };
    if selected.is_empty() {
        return Err(ExperimentError::EmptySlice {
            description: format!("phase [{start_s}, {end_s}) of {total_s}s"),
        });
    }
    let tokens: Vec<Token> = selected.iter().map(|&i| t.tokens[i].clone()).collect();
    let flags: Vec<bool> = selected.iter().map(|&i| t.negation_flags[i]).collect();
    Ok(TokenizedTranscript::from_parts(tokens, flags, config))
}

/// One experiment cell: pooled nested-CV predictions and their correlation
/// with ground truth, or the reason the cell degenerated.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub n_sessions: usize,
    pub n_participants: usize,
    pub report: Option<CorrelationReport>,
    pub predictions: Option<PredictionResult>,
    pub degenerate: Option<String>,
}

impl CellOutcome {
    fn degenerate(n_sessions: usize, n_participants: usize, reason: String) -> CellOutcome {
        CellOutcome {
            n_sessions,
            n_participants,
            report: None,
            predictions: None,
            degenerate: Some(reason),
        }
    }
}

/// Runs one cell: feature subset selection, LOPO nested CV, pooled Spearman.
///
/// `rows` are indices into the prepared corpus. Degenerate inputs (too few
/// participants, constant target, undefined correlation) yield a degenerate
/// cell rather than an error; errors are reserved for malformed requests.
pub fn compute_cell(
    prepared: &PreparedCorpus<'_>,
    rows: &[usize],
    target: LabelAxis,
    excluded_groups: &BTreeSet<FeatureGroup>,
    seed: u64,
    alpha: f64,
) -> Result<CellOutcome, ExperimentError> {
    let columns: Vec<usize> = (0..FEATURES.len())
        .filter(|&i| !excluded_groups.contains(&FEATURES[i].group))
        .collect();
    if columns.is_empty() {
        return Err(ExperimentError::ExcludedAllGroups);
    }
    let sessions = prepared.corpus.sessions();
    let mut meta = Vec::with_capacity(rows.len());
    let mut matrix_rows = Vec::with_capacity(rows.len());
    let mut defined = Vec::with_capacity(rows.len());
    let mut participants: BTreeSet<&str> = BTreeSet::new();
    for &i in rows {
        let session = &sessions[i];
        let fv = &prepared.features[i];
        participants.insert(&session.participant_id);
        meta.push(SessionRow {
            participant_id: session.participant_id.clone(),
            session_id: session.session_id.clone(),
        });
        matrix_rows.push(columns.iter().map(|&c| fv.values[c]).collect::<Vec<f64>>());
        defined.push(
            columns
                .iter()
                .map(|&c| fv.defined[c])
                .collect::<Vec<bool>>(),
        );
    }
    let n_sessions = rows.len();
    let n_participants = participants.len();
    if n_participants < 3 {
        return Ok(CellOutcome::degenerate(
            n_sessions,
            n_participants,
            format!("{n_participants} participants (need 3)"),
        ));
    }
    let mut targets: BTreeMap<String, f64> = BTreeMap::new();
    for pid in &participants {
        let label = prepared
            .corpus
            .label_of(pid)
            .expect("corpus invariant: labels exist");
        match label.axis_value(target) {
            Some(v) => {
                targets.insert((*pid).to_string(), v);
            }
            None => {
                return Ok(CellOutcome::degenerate(
                    n_sessions,
                    n_participants,
                    format!("participant '{pid}' missing {target}"),
                ))
            }
        }
    }
    let x = crate::linalg::Matrix::from_rows(&matrix_rows);
    let result = match lopo_cv(&x, &defined, &meta, &targets, &LopoConfig::new(seed)) {
        Ok(r) => r,
        Err(e) => {
            return Ok(CellOutcome::degenerate(
                n_sessions,
                n_participants,
                format!("{e}"),
            ))
        }
    };
    match spearman(&result.ground_truth(), &result.predictions(), alpha) {
        Ok(report) => Ok(CellOutcome {
            n_sessions,
            n_participants,
            report: Some(report),
            predictions: Some(result),
            degenerate: None,
        }),
        Err(StatsError::ConstantInput) => Ok(CellOutcome::degenerate(
            n_sessions,
            n_participants,
            String::from("constant predictions or targets"),
        )),
        Err(e) => Ok(CellOutcome::degenerate(
            n_sessions,
            n_participants,
            format!("{e}"),
        )),
    }
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub label: String,
    pub cells: Vec<CellOutcome>,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub id: &'static str,
    pub title: String,
    pub row_header: &'static str,
    pub targets: Vec<LabelAxis>,
    pub rows: Vec<TableRow>,
}

/// The set of cell jobs a table decomposes into; the companion crate farms
/// these out over a worker pool. Row/column order is fixed up front so any
/// execution order reassembles identically.
#[derive(Debug, Clone)]
pub struct CellJob {
    pub row_index: usize,
    pub col_index: usize,
    pub rows: Vec<usize>,
    pub target: LabelAxis,
    pub excluded_groups: BTreeSet<FeatureGroup>,
}

/// A table skeleton plus its jobs; `assemble` plugs computed cells back in.
#[derive(Debug, Clone)]
pub struct TablePlan {
    pub id: &'static str,
    pub title: String,
    pub row_header: &'static str,
    pub targets: Vec<LabelAxis>,
    pub row_labels: Vec<String>,
    pub jobs: Vec<CellJob>,
}

impl TablePlan {
    pub fn assemble(&self, mut cells: Vec<(usize, usize, CellOutcome)>) -> Table {
        cells.sort_by_key(|&(r, c, _)| (r, c));
        let mut rows: Vec<TableRow> = self
            .row_labels
            .iter()
            .map(|label| TableRow {
                label: label.clone(),
                cells: Vec::new(),
            })
            .collect();
        for (r, _, cell) in cells {
            rows[r].cells.push(cell);
        }
        Table {
            id: self.id,
            title: self.title.clone(),
            row_header: self.row_header,
            targets: self.targets.clone(),
            rows,
        }
    }

    /// Runs every job sequentially. The parallel path lives in the runner
    /// crate; both produce identical tables.
    pub fn run(
        &self,
        prepared: &PreparedCorpus<'_>,
        seed: u64,
        alpha: f64,
    ) -> Result<Table, ExperimentError> {
        let mut cells = Vec::with_capacity(self.jobs.len());
        for job in &self.jobs {
            let cell = compute_cell(
                prepared,
                &job.rows,
                job.target,
                &job.excluded_groups,
                seed,
                alpha,
            )?;
            cells.push((job.row_index, job.col_index, cell));
        }
        Ok(self.assemble(cells))
    }
}

fn session_indices<F: Fn(&SessionRecord) -> bool>(corpus: &Corpus, keep: F) -> Vec<usize> {
    corpus
        .sessions()
        .iter()
        .enumerate()
        .filter(|(_, s)| keep(s))
        .map(|(i, _)| i)
        .collect()
}

fn grid_jobs(
    row_slices: &[(String, Vec<usize>)],
    targets: &[LabelAxis],
    excluded: &BTreeSet<FeatureGroup>,
) -> Vec<CellJob> {
    let mut jobs = Vec::new();
    for (r, (_, rows)) in row_slices.iter().enumerate() {
        for (c, &target) in targets.iter().enumerate() {
            jobs.push(CellJob {
                row_index: r,
                col_index: c,
                rows: rows.clone(),
                target,
                excluded_groups: excluded.clone(),
            });
        }
    }
    jobs
}

/// Table plan: one row per task, one column per target; each cell pools the
/// task's sessions across every duration.
pub fn plan_task_comparison(corpus: &Corpus, targets: &[LabelAxis]) -> TablePlan {
    let row_slices: Vec<(String, Vec<usize>)> = Task::ALL
        .iter()
        .map(|&task| {
            (
                task.as_str().to_string(),
                session_indices(corpus, |s| s.task == task),
            )
        })
        .collect();
    TablePlan {
        id: "table3_tasks",
        title: String::from(
            "Task comparison: Spearman correlation between ground truth and predictions",
        ),
        row_header: "task",
        targets: targets.to_vec(),
        row_labels: row_slices.iter().map(|(l, _)| l.clone()).collect(),
        jobs: grid_jobs(&row_slices, targets, &BTreeSet::new()),
    }
}

/// Table plan: one row per duration bucket of one task (default negative).
pub fn plan_duration_comparison(corpus: &Corpus, targets: &[LabelAxis], task: Task) -> TablePlan {
    let buckets: Vec<u32> = corpus
        .sessions()
        .iter()
        .filter(|s| s.task == task)
        .map(|s| s.duration_limit_s)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let row_slices: Vec<(String, Vec<usize>)> = buckets
        .iter()
        .map(|&d| {
            (
                format!("{d}s"),
                session_indices(corpus, |s| s.task == task && s.duration_limit_s == d),
            )
        })
        .collect();
    TablePlan {
        id: "table4_duration",
        title: format!("Total duration effect on the {task} task"),
        row_header: "duration",
        targets: targets.to_vec(),
        row_labels: row_slices.iter().map(|(l, _)| l.clone()).collect(),
        jobs: grid_jobs(&row_slices, targets, &BTreeSet::new()),
    }
}

/// Table plan: all-features row plus one row per eliminated feature group.
pub fn plan_ablation(
    corpus: &Corpus,
    targets: &[LabelAxis],
    task: Task,
    duration: Option<u32>,
) -> TablePlan {
    let rows: Vec<usize> = session_indices(corpus, |s| {
        s.task == task && duration.is_none_or(|d| s.duration_limit_s == d)
    });
    let mut row_slices = Vec::new();
    let mut excluded_sets = Vec::new();
    row_slices.push((String::from("all_features"), rows.clone()));
    excluded_sets.push(BTreeSet::new());
    for group in FeatureGroup::ALL {
        row_slices.push((group.as_str().to_string(), rows.clone()));
        excluded_sets.push([group].into_iter().collect());
    }
    let mut jobs = Vec::new();
    for (r, ((_, slice), excluded)) in row_slices.iter().zip(&excluded_sets).enumerate() {
        for (c, &target) in targets.iter().enumerate() {
            jobs.push(CellJob {
                row_index: r,
                col_index: c,
                rows: slice.clone(),
                target,
                excluded_groups: excluded.clone(),
            });
        }
    }
    let duration_label = duration.map_or(String::from("all durations"), |d| format!("{d}s"));
    TablePlan {
        id: "table6_ablation",
        title: format!(
            "Ablation study on the {task} task ({duration_label}); rows name the eliminated group"
        ),
        row_header: "eliminated_group",
        targets: targets.to_vec(),
        row_labels: row_slices.into_iter().map(|(l, _)| l).collect(),
        jobs,
    }
}

/// The phase analysis source: the longest-duration bucket of one task.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSource {
    pub task: Task,
    pub duration_limit_s: u32,
    pub phase_count: usize,
}

impl PhaseSource {
    /// Phase windows in seconds: equal thirds (or `phase_count`-ths) of the
    /// bucket duration.
    pub fn windows(&self) -> Vec<(f64, f64)> {
        let d = self.duration_limit_s as f64;
        let k = self.phase_count as f64;
        (0..self.phase_count)
            .map(|i| (d * i as f64 / k, d * (i + 1) as f64 / k))
            .collect()
    }

    pub fn window_label(window: (f64, f64)) -> String {
        format!("{}-{}s", window.0 as u64, window.1 as u64)
    }
}

/// Picks the phase-analysis source: the longest duration bucket of the given
/// task that has any sessions.
pub fn phase_source(corpus: &Corpus, task: Task) -> Result<PhaseSource, ExperimentError> {
    let longest = corpus
        .sessions()
        .iter()
        .filter(|s| s.task == task)
        .map(|s| s.duration_limit_s)
        .max()
        .ok_or_else(|| ExperimentError::NoSessions {
            description: format!("task {task}"),
        })?;
    Ok(PhaseSource {
        task,
        duration_limit_s: longest,
        phase_count: 3,
    })
}

/// Per-phase feature extraction over the phase source sessions.
///
/// Sessions whose slice is empty or yields no usable features are dropped
/// from that phase and recorded in `dropped`.
/// Features extracted for one phase window: the window plus per-session
/// (session index, feature vector) pairs.
pub type PhaseFeatures = ((f64, f64), Vec<(usize, FeatureVector)>);

pub struct PhasePrepared<'a> {
    pub corpus: &'a Corpus,
    pub source: PhaseSource,
    pub phases: Vec<PhaseFeatures>,
    /// (phase label, session id, reason) for sessions a phase dropped.
    pub dropped: Vec<(String, String, String)>,
}

pub fn prepare_phases<'a>(
    corpus: &'a Corpus,
    config: &TextConfig,
    provider: &dyn EmbeddingProvider,
    source: PhaseSource,
) -> Result<PhasePrepared<'a>, ExperimentError> {
    let rows = session_indices(corpus, |s| {
        s.task == source.task && s.duration_limit_s == source.duration_limit_s
    });
    if rows.is_empty() {
        return Err(ExperimentError::NoSessions {
            description: format!("task {} at {}s", source.task, source.duration_limit_s),
        });
    }
    let total = source.duration_limit_s as f64;
    let mut phases = Vec::new();
    let mut dropped = Vec::new();
    for window in source.windows() {
        let label = PhaseSource::window_label(window);
        let mut extracted = Vec::new();
        for &i in &rows {
            let session = &corpus.sessions()[i];
            let t = tokenize_session(session, config)?;
            let sliced = match slice_phase(
                &t,
                session.token_timestamps.as_deref(),
                window.0,
                window.1,
                total,
                config,
            ) {
                Ok(s) => s,
                Err(e) => {
                    dropped.push((label.clone(), session.session_id.clone(), format!("{e}")));
                    continue;
                }
            };
            let window_s = window.1 - window.0;
            match assemble(&sliced, window_s, provider) {
                Ok(fv) => extracted.push((i, fv)),
                Err(e) => {
                    dropped.push((label.clone(), session.session_id.clone(), format!("{e}")));
                }
            }
        }
        phases.push((window, extracted));
    }
    Ok(PhasePrepared {
        corpus,
        source,
        phases,
        dropped,
    })
}

/// Runs the phase-effect table from per-phase features.
pub fn run_phase_comparison(
    prepared: &PhasePrepared<'_>,
    targets: &[LabelAxis],
    seed: u64,
    alpha: f64,
) -> Result<Table, ExperimentError> {
    let mut rows = Vec::new();
    for (window, extracted) in &prepared.phases {
        // Build a transient prepared corpus view for this phase.
        let indices: Vec<usize> = extracted.iter().map(|&(i, _)| i).collect();
        let mut features: Vec<FeatureVector> = Vec::with_capacity(prepared.corpus.sessions().len());
        // compute_cell indexes features by session index; fill unused slots
        // with a placeholder that the row list never references.
        let placeholder = FeatureVector {
            values: alloc::vec![0.0; FEATURES.len()],
            defined: alloc::vec![false; FEATURES.len()],
        };
        features.resize(prepared.corpus.sessions().len(), placeholder);
        for (i, fv) in extracted {
            features[*i] = fv.clone();
        }
        let view = PreparedCorpus {
            corpus: prepared.corpus,
            features,
        };
        let mut cells = Vec::new();
        for &target in targets {
            cells.push(compute_cell(
                &view,
                &indices,
                target,
                &BTreeSet::new(),
                seed,
                alpha,
            )?);
        }
        rows.push(TableRow {
            label: PhaseSource::window_label(*window),
            cells,
        });
    }
    Ok(Table {
        id: "table5_phase",
        title: format!(
            "Speech phase effect on the {} task ({}s sessions)",
            prepared.source.task, prepared.source.duration_limit_s
        ),
        row_header: "phase",
        targets: targets.to_vec(),
        rows,
    })
}

/// The label-correlation grid (schizotypal rows by autistic/schizotypal
/// columns), one value per participant.
#[derive(Debug, Clone)]
pub struct LabelTable {
    pub rows: Vec<(LabelAxis, Vec<LabelCorrelation>)>,
    pub columns: Vec<LabelAxis>,
}

pub const LABEL_TABLE_ROWS: [LabelAxis; 2] = [LabelAxis::SpqTotal, LabelAxis::OddSpeech];
pub const LABEL_TABLE_COLUMNS: [LabelAxis; 6] = [
    LabelAxis::SpqTotal,
    LabelAxis::OddSpeech,
    LabelAxis::SrsTotal,
    LabelAxis::SrsAwareness,
    LabelAxis::SrsCognition,
    LabelAxis::SrsCommunication,
];

pub fn run_label_correlations(corpus: &Corpus, alpha: f64) -> LabelTable {
    let rows = LABEL_TABLE_ROWS
        .iter()
        .map(|&row| {
            let pairs: Vec<(LabelAxis, LabelAxis)> =
                LABEL_TABLE_COLUMNS.iter().map(|&col| (row, col)).collect();
            (row, label_correlations(corpus, &pairs, alpha))
        })
        .collect();
    LabelTable {
        rows,
        columns: LABEL_TABLE_COLUMNS.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::TestEmbedder;
    use crate::labels::{Gender, LabelSet};
    use crate::synthetic;

    fn prepared_synthetic() -> (Corpus, TextConfig) {
        let corpus = synthetic::generate_corpus(&synthetic::SyntheticSpec {
            participants: 12,
            seed: 42,
            ..Default::default()
        });
        (corpus, TextConfig::default())
    }

    #[test]
    fn task_table_has_expected_shape() {
        let (corpus, config) = prepared_synthetic();
        let provider = TestEmbedder::new(42, 8);
        let prepared = PreparedCorpus::build(&corpus, &config, &provider).unwrap();
        let plan = plan_task_comparison(&corpus, &LabelAxis::TARGETS);
        let table = plan.run(&prepared, 42, 0.05).unwrap();
        assert_eq!(table.rows.len(), 4);
        for row in &table.rows {
            assert_eq!(row.cells.len(), 3);
        }
    }

    #[test]
    fn single_task_corpus_marks_other_rows_degenerate() {
        let corpus = synthetic::generate_corpus(&synthetic::SyntheticSpec {
            participants: 6,
            seed: 7,
            tasks: alloc::vec![Task::Negative],
            ..Default::default()
        });
        let config = TextConfig::default();
        let provider = TestEmbedder::new(42, 8);
        let prepared = PreparedCorpus::build(&corpus, &config, &provider).unwrap();
        let plan = plan_task_comparison(&corpus, &LabelAxis::TARGETS);
        let table = plan.run(&prepared, 42, 0.05).unwrap();
        for row in &table.rows {
            let expect_degenerate = row.label != "negative";
            for cell in &row.cells {
                assert_eq!(
                    cell.degenerate.is_some(),
                    expect_degenerate,
                    "{}",
                    row.label
                );
            }
        }
    }

    #[test]
    fn ablation_all_features_row_matches_task_cell() {
        let (corpus, config) = prepared_synthetic();
        let provider = TestEmbedder::new(42, 8);
        let prepared = PreparedCorpus::build(&corpus, &config, &provider).unwrap();
        let tasks = plan_task_comparison(&corpus, &LabelAxis::TARGETS)
            .run(&prepared, 42, 0.05)
            .unwrap();
        let ablation = plan_ablation(&corpus, &LabelAxis::TARGETS, Task::Negative, None)
            .run(&prepared, 42, 0.05)
            .unwrap();
        let task_row = tasks.rows.iter().find(|r| r.label == "negative").unwrap();
        let all_row = &ablation.rows[0];
        for (a, b) in task_row.cells.iter().zip(&all_row.cells) {
            let (ra, rb) = (a.report.as_ref().unwrap(), b.report.as_ref().unwrap());
            assert_eq!(ra.rho, rb.rho);
            assert_eq!(ra.p_value, rb.p_value);
        }
    }

    #[test]
    fn tables_are_reproducible() {
        let (corpus, config) = prepared_synthetic();
        let provider = TestEmbedder::new(42, 8);
        let prepared = PreparedCorpus::build(&corpus, &config, &provider).unwrap();
        let plan = plan_duration_comparison(&corpus, &LabelAxis::TARGETS, Task::Negative);
        let a = plan.run(&prepared, 42, 0.05).unwrap();
        let b = plan.run(&prepared, 42, 0.05).unwrap();
        assert_eq!(render_table_csv(&a), render_table_csv(&b));
    }

    #[test]
    fn phase_slices_partition_tokens() {
        let config = TextConfig::default();
        let text = "あ い う え お か き く け こ さ し す せ そ";
        let t = naive_tokenize(text, &config);
        let n = t.len();
        let source = PhaseSource {
            task: Task::Negative,
            duration_limit_s: 90,
            phase_count: 3,
        };
        let mut recombined = Vec::new();
        for (start, end) in source.windows() {
            let slice = slice_phase(&t, None, start, end, 90.0, &config).unwrap();
            recombined.extend(slice.tokens);
        }
        assert_eq!(recombined.len(), n);
        assert_eq!(recombined, t.tokens);
    }

    #[test]
    fn phase_proportional_thirds_of_90() {
        let config = TextConfig::default();
        let mut text = String::new();
        for _ in 0..90 {
            text.push_str("あ ");
        }
        let t = naive_tokenize(&text, &config);
        assert_eq!(t.len(), 90);
        for (start, end) in [(0.0, 60.0), (60.0, 120.0), (120.0, 180.0)] {
            let slice = slice_phase(&t, None, start, end, 180.0, &config).unwrap();
            assert_eq!(slice.len(), 30);
        }
    }

    #[test]
    fn phase_timestamps_filter() {
        let config = TextConfig::default();
        let t = naive_tokenize("a b c d", &config);
        let ts: Vec<(usize, f64)> = (0..4).map(|i| (i, 10.0 * i as f64)).collect();
        // All tokens within the first 60 seconds.
        let first = slice_phase(&t, Some(&ts), 0.0, 60.0, 180.0, &config).unwrap();
        assert_eq!(first.len(), 4);
        let later = slice_phase(&t, Some(&ts), 60.0, 120.0, 180.0, &config);
        assert!(matches!(later, Err(ExperimentError::EmptySlice { .. })));
    }

    #[test]
    fn invalid_phase_range_rejected() {
        let config = TextConfig::default();
        let t = naive_tokenize("a b", &config);
        assert!(matches!(
            slice_phase(&t, None, 60.0, 30.0, 180.0, &config),
            Err(ExperimentError::InvalidPhaseRange { .. })
        ));
    }

    #[test]
    fn excluding_all_groups_errors() {
        let (corpus, config) = prepared_synthetic();
        let provider = TestEmbedder::new(42, 8);
        let prepared = PreparedCorpus::build(&corpus, &config, &provider).unwrap();
        let all: BTreeSet<FeatureGroup> = FeatureGroup::ALL.into_iter().collect();
        let err =
            compute_cell(&prepared, &[0, 1, 2], LabelAxis::SpqTotal, &all, 42, 0.05).unwrap_err();
        assert_eq!(err, ExperimentError::ExcludedAllGroups);
    }

    #[test]
    fn filters_commute_with_extraction() {
        // Extract-then-filter equals filter-then-extract for the negative
        // task slice.
        let (corpus, config) = prepared_synthetic();
        let provider = TestEmbedder::new(42, 8);
        let prepared = PreparedCorpus::build(&corpus, &config, &provider).unwrap();
        let negative_rows: Vec<usize> = corpus
            .sessions()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.task == Task::Negative)
            .map(|(i, _)| i)
            .collect();
        for &i in &negative_rows {
            let direct = prepare_session(&corpus.sessions()[i], &config, &provider).unwrap();
            assert_eq!(direct, prepared.features[i]);
        }
    }

    #[test]
    fn label_table_shape() {
        let mut labels = BTreeMap::new();
        for (i, (spq, odd, srs)) in [(10u32, 2u32, 40u32), (30, 5, 90), (50, 7, 120), (20, 3, 60)]
            .iter()
            .enumerate()
        {
            labels.insert(
                format!("p{i}"),
                LabelSet::new(
                    *spq,
                    *odd,
                    *srs,
                    Some(10),
                    Some(20),
                    Some(30),
                    Some(30),
                    Gender::Male,
                )
                .unwrap(),
            );
        }
        let sessions: Vec<_> = (0..4)
            .map(|i| crate::session::SessionRecord {
                participant_id: format!("p{i}"),
                session_id: format!("s{i}"),
                task: Task::Negative,
                duration_limit_s: 60,
                measured_duration_s: None,
                transcript: String::from("話した。"),
                tokens: None,
                token_timestamps: None,
                retake: false,
            })
            .collect();
        let corpus = Corpus::new(sessions, labels).unwrap();
        let table = run_label_correlations(&corpus, 0.05);
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0].1.len(), 6);
        // Self correlation cell.
        assert_eq!(table.rows[0].1[0].report.as_ref().unwrap().rho, 1.0);
    }
}
