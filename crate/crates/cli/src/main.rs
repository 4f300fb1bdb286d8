use clap::{Parser, Subcommand};
use oddspeech_cli::config::{GlobalOpts, RunConfig};
use oddspeech_cli::runner::{self, Command as RunnerCommand};

/// Transcript-to-correlation pipeline: extracts linguistic features from
/// labeled speech transcripts and evaluates schizotypal/autistic score
/// prediction under nested leave-one-participant-out cross-validation.
#[derive(Parser)]
#[command(name = "oddspeech", version, about, max_term_width = 100)]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,

    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Load and validate the corpus, reporting rejected rows with line numbers.
    Validate,
    /// Per-label mean/SD/range, gender counts, and screening-cutoff counts.
    Summarize {
        /// Inclusive SRS screening cutoff.
        #[arg(long, default_value_t = 81)]
        srs_cutoff: u32,
        /// Inclusive SPQ screening cutoff.
        #[arg(long, default_value_t = 41)]
        spq_cutoff: u32,
    },
    /// Extract the 22-feature matrix for every session to features.csv.
    Features {
        /// Also export every embeddable text's vector from the active
        /// provider into a precomputed embedding file at this path.
        #[arg(long)]
        export_embeddings: Option<std::path::PathBuf>,
    },
    /// Spearman correlations between the questionnaire scales (label-only).
    CorrelateLabels,
    /// One prediction cell: nested-CV predictions and their correlation.
    Predict {
        /// Target score: spq_total, odd_speech, or srs_total.
        #[arg(long)]
        target: String,
        /// Restrict to one task (dream, favorite, negative, mistake).
        #[arg(long)]
        task: Option<String>,
        /// Restrict to one duration limit in seconds.
        #[arg(long)]
        duration: Option<u32>,
    },
    /// Task comparison table: one row per task.
    Tasks,
    /// Duration-effect table over one task's duration buckets.
    Durations {
        /// Task to analyze (default: negative).
        #[arg(long, default_value = "negative")]
        task: String,
    },
    /// Phase-effect table: the longest-duration bucket sliced into thirds.
    Phases {
        /// Task to analyze (default: negative).
        #[arg(long, default_value = "negative")]
        task: String,
    },
    /// Ablation table: all features, then each feature group removed.
    Ablate {
        /// Task to analyze (default: negative).
        #[arg(long, default_value = "negative")]
        task: String,
        /// Restrict to one duration limit in seconds (default: pool all).
        #[arg(long)]
        duration: Option<u32>,
    },
    /// Run the full report suite: label correlations plus every table.
    All,
}

fn to_runner_command(command: CliCommand) -> anyhow::Result<RunnerCommand> {
    Ok(match command {
        CliCommand::Validate => RunnerCommand::Validate,
        CliCommand::Summarize {
            srs_cutoff,
            spq_cutoff,
        } => RunnerCommand::Summarize {
            srs_cutoff,
            spq_cutoff,
        },
        CliCommand::Features { export_embeddings } => RunnerCommand::Features { export_embeddings },
        CliCommand::CorrelateLabels => RunnerCommand::CorrelateLabels,
        CliCommand::Predict {
            target,
            task,
            duration,
        } => RunnerCommand::Predict {
            target: runner::parse_target(&target)?,
            task: task.as_deref().map(runner::parse_task).transpose()?,
            duration,
        },
        CliCommand::Tasks => RunnerCommand::Tasks,
        CliCommand::Durations { task } => RunnerCommand::Durations {
            task: runner::parse_task(&task)?,
        },
        CliCommand::Phases { task } => RunnerCommand::Phases {
            task: runner::parse_task(&task)?,
        },
        CliCommand::Ablate { task, duration } => RunnerCommand::Ablate {
            task: runner::parse_task(&task)?,
            duration,
        },
        CliCommand::All => RunnerCommand::All,
    })
}

fn main() {
    let cli = Cli::parse();
    let result = to_runner_command(cli.command)
        .and_then(|command| RunConfig::resolve(cli.opts).map(|config| (config, command)))
        .and_then(|(config, command)| runner::run(&config, command));
    if let Err(error) = result {
        eprintln!("error: {error:#}");
        std::process::exit(1);
    }
}
