//! Run configuration. Precedence per knob: CLI flag > environment variable >
//! config file > built-in default.

use crate::load::FileFormat;
use anyhow::{bail, Context, Result};
use clap::Args;
use oddspeech_core::text::{TagsetMapping, TextConfig};
use serde::Deserialize;
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_EMBED_DIM: usize = 16;
pub const DEFAULT_OUT_DIR: &str = "reports";
pub const DEFAULT_SERVICE_TIMEOUT_MS: u64 = 10_000;
pub const DEFAULT_SERVICE_RETRIES: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderKind {
    Test,
    File,
    Service,
}

impl ProviderKind {
    pub fn parse(s: &str) -> Option<ProviderKind> {
        match s {
            "test" => Some(ProviderKind::Test),
            "file" => Some(ProviderKind::File),
            "service" => Some(ProviderKind::Service),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Md,
    Both,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Option<ReportFormat> {
        match s {
            "csv" => Some(ReportFormat::Csv),
            "md" => Some(ReportFormat::Md),
            "both" => Some(ReportFormat::Both),
            _ => None,
        }
    }

    pub fn wants_csv(&self) -> bool {
        matches!(self, ReportFormat::Csv | ReportFormat::Both)
    }

    pub fn wants_md(&self) -> bool {
        matches!(self, ReportFormat::Md | ReportFormat::Both)
    }
}

/// Command-line knobs shared by every subcommand.
#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Sessions file (JSONL canonical; CSV accepted).
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,

    /// Labels file, one object/row per participant.
    #[arg(long, global = true)]
    pub labels: Option<PathBuf>,

    /// Input format override: jsonl or csv (default: by file extension).
    #[arg(long, global = true, value_parser = ["jsonl", "csv"])]
    pub corpus_format: Option<String>,

    /// Embedding backend: test, file, or service.
    #[arg(long, global = true, value_parser = ["test", "file", "service"])]
    pub provider: Option<String>,

    /// Dimension of the deterministic test embedder.
    #[arg(long, global = true)]
    pub embed_dim: Option<usize>,

    /// Precomputed embedding file (file provider).
    #[arg(long, global = true)]
    pub embedding_file: Option<PathBuf>,

    /// Embedding service endpoint: tcp:HOST:PORT or cmd:PROGRAM [ARGS].
    #[arg(long, global = true, env = "ODDSPEECH_SERVICE_ENDPOINT")]
    pub service_endpoint: Option<String>,

    /// Per-request timeout for the tcp service transport, milliseconds.
    #[arg(long, global = true)]
    pub service_timeout_ms: Option<u64>,

    /// Retry count for failed service requests.
    #[arg(long, global = true)]
    pub service_retries: Option<u32>,

    /// Seed for every randomized step (fold shuffles, test embedder).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Significance level for the no-correlation test.
    #[arg(long, global = true)]
    pub alpha: Option<f64>,

    /// Worker threads for cell-level parallelism (0 = all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Report format: csv, md, or both.
    #[arg(long, global = true, value_parser = ["csv", "md", "both"])]
    pub format: Option<String>,

    /// Output directory for reports and exports.
    #[arg(long, global = true, env = "ODDSPEECH_OUT_DIR")]
    pub out: Option<PathBuf>,

    /// Tagset mapping file (external_tag_prefix -> canonical tag).
    #[arg(long, global = true)]
    pub tagset: Option<PathBuf>,

    /// Negation surface-form lexicon, one form per line.
    #[arg(long, global = true)]
    pub negation_lexicon: Option<PathBuf>,

    /// Fail on external POS tags missing from the mapping instead of
    /// assigning `other`.
    #[arg(long, global = true)]
    pub strict_tags: bool,

    /// TOML config file supplying any of the above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

/// Keys accepted in the TOML config file; names match the long flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    corpus: Option<PathBuf>,
    labels: Option<PathBuf>,
    corpus_format: Option<String>,
    provider: Option<String>,
    embed_dim: Option<usize>,
    embedding_file: Option<PathBuf>,
    service_endpoint: Option<String>,
    service_timeout_ms: Option<u64>,
    service_retries: Option<u32>,
    seed: Option<u64>,
    alpha: Option<f64>,
    jobs: Option<usize>,
    format: Option<String>,
    out: Option<PathBuf>,
    tagset: Option<PathBuf>,
    negation_lexicon: Option<PathBuf>,
    strict_tags: Option<bool>,
}

#[derive(Debug)]
pub struct RunConfig {
    pub corpus: PathBuf,
    pub labels: PathBuf,
    pub corpus_format: Option<FileFormat>,
    pub provider: ProviderKind,
    pub embed_dim: usize,
    pub embedding_file: Option<PathBuf>,
    pub service_endpoint: Option<String>,
    pub service_timeout_ms: u64,
    pub service_retries: u32,
    pub seed: u64,
    pub alpha: f64,
    pub jobs: usize,
    pub format: ReportFormat,
    pub out_dir: PathBuf,
    pub tagset: Option<PathBuf>,
    pub negation_lexicon: Option<PathBuf>,
    pub strict_tags: bool,
}

impl RunConfig {
    /// Merges flags (env already folded in by clap) over the config file
    /// over defaults, then validates.
    pub fn resolve(opts: GlobalOpts) -> Result<RunConfig> {
        let file: FileConfig = match &opts.config {
            Some(path) => {
                let raw = std::fs::read_to_string(path)
                    .with_context(|| format!("reading config file {}", path.display()))?;
                toml::from_str(&raw)
                    .with_context(|| format!("parsing config file {}", path.display()))?
            }
            None => FileConfig::default(),
        };

        let corpus = opts
            .corpus
            .or(file.corpus)
            .context("no corpus file: pass --corpus or set `corpus` in the config file")?;
        let labels = opts
            .labels
            .or(file.labels)
            .context("no labels file: pass --labels or set `labels` in the config file")?;
        let corpus_format = match opts.corpus_format.or(file.corpus_format) {
            Some(s) => Some(
                FileFormat::parse(&s).with_context(|| format!("unknown corpus format '{s}'"))?,
            ),
            None => None,
        };
        let provider_name = opts
            .provider
            .or(file.provider)
            .unwrap_or_else(|| "test".to_string());
        let provider = ProviderKind::parse(&provider_name)
            .with_context(|| format!("unknown provider '{provider_name}'"))?;
        let format_name = opts
            .format
            .or(file.format)
            .unwrap_or_else(|| "both".to_string());
        let format = ReportFormat::parse(&format_name)
            .with_context(|| format!("unknown report format '{format_name}'"))?;
        let alpha = opts.alpha.or(file.alpha).unwrap_or(DEFAULT_ALPHA);
        if !(0.0 < alpha && alpha < 1.0) {
            bail!("alpha must be in (0, 1), got {alpha}");
        }
        let jobs = match opts.jobs.or(file.jobs) {
            Some(0) | None => std::thread::available_parallelism().map_or(1, |n| n.get()),
            Some(n) => n,
        };
        let config = RunConfig {
            corpus,
            labels,
            corpus_format,
            provider,
            embed_dim: opts
                .embed_dim
                .or(file.embed_dim)
                .unwrap_or(DEFAULT_EMBED_DIM),
            embedding_file: opts.embedding_file.or(file.embedding_file),
            service_endpoint: opts.service_endpoint.or(file.service_endpoint),
            service_timeout_ms: opts
                .service_timeout_ms
                .or(file.service_timeout_ms)
                .unwrap_or(DEFAULT_SERVICE_TIMEOUT_MS),
            service_retries: opts
                .service_retries
                .or(file.service_retries)
                .unwrap_or(DEFAULT_SERVICE_RETRIES),
            seed: opts
                .seed
                .or(file.seed)
                .unwrap_or(oddspeech_core::DEFAULT_SEED),
            alpha,
            jobs,
            format,
            out_dir: opts
                .out
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
            tagset: opts.tagset.or(file.tagset),
            negation_lexicon: opts.negation_lexicon.or(file.negation_lexicon),
            strict_tags: opts.strict_tags || file.strict_tags.unwrap_or(false),
        };
        config.validate_paths()?;
        Ok(config)
    }

    fn validate_paths(&self) -> Result<()> {
        for (name, path) in [
            ("corpus", Some(&self.corpus)),
            ("labels", Some(&self.labels)),
            ("tagset", self.tagset.as_ref()),
            ("negation lexicon", self.negation_lexicon.as_ref()),
        ] {
            if let Some(p) = path {
                if !p.exists() {
                    bail!("{name} file does not exist: {}", p.display());
                }
            }
        }
        if self.provider == ProviderKind::File {
            match &self.embedding_file {
                Some(p) if p.exists() => {}
                Some(p) => bail!("embedding file does not exist: {}", p.display()),
                None => bail!("--provider file requires --embedding-file"),
            }
        }
        if self.provider == ProviderKind::Service && self.service_endpoint.is_none() {
            bail!("--provider service requires --service-endpoint or ODDSPEECH_SERVICE_ENDPOINT");
        }
        Ok(())
    }

    /// Builds the tokenization config from the tagset / lexicon paths.
    pub fn text_config(&self) -> Result<TextConfig> {
        let mut config = TextConfig::default();
        if let Some(path) = &self.tagset {
            let raw = std::fs::read_to_string(path)
                .with_context(|| format!("reading tagset mapping {}", path.display()))?;
            config.mapping = TagsetMapping::parse(&raw).map_err(|e| anyhow::anyhow!("{e}"))?;
        }
        if let Some(path) = &self.negation_lexicon {
            config.negation_lexicon = read_lexicon(path)?;
        }
        config.strict = self.strict_tags;
        Ok(config)
    }
}

/// One surface form per line; `#` comments and blank lines ignored.
pub fn read_lexicon(path: &Path) -> Result<BTreeSet<String>> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("reading negation lexicon {}", path.display()))?;
    Ok(raw
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_string())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn base_opts() -> GlobalOpts {
        GlobalOpts {
            corpus: None,
            labels: None,
            corpus_format: None,
            provider: None,
            embed_dim: None,
            embedding_file: None,
            service_endpoint: None,
            service_timeout_ms: None,
            service_retries: None,
            seed: None,
            alpha: None,
            jobs: None,
            format: None,
            out: None,
            tagset: None,
            negation_lexicon: None,
            strict_tags: false,
            config: None,
        }
    }

    #[test]
    fn flag_beats_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("sessions.jsonl");
        let labels = dir.path().join("labels.jsonl");
        std::fs::write(&corpus, "").unwrap();
        std::fs::write(&labels, "").unwrap();
        let mut cfg_file = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            cfg_file,
            "corpus = {:?}\nlabels = {:?}\nseed = 7\nalpha = 0.01\n",
            corpus, labels
        )
        .unwrap();

        let mut opts = base_opts();
        opts.config = Some(cfg_file.path().to_path_buf());
        opts.seed = Some(99);
        let config = RunConfig::resolve(opts).unwrap();
        assert_eq!(config.seed, 99); // flag wins
        assert_eq!(config.alpha, 0.01); // file wins over default
        assert_eq!(config.embed_dim, DEFAULT_EMBED_DIM); // default
    }

    #[test]
    fn missing_corpus_is_an_error() {
        let err = RunConfig::resolve(base_opts()).unwrap_err();
        assert!(err.to_string().contains("corpus"));
    }

    #[test]
    fn nonexistent_path_rejected() {
        let mut opts = base_opts();
        opts.corpus = Some(PathBuf::from("/nonexistent/sessions.jsonl"));
        opts.labels = Some(PathBuf::from("/nonexistent/labels.jsonl"));
        assert!(RunConfig::resolve(opts).is_err());
    }

    #[test]
    fn file_provider_requires_embedding_file() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("s.jsonl");
        let labels = dir.path().join("l.jsonl");
        std::fs::write(&corpus, "").unwrap();
        std::fs::write(&labels, "").unwrap();
        let mut opts = base_opts();
        opts.corpus = Some(corpus);
        opts.labels = Some(labels);
        opts.provider = Some("file".to_string());
        let err = RunConfig::resolve(opts).unwrap_err();
        assert!(err.to_string().contains("embedding-file"));
    }

    #[test]
    fn bad_alpha_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("s.jsonl");
        let labels = dir.path().join("l.jsonl");
        std::fs::write(&corpus, "").unwrap();
        std::fs::write(&labels, "").unwrap();
        let mut opts = base_opts();
        opts.corpus = Some(corpus);
        opts.labels = Some(labels);
        opts.alpha = Some(1.5);
        assert!(RunConfig::resolve(opts).is_err());
    }

    #[test]
    fn unknown_config_key_rejected() {
        let mut cfg_file = tempfile::NamedTempFile::new().unwrap();
        writeln!(cfg_file, "corups = \"typo.jsonl\"").unwrap();
        let mut opts = base_opts();
        opts.config = Some(cfg_file.path().to_path_buf());
        let err = RunConfig::resolve(opts).unwrap_err();
        assert!(format!("{err:#}").contains("corups"));
    }
}
