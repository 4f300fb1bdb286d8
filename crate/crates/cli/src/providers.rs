//! Embedding backends with IO: precomputed-vector files, a newline-delimited
//! JSON service (TCP socket or subprocess pipe), and a per-run cache.

use anyhow::{bail, Context, Result};
use oddspeech_core::embed::{validate_vectors, EmbedError, EmbeddingProvider};
use oddspeech_core::hashing::text_key;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::sync::Mutex;
use std::time::Duration;

/// Precomputed embedding file: a `{"dim": d}` header line, then one
/// `{"hash", "text_preview", "vector"}` object per line, keyed by the
/// SHA-256 of the text.
pub struct FileProvider {
    path: String,
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

#[derive(Deserialize, Serialize)]
struct FileHeader {
    dim: usize,
}

#[derive(Deserialize, Serialize)]
struct FileEntry {
    hash: String,
    text_preview: String,
    vector: Vec<f64>,
}

impl FileProvider {
    pub fn load(path: &Path) -> Result<FileProvider> {
        let raw = std::fs::read_to_string(path)
            .with_context(|| format!("reading embedding file {}", path.display()))?;
        let text = raw.strip_prefix('\u{feff}').unwrap_or(&raw);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header_line = match lines.next() {
            Some(l) => l,
            None => bail!("embedding file {} is empty", path.display()),
        };
        let header: FileHeader = serde_json::from_str(header_line)
            .with_context(|| "embedding file header must be {\"dim\": d}")?;
        let mut vectors = HashMap::new();
        for (idx, line) in lines.enumerate() {
            let entry: FileEntry = serde_json::from_str(line)
                .with_context(|| format!("embedding file line {}", idx + 2))?;
            if entry.vector.len() != header.dim {
                bail!(
                    "embedding file line {}: vector has {} components, header says {}",
                    idx + 2,
                    entry.vector.len(),
                    header.dim
                );
            }
            vectors.insert(entry.hash, entry.vector);
        }
        Ok(FileProvider {
            path: path.display().to_string(),
            dim: header.dim,
            vectors,
        })
    }
}

impl EmbeddingProvider for FileProvider {
    fn dim(&self) -> usize {
        self.dim
    }

    fn identity(&self) -> String {
        format!(
            "file(path={},dim={},entries={})",
            self.path,
            self.dim,
            self.vectors.len()
        )
    }

    fn embed_texts(&self, texts: &[&str]) -> std::result::Result<Vec<Vec<f64>>, EmbedError> {
        if texts.is_empty() {
            return Err(EmbedError::EmptyInput);
        }
        let mut out = Vec::with_capacity(texts.len());
        for text in texts {
            let key = text_key(text);
            match self.vectors.get(&key) {
                Some(v) => out.push(v.clone()),
                None => return Err(EmbedError::MissingKey { text_hash: key }),
            }
        }
        validate_vectors(&out, self.dim)?;
        Ok(out)
    }
}

/// Exports vectors for `texts` (deduplicated, sorted by content hash) from
/// any provider into the precomputed file format.
pub fn write_embedding_file(
    provider: &dyn EmbeddingProvider,
    texts: &[&str],
    path: &Path,
) -> Result<usize> {
    let mut unique: std::collections::BTreeMap<String, &str> = std::collections::BTreeMap::new();
    for &t in texts {
        unique.insert(text_key(t), t);
    }
    let mut out = String::new();
    out.push_str(&serde_json::to_string(&FileHeader {
        dim: provider.dim(),
    })?);
    out.push('\n');
    for (hash, text) in &unique {
        let vector = provider
            .embed_texts(&[text])
            .map_err(|e| anyhow::anyhow!("{e}"))?
            .remove(0);
        let preview: String = text.chars().take(40).collect();
        out.push_str(&serde_json::to_string(&FileEntry {
            hash: hash.clone(),
            text_preview: preview,
            vector,
        })?);
        out.push('\n');
    }
    std::fs::write(path, out)
        .with_context(|| format!("writing embedding file {}", path.display()))?;
    Ok(unique.len())
}

#[derive(Serialize)]
struct ServiceRequest<'a> {
    texts: &'a [&'a str],
}

#[derive(Deserialize)]
struct ServiceResponse {
    vectors: Vec<Vec<f64>>,
}

enum ServiceTransport {
    Tcp { address: String },
    Subprocess { child: Mutex<Child> },
}

/// Newline-delimited JSON embedding service: request `{"texts":[...]}`,
/// response `{"vectors":[[...],...]}`.
///
/// Endpoints: `tcp:HOST:PORT` connects per batch with the configured timeout
/// and retry count; `cmd:PROGRAM [ARGS...]` pipes batches through a child
/// process's stdin/stdout, serialized by a lock.
pub struct ServiceProvider {
    endpoint: String,
    transport: ServiceTransport,
    timeout: Duration,
    retries: u32,
    dim: Mutex<Option<usize>>,
}

impl ServiceProvider {
    pub fn connect(endpoint: &str, timeout_ms: u64, retries: u32) -> Result<ServiceProvider> {
        let transport = if let Some(address) = endpoint.strip_prefix("tcp:") {
            ServiceTransport::Tcp {
                address: address.to_string(),
            }
        } else if let Some(cmdline) = endpoint.strip_prefix("cmd:") {
            let parts: Vec<&str> = cmdline.split_whitespace().collect();
            if parts.is_empty() {
                bail!("empty cmd: endpoint");
            }
            let child = Command::new(parts[0])
                .args(&parts[1..])
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .spawn()
                .with_context(|| format!("spawning embedding service '{}'", parts[0]))?;
            ServiceTransport::Subprocess {
                child: Mutex::new(child),
            }
        } else {
            bail!("service endpoint must start with tcp: or cmd:, got '{endpoint}'");
        };
        Ok(ServiceProvider {
            endpoint: endpoint.to_string(),
            transport,
            timeout: Duration::from_millis(timeout_ms),
            retries,
            dim: Mutex::new(None),
        })
    }

    fn round_trip(&self, request: &str) -> std::result::Result<String, String> {
        match &self.transport {
            ServiceTransport::Tcp { address } => {
                let stream = TcpStream::connect(address).map_err(|e| e.to_string())?;
                stream
                    .set_read_timeout(Some(self.timeout))
                    .map_err(|e| e.to_string())?;
                stream
                    .set_write_timeout(Some(self.timeout))
                    .map_err(|e| e.to_string())?;
                let mut writer = stream.try_clone().map_err(|e| e.to_string())?;
                writer
                    .write_all(request.as_bytes())
                    .and_then(|_| writer.write_all(b"\n"))
                    .and_then(|_| writer.flush())
                    .map_err(|e| e.to_string())?;
                let mut line = String::new();
                BufReader::new(stream)
                    .read_line(&mut line)
                    .map_err(|e| e.to_string())?;
                Ok(line)
            }
            ServiceTransport::Subprocess { child } => {
                let mut guard = child
                    .lock()
                    .map_err(|_| "service lock poisoned".to_string())?;
                let stdin = guard.stdin.as_mut().ok_or("service stdin closed")?;
                stdin
                    .write_all(request.as_bytes())
                    .and_then(|_| stdin.write_all(b"\n"))
                    .and_then(|_| stdin.flush())
                    .map_err(|e| e.to_string())?;
                let stdout = guard.stdout.as_mut().ok_or("service stdout closed")?;
                let mut line = String::new();
                let mut reader = BufReader::new(stdout);
                reader.read_line(&mut line).map_err(|e| e.to_string())?;
                if line.is_empty() {
                    return Err("service closed its output".to_string());
                }
                Ok(line)
            }
        }
    }
}

impl Drop for ServiceProvider {
    fn drop(&mut self) {
        if let ServiceTransport::Subprocess { child } = &self.transport {
            if let Ok(mut guard) = child.lock() {
                // Closing stdin lets a well-behaved service exit on its own.
                guard.stdin.take();
                let _ = guard.kill();
                let _ = guard.wait();
            }
        }
    }
}

impl EmbeddingProvider for ServiceProvider {
    fn dim(&self) -> usize {
        self.dim.lock().ok().and_then(|d| *d).unwrap_or(0)
    }

    fn identity(&self) -> String {
        format!("service(endpoint={})", self.endpoint)
    }

    fn embed_texts(&self, texts: &[&str]) -> std::result::Result<Vec<Vec<f64>>, EmbedError> {
        if texts.is_empty() {
            return Err(EmbedError::EmptyInput);
        }
        let request = serde_json::to_string(&ServiceRequest { texts }).map_err(|e| {
            EmbedError::ProviderUnavailable {
                reason: e.to_string(),
            }
        })?;
        let mut last_error = String::new();
        for _attempt in 0..=self.retries {
            match self.round_trip(&request) {
                Ok(line) => {
                    let response: ServiceResponse =
                        serde_json::from_str(line.trim()).map_err(|e| {
                            EmbedError::ProviderUnavailable {
                                reason: format!("bad service response: {e}"),
                            }
                        })?;
                    if response.vectors.len() != texts.len() {
                        return Err(EmbedError::ProviderUnavailable {
                            reason: format!(
                                "service returned {} vectors for {} texts",
                                response.vectors.len(),
                                texts.len()
                            ),
                        });
                    }
                    let mut dim_guard =
                        self.dim
                            .lock()
                            .map_err(|_| EmbedError::ProviderUnavailable {
                                reason: "dim lock poisoned".to_string(),
                            })?;
                    let dim = match *dim_guard {
                        Some(d) => d,
                        None => {
                            let d = response.vectors.first().map_or(0, |v| v.len());
                            *dim_guard = Some(d);
                            d
                        }
                    };
                    drop(dim_guard);
                    validate_vectors(&response.vectors, dim)?;
                    return Ok(response.vectors);
                }
                Err(e) => last_error = e,
            }
        }
        Err(EmbedError::ProviderUnavailable { reason: last_error })
    }
}

/// In-memory per-run cache keyed by text; word-level features re-embed the
/// same surfaces constantly, so misses are batched through the inner
/// provider once.
pub struct CachingProvider<P> {
    inner: P,
    cache: Mutex<HashMap<String, Vec<f64>>>,
}

impl<P: EmbeddingProvider> CachingProvider<P> {
    pub fn new(inner: P) -> CachingProvider<P> {
        CachingProvider {
            inner,
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl<P: EmbeddingProvider> EmbeddingProvider for CachingProvider<P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn identity(&self) -> String {
        self.inner.identity()
    }

    fn embed_texts(&self, texts: &[&str]) -> std::result::Result<Vec<Vec<f64>>, EmbedError> {
        if texts.is_empty() {
            return Err(EmbedError::EmptyInput);
        }
        let misses: Vec<&str> = {
            let cache = self
                .cache
                .lock()
                .map_err(|_| EmbedError::ProviderUnavailable {
                    reason: "cache lock poisoned".to_string(),
                })?;
            let mut seen = std::collections::BTreeSet::new();
            texts
                .iter()
                .copied()
                .filter(|t| !cache.contains_key(*t) && seen.insert(*t))
                .collect()
        };
        if !misses.is_empty() {
            let fetched = self.inner.embed_texts(&misses)?;
            let mut cache = self
                .cache
                .lock()
                .map_err(|_| EmbedError::ProviderUnavailable {
                    reason: "cache lock poisoned".to_string(),
                })?;
            for (text, vector) in misses.iter().zip(fetched) {
                cache.insert((*text).to_string(), vector);
            }
        }
        let cache = self
            .cache
            .lock()
            .map_err(|_| EmbedError::ProviderUnavailable {
                reason: "cache lock poisoned".to_string(),
            })?;
        Ok(texts
            .iter()
            .map(|t| cache.get(*t).expect("filled above").clone())
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use oddspeech_core::TestEmbedder;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn file_round_trip_reproduces_vectors() {
        let embedder = TestEmbedder::new(42, 8);
        let texts = ["犬が走る。", "猫も走る。", "犬が走る。"];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.jsonl");
        let written = write_embedding_file(&embedder, &texts, &path).unwrap();
        assert_eq!(written, 2);

        let provider = FileProvider::load(&path).unwrap();
        assert_eq!(provider.dim(), 8);
        let direct = embedder.embed_texts(&texts).unwrap();
        let reloaded = provider.embed_texts(&texts).unwrap();
        assert_eq!(direct, reloaded);
    }

    #[test]
    fn file_missing_key_names_hash() {
        let embedder = TestEmbedder::new(42, 8);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vectors.jsonl");
        write_embedding_file(&embedder, &["known"], &path).unwrap();
        let provider = FileProvider::load(&path).unwrap();
        match provider.embed_texts(&["unknown"]).unwrap_err() {
            EmbedError::MissingKey { text_hash } => {
                assert_eq!(text_hash, text_key("unknown"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    struct CountingProvider {
        inner: TestEmbedder,
        calls: AtomicUsize,
    }

    impl EmbeddingProvider for CountingProvider {
        fn dim(&self) -> usize {
            self.inner.dim()
        }
        fn identity(&self) -> String {
            self.inner.identity()
        }
        fn embed_texts(&self, texts: &[&str]) -> std::result::Result<Vec<Vec<f64>>, EmbedError> {
            self.calls.fetch_add(texts.len(), Ordering::SeqCst);
            self.inner.embed_texts(texts)
        }
    }

    #[test]
    fn cache_avoids_re_embedding() {
        let counting = CountingProvider {
            inner: TestEmbedder::new(1, 4),
            calls: AtomicUsize::new(0),
        };
        let cached = CachingProvider::new(counting);
        let a = cached.embed_texts(&["x", "y", "x"]).unwrap();
        let b = cached.embed_texts(&["x", "y"]).unwrap();
        assert_eq!(a[0], b[0]);
        assert_eq!(a[1], b[1]);
        assert_eq!(cached.inner.calls.load(Ordering::SeqCst), 2);
    }

    #[test]
    fn subprocess_service_round_trip() {
        // An inline python echo service implementing the protocol: each text
        // maps to [len, 1.0].
        let script = "import sys, json\nfor line in sys.stdin:\n    req = json.loads(line)\n    vecs = [[float(len(t)), 1.0] for t in req['texts']]\n    print(json.dumps({'vectors': vecs}), flush=True)\n";
        if Command::new("python3").arg("--version").output().is_err() {
            eprintln!("python3 unavailable; skipping service test");
            return;
        }
        let dir = tempfile::tempdir().unwrap();
        let script_path = dir.path().join("echo_embed.py");
        std::fs::write(&script_path, script).unwrap();
        let provider =
            ServiceProvider::connect(&format!("cmd:python3 {}", script_path.display()), 5000, 1)
                .unwrap();
        let vectors = provider.embed_texts(&["ab", "xyz"]).unwrap();
        assert_eq!(vectors, vec![vec![2.0, 1.0], vec![3.0, 1.0]]);
        assert_eq!(provider.dim(), 2);
        // Dimension is pinned after the first response.
        let again = provider.embed_texts(&["q"]).unwrap();
        assert_eq!(again[0].len(), 2);
    }

    #[test]
    fn tcp_endpoint_unavailable_reports() {
        let provider = ServiceProvider::connect("tcp:127.0.0.1:1", 200, 0).unwrap();
        match provider.embed_texts(&["x"]).unwrap_err() {
            EmbedError::ProviderUnavailable { .. } => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_endpoint_scheme_rejected() {
        assert!(ServiceProvider::connect("http://x", 100, 0).is_err());
    }
}
