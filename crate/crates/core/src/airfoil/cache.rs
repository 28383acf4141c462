use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::EvalFailure;

use super::aero::{AeroCoefficients, AeroModel};
use super::geometry::KtParams;

const HEADER: &str = "# mcmo-aero-cache v1";

/// `[μx, μy, β, α, Re]` rounded to 6 decimals.
pub type CacheKey = [i64; 5];

pub fn cache_key(params: &KtParams, reynolds: f64) -> CacheKey {
    let q = |v: f64| (v * 1e6).round() as i64;
    [
        q(params.mu_x),
        q(params.mu_y),
        q(params.beta),
        q(params.alpha),
        q(reynolds),
    ]
}

type Outcome = std::result::Result<AeroCoefficients, EvalFailure>;

#[derive(Serialize, Deserialize)]
struct Line {
    key: CacheKey,
    outcome: Outcome,
}

/// Outcomes keyed by quantized inputs, optionally backed by an append-only
/// JSON-lines file. Failures are stored too.
#[derive(Debug, Default)]
pub struct AeroCache {
    entries: HashMap<CacheKey, Outcome>,
    file: Option<(PathBuf, File)>,
}

impl AeroCache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Loads `path` if it exists (creating it otherwise) and appends every
    /// new entry to it.
    pub fn open(path: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        if path.exists() {
            let parse = |line: u64, detail: String| Error::Parse {
                path: path.to_path_buf(),
                line,
                detail,
            };
            let reader = BufReader::new(
                File::open(path)
                    .map_err(|e| Error::io(format!("opening {}", path.display()), e))?,
            );
            for (i, line) in reader.lines().enumerate() {
                let n = i as u64 + 1;
                let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
                if i == 0 {
                    if line.trim() != HEADER {
                        return Err(parse(n, format!("expected header {HEADER:?}")));
                    }
                    continue;
                }
                if line.trim().is_empty() {
                    continue;
                }
                let entry: Line =
                    serde_json::from_str(&line).map_err(|e| parse(n, e.to_string()))?;
                entries.insert(entry.key, entry.outcome);
            }
        }
        let fresh = !path.exists();
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        if fresh {
            writeln!(file, "{HEADER}")
                .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        }
        Ok(Self {
            entries,
            file: Some((path.to_path_buf(), file)),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &CacheKey) -> Option<&Outcome> {
        self.entries.get(key)
    }

    pub fn insert(&mut self, key: CacheKey, outcome: Outcome) -> Result<()> {
        if let Some((path, file)) = &mut self.file {
            let line = serde_json::to_string(&Line {
                key,
                outcome: outcome.clone(),
            })
            .map_err(|e| Error::Json {
                context: "cache entry".into(),
                source: e,
            })?;
            writeln!(file, "{line}")
                .and_then(|_| file.flush())
                .map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
        }
        self.entries.insert(key, outcome);
        Ok(())
    }
}

/// Memoizing wrapper; [`CachedAero::invocations`] counts calls that reached
/// the wrapped model.
pub struct CachedAero<M> {
    inner: M,
    cache: Mutex<AeroCache>,
    invocations: AtomicU64,
}

impl<M: AeroModel> CachedAero<M> {
    pub fn new(inner: M, cache: AeroCache) -> Self {
        Self {
            inner,
            cache: Mutex::new(cache),
            invocations: AtomicU64::new(0),
        }
    }

    pub fn invocations(&self) -> u64 {
        self.invocations.load(Ordering::Relaxed)
    }

    pub fn cached_entries(&self) -> usize {
        self.cache.lock().unwrap_or_else(|e| e.into_inner()).len()
    }
}

impl<M: AeroModel> AeroModel for CachedAero<M> {
    fn coefficients(&self, params: &KtParams, reynolds: f64) -> Outcome {
        let key = cache_key(params, reynolds);
        let mut cache = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(hit) = cache.get(&key) {
            return hit.clone();
        }
        self.invocations.fetch_add(1, Ordering::Relaxed);
        let outcome = self.inner.coefficients(params, reynolds);
        cache
            .insert(key, outcome.clone())
            .map_err(|e| EvalFailure::Io(e.to_string()))?;
        outcome
    }

    fn is_reentrant(&self) -> bool {
        self.inner.is_reentrant()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airfoil::MockAero;

    struct Flaky;

    impl AeroModel for Flaky {
        fn coefficients(&self, p: &KtParams, _re: f64) -> Outcome {
            if p.alpha > 20.0 {
                Err(EvalFailure::NonConvergence)
            } else {
                Ok(AeroCoefficients {
                    cl: p.alpha / 10.0,
                    cd: 0.01,
                })
            }
        }
    }

    fn kt(alpha: f64) -> KtParams {
        KtParams {
            mu_x: -0.1,
            mu_y: 0.1,
            beta: 10.0,
            alpha,
        }
    }

    #[test]
    fn hits_skip_the_model() {
        let cached = CachedAero::new(MockAero, AeroCache::in_memory());
        let a = cached.coefficients(&kt(5.0), 1e6).unwrap();
        let b = cached.coefficients(&kt(5.0), 1e6).unwrap();
        assert_eq!(a, b);
        assert_eq!(cached.invocations(), 1);
        cached.coefficients(&kt(5.0 + 4e-7), 1e6).unwrap();
        assert_eq!(cached.invocations(), 1);
        cached.coefficients(&kt(5.000002), 1e6).unwrap();
        assert_eq!(cached.invocations(), 2);
    }

    #[test]
    fn failures_are_cached() {
        let cached = CachedAero::new(Flaky, AeroCache::in_memory());
        assert_eq!(
            cached.coefficients(&kt(25.0), 1e6),
            Err(EvalFailure::NonConvergence)
        );
        assert_eq!(
            cached.coefficients(&kt(25.0), 1e6),
            Err(EvalFailure::NonConvergence)
        );
        assert_eq!(cached.invocations(), 1);
    }

    #[test]
    fn persisted_cache_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("aero.cache");
        {
            let cached = CachedAero::new(Flaky, AeroCache::open(&path).unwrap());
            cached.coefficients(&kt(5.0), 1e6).unwrap();
            cached.coefficients(&kt(25.0), 2e6).unwrap_err();
            assert_eq!(cached.invocations(), 2);
        }
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(HEADER));
        assert_eq!(text.lines().count(), 3);

        let reloaded = CachedAero::new(Flaky, AeroCache::open(&path).unwrap());
        assert_eq!(reloaded.cached_entries(), 2);
        assert_eq!(reloaded.coefficients(&kt(5.0), 1e6).unwrap().cl, 0.5);
        assert_eq!(
            reloaded.coefficients(&kt(25.0), 2e6),
            Err(EvalFailure::NonConvergence)
        );
        assert_eq!(reloaded.invocations(), 0);

        std::fs::write(&path, format!("{HEADER}\nnot json\n")).unwrap();
        match AeroCache::open(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
