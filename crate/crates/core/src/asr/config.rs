//! Backend configuration files.
//!
//! A JSON document listing the recognizers a run may use:
//!
//! ```json
//! {
//!   "backends": [
//!     { "name": "mock-a", "kind": "mock", "spec": { "seed": 1 } },
//!     { "name": "gcp", "kind": "http", "vendor": "gcp",
//!       "endpoint": "https://speech.googleapis.com/v1/speech:recognize",
//!       "credential_env": "GCP_TOKEN", "model": "latest_long", "omega": 3 }
//!   ]
//! }
//! ```
//!
//! Credentials are only ever named, never stored: the `credential_env`
//! field points at an environment variable.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;

use super::{AsrError, BackendSet, HttpAsr, HttpBackendConfig, MockAsr, MockAsrSpec};

#[derive(Debug, Deserialize)]
struct BackendsFile {
    backends: Vec<BackendEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum BackendEntry {
    Mock {
        name: String,
        #[serde(default)]
        omega: Option<u64>,
        spec: MockAsrSpec,
    },
    Http {
        #[serde(default)]
        omega: Option<u64>,
        #[serde(flatten)]
        cfg: HttpBackendConfig,
    },
}

/// A parsed backend registry plus per-backend localizer thresholds.
pub struct LoadedBackends {
    pub set: BackendSet,
    /// Per-backend fault-localizer threshold overrides from the config.
    pub omegas: BTreeMap<String, u64>,
}

/// Parse a backend config document. With `mock_only`, HTTP entries are
/// skipped so a run can be forced fully offline.
pub fn parse_backends(text: &str, mock_only: bool) -> Result<LoadedBackends, AsrError> {
    let file: BackendsFile = serde_json::from_str(text)
        .map_err(|e| AsrError::Config(format!("backend config: {e}")))?;
    let mut set = BackendSet::new();
    let mut omegas = BTreeMap::new();
    for entry in file.backends {
        match entry {
            BackendEntry::Mock { name, omega, spec } => {
                if let Some(w) = omega {
                    omegas.insert(name.clone(), w);
                }
                set.register(Arc::new(MockAsr::new(name, spec)?))?;
            }
            BackendEntry::Http { omega, cfg } => {
                if mock_only {
                    continue;
                }
                if let Some(w) = omega {
                    omegas.insert(cfg.name.clone(), w);
                }
                set.register(Arc::new(HttpAsr::new(cfg)?))?;
            }
        }
    }
    if set.is_empty() {
        return Err(AsrError::Config(if mock_only {
            "no mock backends in config (required with --mock)".into()
        } else {
            "config defines no backends".into()
        }));
    }
    Ok(LoadedBackends { set, omegas })
}

pub fn load_backends(path: impl AsRef<Path>, mock_only: bool) -> Result<LoadedBackends, AsrError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| AsrError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_backends(&text, mock_only)
}
