//! HTTP recognizers: thin clients for the hosted speech-to-text APIs.
//!
//! Each backend posts Linear16 WAV bytes and reads back the top
//! hypothesis. Credentials come from the environment variable named in
//! the config, never from the config file itself. Transient failures
//! (429, 5xx, transport errors) are retried with exponential backoff up
//! to the configured budget; everything else surfaces immediately.

use std::sync::{Condvar, Mutex};
use std::time::Duration;

use base64::Engine;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{AsrBackend, AsrError, AsrId, TranscribeRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vendor {
    Gcp,
    Ibm,
    Azure,
    /// POST raw WAV, expect `{"text": "..."}` back.
    Generic,
}

fn default_language() -> String {
    "en-US".to_string()
}
fn default_concurrency() -> usize {
    2
}
fn default_retry_budget() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    500
}
fn default_timeout_secs() -> u64 {
    60
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HttpBackendConfig {
    pub name: String,
    pub vendor: Vendor,
    pub endpoint: String,
    /// Environment variable holding the credential (API key / token).
    pub credential_env: String,
    #[serde(default)]
    pub model: Option<String>,
    #[serde(default = "default_language")]
    pub language: String,
    #[serde(default = "default_concurrency")]
    pub max_concurrency: usize,
    #[serde(default = "default_retry_budget")]
    pub retry_budget: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

/// A fully planned request, kept vendor-agnostic so it can be inspected
/// in tests without a network.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedRequest {
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: RequestBody,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RequestBody {
    Json(Value),
    Wav(Vec<u8>),
}

pub(crate) fn plan_request(
    cfg: &HttpBackendConfig,
    credential: &str,
    req: &TranscribeRequest<'_>,
) -> PreparedRequest {
    match cfg.vendor {
        Vendor::Gcp => {
            let mut config = json!({
                "encoding": "LINEAR16",
                "sampleRateHertz": req.sample_rate,
                "languageCode": cfg.language,
            });
            if let Some(model) = &cfg.model {
                config["model"] = json!(model);
            }
            let content = base64::engine::general_purpose::STANDARD.encode(req.wav_bytes);
            PreparedRequest {
                url: cfg.endpoint.clone(),
                headers: vec![
                    ("Authorization".into(), format!("Bearer {credential}")),
                    ("Content-Type".into(), "application/json".into()),
                ],
                body: RequestBody::Json(json!({ "config": config, "audio": { "content": content } })),
            }
        }
        Vendor::Ibm => {
            let url = match &cfg.model {
                Some(model) => format!(
                    "{}{}model={}",
                    cfg.endpoint,
                    if cfg.endpoint.contains('?') { "&" } else { "?" },
                    model
                ),
                None => cfg.endpoint.clone(),
            };
            let basic = base64::engine::general_purpose::STANDARD
                .encode(format!("apikey:{credential}"));
            PreparedRequest {
                url,
                headers: vec![
                    ("Authorization".into(), format!("Basic {basic}")),
                    ("Content-Type".into(), "audio/wav".into()),
                ],
                body: RequestBody::Wav(req.wav_bytes.to_vec()),
            }
        }
        Vendor::Azure => {
            let url = format!(
                "{}{}language={}",
                cfg.endpoint,
                if cfg.endpoint.contains('?') { "&" } else { "?" },
                cfg.language
            );
            PreparedRequest {
                url,
                headers: vec![
                    ("Ocp-Apim-Subscription-Key".into(), credential.to_string()),
                    (
                        "Content-Type".into(),
                        "audio/wav; codecs=audio/pcm; samplerate=16000".into(),
                    ),
                ],
                body: RequestBody::Wav(req.wav_bytes.to_vec()),
            }
        }
        Vendor::Generic => PreparedRequest {
            url: cfg.endpoint.clone(),
            headers: vec![
                ("Authorization".into(), format!("Bearer {credential}")),
                ("Content-Type".into(), "audio/wav".into()),
            ],
            body: RequestBody::Wav(req.wav_bytes.to_vec()),
        },
    }
}

fn top_hypotheses(body: &str, asr: &str) -> Result<Value, AsrError> {
    serde_json::from_str(body).map_err(|e| AsrError::BackendRejected {
        asr: asr.to_string(),
        reason: format!("unparseable response: {e}"),
    })
}

/// GCP / IBM share a results[].alternatives[0].transcript shape; segment
/// transcripts are joined with single spaces.
pub(crate) fn parse_results_response(body: &str, asr: &str) -> Result<String, AsrError> {
    let v = top_hypotheses(body, asr)?;
    let results = v
        .get("results")
        .and_then(Value::as_array)
        .cloned()
        .unwrap_or_default();
    let mut parts: Vec<String> = Vec::new();
    for r in results {
        if let Some(t) = r
            .pointer("/alternatives/0/transcript")
            .and_then(Value::as_str)
        {
            let t = t.trim();
            if !t.is_empty() {
                parts.push(t.to_string());
            }
        }
    }
    Ok(parts.join(" "))
}

pub(crate) fn parse_azure_response(body: &str, asr: &str) -> Result<String, AsrError> {
    let v = top_hypotheses(body, asr)?;
    Ok(v.get("DisplayText")
        .and_then(Value::as_str)
        .unwrap_or("")
        .to_string())
}

pub(crate) fn parse_generic_response(body: &str, asr: &str) -> Result<String, AsrError> {
    let v = top_hypotheses(body, asr)?;
    Ok(v.get("text").and_then(Value::as_str).unwrap_or("").to_string())
}

pub(crate) fn parse_response(vendor: Vendor, body: &str, asr: &str) -> Result<String, AsrError> {
    match vendor {
        Vendor::Gcp | Vendor::Ibm => parse_results_response(body, asr),
        Vendor::Azure => parse_azure_response(body, asr),
        Vendor::Generic => parse_generic_response(body, asr),
    }
}

/// Run `attempt` until it succeeds or a non-retryable error appears,
/// sleeping `backoff_ms * 2^n` between retries. At most `1 + budget`
/// attempts ever run.
pub(crate) fn with_retries<T>(
    budget: u32,
    backoff_ms: u64,
    mut attempt: impl FnMut(u32) -> Result<T, AsrError>,
) -> Result<T, AsrError> {
    let mut tries = 0u32;
    loop {
        match attempt(tries) {
            Ok(v) => return Ok(v),
            Err(e) => {
                let retryable = matches!(
                    e,
                    AsrError::RateLimited { .. } | AsrError::Network { .. }
                );
                if !retryable || tries >= budget {
                    return Err(e);
                }
                if backoff_ms > 0 {
                    std::thread::sleep(Duration::from_millis(backoff_ms << tries.min(16)));
                }
                tries += 1;
            }
        }
    }
}

/// Counting semaphore bounding in-flight requests per backend.
struct Gate {
    available: Mutex<usize>,
    cv: Condvar,
}

impl Gate {
    fn new(capacity: usize) -> Self {
        Self { available: Mutex::new(capacity.max(1)), cv: Condvar::new() }
    }

    fn run<T>(&self, f: impl FnOnce() -> T) -> T {
        let mut slots = self.available.lock().unwrap();
        while *slots == 0 {
            slots = self.cv.wait(slots).unwrap();
        }
        *slots -= 1;
        drop(slots);
        let out = f();
        *self.available.lock().unwrap() += 1;
        self.cv.notify_one();
        out
    }
}

pub struct HttpAsr {
    id: AsrId,
    cfg: HttpBackendConfig,
    client: reqwest::blocking::Client,
    gate: Gate,
}

impl HttpAsr {
    pub fn new(cfg: HttpBackendConfig) -> Result<Self, AsrError> {
        let id = AsrId::new(cfg.name.clone())?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| AsrError::Config(format!("http client: {e}")))?;
        let gate = Gate::new(cfg.max_concurrency);
        Ok(Self { id, cfg, client, gate })
    }

    fn credential(&self) -> Result<String, AsrError> {
        std::env::var(&self.cfg.credential_env).map_err(|_| AsrError::Auth {
            asr: self.cfg.name.clone(),
            reason: format!("environment variable {} is not set", self.cfg.credential_env),
        })
    }

    fn send_once(&self, prepared: &PreparedRequest) -> Result<String, AsrError> {
        let asr = self.cfg.name.as_str();
        let mut builder = self.client.post(&prepared.url);
        for (k, v) in &prepared.headers {
            builder = builder.header(k, v);
        }
        builder = match &prepared.body {
            RequestBody::Json(v) => builder.json(v),
            RequestBody::Wav(bytes) => builder.body(bytes.clone()),
        };
        let response = builder.send().map_err(|e| AsrError::Network {
            asr: asr.to_string(),
            reason: e.to_string(),
        })?;
        let status = response.status();
        let body = response.text().map_err(|e| AsrError::Network {
            asr: asr.to_string(),
            reason: e.to_string(),
        })?;
        match status.as_u16() {
            200..=299 => parse_response(self.cfg.vendor, &body, asr),
            401 | 403 => Err(AsrError::Auth { asr: asr.to_string(), reason: status.to_string() }),
            429 => Err(AsrError::RateLimited { asr: asr.to_string(), attempts: 0 }),
            500..=599 => Err(AsrError::Network {
                asr: asr.to_string(),
                reason: format!("server error {status}"),
            }),
            _ => Err(AsrError::BackendRejected {
                asr: asr.to_string(),
                reason: format!("{status}: {body}"),
            }),
        }
    }
}

impl AsrBackend for HttpAsr {
    fn id(&self) -> &AsrId {
        &self.id
    }

    fn transcribe_raw(&self, req: &TranscribeRequest<'_>) -> Result<String, AsrError> {
        let credential = self.credential()?;
        let prepared = plan_request(&self.cfg, &credential, req);
        self.gate.run(|| {
            with_retries(self.cfg.retry_budget, self.cfg.backoff_ms, |attempt| {
                self.send_once(&prepared).map_err(|e| match e {
                    AsrError::RateLimited { asr, .. } => {
                        AsrError::RateLimited { asr, attempts: attempt + 1 }
                    }
                    other => other,
                })
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(vendor: Vendor) -> HttpBackendConfig {
        HttpBackendConfig {
            name: "svc".into(),
            vendor,
            endpoint: "https://asr.example/v1/recognize".into(),
            credential_env: "SVC_KEY".into(),
            model: Some("broadband".into()),
            language: default_language(),
            max_concurrency: 2,
            retry_budget: 3,
            backoff_ms: 0,
            timeout_secs: 5,
        }
    }

    fn req<'a>(bytes: &'a [u8]) -> TranscribeRequest<'a> {
        TranscribeRequest { clip_id: "c", wav_bytes: bytes, sample_rate: 16_000, transform: None }
    }

    #[test]
    fn gcp_request_is_json_with_base64_audio() {
        let p = plan_request(&cfg(Vendor::Gcp), "tok", &req(b"WAVDATA"));
        assert_eq!(p.url, "https://asr.example/v1/recognize");
        assert!(p.headers.iter().any(|(k, v)| k == "Authorization" && v == "Bearer tok"));
        match &p.body {
            RequestBody::Json(v) => {
                assert_eq!(v["config"]["encoding"], "LINEAR16");
                assert_eq!(v["config"]["sampleRateHertz"], 16_000);
                assert_eq!(v["config"]["model"], "broadband");
                let audio = v["audio"]["content"].as_str().unwrap();
                let decoded = base64::engine::general_purpose::STANDARD.decode(audio).unwrap();
                assert_eq!(decoded, b"WAVDATA");
            }
            other => panic!("expected JSON body, got {other:?}"),
        }
    }

    #[test]
    fn ibm_request_uses_basic_auth_and_model_query() {
        let p = plan_request(&cfg(Vendor::Ibm), "k3y", &req(b"WAV"));
        assert_eq!(p.url, "https://asr.example/v1/recognize?model=broadband");
        let auth = &p.headers.iter().find(|(k, _)| k == "Authorization").unwrap().1;
        let decoded = base64::engine::general_purpose::STANDARD
            .decode(auth.strip_prefix("Basic ").unwrap())
            .unwrap();
        assert_eq!(decoded, b"apikey:k3y");
        assert_eq!(p.body, RequestBody::Wav(b"WAV".to_vec()));
    }

    #[test]
    fn azure_request_carries_subscription_key() {
        let p = plan_request(&cfg(Vendor::Azure), "sub", &req(b"WAV"));
        assert!(p.url.ends_with("language=en-US"));
        assert!(p
            .headers
            .iter()
            .any(|(k, v)| k == "Ocp-Apim-Subscription-Key" && v == "sub"));
    }

    #[test]
    fn parses_vendor_responses() {
        let gcp = r#"{"results":[{"alternatives":[{"transcript":"hello world","confidence":0.9}]},{"alternatives":[{"transcript":"again"}]}]}"#;
        assert_eq!(parse_response(Vendor::Gcp, gcp, "g").unwrap(), "hello world again");

        let ibm = r#"{"results":[{"alternatives":[{"transcript":"the quick fox "}],"final":true}],"result_index":0}"#;
        assert_eq!(parse_response(Vendor::Ibm, ibm, "i").unwrap(), "the quick fox");

        let azure = r#"{"RecognitionStatus":"Success","DisplayText":"Nice try.","Offset":0,"Duration":100}"#;
        assert_eq!(parse_response(Vendor::Azure, azure, "a").unwrap(), "Nice try.");

        let generic = r#"{"text":"plain answer"}"#;
        assert_eq!(parse_response(Vendor::Generic, generic, "x").unwrap(), "plain answer");

        // empty result set is a legal empty transcript
        assert_eq!(parse_response(Vendor::Gcp, r#"{"results":[]}"#, "g").unwrap(), "");
        assert!(parse_response(Vendor::Gcp, "not json", "g").is_err());
    }

    #[test]
    fn retries_stop_at_the_budget() {
        let mut calls = 0u32;
        let out: Result<(), AsrError> = with_retries(3, 0, |_| {
            calls += 1;
            Err(AsrError::Network { asr: "x".into(), reason: "down".into() })
        });
        assert!(out.is_err());
        assert_eq!(calls, 4); // initial + 3 retries

        let mut calls = 0u32;
        let out = with_retries(3, 0, |attempt| {
            calls += 1;
            if attempt < 2 {
                Err(AsrError::RateLimited { asr: "x".into(), attempts: attempt })
            } else {
                Ok(attempt)
            }
        });
        assert_eq!(out.unwrap(), 2);
        assert_eq!(calls, 3);
    }

    #[test]
    fn auth_errors_do_not_retry() {
        let mut calls = 0u32;
        let out: Result<(), AsrError> = with_retries(5, 0, |_| {
            calls += 1;
            Err(AsrError::Auth { asr: "x".into(), reason: "bad key".into() })
        });
        assert!(matches!(out, Err(AsrError::Auth { .. })));
        assert_eq!(calls, 1);
    }

    #[test]
    fn missing_credential_is_an_auth_error() {
        let mut c = cfg(Vendor::Generic);
        c.credential_env = "FAIRSPEECH_TEST_UNSET_VAR".into();
        let asr = HttpAsr::new(c).unwrap();
        assert!(matches!(
            asr.transcribe_raw(&req(b"WAV")),
            Err(AsrError::Auth { .. })
        ));
    }

    #[test]
    fn gate_bounds_concurrency() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        use std::sync::Arc;
        let gate = Arc::new(Gate::new(2));
        let live = Arc::new(AtomicUsize::new(0));
        let peak = Arc::new(AtomicUsize::new(0));
        let mut handles = Vec::new();
        for _ in 0..8 {
            let (gate, live, peak) = (gate.clone(), live.clone(), peak.clone());
            handles.push(std::thread::spawn(move || {
                gate.run(|| {
                    let now = live.fetch_add(1, Ordering::SeqCst) + 1;
                    peak.fetch_max(now, Ordering::SeqCst);
                    std::thread::sleep(Duration::from_millis(5));
                    live.fetch_sub(1, Ordering::SeqCst);
                });
            }));
        }
        for h in handles {
            h.join().unwrap();
        }
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }
}
