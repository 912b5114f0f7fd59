use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::llm::{ChatBackend, ChatRequest, ChatResponse, LlmError};

/// Append-only store of past completions, keyed by a digest of everything
/// that shapes the answer: system text, messages, model, and decoding
/// parameters. Timeouts and retry budgets are deliberately excluded.
///
/// On disk each record is `[u32 little-endian payload length][payload]
/// [32-byte SHA-256 of the payload]`; the payload is the JSON of the key,
/// request, and response. Any mismatch surfaces as a corruption error with
/// the byte offset of the bad record.
pub struct ReplayCache {
    path: PathBuf,
    state: Mutex<CacheState>,
}

struct CacheState {
    map: HashMap<String, ChatResponse>,
    file: File,
}

#[derive(Serialize)]
struct KeyMaterial<'a> {
    system: &'a Option<String>,
    messages: &'a [crate::llm::ChatMessage],
    model: &'a str,
    max_tokens: u32,
    temperature: f64,
}

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    key: String,
    request: StoredRequest,
    response: ChatResponse,
}

#[derive(Serialize, Deserialize)]
struct StoredRequest {
    system: Option<String>,
    messages: Vec<crate::llm::ChatMessage>,
    model: String,
    max_tokens: u32,
    temperature: f64,
}

impl ReplayCache {
    /// Opens (or creates) a cache file and loads every record in it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, LlmError> {
        let path = path.as_ref().to_path_buf();
        let mut map = HashMap::new();
        if path.exists() {
            let mut bytes = Vec::new();
            File::open(&path)?.read_to_end(&mut bytes)?;
            let mut offset = 0usize;
            while offset < bytes.len() {
                let record_start = offset as u64;
                let corrupt = |detail: &str| LlmError::CacheCorrupt {
                    offset: record_start,
                    detail: detail.to_string(),
                };
                if bytes.len() - offset < 4 {
                    return Err(corrupt("truncated length prefix"));
                }
                let len = u32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap()) as usize;
                offset += 4;
                if bytes.len() - offset < len + 32 {
                    return Err(corrupt("record extends past end of file"));
                }
                let payload = &bytes[offset..offset + len];
                let stored_digest = &bytes[offset + len..offset + len + 32];
                if Sha256::digest(payload).as_slice() != stored_digest {
                    return Err(corrupt("payload digest mismatch"));
                }
                let record: CacheRecord = serde_json::from_slice(payload)
                    .map_err(|e| corrupt(&format!("payload is not a record: {e}")))?;
                map.insert(record.key, record.response);
                offset += len + 32;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(ReplayCache { path, state: Mutex::new(CacheState { map, file }) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.state.lock().expect("cache lock").map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The lookup key for a request.
    pub fn request_key(request: &ChatRequest) -> String {
        let material = KeyMaterial {
            system: &request.system,
            messages: &request.messages,
            model: &request.config.model_name,
            max_tokens: request.config.max_tokens,
            temperature: request.config.temperature,
        };
        let json = serde_json::to_vec(&material).expect("key material serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn lookup(&self, key: &str) -> Option<ChatResponse> {
        self.state.lock().expect("cache lock").map.get(key).cloned()
    }

    /// Appends a record unless the key is already present.
    pub fn store(&self, request: &ChatRequest, response: &ChatResponse) -> Result<(), LlmError> {
        let key = Self::request_key(request);
        let mut state = self.state.lock().expect("cache lock");
        if state.map.contains_key(&key) {
            return Ok(());
        }
        let record = CacheRecord {
            key: key.clone(),
            request: StoredRequest {
                system: request.system.clone(),
                messages: request.messages.clone(),
                model: request.config.model_name.clone(),
                max_tokens: request.config.max_tokens,
                temperature: request.config.temperature,
            },
            response: response.clone(),
        };
        let payload = serde_json::to_vec(&record).expect("record serializes");
        let digest = Sha256::digest(&payload);
        state.file.write_all(&(payload.len() as u32).to_le_bytes())?;
        state.file.write_all(&payload)?;
        state.file.write_all(&digest)?;
        state.file.flush()?;
        state.map.insert(key, response.clone());
        Ok(())
    }
}

/// Backend wrapper that serves repeated requests from a [`ReplayCache`].
///
/// In recording mode misses go to the inner backend and the answer is
/// persisted; in replay-only mode there is no inner backend and a miss is an
/// error, which makes "no network was touched" a structural guarantee.
pub struct CachingBackend {
    inner: Option<Arc<dyn ChatBackend>>,
    cache: ReplayCache,
    inner_calls: AtomicU64,
    hits: AtomicU64,
}

impl CachingBackend {
    pub fn recording(inner: Arc<dyn ChatBackend>, cache: ReplayCache) -> Self {
        CachingBackend { inner: Some(inner), cache, inner_calls: AtomicU64::new(0), hits: AtomicU64::new(0) }
    }

    pub fn replay_only(cache: ReplayCache) -> Self {
        CachingBackend { inner: None, cache, inner_calls: AtomicU64::new(0), hits: AtomicU64::new(0) }
    }

    /// Calls that reached the wrapped backend.
    pub fn inner_calls(&self) -> u64 {
        self.inner_calls.load(Ordering::Relaxed)
    }

    pub fn cache_hits(&self) -> u64 {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn cache(&self) -> &ReplayCache {
        &self.cache
    }
}

impl ChatBackend for CachingBackend {
    fn name(&self) -> &str {
        "cache"
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        request.validate()?;
        let key = ReplayCache::request_key(request);
        if let Some(mut response) = self.cache.lookup(&key) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            response.cached = true;
            return Ok(response);
        }
        let Some(inner) = &self.inner else {
            return Err(LlmError::CacheMiss(key));
        };
        self.inner_calls.fetch_add(1, Ordering::Relaxed);
        let response = inner.complete(request)?;
        self.cache.store(request, &response)?;
        Ok(response)
    }
}
