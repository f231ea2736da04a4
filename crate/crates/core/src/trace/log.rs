//! The canonical event log and its digest.
//!
//! Digest layout (SHA-256 input):
//!
//! ```text
//! "XRLOG" 0x01 0x00 0x00          8-byte header
//! u64 little-endian entry count
//! per entry: u32 little-endian byte length, then the canonical JSON of
//!            {"category": ..., "frame": ..., "payload": ...}
//! ```

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::canonical::to_canonical_json;
use super::{syntax_error, FormatError};

pub const LOG_HEADER: &[u8; 8] = b"XRLOG\x01\x00\x00";
pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Explicit,
    Intent,
    Ai,
    Physics,
    Script,
    Ui,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Explicit => "explicit",
            Category::Intent => "intent",
            Category::Ai => "ai",
            Category::Physics => "physics",
            Category::Script => "script",
            Category::Ui => "ui",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogEntry {
    pub frame: u64,
    pub category: Category,
    pub payload: Value,
}

impl LogEntry {
    pub fn new(frame: u64, category: Category, payload: Value) -> Self {
        Self {
            frame,
            category,
            payload,
        }
    }

    pub fn canonical_json(&self) -> String {
        to_canonical_json(&json!({
            "category": self.category.as_str(),
            "frame": self.frame,
            "payload": self.payload,
        }))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("log frame went from {last} to {got}")]
pub struct NonMonotonicLog {
    pub last: u64,
    pub got: u64,
}

/// Ordered output of a run; frame indices never decrease.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventLog {
    entries: Vec<LogEntry>,
}

impl EventLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, entry: LogEntry) -> Result<(), NonMonotonicLog> {
        if let Some(last) = self.entries.last() {
            if entry.frame < last.frame {
                return Err(NonMonotonicLog {
                    last: last.frame,
                    got: entry.frame,
                });
            }
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(LOG_HEADER);
        h.update((self.entries.len() as u64).to_le_bytes());
        for entry in &self.entries {
            let bytes = entry.canonical_json();
            let len = u32::try_from(bytes.len()).expect("log entry under 4 GiB");
            h.update(len.to_le_bytes());
            h.update(bytes.as_bytes());
        }
        h.finalize().into()
    }

    pub fn hash_hex(&self) -> String {
        hex::encode(self.hash())
    }

    /// File form: `{version, hash, entries}` as canonical JSON.
    pub fn to_json(&self) -> String {
        to_canonical_json(&json!({
            "version": LOG_VERSION,
            "hash": self.hash_hex(),
            "entries": self.entries,
        }))
    }

    /// Reads a log file. A stored hash must match the entries.
    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct File {
            version: u32,
            #[serde(default)]
            hash: Option<String>,
            entries: Vec<LogEntry>,
        }
        let value: Value = serde_json::from_str(text).map_err(|e| syntax_error(text, &e))?;
        let found = value.get("version").and_then(Value::as_u64).unwrap_or(0);
        if found != u64::from(LOG_VERSION) {
            return Err(FormatError::UnsupportedVersion {
                what: "event log",
                found,
                supported: LOG_VERSION,
            });
        }
        let file: File = serde_json::from_value(value).map_err(|e| FormatError::Malformed {
            frame: None,
            message: e.to_string(),
        })?;
        debug_assert_eq!(file.version, LOG_VERSION);
        let mut log = EventLog::new();
        for entry in file.entries {
            log.push(entry).map_err(|e| FormatError::Malformed {
                frame: None,
                message: e.to_string(),
            })?;
        }
        if let Some(stored) = file.hash {
            if stored != log.hash_hex() {
                return Err(FormatError::Malformed {
                    frame: None,
                    message: format!("stored hash {stored} does not match entries ({})", log.hash_hex()),
                });
            }
        }
        Ok(log)
    }
}
