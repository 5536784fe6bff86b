//! Run metadata shared by every output artifact.

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::Result;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// First 16 hex digits of the SHA-256 of the configuration's JSON form.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let text = serde_json::to_string(config)?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(digest.iter().take(8).map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunHeader {
    pub seed: Option<u64>,
    pub config_hash: String,
}

impl RunHeader {
    pub fn new<T: Serialize>(seed: Option<u64>, config: &T) -> Result<Self> {
        Ok(Self {
            seed,
            config_hash: config_hash(config)?,
        })
    }

    /// `#`-prefixed lines for the top of a CSV file.
    pub fn comment_lines(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# symgp {TOOL_VERSION}\n# seed: {seed}\n# config: {}\n",
            self.config_hash
        )
    }

    /// Wraps a JSON object with the schema version and run metadata.
    pub fn envelope(&self, body: Value) -> Value {
        let mut out = Map::new();
        out.insert("schema".into(), SCHEMA_VERSION.into());
        out.insert("tool_version".into(), TOOL_VERSION.into());
        out.insert("seed".into(), self.seed.map_or(Value::Null, Value::from));
        out.insert("config_hash".into(), self.config_hash.clone().into());
        match body {
            Value::Object(m) => out.extend(m),
            other => {
                out.insert("result".into(), other);
            }
        }
        Value::Object(out)
    }
}
