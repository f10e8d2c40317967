//! Single-file JSON result cache keyed by canonical parameter strings.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::Result;

#[derive(Debug)]
pub struct ResultCache {
    path: PathBuf,
    entries: BTreeMap<String, Value>,
    warning: Option<String>,
}

impl ResultCache {
    /// Loads the cache; a missing file is empty, an unreadable or corrupt
    /// one is ignored and reported through [`ResultCache::warning`].
    pub fn open(path: impl AsRef<Path>) -> Self {
        let path = path.as_ref().to_path_buf();
        let mut warning = None;
        let entries = match fs::read_to_string(&path) {
            Ok(text) => match serde_json::from_str::<BTreeMap<String, Value>>(&text) {
                Ok(entries) => entries,
                Err(e) => {
                    warning = Some(format!("ignoring corrupt cache {}: {e}", path.display()));
                    BTreeMap::new()
                }
            },
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => {
                warning = Some(format!("ignoring unreadable cache {}: {e}", path.display()));
                BTreeMap::new()
            }
        };
        ResultCache { path, entries, warning }
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Inserts and rewrites the whole file.
    pub fn put(&mut self, key: String, value: Value) -> Result<()> {
        self.entries.insert(key, value);
        let tmp = self.path.with_extension("tmp");
        fs::write(&tmp, serde_json::to_string_pretty(&self.entries)?)?;
        fs::rename(&tmp, &self.path)?;
        Ok(())
    }
}

/// `command:a=1;b=2` with keys sorted.
pub fn cache_key<'a>(command: &str, params: impl IntoIterator<Item = (&'a str, String)>) -> String {
    let sorted: BTreeMap<&str, String> = params.into_iter().collect();
    let body: Vec<String> = sorted.iter().map(|(k, v)| format!("{k}={v}")).collect();
    format!("{command}:{}", body.join(";"))
}
