//! Optional key=value configuration files; command-line flags override
//! file entries, which override built-in defaults.

use std::collections::HashMap;
use std::path::Path;

/// A parsed key=value file. Keys use the flag names with underscores
/// (e.g. `theta_oa`, `theta_b`, `alpha`, `step`, `correction`, `counts`,
/// `seed`, `out`, `format`, `degrees`).
#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    entries: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut entries = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                format!(
                    "{}:{}: expected key=value, got {line:?}",
                    path.display(),
                    lineno + 1
                )
            })?;
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Typed lookup; a malformed value is a usage error.
    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| format!("config key {key}={v}: {e}")),
        }
    }
}

/// Resolve an optional flag against the config file and a default.
pub fn resolve<T: std::str::FromStr + Clone>(
    flag: &Option<T>,
    cfg: &FileConfig,
    key: &str,
    default: T,
) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v.clone());
    }
    Ok(cfg.parse::<T>(key)?.unwrap_or(default))
}
