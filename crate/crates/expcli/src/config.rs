//! Flat key=value config files, flag overrides, and the resolved-config
//! copy written next to every run's outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Environment overrides; everything else must be explicit for provenance.
pub const ENV_OUT_DIR: &str = "EXPCLI_OUT_DIR";
pub const ENV_WORKERS: &str = "EXPCLI_WORKERS";

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Key=value settings with layered precedence: defaults, then the config
/// file, then command-line flags, then the two environment overrides.
#[derive(Debug, Default, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    lineno + 1
                )));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }

    pub fn set_if_absent(&mut self, key: &str, value: String) {
        self.values.entry(key.to_string()).or_insert(value);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|s| s.as_str())
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| ConfigError(format!("bad value for {key} ('{raw}'): {e}"))),
        }
    }

    pub fn parse_or<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parse(key)?.unwrap_or(default))
    }

    pub fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?
            .ok_or_else(|| ConfigError(format!("missing required setting '{key}'")))
    }

    /// Comma-separated list of unsigned integers.
    pub fn parse_list(&self, key: &str) -> Result<Option<Vec<usize>>, ConfigError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => {
                let mut out = Vec::new();
                for part in raw.split(',') {
                    let part = part.trim();
                    if part.is_empty() {
                        continue;
                    }
                    out.push(part.parse::<usize>().map_err(|e| {
                        ConfigError(format!("bad list entry '{part}' for {key}: {e}"))
                    })?);
                }
                Ok(Some(out))
            }
        }
    }

    /// Applies the two environment overrides.
    pub fn apply_env(&mut self) {
        if let Ok(dir) = std::env::var(ENV_OUT_DIR) {
            self.values.insert("out_dir".into(), dir);
        }
        if let Ok(w) = std::env::var(ENV_WORKERS) {
            self.values.insert("workers".into(), w);
        }
    }

    /// Writes the fully resolved settings (sorted) for provenance.
    pub fn write_resolved(&self, path: &Path) -> Result<(), ConfigError> {
        let mut text = String::new();
        for (k, v) in &self.values {
            text.push_str(&format!("{k} = {v}\n"));
        }
        std::fs::write(path, text)
            .map_err(|e| ConfigError(format!("cannot write {}: {e}", path.display())))
    }
}

/// Resolves the output directory, creating it if needed.
pub fn ensure_out_dir(settings: &Settings) -> Result<PathBuf, ConfigError> {
    let dir = PathBuf::from(settings.get("out_dir").unwrap_or("expcli-out"));
    std::fs::create_dir_all(&dir)
        .map_err(|e| ConfigError(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

/// Builds a rayon pool with the configured worker count (0 = core count).
pub fn build_pool(workers: usize) -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if workers > 0 {
        b = b.num_threads(workers);
    }
    b.build().expect("thread pool")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_value_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        std::fs::write(&path, "# comment\nfamily = xy\nn=6\nl_grid = 1, 2,4\n").unwrap();
        let s = Settings::from_file(&path).unwrap();
        assert_eq!(s.get("family"), Some("xy"));
        assert_eq!(s.parse::<usize>("n").unwrap(), Some(6));
        assert_eq!(s.parse_list("l_grid").unwrap(), Some(vec![1, 2, 4]));
    }

    #[test]
    fn rejects_malformed_lines_and_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        std::fs::write(&path, "no equals sign here\n").unwrap();
        assert!(Settings::from_file(&path).is_err());

        std::fs::write(&path, "n = banana\n").unwrap();
        let s = Settings::from_file(&path).unwrap();
        assert!(s.parse::<usize>("n").is_err());
    }

    #[test]
    fn resolved_copy_is_sorted_and_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = Settings::default();
        s.set("zeta", "1".into());
        s.set("alpha", "2".into());
        let path = dir.path().join("resolved.txt");
        s.write_resolved(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "alpha = 2\nzeta = 1\n");
        let back = Settings::from_file(&path).unwrap();
        assert_eq!(back.get("zeta"), Some("1"));
    }
}
