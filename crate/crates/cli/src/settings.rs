//! Layering of command-line flags over an optional JSON config file.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::CliError;

/// Values read from `--config`, keyed by long flag name without dashes.
#[derive(Debug, Default)]
pub struct FileLayer {
    values: Map<String, Value>,
}

impl FileLayer {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
        match serde_json::from_str(&text) {
            Ok(Value::Object(values)) => Ok(FileLayer { values }),
            Ok(_) => Err(CliError::Usage(format!("config {} is not a JSON object", path.display()))),
            Err(e) => Err(CliError::Usage(format!("config {}: {e}", path.display()))),
        }
    }

    /// The flag value if given, else the file value, else `None`.
    pub fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.values.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key \"{key}\": {e}"))),
        }
    }

    pub fn pick_or<T: DeserializeOwned>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// Boolean switches: set by the flag, or by `true` in the file.
    pub fn switch(&self, flag: bool, key: &str) -> Result<bool, CliError> {
        Ok(flag || self.pick::<bool>(None, key)?.unwrap_or(false))
    }
}

/// Seed precedence: flag, config file, `CVCLONE_SEED`, then 0.
pub fn resolve_seed(flag: Option<u64>, file: &FileLayer, env: Option<&str>) -> Result<u64, CliError> {
    if let Some(seed) = file.pick(flag, "seed")? {
        return Ok(seed);
    }
    match env {
        Some(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("CVCLONE_SEED={s:?} is not an unsigned integer"))),
        None => Ok(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layer(json: &str) -> FileLayer {
        let Value::Object(values) = serde_json::from_str(json).unwrap() else {
            panic!()
        };
        FileLayer { values }
    }

    #[test]
    fn flags_override_file() {
        let file = layer(r#"{"vmin": 0.5, "steps": 8, "phase-known": true}"#);
        assert_eq!(file.pick(Some(0.25), "vmin").unwrap(), Some(0.25));
        assert_eq!(file.pick::<f64>(None, "vmin").unwrap(), Some(0.5));
        assert_eq!(file.pick_or::<usize>(None, "steps", 2).unwrap(), 8);
        assert_eq!(file.pick_or::<usize>(None, "vmax", 2).unwrap(), 2);
        assert!(file.switch(false, "phase-known").unwrap());
        assert!(file.pick::<usize>(None, "vmin").is_err());
    }

    #[test]
    fn seed_precedence() {
        let empty = FileLayer::default();
        let file = layer(r#"{"seed": 5}"#);
        assert_eq!(resolve_seed(Some(1), &file, Some("9")).unwrap(), 1);
        assert_eq!(resolve_seed(None, &file, Some("9")).unwrap(), 5);
        assert_eq!(resolve_seed(None, &empty, Some("9")).unwrap(), 9);
        assert_eq!(resolve_seed(None, &empty, None).unwrap(), 0);
        assert!(resolve_seed(None, &empty, Some("x")).is_err());
    }
}
