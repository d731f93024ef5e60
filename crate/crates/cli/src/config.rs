//! Parameter resolution: command-line flag, then `--config` file, then
//! built-in default. Config files are JSON objects keyed by the long flag
//! names.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Default)]
pub struct Config {
    values: Map<String, Value>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        match serde_json::from_str(&text) {
            Ok(Value::Object(values)) => Ok(Self { values }),
            Ok(_) => Err(CliError::Usage(
                "config file must hold a JSON object".into(),
            )),
            Err(e) => Err(CliError::Usage(format!(
                "invalid config {}: {e}",
                path.display()
            ))),
        }
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.values
            .get(key)
            .map(|v| {
                serde_json::from_value(v.clone())
                    .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))
            })
            .transpose()
    }

    /// Flag if given, else config value, else nothing.
    pub fn pick<T: DeserializeOwned>(
        &self,
        flag: Option<T>,
        key: &str,
    ) -> Result<Option<T>, CliError> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn pick_or<T: DeserializeOwned>(
        &self,
        flag: Option<T>,
        key: &str,
        default: T,
    ) -> Result<T, CliError> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }

    /// A `[lo, hi]` pair.
    pub fn pick_range(
        &self,
        flag: Option<Vec<f64>>,
        key: &str,
        default: Option<[f64; 2]>,
    ) -> Result<Option<[f64; 2]>, CliError> {
        match self.pick::<Vec<f64>>(flag, key)? {
            Some(v) if v.len() == 2 => Ok(Some([v[0], v[1]])),
            Some(v) => Err(CliError::Usage(format!(
                "`{key}` takes two numbers, got {}",
                v.len()
            ))),
            None => Ok(default),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let cfg = Config {
            values: serde_json::from_str(r#"{"steps": 7, "k-range": [1, 2]}"#).unwrap(),
        };
        assert_eq!(cfg.pick_or(Some(3usize), "steps", 1).unwrap(), 3);
        assert_eq!(cfg.pick_or(None, "steps", 1usize).unwrap(), 7);
        assert_eq!(cfg.pick_or(None, "realizations", 1usize).unwrap(), 1);
        assert_eq!(
            cfg.pick_range(None, "k-range", None).unwrap(),
            Some([1.0, 2.0])
        );
        assert!(cfg.pick_range(Some(vec![1.0]), "k-range", None).is_err());
    }
}
