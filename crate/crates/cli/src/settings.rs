//! Optional TOML config file. Keys mirror the long flag names with
//! underscores (`cut_angle_deg`, `threshold`, ...). Flags win over the file,
//! the file wins over built-in defaults.

use std::path::Path;

use crate::commands::{config_err, CliError};

#[derive(Debug, Default)]
pub struct Settings {
    table: toml::Table,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        let table = text
            .parse::<toml::Table>()
            .map_err(|e| config_err(format!("config {}: {e}", path.display())))?;
        Ok(Self { table })
    }

    fn type_err(key: &str, expected: &str) -> CliError {
        config_err(format!("config key `{key}` must be {expected}"))
    }

    /// Strings; numbers are accepted and rendered, so `partner = 300` works.
    pub fn string(&self, key: &str) -> Result<Option<String>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::String(s)) => Ok(Some(s.clone())),
            Some(toml::Value::Integer(i)) => Ok(Some(i.to_string())),
            Some(toml::Value::Float(f)) => Ok(Some(f.to_string())),
            Some(toml::Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    toml::Value::Integer(i) => Ok(i.to_string()),
                    toml::Value::Float(f) => Ok(f.to_string()),
                    _ => Err(Self::type_err(key, "a list of numbers")),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(|v| Some(v.join(","))),
            Some(_) => Err(Self::type_err(key, "a string")),
        }
    }

    pub fn float(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Float(f)) => Ok(Some(*f)),
            Some(toml::Value::Integer(i)) => Ok(Some(*i as f64)),
            Some(_) => Err(Self::type_err(key, "a number")),
        }
    }

    pub fn integer(&self, key: &str) -> Result<Option<u64>, CliError> {
        match self.table.get(key) {
            None => Ok(None),
            Some(toml::Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(_) => Err(Self::type_err(key, "a non-negative integer")),
        }
    }
}
