//! Layered run configuration: command-line flags over a JSON config file over
//! built-in defaults.
//!
//! The config file is an object with an optional top-level `seed` and one
//! optional section per subcommand:
//!
//! ```json
//! { "seed": 7, "detect": { "k": 400, "tau": "15m" } }
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};
use streamint::timefmt::parse_duration;

/// Exit classes.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Failed(String),
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Other(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Failed(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Config(m) => ("configuration error", m),
            CliError::Io(m) => ("i/o error", m),
            CliError::Failed(m) => ("check failed", m),
            CliError::Other(m) => ("error", m),
        };
        write!(f, "{kind}: {msg}")
    }
}

impl From<streamint::Error> for CliError {
    fn from(e: streamint::Error) -> Self {
        use streamint::Error as E;
        let msg = e.to_string();
        match e {
            E::Io { .. } | E::Parse { .. } => CliError::Io(msg),
            E::Domain { .. } | E::Schema(_) | E::InvalidMeasure(_) => CliError::Config(msg),
            _ => CliError::Other(msg),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Default)]
pub struct ConfigFile {
    root: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else {
            return Ok(ConfigFile::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        match serde_json::from_str(&text) {
            Ok(Value::Object(root)) => Ok(ConfigFile { root }),
            Ok(_) => Err(CliError::Config(format!("{}: expected a JSON object", path.display()))),
            Err(e) => Err(CliError::Config(format!("{}: {e}", path.display()))),
        }
    }

    pub fn seed(&self) -> CliResult<Option<u64>> {
        match self.root.get("seed") {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(Some)
                .ok_or_else(|| CliError::Config("`seed` must be a non-negative integer".into())),
        }
    }

    /// `defaults`, overlaid with the `section` object, overlaid with every
    /// flag that was given (absent options and empty lists do not count).
    pub fn resolve<D, F>(&self, section: &str, flags: &F) -> CliResult<D>
    where
        D: Serialize + DeserializeOwned + Default,
        F: Serialize,
    {
        let mut merged = match serde_json::to_value(D::default()).expect("defaults serialize") {
            Value::Object(m) => m,
            _ => unreachable!("config structs are objects"),
        };
        match self.root.get(section) {
            None => {}
            Some(Value::Object(m)) => merged.extend(m.clone()),
            Some(_) => return Err(CliError::Config(format!("section `{section}` must be an object"))),
        }
        if let Value::Object(m) = serde_json::to_value(flags).expect("flags serialize") {
            merged.extend(m.into_iter().filter(|(_, v)| !(v.is_null() || v.as_array().is_some_and(Vec::is_empty))));
        }
        serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(format!("{section}: {e}")))
    }
}

/// Seconds, from a number or a `15m`-style string.
pub fn duration<'de, D: Deserializer<'de>>(d: D) -> Result<i64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Text(String),
    }
    match Raw::deserialize(d)? {
        Raw::Int(v) => Ok(v),
        Raw::Text(s) => parse_duration(&s).ok_or_else(|| serde::de::Error::custom(format!("bad duration `{s}`"))),
    }
}

pub fn parse_duration_flag(s: &str) -> Result<i64, String> {
    parse_duration(s).ok_or_else(|| format!("bad duration `{s}` (use e.g. 900, 15m, 4h)"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable") + "\n";
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn ensure_dir(path: &Path) -> CliResult<PathBuf> {
    std::fs::create_dir_all(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct Cfg {
        k: usize,
        #[serde(deserialize_with = "duration")]
        tau: i64,
        name: Option<String>,
    }

    #[derive(Serialize)]
    struct Flags {
        k: Option<usize>,
        tau: Option<i64>,
        name: Option<String>,
    }

    #[test]
    fn precedence() {
        let file = ConfigFile {
            root: serde_json::from_str(r#"{"seed": 3, "run": {"k": 5, "tau": "15m"}}"#).unwrap(),
        };
        let flags = Flags {
            k: Some(9),
            tau: None,
            name: None,
        };
        let c: Cfg = file.resolve("run", &flags).unwrap();
        assert_eq!(c, Cfg { k: 9, tau: 900, name: None });
        assert_eq!(file.seed().unwrap(), Some(3));
        let c: Cfg = ConfigFile::default().resolve("run", &flags).unwrap();
        assert_eq!(c.tau, 0);
    }

    #[test]
    fn unknown_keys_are_config_errors() {
        let file = ConfigFile {
            root: serde_json::from_str(r#"{"run": {"kk": 5}}"#).unwrap(),
        };
        let flags = Flags {
            k: None,
            tau: None,
            name: None,
        };
        let err = file.resolve::<Cfg, _>("run", &flags).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
