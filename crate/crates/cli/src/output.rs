//! Output files. Every CSV starts with `#`-prefixed provenance lines and
//! every JSON document carries a `provenance` object; either is enough to
//! replay the run with `nlbeat --config <file>`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const TOOL: &str = "nlbeat";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: Option<u64>,
    pub config_hash: String,
    pub config: Value,
}

impl Provenance {
    pub fn of(config: &RunConfig) -> Self {
        let canonical = config.to_canonical_json();
        Provenance {
            tool: TOOL,
            version: VERSION,
            command: config.name(),
            seed: config.seed(),
            config_hash: config_hash(&canonical),
            config: serde_json::from_str(&canonical).expect("canonical JSON parses"),
        }
    }

    fn header_lines(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# tool={} version={}\n# command={}\n# seed={}\n# config_hash={}\n# config={}\n",
            self.tool, self.version, self.command, seed, self.config_hash, self.config
        )
    }
}

pub fn config_hash(canonical_json: &str) -> String {
    let digest = Sha256::digest(canonical_json.as_bytes());
    format!("sha256:{}", hex::encode(digest))
}

/// CSV text: provenance comment lines, one header row, then `rows`.
pub fn csv_document<R>(provenance: &Provenance, header: &[&str], rows: R) -> Result<String, CliError>
where
    R: IntoIterator<Item = Vec<String>>,
{
    let mut out = provenance.header_lines().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| CliError::io("csv", e))?;
    }
    Ok(String::from_utf8(out).expect("csv output is utf-8"))
}

/// Pretty JSON with a leading `provenance` object merged into `body`.
pub fn json_document(provenance: &Provenance, body: Value) -> String {
    let mut doc = json!({ "provenance": provenance });
    if let (Value::Object(target), Value::Object(fields)) = (&mut doc, body) {
        target.extend(fields);
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
    text.push('\n');
    text
}

/// `<out_dir>/<command>-<hash prefix>`, stable for a given config.
pub fn run_dir(out_dir: &Path, provenance: &Provenance) -> PathBuf {
    let hash = provenance
        .config_hash
        .trim_start_matches("sha256:")
        .chars()
        .take(12)
        .collect::<String>();
    out_dir.join(format!("{}-{hash}", provenance.command))
}

/// Writes all files or none: existing targets are an error unless `force`.
pub fn write_files(dir: &Path, files: &[(String, String)], force: bool) -> Result<Vec<PathBuf>, CliError> {
    let paths: Vec<PathBuf> = files.iter().map(|(name, _)| dir.join(name)).collect();
    if !force {
        if let Some(existing) = paths.iter().find(|p| p.exists()) {
            return Err(CliError::Config(format!(
                "{} exists; pass --force to overwrite",
                existing.display()
            )));
        }
    }
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    for (path, (_, contents)) in paths.iter().zip(files) {
        fs::write(path, contents).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    }
    Ok(paths)
}

/// Reads a run configuration from a JSON config file, a JSON output file
/// (its `provenance.config`), or a CSV output file (its `# config=` line).
pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
    if text.starts_with('#') {
        let line = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .find_map(|l| l.strip_prefix("# config="))
            .ok_or_else(|| CliError::Config(format!("{}: no `# config=` line", path.display())))?;
        return RunConfig::from_json(line);
    }
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let config = match value.get("provenance").and_then(|p| p.get("config")) {
        Some(inner) => inner.clone(),
        None => value,
    };
    serde_json::from_value(config).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
