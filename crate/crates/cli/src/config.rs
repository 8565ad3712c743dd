//! `--config` merging and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::args::CommandArgs;
use crate::error::{CliError, Result};
use crate::table::Format;

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_owned(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_owned(), source })
}

fn object(value: Value, what: &str) -> Result<Map<String, Value>> {
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(CliError::usage(format!("{what} must be a JSON object"))),
    }
}

/// Parameters of a config file: the whole object, or its `params` member when the
/// file is a manifest. A `command` member must name the running command.
fn config_params(path: &Path, command: &str) -> Result<Map<String, Value>> {
    let mut top = object(read_json(path)?, &path.display().to_string())?;
    if let Some(found) = top.get("command") {
        if found.as_str() != Some(command) {
            return Err(CliError::usage(format!("{} is for command {found}, not {command}", path.display())));
        }
    }
    match top.remove("params") {
        Some(params) => object(params, "`params`"),
        None => {
            top.remove("command");
            Ok(top)
        }
    }
}

fn decode<C: CommandArgs>(params: Map<String, Value>, origin: &str) -> Result<C> {
    let known = object(serde_json::to_value(C::default()).expect("args serialize"), "args")?;
    if let Some(key) = params.keys().find(|k| !known.contains_key(*k)) {
        return Err(CliError::usage(format!("unknown key `{key}` in {origin} for {}", C::NAME)));
    }
    serde_json::from_value(Value::Object(params)).map_err(|e| CliError::usage(format!("{origin}: {e}")))
}

/// Combines parsed flags with the optional `--config` file; set flags take precedence.
pub fn merge<C: CommandArgs>(flags: C) -> Result<C> {
    let Some(path) = flags.output().config.clone() else {
        return Ok(flags);
    };
    let mut params = config_params(&path, C::NAME)?;
    let set = object(serde_json::to_value(&flags).expect("args serialize"), "flags")?;
    for (k, v) in set {
        if !v.is_null() {
            params.insert(k, v);
        }
    }
    let mut args: C = decode(params, &path.display().to_string())?;
    *args.output_mut() = flags.output().clone();
    Ok(args)
}

#[derive(Debug, Serialize)]
pub struct RunManifest<'a, P: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub params: &'a P,
    pub seeds: &'a [u64],
    pub timestamp: String,
    pub format: Format,
    pub output: Option<&'a Path>,
    pub truncation_bounds: &'a [f64],
    pub truncation_verified: bool,
}

pub fn manifest_path(out: Option<&Path>, explicit: Option<&Path>, command: &str) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_owned();
    }
    match out {
        Some(out) => {
            let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "pnrq".into());
            out.with_file_name(format!("{stem}.manifest.json"))
        }
        None => PathBuf::from(format!("pnrq-{command}.manifest.json")),
    }
}

pub fn write_manifest<P: Serialize>(path: &Path, manifest: &RunManifest<'_, P>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_owned(), source })
}

/// Command name and parameters recorded in a manifest.
pub fn read_manifest(path: &Path) -> Result<(String, Map<String, Value>, Option<Format>)> {
    let mut top = object(read_json(path)?, &path.display().to_string())?;
    let command = top
        .get("command")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::usage(format!("{} has no `command`", path.display())))?
        .to_owned();
    let params = object(top.remove("params").unwrap_or_default(), "`params`")?;
    let format = top.remove("format").and_then(|f| serde_json::from_value(f).ok());
    Ok((command, params, format))
}

pub fn decode_params<C: CommandArgs>(params: Map<String, Value>, origin: &Path) -> Result<C> {
    decode(params, &origin.display().to_string())
}

pub fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_sits_beside_output() {
        assert_eq!(
            manifest_path(Some(Path::new("runs/curve.csv")), None, "curve"),
            PathBuf::from("runs/curve.manifest.json")
        );
        assert_eq!(manifest_path(None, None, "loop"), PathBuf::from("pnrq-loop.manifest.json"));
        assert_eq!(manifest_path(None, Some(Path::new("m.json")), "loop"), PathBuf::from("m.json"));
    }
}
