//! `--config <path>`: a TOML table whose keys mirror the subcommand flags.
//!
//! Entries are spliced in front of the command-line flags, and since every
//! flag overrides earlier occurrences of itself, explicit flags win.

use std::ffi::OsString;
use std::fs;

use anyhow::{bail, Context, Result};
use toml::Value;

/// Removes `--config` from `args` and splices in the file's flags.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut iter = args.into_iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--config" {
            path = Some(iter.next().context("--config requires a path")?);
        } else if let Some(p) = text.strip_prefix("--config=") {
            path = Some(OsString::from(p));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };

    let source = fs::read_to_string(&path).with_context(|| format!("reading config {}", path.to_string_lossy()))?;
    let flags = flags_from_toml(&source).with_context(|| format!("parsing config {}", path.to_string_lossy()))?;

    // Insert right after the subcommand name.
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|i| i + 2)
        .unwrap_or(rest.len());
    rest.splice(at..at, flags);
    Ok(rest)
}

pub fn flags_from_toml(source: &str) -> Result<Vec<OsString>> {
    let table: toml::Table = source.parse()?;
    let mut flags = Vec::new();
    for (key, value) in table {
        let value = match value {
            Value::String(s) => s,
            Value::Integer(i) => i.to_string(),
            Value::Float(f) => f.to_string(),
            Value::Boolean(b) => b.to_string(),
            Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            other => bail!("unsupported value for '{key}': {other}"),
        };
        flags.push(OsString::from(format!("--{}={value}", key.replace('_', "-"))));
    }
    Ok(flags)
}
