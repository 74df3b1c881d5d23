//! Flat `key=value` configuration files.
//!
//! Each key names a long flag of the chosen subcommand. The resulting flags
//! are placed before those given on the command line, and since every flag
//! overrides earlier occurrences of itself, the command line wins. The
//! special key `command` selects the subcommand when the command line does
//! not.

use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Parses `key=value` lines; `#` starts a comment line.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key=value", i + 1)))?;
        let k = k.trim();
        if k.is_empty() || k.starts_with('-') || k.contains(char::is_whitespace) {
            return Err(ConfigError(format!("line {}: bad key '{k}'", i + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

const SWITCHES: [&str; 1] = ["deterministic"];

/// Rewrites `argv` so that options from any `--config` file come first.
pub fn splice_config(argv: &[String], subcommands: &[&str]) -> Result<Vec<String>, ConfigError> {
    let mut path = None;
    let mut rest = Vec::new();
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            let p = it.next().ok_or_else(|| ConfigError("--config needs a path".into()))?;
            path = Some(p.clone());
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a.clone());
        }
    }
    let Some(path) = path else {
        return Ok(argv.to_vec());
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| ConfigError(format!("cannot read config '{path}': {e}")))?;
    let entries = parse_config(&text)?;
    let mut command = None;
    let mut flags = Vec::new();
    for (k, v) in entries {
        if k == "command" {
            command = Some(v);
        } else if SWITCHES.contains(&k.as_str()) {
            match v.as_str() {
                "true" | "1" | "yes" => flags.push(format!("--{k}")),
                "false" | "0" | "no" => {}
                _ => return Err(ConfigError(format!("'{k}' expects true or false, got '{v}'"))),
            }
        } else {
            flags.push(format!("--{k}={v}"));
        }
    }
    let pos = rest.iter().position(|a| subcommands.contains(&a.as_str()));
    let mut out = vec![argv[0].clone()];
    match pos {
        Some(p) => {
            out.extend(rest[..=p].iter().cloned());
            out.extend(flags);
            out.extend(rest[p + 1..].iter().cloned());
        }
        None => {
            let cmd = command.ok_or_else(|| ConfigError("no subcommand given".into()))?;
            out.push(cmd);
            out.extend(flags);
            out.extend(rest);
        }
    }
    Ok(out)
}
