//! key=value configuration files merged into argv ahead of the user's
//! flags, so flags given on the command line win.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::CommandFactory;

use crate::args::{Cli, GLOBAL_VALUE_FLAGS};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key = value, got {raw:?}", i + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError(format!("line {}: empty key or value", i + 1)));
        }
        if out.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError(format!("line {}: duplicate key {key}", i + 1)));
        }
        out.push((key, value.to_string()));
    }
    Ok(out)
}

/// Long flag names (and aliases) accepted by `subcommand`, globals included.
pub fn known_keys(subcommand: &str) -> Vec<String> {
    let root = Cli::command();
    let mut keys: Vec<String> = ["threads", "out"].iter().map(|s| s.to_string()).collect();
    if let Some(sub) = root.find_subcommand(subcommand) {
        for arg in sub.get_arguments() {
            if let Some(long) = arg.get_long() {
                keys.push(long.to_string());
            }
            if let Some(aliases) = arg.get_all_aliases() {
                keys.extend(aliases.into_iter().map(str::to_string));
            }
        }
    }
    keys.retain(|k| k != "help" && k != "config");
    keys
}

/// Position of the subcommand token in `argv` (index 0 is the program).
pub fn subcommand_index(argv: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let tok = argv[i].to_string_lossy();
        if GLOBAL_VALUE_FLAGS.contains(&tok.as_ref()) {
            i += 2;
        } else if tok.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

/// Value of `--config` anywhere in `argv`.
pub fn config_path(argv: &[OsString]) -> Option<PathBuf> {
    let mut it = argv.iter().skip(1).map(|a| a.to_string_lossy());
    while let Some(tok) = it.next() {
        if tok == "--config" {
            return it.next().map(|v| PathBuf::from(v.as_ref()));
        }
        if let Some(v) = tok.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    None
}

/// Inserts the file's settings right after the subcommand.
pub fn merge(argv: &[OsString], subcommand: &str, path: &Path) -> Result<Vec<OsString>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    let pairs = parse(&text)?;
    let known = known_keys(subcommand);
    if Cli::command().find_subcommand(subcommand).is_none() {
        return Err(ConfigError(format!("unknown subcommand `{subcommand}`")));
    }
    if let Some((bad, _)) = pairs.iter().find(|(k, _)| !known.contains(k)) {
        return Err(ConfigError(format!(
            "unknown key {bad:?} in {} for `{subcommand}`; accepted: {}",
            path.display(),
            known.join(", ")
        )));
    }
    let at = subcommand_index(argv).ok_or_else(|| ConfigError("no subcommand given".into()))?;
    let mut out: Vec<OsString> = argv[..=at].to_vec();
    out.extend(pairs.iter().map(|(k, v)| OsString::from(format!("--{k}={v}"))));
    out.extend(argv[at + 1..].iter().cloned());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_underscores() {
        let p = parse("# sweep\nlow_cutoff = 100  # small\n\nX=1e5,1e6\n").unwrap();
        assert_eq!(p, vec![("low-cutoff".into(), "100".into()), ("X".into(), "1e5,1e6".into())]);
        assert!(parse("novalue").is_err());
        assert!(parse("a=1\na=2").is_err());
    }

    #[test]
    fn keys_follow_the_subcommand() {
        let keys = known_keys("moment");
        assert!(keys.contains(&"X".to_string()) && keys.contains(&"threads".to_string()));
        assert!(!keys.contains(&"samples".to_string()));
        assert!(known_keys("voronoi").contains(&"samples".to_string()));
    }

    #[test]
    fn finds_subcommand_after_globals() {
        let argv: Vec<OsString> = ["divlab", "--threads", "2", "--out", "o", "delta", "--x", "3"]
            .iter()
            .map(OsString::from)
            .collect();
        assert_eq!(subcommand_index(&argv), Some(5));
    }
}
