//! `key = value` config files that mirror the command-line flags.
//!
//! Each entry becomes `--key=value` and is spliced in front of the user's own
//! flags. Because every option overrides itself, the flags typed on the
//! command line win on conflict.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Parse config text into `(key, value)` pairs. Blank lines and lines
/// starting with `#` are ignored; keys may use `_` or `-`; values may be
/// wrapped in double quotes.
pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            bail!(
                "config line {}: expected key = value, got {raw:?}",
                lineno + 1
            );
        };
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            bail!("config line {}: invalid key {:?}", lineno + 1, key);
        }
        let value = value.trim();
        let value = value
            .strip_prefix('"')
            .and_then(|v| v.strip_suffix('"'))
            .unwrap_or(value);
        entries.push((key, value.to_string()));
    }
    Ok(entries)
}

/// Locate `--config <path>` or `--config=<path>` in raw arguments.
fn find_config(args: &[OsString]) -> Option<OsString> {
    let mut iter = args.iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(path) = s.strip_prefix("--config=") {
            return Some(path.into());
        }
    }
    None
}

/// Insert config-derived flags directly after the subcommand name.
pub fn splice(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(path) = find_config(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(Path::new(&path))
        .with_context(|| format!("reading config file {}", path.to_string_lossy()))?;
    let entries = parse(&text)?;
    // The subcommand is the first argument after the program name that is not a flag.
    let Some(sub) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|i| i + 1)
    else {
        return Ok(args);
    };
    let mut out = args[..=sub].to_vec();
    out.extend(
        entries
            .iter()
            .map(|(k, v)| OsString::from(format!("--{k}={v}"))),
    );
    out.extend_from_slice(&args[sub + 1..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_quotes_and_underscores() {
        let e = parse("# comment\n\ntheta_over_pi = 2.5\nout=\"a b\"\n").unwrap();
        assert_eq!(
            e,
            vec![
                ("theta-over-pi".to_string(), "2.5".to_string()),
                ("out".to_string(), "a b".to_string())
            ]
        );
        assert!(parse("novalue\n").is_err());
        assert!(parse("config = other.cfg\n").is_err());
    }

    #[test]
    fn config_flags_precede_user_flags() {
        let dir = std::env::temp_dir().join(format!("chronopath-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "n-steps = 10\n").unwrap();
        let args: Vec<OsString> = [
            "chronopath",
            "peaks",
            "--config",
            path.to_str().unwrap(),
            "--n-steps",
            "20",
        ]
        .iter()
        .map(OsString::from)
        .collect();
        let out = splice(args).unwrap();
        let s: Vec<String> = out
            .iter()
            .map(|a| a.to_string_lossy().into_owned())
            .collect();
        assert_eq!(s[1], "peaks");
        assert_eq!(s[2], "--n-steps=10");
        assert_eq!(&s[5..], ["--n-steps", "20"]);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
