//! `key = value` configuration files, spliced into the argument list before
//! the command-line flags so that explicit flags take precedence.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

/// Flags read from a configuration file, in file order.
pub fn parse_config(text: &str) -> Result<Vec<OsString>, String> {
    let mut flags = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value, got '{line}'", i + 1))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"');
        if key.is_empty() {
            return Err(format!("config line {}: empty key", i + 1));
        }
        if key == "config" {
            return Err(format!("config line {}: nested config files are not supported", i + 1));
        }
        match value {
            "true" => flags.push(format!("--{key}").into()),
            "false" => {}
            v => flags.push(format!("--{key}={v}").into()),
        }
    }
    Ok(flags)
}

fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

/// Inserts the flags of the `--config` file right after the subcommand.
pub fn expand_args(raw: Vec<OsString>) -> Result<Vec<OsString>, String> {
    if raw.len() < 2 || raw[1].to_string_lossy().starts_with('-') {
        return Ok(raw);
    }
    let Some(path) = config_path(&raw[2..]) else {
        return Ok(raw);
    };
    let text = fs::read_to_string(Path::new(&path))
        .map_err(|e| format!("--config: cannot read {}: {e}", Path::new(&path).display()))?;
    let flags = parse_config(&text)?;
    let mut out = raw[..2].to_vec();
    out.extend(flags);
    out.extend_from_slice(&raw[2..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_pairs_and_booleans() {
        let f = parse_config("# budget\ndim = 10\nr_grid = \"0.1,0.2\"\n\ntiming = true\njensen = false\n").unwrap();
        assert_eq!(f, os(&["--dim=10", "--r-grid=0.1,0.2", "--timing"]));
        assert!(parse_config("dim 10").is_err());
        assert!(parse_config("config = x").is_err());
    }

    #[test]
    fn file_flags_precede_command_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        fs::write(&path, "n = 50\nseed = 3\n").unwrap();
        let raw = os(&["weakcover", "coverage", "--config", path.to_str().unwrap(), "--n", "70"]);
        let out = expand_args(raw).unwrap();
        assert_eq!(&out[2..4], &os(&["--n=50", "--seed=3"])[..]);
        assert_eq!(out.last().unwrap(), "70");
        let untouched = os(&["weakcover", "--help"]);
        assert_eq!(expand_args(untouched.clone()).unwrap(), untouched);
    }
}
