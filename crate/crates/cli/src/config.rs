//! Flat `key = value` config files merged under the command line.

use std::fs;
use std::path::Path;

use crate::CliError;

/// Flags that take no value; `key = true` enables them, `key = false` is
/// ignored.
const SWITCHES: &[&str] = &["balanced"];

/// Parse `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", no + 1)))?;
        let key = key.trim().trim_start_matches("--").to_string();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", no + 1)));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

/// Insert the entries of any `--config FILE` after the subcommand, skipping
/// keys already given as flags so that the command line wins.
pub fn merge(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(at) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let (path, consumed) = match argv[at].split_once('=') {
        Some((_, p)) => (p.to_string(), 1),
        None => {
            let p = argv.get(at + 1).ok_or_else(|| CliError::Usage("--config needs a file".into()))?;
            (p.clone(), 2)
        }
    };
    let text = fs::read_to_string(Path::new(&path)).map_err(|e| CliError::Usage(format!("config {path}: {e}")))?;
    let entries = parse(&text)?;

    let mut args: Vec<String> = argv[..at].iter().chain(&argv[at + consumed..]).cloned().collect();
    let given = |key: &str, args: &[String]| {
        let flag = format!("--{key}");
        args.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
    };
    let mut extra = Vec::new();
    for (key, value) in entries {
        if given(&key, &args) {
            continue;
        }
        if SWITCHES.contains(&key.as_str()) {
            match value.as_str() {
                "true" | "yes" | "1" => extra.push(format!("--{key}")),
                "false" | "no" | "0" => {}
                other => return Err(CliError::Usage(format!("config {key}: expected true or false, got `{other}`"))),
            }
        } else {
            extra.push(format!("--{key}={value}"));
        }
    }
    args.extend(extra);
    Ok(args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_blanks() {
        let got = parse("# scenario\nlambdas = 1,2\n\n  mus=3,1 # rates\n").unwrap();
        assert_eq!(got, vec![("lambdas".into(), "1,2".into()), ("mus".into(), "3,1".into())]);
        assert!(parse("lambdas 1,2").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.conf");
        fs::write(&path, "lambdas = 1,2\nmus = 3,1\nbalanced = false\nseed = 9\n").unwrap();
        let argv: Vec<String> =
            ["aoi", "simulate", "--config", path.to_str().unwrap(), "--seed", "4"].iter().map(|s| s.to_string()).collect();
        let merged = merge(argv).unwrap();
        assert_eq!(merged, vec!["aoi", "simulate", "--seed", "4", "--lambdas=1,2", "--mus=3,1"]);
    }
}
