//! `key = value` config files, spliced into argv as flags ahead of the user's own.

use std::ffi::OsString;
use std::path::Path;

const GROUPS: [&str; 2] = ["protocol", "magic"];
const COMMANDS: [&str; 10] = [
    "run",
    "scan",
    "gate-check",
    "magic-eval",
    "certify",
    "experiment",
    "dump-stabilizers",
    "protocol",
    "magic",
    "eval",
];

#[derive(Debug, PartialEq, Eq)]
pub struct ConfigError(pub String);

/// Parses config text into `(flag, value)` pairs. `#` starts a comment.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(ConfigError(format!("line {}: invalid key {key:?}", lineno + 1)));
        }
        out.push((key, value.trim().trim_matches('"').to_string()));
    }
    Ok(out)
}

fn config_path(argv: &[OsString]) -> Option<OsString> {
    let mut iter = argv.iter();
    while let Some(arg) = iter.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            return iter.next().cloned();
        }
        if let Some(rest) = s.strip_prefix("--config=") {
            return Some(rest.into());
        }
    }
    None
}

fn insertion_point(argv: &[OsString]) -> Option<usize> {
    let pos = argv.iter().skip(1).position(|a| COMMANDS.contains(&a.to_string_lossy().as_ref()))? + 1;
    let is_group = GROUPS.contains(&argv[pos].to_string_lossy().as_ref());
    Some(if is_group && pos + 1 < argv.len() { pos + 2 } else { pos + 1 })
}

/// Returns argv with config flags inserted right after the subcommand, so that
/// flags given on the command line override them.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, ConfigError> {
    let Some(path) = config_path(&argv) else { return Ok(argv) };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let Some(at) = insertion_point(&argv) else { return Ok(argv) };
    let mut injected: Vec<OsString> = Vec::new();
    for (key, value) in parse(&text)? {
        match value.as_str() {
            "true" => injected.push(format!("--{key}").into()),
            "false" => {}
            _ => injected.push(format!("--{key}={value}").into()),
        }
    }
    let mut out = argv[..at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_pairs_and_comments() {
        let p = parse("# header\nphi = 0.5\nn_boot=100 # trailing\n\nformat = \"csv\"\n").unwrap();
        assert_eq!(
            p,
            vec![("phi".into(), "0.5".into()), ("n-boot".into(), "100".into()), ("format".into(), "csv".into())]
        );
        assert!(parse("no equals sign").is_err());
        assert!(parse("config = x").is_err());
    }

    #[test]
    fn insertion_after_nested_subcommand() {
        assert_eq!(insertion_point(&os(&["mss", "--degrees", "protocol", "run", "--phi", "1"])), Some(4));
        assert_eq!(insertion_point(&os(&["mss", "scan", "--grid", "0:1:2"])), Some(2));
        assert_eq!(insertion_point(&os(&["mss", "--help"])), None);
    }

    #[test]
    fn expansion_puts_config_before_user_flags() {
        let dir = std::env::temp_dir().join(format!("mss-config-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.conf");
        std::fs::write(&path, "phi = 0.3\ndegrees = true\n").unwrap();
        let argv = os(&["mss", "run", "--phi", "0.9", "--config", path.to_str().unwrap()]);
        let out = expand(argv).unwrap();
        let s: Vec<String> = out.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(&s[..4], &["mss", "run", "--phi=0.3", "--degrees"]);
        assert_eq!(&s[4..6], &["--phi", "0.9"]);
        std::fs::remove_dir_all(dir).ok();
    }
}
