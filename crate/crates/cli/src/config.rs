//! Config-file handling and thread-pool setup.
//!
//! The config file is a flat TOML key-value table whose keys are the CLI
//! flag names. Per the interface contract, file values override flags:
//! the file's entries are appended to the argument vector after the
//! user-supplied flags, and the parser takes the last occurrence.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Expand `--config FILE` into trailing `--key value` tokens.
pub fn splice_config_args(argv: Vec<String>) -> Result<Vec<String>> {
    let Some(pos) = argv.iter().position(|a| a == "--config") else {
        return Ok(argv);
    };
    let Some(path) = argv.get(pos + 1).cloned() else {
        bail!("--config requires a file path");
    };
    let mut out: Vec<String> = argv[..pos].to_vec();
    out.extend_from_slice(&argv[pos + 2..]);
    out.extend(config_file_args(Path::new(&path))?);
    Ok(out)
}

fn config_file_args(path: &Path) -> Result<Vec<String>> {
    let body = fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let table: toml::Table =
        body.parse().with_context(|| format!("parsing TOML in {}", path.display()))?;
    let mut args = Vec::new();
    for (key, value) in table {
        match value {
            toml::Value::Boolean(true) => args.push(format!("--{key}")),
            toml::Value::Boolean(false) => {}
            toml::Value::String(s) => {
                args.push(format!("--{key}"));
                args.push(s);
            }
            toml::Value::Integer(v) => {
                args.push(format!("--{key}"));
                args.push(v.to_string());
            }
            toml::Value::Float(v) => {
                args.push(format!("--{key}"));
                args.push(v.to_string());
            }
            other => bail!("config key {key}: unsupported value {other:?}"),
        }
    }
    Ok(args)
}

/// Build the global worker pool: `--threads` wins, then `KPP_THREADS`,
/// then the machine default. Returns the effective thread count.
pub fn init_threads(flag: Option<usize>) -> usize {
    let env_cap = std::env::var("KPP_THREADS").ok().and_then(|v| v.parse::<usize>().ok());
    let wanted = flag.or(env_cap);
    if let Some(n) = wanted {
        let n = n.max(1);
        // Ignore the error if a pool already exists (tests call run twice).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        n
    } else {
        rayon::current_num_threads()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn file_values_land_after_flags() {
        let tmp = tempfile::NamedTempFile::new().unwrap();
        writeln!(tmp.as_file(), "seed = 99\nreplicas = 500\nplot = true").unwrap();
        let argv = vec![
            "simulate".to_string(),
            "--seed".to_string(),
            "1".to_string(),
            "--config".to_string(),
            tmp.path().display().to_string(),
        ];
        let spliced = splice_config_args(argv).unwrap();
        assert_eq!(spliced[0], "simulate");
        // The file's --seed 99 comes after the explicit --seed 1.
        let last_seed = spliced.iter().rposition(|a| a == "--seed").unwrap();
        assert_eq!(spliced[last_seed + 1], "99");
        assert!(spliced.contains(&"--plot".to_string()));
        assert!(!spliced.contains(&"--config".to_string()));
    }
}
