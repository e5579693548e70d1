//! `key = value` settings files. Flags override file values, which override defaults.

use std::path::{Path, PathBuf};

pub const CONFIG_ENV: &str = "ZEROFREE_CONFIG";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileSettings {
    pub grid: Option<usize>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub jobs: Option<usize>,
    pub samples: Option<usize>,
    pub strict_paper_bounds: Option<bool>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, String> {
    value.parse().map_err(|_| format!("line {line}: invalid value `{value}` for `{key}`"))
}

pub fn parse(text: &str) -> Result<FileSettings, String> {
    let mut s = FileSettings::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let no = i + 1;
        let (key, value) = line.split_once('=').ok_or_else(|| format!("line {no}: expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "grid" => s.grid = Some(parse_value(key, value, no)?),
            "seed" => s.seed = Some(parse_value(key, value, no)?),
            "restarts" => s.restarts = Some(parse_value(key, value, no)?),
            "jobs" => s.jobs = Some(parse_value(key, value, no)?),
            "samples" => s.samples = Some(parse_value(key, value, no)?),
            "strict_paper_bounds" => s.strict_paper_bounds = Some(parse_value(key, value, no)?),
            _ => return Err(format!("line {no}: unknown key `{key}`")),
        }
    }
    Ok(s)
}

/// Reads the file named by `--config`, else by the environment variable, else nothing.
pub fn load(flag: Option<&Path>) -> Result<FileSettings, String> {
    let path: Option<PathBuf> = flag.map(Path::to_path_buf).or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    match path {
        None => Ok(FileSettings::default()),
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| format!("cannot read config {}: {e}", p.display()))?;
            parse(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}
