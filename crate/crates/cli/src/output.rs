use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use quadrank_core::{load_corpus, Graph};

use crate::usage;

/// Create `dir`, refusing to reuse a non-empty one unless `force`.
pub fn prepare_dir(dir: &Path, force: bool) -> anyhow::Result<()> {
    if dir.is_file() {
        return Err(usage(format!("{} is a file, expected a directory", dir.display())));
    }
    if dir.is_dir() && fs::read_dir(dir)?.next().is_some() && !force {
        return Err(usage(format!("{} is not empty; pass --force to overwrite", dir.display())));
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Make sure `file` may be written.
pub fn prepare_file(file: &Path, force: bool) -> anyhow::Result<()> {
    if file.exists() && !force {
        return Err(usage(format!("{} exists; pass --force to overwrite", file.display())));
    }
    if let Some(parent) = file.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(())
}

pub fn write(path: &Path, contents: impl AsRef<[u8]>) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// File-name-safe version of a graph name.
pub fn safe_name(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}

/// Up to four decimals, trailing zeros dropped: 0.75, 0.4922, 0.5.
pub fn score(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0');
    s.strip_suffix('.').map_or_else(|| s.to_string(), |t| format!("{t}.0"))
}

pub struct Loaded {
    pub path: PathBuf,
    pub graphs: Vec<Graph>,
}

/// Load every corpus; a path that does not exist is a usage error.
pub fn load_all(paths: &[PathBuf]) -> anyhow::Result<Vec<Loaded>> {
    paths
        .iter()
        .map(|p| {
            if !p.exists() {
                return Err(usage(format!("corpus {} does not exist", p.display())));
            }
            let graphs = load_corpus(p).with_context(|| format!("loading {}", p.display()))?;
            Ok(Loaded { path: p.clone(), graphs })
        })
        .collect()
}

pub fn flatten_loaded(loaded: Vec<Loaded>) -> Vec<Graph> {
    loaded.into_iter().flat_map(|l| l.graphs).collect()
}
