//! Artifact files tagged with the hash of the configuration that produced
//! them. The tag is the first line: `# config-hash: <hex>` for text and CSV,
//! an XML comment for SVG, a `config_hash` key for JSON.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

const PREFIX: &str = "# config-hash: ";
const SVG_PREFIX: &str = "<!-- config-hash: ";

fn is_svg(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "svg")
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

/// Write `body` with its hash tag, through a temporary file and a rename.
pub fn write(path: &Path, hash: &str, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let text = if is_svg(path) {
        format!("{SVG_PREFIX}{hash} -->\n{body}")
    } else if is_json(path) {
        body.to_string()
    } else {
        format!("{PREFIX}{hash}\n{body}")
    };
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// Hash recorded in an artifact, if it exists and carries one.
pub fn stored_hash(path: &Path) -> Option<String> {
    let text = fs::read_to_string(path).ok()?;
    if is_json(path) {
        let v: serde_json::Value = serde_json::from_str(&text).ok()?;
        return v.get("config_hash")?.as_str().map(String::from);
    }
    let first = text.lines().next()?;
    let rest = if is_svg(path) {
        first.strip_prefix(SVG_PREFIX)?.strip_suffix(" -->")?
    } else {
        first.strip_prefix(PREFIX)?
    };
    Some(rest.to_string())
}

pub fn is_fresh(path: &Path, hash: &str) -> bool {
    stored_hash(path).as_deref() == Some(hash)
}

/// Body of an upstream artifact, checked against the hash the current
/// configuration expects.
pub fn read(path: &Path, hash: &str, stage: &'static str) -> Result<String> {
    if !path.exists() {
        return Err(CliError::MissingArtifact {
            path: path.to_path_buf(),
            stage,
        });
    }
    if !is_fresh(path, hash) {
        return Err(CliError::StaleArtifact {
            path: path.to_path_buf(),
            stage,
        });
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(match text.split_once('\n') {
        Some((_, body)) if !is_json(path) => body.to_string(),
        _ => text,
    })
}

/// Every file under `root`, as sorted relative paths.
pub fn tree(root: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| CliError::io(&dir, e))? {
            let p = entry.map_err(|e| CliError::io(&dir, e))?.path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(root).unwrap_or(&p).to_path_buf());
            }
        }
    }
    out.sort();
    Ok(out)
}
