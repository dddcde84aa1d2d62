//! Content manifest of an output directory.

use std::fs;
use std::path::{Path, PathBuf};

use aigpt_core::io::write_file;
use aigpt_core::{Error, Result};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.tsv";

fn collect(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// `(relative path, sha256, bytes)` for every file under `root` except the
/// manifest and the run log, sorted by path.
pub fn manifest_entries(root: &Path) -> Result<Vec<(String, String, u64)>> {
    let mut files = Vec::new();
    collect(root, &mut files)?;
    let mut entries = Vec::new();
    for path in files {
        let rel = path
            .strip_prefix(root)
            .expect("walked from root")
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        if rel == MANIFEST || rel == crate::runlog::RUN_LOG {
            continue;
        }
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        entries.push((rel, hex::encode(Sha256::digest(&bytes)), bytes.len() as u64));
    }
    entries.sort();
    Ok(entries)
}

/// Rewrites the manifest and returns the number of listed artifacts.
pub fn write_manifest(root: &Path) -> Result<usize> {
    let entries = manifest_entries(root)?;
    let mut text = String::from("path\tsha256\tbytes\n");
    for (path, hash, len) in &entries {
        text.push_str(&format!("{path}\t{hash}\t{len}\n"));
    }
    write_file(&root.join(MANIFEST), &text)?;
    Ok(entries.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_nested_files_but_not_itself_or_the_log() {
        let dir = tempfile::tempdir().unwrap();
        write_file(&dir.path().join("a/b.txt"), "abc").unwrap();
        write_file(&dir.path().join("run.log"), "noise").unwrap();
        assert_eq!(write_manifest(dir.path()).unwrap(), 1);
        assert_eq!(write_manifest(dir.path()).unwrap(), 1);
        let entries = manifest_entries(dir.path()).unwrap();
        assert_eq!(entries[0].0, "a/b.txt");
        assert_eq!(entries[0].1, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
