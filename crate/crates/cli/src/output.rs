use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

pub fn sha256_hex(data: &[u8]) -> String {
    format!("{:x}", Sha256::digest(data))
}

/// Output directory that records every file it writes. Without a root
/// nothing is written.
pub struct OutDir {
    root: Option<PathBuf>,
    files: Vec<FileEntry>,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<OutDir> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(OutDir {
            root: Some(root.to_path_buf()),
            files: Vec::new(),
        })
    }

    pub fn discard() -> OutDir {
        OutDir {
            root: None,
            files: Vec::new(),
        }
    }

    pub fn write(&mut self, name: &str, data: &[u8]) -> Result<()> {
        let Some(root) = &self.root else { return Ok(()) };
        let path = root.join(name);
        fs::write(&path, data).with_context(|| format!("writing {}", path.display()))?;
        self.files.retain(|f| f.name != name);
        self.files.push(FileEntry {
            name: name.to_owned(),
            bytes: data.len() as u64,
            sha256: sha256_hex(data),
        });
        Ok(())
    }

    pub fn write_json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.write(name, &text)
    }

    /// Writes `manifest.json` through a temporary file and a rename, so a
    /// manifest is either absent or complete.
    pub fn finish(self, manifest: impl FnOnce(Vec<FileEntry>) -> serde_json::Value) -> Result<()> {
        let Some(root) = &self.root else { return Ok(()) };
        let value = manifest(self.files);
        let mut text = serde_json::to_vec_pretty(&value)?;
        text.push(b'\n');
        let tmp = root.join(".manifest.json.tmp");
        fs::write(&tmp, text).with_context(|| format!("writing {}", tmp.display()))?;
        fs::rename(&tmp, root.join("manifest.json")).context("publishing manifest.json")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn manifest_lists_files_once() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutDir::create(dir.path()).unwrap();
        out.write("a.csv", b"x\n1\n").unwrap();
        out.write("a.csv", b"x\n2\n").unwrap();
        out.finish(|files| {
            assert_eq!(files.len(), 1);
            assert_eq!(files[0].sha256, sha256_hex(b"x\n2\n"));
            serde_json::json!({ "files": files })
        })
        .unwrap();
        assert!(dir.path().join("manifest.json").exists());
        assert!(!dir.path().join(".manifest.json.tmp").exists());
    }
}
