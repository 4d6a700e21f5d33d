use std::cell::RefCell;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use tempfile::NamedTempFile;

pub const DATA_DIR: &str = "data";
pub const MODELS_DIR: &str = "models";
pub const TRACES_DIR: &str = "traces";
pub const REPORTS_DIR: &str = "reports";

/// Output directory that writes files atomically and remembers what it wrote,
/// so a failed pipeline can remove its partial results.
pub struct OutputDir {
    root: PathBuf,
    written: RefCell<Vec<PathBuf>>,
}

impl OutputDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        OutputDir {
            root: root.into(),
            written: RefCell::new(Vec::new()),
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, sub: &str, name: &str) -> PathBuf {
        self.root.join(sub).join(name)
    }

    /// Writes `contents` to `<root>/<sub>/<name>` via a temp file and rename.
    pub fn write(&self, sub: &str, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let dir = self.root.join(sub);
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        let target = dir.join(name);
        let mut tmp =
            NamedTempFile::new_in(&dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
        tmp.write_all(contents)?;
        tmp.persist(&target)
            .with_context(|| format!("writing {}", target.display()))?;
        self.written.borrow_mut().push(target.clone());
        Ok(target)
    }

    pub fn written(&self) -> Vec<PathBuf> {
        self.written.borrow().clone()
    }

    /// Removes every file written through this handle.
    pub fn rollback(&self) {
        for p in self.written.borrow_mut().drain(..) {
            let _ = fs::remove_file(p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_and_rollback() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::new(dir.path());
        let p = out.write(REPORTS_DIR, "a.csv", b"x\n").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"x\n");
        out.write(REPORTS_DIR, "a.csv", b"y\n").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"y\n");
        out.rollback();
        assert!(!p.exists());
    }
}
