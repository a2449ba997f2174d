//! On-disk memo of canonical basis records: one JSON file per target under a
//! directory, written atomically through a temporary file and a rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use supercanon::matrices::{SuperMatrix, SuperShape};
use supercanon::uplus::{CanonicalRecord, Side};

#[derive(Serialize, Deserialize)]
struct Entry {
    side: Side,
    record: CanonicalRecord,
}

#[derive(Debug, Clone, Serialize)]
pub struct CacheStats {
    pub dir: PathBuf,
    pub files: usize,
    pub bytes: u64,
}

pub struct RecordCache {
    dir: PathBuf,
}

impl RecordCache {
    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create cache directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, shape: SuperShape, side: Side, a: &SuperMatrix) -> PathBuf {
        let digest = Sha256::digest(a.to_text().as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.dir.join(format!(
            "{}-{}-{}-{}.json",
            shape.m,
            shape.n,
            side,
            &hex[..32]
        ))
    }

    /// The stored record for `a`, or `None` if absent. A file that does not
    /// parse, or that belongs to another matrix, is an error naming its path.
    pub fn load(
        &self,
        shape: SuperShape,
        side: Side,
        a: &SuperMatrix,
    ) -> Result<Option<CanonicalRecord>> {
        let path = self.path_for(shape, side, a);
        if !path.exists() {
            return Ok(None);
        }
        let entry = read_entry(&path)?;
        if entry.side != side || &entry.record.target != a {
            bail!(
                "corrupt cache file {}: holds a record for another target",
                path.display()
            );
        }
        Ok(Some(entry.record))
    }

    pub fn store(&self, side: Side, record: &CanonicalRecord) -> Result<()> {
        let shape = record.target.shape();
        let path = self.path_for(shape, side, &record.target);
        let json = serde_json::to_vec_pretty(&Entry {
            side,
            record: record.clone(),
        })?;
        let tmp = path.with_extension(format!("json.tmp{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)
                .with_context(|| format!("cannot write {}", tmp.display()))?;
            f.write_all(&json)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)
            .with_context(|| format!("cannot move {} into place", tmp.display()))?;
        Ok(())
    }

    fn json_files(&self) -> Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        for entry in fs::read_dir(&self.dir)
            .with_context(|| format!("cannot read {}", self.dir.display()))?
        {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                out.push(path);
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn stats(&self) -> Result<CacheStats> {
        let files = self.json_files()?;
        let mut bytes = 0;
        for f in &files {
            bytes += fs::metadata(f)?.len();
        }
        Ok(CacheStats {
            dir: self.dir.clone(),
            files: files.len(),
            bytes,
        })
    }

    /// Removes every record; returns how many files were deleted.
    pub fn clear(&self) -> Result<usize> {
        let files = self.json_files()?;
        for f in &files {
            fs::remove_file(f).with_context(|| format!("cannot remove {}", f.display()))?;
        }
        Ok(files.len())
    }

    /// Parses every record, failing on the first corrupt file.
    pub fn verify(&self) -> Result<usize> {
        let files = self.json_files()?;
        for f in &files {
            read_entry(f)?;
        }
        Ok(files.len())
    }
}

fn read_entry(path: &Path) -> Result<Entry> {
    let bytes = fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_slice(&bytes).with_context(|| format!("corrupt cache file {}", path.display()))
}
