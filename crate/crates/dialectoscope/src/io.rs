//! Text artifact IO with transparent gzip support and content checksums.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::{Compression, GzBuilder};
use sha2::{Digest, Sha256};

use crate::error::{AppError, Result};

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// The gzip twin of a path: `name.ext` → `name.ext.gz`.
pub fn gz_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".gz");
    PathBuf::from(s)
}

/// The existing file for an artifact, preferring the plain name.
pub fn locate(path: &Path) -> Option<PathBuf> {
    if path.exists() {
        return Some(path.to_path_buf());
    }
    let gz = gz_path(path);
    gz.exists().then_some(gz)
}

/// Raw bytes of whichever variant of the artifact exists.
pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let found = locate(path).ok_or_else(|| AppError::MissingInput(path.to_path_buf()))?;
    fs::read(&found).map_err(|e| AppError::io(&found, e))
}

/// Reads a UTF-8 artifact, decompressing it if it is gzipped.
pub fn read_text(path: &Path) -> Result<String> {
    let raw = read_bytes(path)?;
    let bytes = if raw.starts_with(&GZIP_MAGIC) {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..])
            .read_to_end(&mut out)
            .map_err(|e| AppError::io(path, e))?;
        out
    } else {
        raw
    };
    String::from_utf8(bytes).map_err(|e| AppError::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: format!("not valid UTF-8: {e}"),
    })
}

/// Writes an artifact, gzipped under `<path>.gz` when `compress` is set.
/// The stale other variant is removed so exactly one copy exists. Gzip
/// headers carry no timestamp, keeping output byte-stable.
pub fn write_text(path: &Path, content: &str, compress: bool) -> Result<PathBuf> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    let (target, stale) = if compress {
        (gz_path(path), path.to_path_buf())
    } else {
        (path.to_path_buf(), gz_path(path))
    };
    let bytes = if compress {
        let mut enc = GzBuilder::new().mtime(0).write(Vec::new(), Compression::default());
        enc.write_all(content.as_bytes()).map_err(|e| AppError::io(&target, e))?;
        enc.finish().map_err(|e| AppError::io(&target, e))?
    } else {
        content.as_bytes().to_vec()
    };
    let tmp = target.with_extension("partial");
    fs::write(&tmp, &bytes).map_err(|e| AppError::io(&tmp, e))?;
    fs::rename(&tmp, &target).map_err(|e| AppError::io(&target, e))?;
    if stale.exists() {
        fs::remove_file(&stale).map_err(|e| AppError::io(&stale, e))?;
    }
    Ok(target)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Checksum of an artifact's stored bytes, if it exists.
pub fn file_checksum(path: &Path) -> Option<String> {
    let found = locate(path)?;
    fs::read(found).ok().map(|b| sha256_hex(&b))
}
