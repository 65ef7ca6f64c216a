//! JSON Lines archives: a metadata header line, then one record per line.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use hullform_core::optimize::{Archive, EvaluationRecord, RunMetadata, ARCHIVE_SCHEMA_VERSION};
use hullform_core::rng::digest;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Header {
    metadata: RunMetadata,
}

pub fn archive_string(archive: &Archive) -> String {
    let mut s = serde_json::to_string(&Header {
        metadata: archive.metadata().clone(),
    })
    .expect("metadata serializes");
    s.push('\n');
    for r in archive.records() {
        s.push_str(&serde_json::to_string(r).expect("record serializes"));
        s.push('\n');
    }
    s
}

/// Write the whole archive through a temporary file so a crash never leaves
/// a truncated archive behind.
pub fn save_archive(path: &Path, archive: &Archive) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = path.with_extension("jsonl.tmp");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(archive_string(archive).as_bytes()).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_archive(path: &Path) -> Result<Archive> {
    let f = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(f).lines();
    let json_err = |line: usize| {
        move |source| Error::Json {
            path: path.to_path_buf(),
            line,
            source,
        }
    };
    let first = lines
        .next()
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "empty archive".into(),
        })?
        .map_err(|e| Error::io(path, e))?;
    let header: Header = serde_json::from_str(&first).map_err(json_err(1))?;
    if header.metadata.schema_version != ARCHIVE_SCHEMA_VERSION {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: format!(
                "archive schema version {} (this build reads {ARCHIVE_SCHEMA_VERSION})",
                header.metadata.schema_version
            ),
        });
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EvaluationRecord = serde_json::from_str(&line).map_err(json_err(i + 2))?;
        records.push(rec);
    }
    Archive::from_records(header.metadata, records).map_err(|source| Error::Data {
        path: path.to_path_buf(),
        source,
    })
}

/// Digest of the archive content with wall times zeroed, so two runs of the
/// same configuration compare equal.
pub fn content_digest(archive: &Archive) -> u64 {
    let mut s = serde_json::to_string(archive.metadata()).expect("metadata serializes");
    for r in archive.records() {
        let r = EvaluationRecord {
            wall_time_s: 0.0,
            ..r.clone()
        };
        s.push_str(&serde_json::to_string(&r).expect("record serializes"));
    }
    digest(s.as_bytes())
}
