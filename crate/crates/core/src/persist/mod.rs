//! Event-log ingestion, state snapshots, and CSV reports.

pub mod eventlog;
pub mod ingest;
pub mod report;
pub mod snapshot;

use std::io::Write;
use std::path::Path;

pub use eventlog::{
    parse_event_line, parse_event_log, render_event_line, EventLogError, EventRecord,
};
pub use ingest::{ingest, ingest_files, IngestError, IngestOutput};
pub use snapshot::{SnapshotError, StateSnapshot, SNAPSHOT_FORMAT};

/// Writes `bytes` to a temp file next to `path`, syncs it, and renames it
/// over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| std::io::Error::new(std::io::ErrorKind::InvalidInput, "no file name"))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    let mut f = std::fs::File::create(&tmp)?;
    f.write_all(bytes)?;
    f.sync_all()?;
    drop(f);
    std::fs::rename(&tmp, path)
}
