//! Append-only checkpoint logs and the per-run lock file.
//!
//! A log is JSON lines: a header `{"run_id", "stage", "config_digest"}`
//! followed by one record per completed unit. A torn final line (the
//! process died mid-write) is ignored on load.

use std::fs::{self, File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Coupling,
    Lag,
}

impl Stage {
    pub fn file_name(self) -> &'static str {
        match self {
            Stage::Coupling => "checkpoint_stage1.log",
            Stage::Lag => "checkpoint_stage2.log",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub run_id: String,
    pub stage: Stage,
    pub config_digest: String,
}

pub struct CheckpointLog {
    path: PathBuf,
    file: File,
}

impl CheckpointLog {
    /// Starts a fresh log, discarding any previous one.
    pub fn create(path: &Path, header: &CheckpointHeader) -> Result<Self, PipelineError> {
        let mut file = File::create(path).map_err(|e| PipelineError::io(path, e))?;
        let mut line = serde_json::to_vec(header).expect("header serializes");
        line.push(b'\n');
        file.write_all(&line).map_err(|e| PipelineError::io(path, e))?;
        file.sync_data().map_err(|e| PipelineError::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            file,
        })
    }

    /// Opens an existing log for appending and returns its records. Refuses
    /// a log written under a different config digest. A missing log starts
    /// fresh.
    pub fn resume<T: DeserializeOwned>(path: &Path, header: &CheckpointHeader) -> Result<(Self, Vec<T>), PipelineError> {
        if !path.exists() {
            return Ok((Self::create(path, header)?, Vec::new()));
        }
        let bytes = fs::read(path).map_err(|e| PipelineError::io(path, e))?;
        // Only newline-terminated lines are complete records.
        let complete = bytes.iter().rposition(|&c| c == b'\n').map_or(0, |i| i + 1);
        let lines: Vec<&[u8]> = bytes[..complete].split(|&c| c == b'\n').filter(|l| !l.is_empty()).collect();
        if complete < bytes.len() {
            log::warn!("{}: ignoring torn final record", path.display());
        }
        let mut records = Vec::new();
        for (i, line) in lines.iter().enumerate() {
            if i == 0 {
                let found: CheckpointHeader = serde_json::from_slice(line).map_err(|e| {
                    PipelineError::CorruptCheckpoint(format!("{}: bad header: {e}", path.display()))
                })?;
                if found.stage != header.stage {
                    return Err(PipelineError::CorruptCheckpoint(format!(
                        "{} belongs to stage {:?}",
                        path.display(),
                        found.stage
                    )));
                }
                if found.config_digest != header.config_digest {
                    return Err(PipelineError::DigestMismatch {
                        checkpoint: found.config_digest,
                        live: header.config_digest.clone(),
                    });
                }
            } else {
                match serde_json::from_slice::<T>(line) {
                    Ok(r) => records.push(r),
                    Err(e) => {
                        return Err(PipelineError::CorruptCheckpoint(format!(
                            "{}: record {i}: {e}",
                            path.display()
                        )))
                    }
                }
            }
        }
        if lines.is_empty() {
            return Ok((Self::create(path, header)?, Vec::new()));
        }
        let file = OpenOptions::new().append(true).open(path).map_err(|e| PipelineError::io(path, e))?;
        // Drop the torn tail before appending.
        file.set_len(complete as u64).map_err(|e| PipelineError::io(path, e))?;
        let log = Self {
            path: path.to_path_buf(),
            file,
        };
        Ok((log, records))
    }

    pub fn append<T: Serialize>(&mut self, records: &[T]) -> Result<(), PipelineError> {
        let mut buf = Vec::new();
        for r in records {
            serde_json::to_writer(&mut buf, r).expect("record serializes");
            buf.push(b'\n');
        }
        self.file.write_all(&buf).map_err(|e| PipelineError::io(&self.path, e))?;
        self.file.sync_data().map_err(|e| PipelineError::io(&self.path, e))
    }
}

/// Exclusive claim on a run directory, released on drop. The file holds
/// the owner's PID; a lock whose PID is no longer alive is taken over.
pub struct RunLock {
    path: PathBuf,
}

fn pid_alive(pid: u32) -> bool {
    if cfg!(target_os = "linux") {
        Path::new(&format!("/proc/{pid}")).exists()
    } else {
        true
    }
}

impl RunLock {
    pub fn acquire(run_dir: &Path) -> Result<Self, PipelineError> {
        let path = run_dir.join(".lock");
        for _ in 0..2 {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    write!(f, "{}", std::process::id()).map_err(|e| PipelineError::io(&path, e))?;
                    return Ok(Self { path });
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    let holder = fs::read_to_string(&path).unwrap_or_default();
                    match holder.trim().parse::<u32>() {
                        Ok(pid) if pid != std::process::id() && pid_alive(pid) => {
                            return Err(PipelineError::Locked {
                                path: path.display().to_string(),
                                pid,
                            })
                        }
                        _ => {
                            log::warn!("removing stale lock {}", path.display());
                            fs::remove_file(&path).map_err(|e| PipelineError::io(&path, e))?;
                        }
                    }
                }
                Err(e) => return Err(PipelineError::io(&path, e)),
            }
        }
        Err(PipelineError::Locked {
            path: path.display().to_string(),
            pid: 0,
        })
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(digest: &str) -> CheckpointHeader {
        CheckpointHeader {
            run_id: "r".into(),
            stage: Stage::Coupling,
            config_digest: digest.into(),
        }
    }

    #[test]
    fn append_and_resume() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.log");
        let mut log = CheckpointLog::create(&p, &header("d")).unwrap();
        log.append(&[1.5f64, 0.1 + 0.2]).unwrap();
        drop(log);
        let (mut log, recs) = CheckpointLog::resume::<f64>(&p, &header("d")).unwrap();
        assert_eq!(recs, vec![1.5, 0.1 + 0.2]);
        log.append(&[3.0f64]).unwrap();
        let (_, recs) = CheckpointLog::resume::<f64>(&p, &header("d")).unwrap();
        assert_eq!(recs.len(), 3);
    }

    #[test]
    fn torn_tail_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.log");
        let mut log = CheckpointLog::create(&p, &header("d")).unwrap();
        log.append(&[vec![1, 2]]).unwrap();
        drop(log);
        let mut f = OpenOptions::new().append(true).open(&p).unwrap();
        f.write_all(b"[3,").unwrap();
        drop(f);
        let (mut log, recs) = CheckpointLog::resume::<Vec<i32>>(&p, &header("d")).unwrap();
        assert_eq!(recs, vec![vec![1, 2]]);
        log.append(&[vec![4]]).unwrap();
        let (_, recs) = CheckpointLog::resume::<Vec<i32>>(&p, &header("d")).unwrap();
        assert_eq!(recs, vec![vec![1, 2], vec![4]]);
    }

    #[test]
    fn digest_mismatch_refused() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.log");
        CheckpointLog::create(&p, &header("old")).unwrap();
        let e = CheckpointLog::resume::<f64>(&p, &header("new")).err().unwrap();
        assert!(matches!(e, PipelineError::DigestMismatch { .. }));
    }

    #[test]
    fn lock_is_exclusive_and_released() {
        let dir = tempfile::tempdir().unwrap();
        // A foreign live PID: our parent.
        let parent = std::os::unix::process::parent_id();
        fs::write(dir.path().join(".lock"), parent.to_string()).unwrap();
        assert!(matches!(RunLock::acquire(dir.path()), Err(PipelineError::Locked { .. })));
        // Stale PID.
        fs::write(dir.path().join(".lock"), "4000000000").unwrap();
        let lock = RunLock::acquire(dir.path()).unwrap();
        drop(lock);
        assert!(!dir.path().join(".lock").exists());
    }
}
