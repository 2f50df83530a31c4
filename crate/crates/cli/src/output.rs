use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

/// Files produced by one command, committed together only once every one
/// of them has been rendered.
#[derive(Default)]
pub struct Outputs {
    pending: Vec<(PathBuf, String)>,
}

impl Outputs {
    pub fn add(&mut self, path: impl Into<PathBuf>, contents: String) {
        self.pending.push((path.into(), contents));
    }

    /// Writes each file to a temporary sibling, then renames them into
    /// place. Nothing is renamed unless every temporary write succeeded.
    pub fn commit(self) -> std::io::Result<()> {
        let mut staged = Vec::with_capacity(self.pending.len());
        for (path, contents) in self.pending {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let mut tmp = NamedTempFile::new_in(&dir)?;
            // Temp files are created 0600; outputs should look like ordinary files.
            #[cfg(unix)]
            {
                use std::os::unix::fs::PermissionsExt;
                tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644))?;
            }
            tmp.write_all(contents.as_bytes())?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, path));
        }
        for (tmp, path) in staged {
            tmp.persist(&path).map_err(|e| e.error)?;
        }
        Ok(())
    }
}

/// `dir/name.json` → `dir/name.limit.json`.
pub fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
    path.with_file_name(format!("{stem}.{tag}{ext}"))
}

pub fn csv_table(report: &asymlim::asymptotics::ConvergenceReport) -> String {
    let mut out = String::from("n,error,bound\n");
    for s in &report.steps {
        let bound = s.bound.map(|b| format!("{b:.16e}")).unwrap_or_default();
        out.push_str(&format!("{},{:.16e},{}\n", s.n, s.error, bound));
    }
    out
}
