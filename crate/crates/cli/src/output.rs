use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::CliError;

/// 12 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// `# `-prefixed metadata lines shared by every result file.
pub struct Header {
    lines: Vec<String>,
}

impl Header {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        let echo = serde_json::to_string(&cfg.effective()).expect("config serializes");
        Header {
            lines: vec![
                format!("thz-orient {}", env!("CARGO_PKG_VERSION")),
                format!("command: {command}"),
                format!("config_hash: {}", cfg.hash()),
                format!("config: {echo}"),
            ],
        }
    }

    pub fn line(&mut self, text: impl Into<String>) -> &mut Self {
        self.lines.push(text.into());
        self
    }

    pub fn render(&self) -> String {
        self.lines.iter().map(|l| format!("# {l}\n")).collect()
    }
}

/// Collects files and writes each one by rename from a temporary sibling.
pub struct OutputSet {
    dir: PathBuf,
    stem: String,
    pub written: Vec<PathBuf>,
}

impl OutputSet {
    pub fn new(dir: &Path, command: &str, cfg: &RunConfig) -> Self {
        OutputSet {
            dir: dir.to_path_buf(),
            stem: format!("{command}_{}", cfg.hash()),
            written: Vec::new(),
        }
    }

    pub fn path(&self, suffix: &str) -> PathBuf {
        self.dir.join(format!("{}{suffix}", self.stem))
    }

    pub fn write(&mut self, suffix: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.path(suffix);
        write_atomic(&path, contents.as_bytes())?;
        self.written.push(path.clone());
        Ok(path)
    }
}

pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    let io = |e: std::io::Error| CliError::Runtime(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
