//! Result-file plumbing: CSV traces and JSON summaries, each embedding the
//! resolved run configuration and the crate version, committed by atomic
//! rename so partially written artifacts are never observed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub struct Reporter {
    out_dir: PathBuf,
    config: serde_json::Value,
}

impl Reporter {
    pub fn new(out_dir: &Path, config: &RunConfig) -> Result<Self> {
        fs::create_dir_all(out_dir)?;
        let config = serde_json::to_value(config)
            .map_err(|e| Error::Config(format!("config not serializable: {e}")))?;
        Ok(Reporter {
            out_dir: out_dir.to_path_buf(),
            config,
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    pub fn path_of(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    fn commit(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let fin = self.out_dir.join(name);
        let tmp = self.out_dir.join(format!(".{name}.tmp"));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &fin)?;
        Ok(fin)
    }

    /// JSON artifact `{version, config, result}`.
    pub fn write_json<T: Serialize>(&self, name: &str, result: &T) -> Result<PathBuf> {
        let doc = json!({
            "version": VERSION,
            "config": self.config,
            "result": result,
        });
        let mut text = serde_json::to_string_pretty(&doc)
            .map_err(|e| Error::Numerical(format!("result not serializable: {e}")))?;
        text.push('\n');
        self.commit(name, text.as_bytes())
    }

    /// CSV artifact with `# version=` and `# config=` comment lines up front.
    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let mut buf = Vec::new();
        writeln!(buf, "# version={VERSION}")?;
        writeln!(buf, "# config={}", self.config)?;
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(header)
            .map_err(|e| Error::Numerical(format!("csv: {e}")))?;
        for row in rows {
            w.write_record(row)
                .map_err(|e| Error::Numerical(format!("csv: {e}")))?;
        }
        let buf = w
            .into_inner()
            .map_err(|e| Error::Numerical(format!("csv: {e}")))?;
        self.commit(name, &buf)
    }

    /// Read back the `result` part of an artifact written by `write_json`.
    pub fn read_result(&self, name: &str) -> Result<Option<serde_json::Value>> {
        let path = self.out_dir.join(name);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path)?;
        let doc: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Error::Numerical(format!("{}: {e}", path.display())))?;
        Ok(Some(doc.get("result").cloned().unwrap_or(serde_json::Value::Null)))
    }
}

/// Fixed-format float for deterministic CSV cells.
pub fn fmt(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.12e}")
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reporter(dir: &Path) -> Reporter {
        let mut cfg = RunConfig::default();
        cfg.out_dir = dir.to_path_buf();
        Reporter::new(dir, &cfg).unwrap()
    }

    #[test]
    fn json_artifact_embeds_version_and_config_and_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let r = reporter(dir.path());
        let p1 = r.write_json("x.json", &json!({"a": 1})).unwrap();
        let b1 = fs::read(&p1).unwrap();
        let p2 = r.write_json("x.json", &json!({"a": 1})).unwrap();
        let b2 = fs::read(&p2).unwrap();
        assert_eq!(b1, b2, "identical payloads must be byte-identical");
        let text = String::from_utf8(b1).unwrap();
        assert!(text.contains("\"version\""));
        assert!(text.contains("\"config\""));
        let back = r.read_result("x.json").unwrap().unwrap();
        assert_eq!(back["a"], 1);
    }

    #[test]
    fn csv_artifact_has_header_and_comment_preamble() {
        let dir = tempfile::tempdir().unwrap();
        let r = reporter(dir.path());
        let rows = vec![vec![fmt(1e-10), fmt(0.25)], vec![fmt(0.0), fmt_opt(None)]];
        let p = r.write_csv("t.csv", &["nu", "slope"], &rows).unwrap();
        let text = fs::read_to_string(p).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# version="));
        assert!(lines.next().unwrap().starts_with("# config="));
        assert_eq!(lines.next().unwrap(), "nu,slope");
        assert!(text.lines().count() >= 5);
    }

    #[test]
    fn missing_artifact_reads_as_none() {
        let dir = tempfile::tempdir().unwrap();
        let r = reporter(dir.path());
        assert!(r.read_result("absent.json").unwrap().is_none());
    }
}
