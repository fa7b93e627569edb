use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

/// Writes reports into one directory, stamping each with the config hash
/// and master seed.
#[derive(Debug, Clone)]
pub struct ArtifactWriter {
    dir: PathBuf,
    config_sha256: String,
    seed: u64,
    written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    subcommand: &'a str,
    config_sha256: &'a str,
    seed: u64,
    passed: bool,
    report: &'a T,
}

/// Empty for `None`, shortest round-trip text otherwise.
pub fn field(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl ArtifactWriter {
    pub fn new(dir: &Path, config_sha256: &str, seed: u64) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(ArtifactWriter { dir: dir.to_path_buf(), config_sha256: config_sha256.to_string(), seed, written: vec![] })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn json<T: Serialize>(&mut self, name: &str, subcommand: &str, passed: bool, report: &T) -> Result<(), CliError> {
        let env = Envelope { subcommand, config_sha256: &self.config_sha256, seed: self.seed, passed, report };
        let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Internal(e.to_string()))?;
        text.push('\n');
        let path = self.dir.join(name);
        fs::write(&path, text)?;
        self.written.push(path);
        Ok(())
    }

    /// Header row, records, then one `#` line carrying the stamp.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(vec![]);
        let csv_err = |e: csv::Error| CliError::Internal(e.to_string());
        w.write_record(header).map_err(csv_err)?;
        for r in rows {
            w.write_record(r).map_err(csv_err)?;
        }
        let mut bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
        bytes.extend_from_slice(format!("# config_sha256={} seed={}\r\n", self.config_sha256, self.seed).as_bytes());
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.written.push(path);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_stamp() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path(), "abc", 7).unwrap();
        w.csv("t.csv", &["x", "y"], &[vec!["1".into(), field(None)], vec!["0.1".into(), field(Some(2.5))]]).unwrap();
        let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        assert_eq!(text, "x,y\r\n1,\r\n0.1,2.5\r\n# config_sha256=abc seed=7\r\n");
    }

    #[test]
    fn json_envelope() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(dir.path(), "abc", 7).unwrap();
        w.json("r.json", "gamma0", true, &serde_json::json!({"k": 1})).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
        assert_eq!(v["seed"], 7);
        assert_eq!(v["config_sha256"], "abc");
        assert_eq!(v["report"]["k"], 1);
    }
}
