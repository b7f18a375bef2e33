//! CSV and JSON report emission. Files are written to a temporary file in
//! the target directory and renamed into place.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::RunConfig;
use crate::bounds::{ScanTable, COLUMNS};
use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            status: if pass { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeEntry {
    pub slope: f64,
    pub residual: f64,
    /// Slope of the predicted envelope over the same rows, if it is a power law.
    pub predicted: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Seeds {
    pub seed: u64,
    pub oracle_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub command: String,
    pub config_hash: String,
    pub version: String,
    pub seeds: Seeds,
    pub rows: usize,
    pub error_rows: usize,
    pub slopes: BTreeMap<String, SlopeEntry>,
    pub bands: BTreeMap<String, f64>,
    pub values: BTreeMap<String, serde_json::Value>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub notes: Vec<String>,
    pub config: RunConfig,
}

impl Summary {
    pub fn new(command: &str, config: &RunConfig) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            config_hash: config_hash(config)?,
            version: VERSION.to_string(),
            seeds: Seeds {
                seed: config.seed,
                oracle_seed: config.oracle.seed,
            },
            rows: 0,
            error_rows: 0,
            slopes: BTreeMap::new(),
            bands: BTreeMap::new(),
            values: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            notes: Vec::new(),
            config: config.clone(),
        })
    }

    pub fn verdict(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.verdicts.insert(name.to_string(), Verdict::new(pass, detail));
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.status == Status::Pass)
    }
}

/// SHA-256 of the canonical JSON of the resolved config.
pub fn config_hash(config: &RunConfig) -> Result<String> {
    let bytes = serde_json::to_vec(config).map_err(|e| Error::Input(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Scan table as CSV with the fixed header
/// `t,<COLUMNS...>,status`.
pub fn scan_csv(table: &ScanTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t"];
    header.extend(COLUMNS);
    header.push("status");
    w.write_record(&header).map_err(csv_err)?;
    for row in &table.rows {
        let mut rec = vec![format!("{:e}", row.t)];
        for c in COLUMNS {
            let v = match &row.report {
                Some(r) => r.column(c)?,
                None => None,
            };
            rec.push(fmt_opt(v));
        }
        rec.push(row.status.clone());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Input(e.to_string()))
}

/// CSV with arbitrary string cells.
pub fn table_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::Input(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Input(format!("csv: {e}"))
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportBundle {
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub log_path: PathBuf,
}

/// Everything a command produced, ready to be written.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub csv: Vec<u8>,
    pub summary: Summary,
    pub log: Vec<String>,
}

/// Writes `<command>.csv`, `<command>_summary.json` and `<command>.log` into `out_dir`.
pub fn emit_report(out_dir: &Path, output: &RunOutput) -> Result<ReportBundle> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let name = &output.summary.command;
    let bundle = ReportBundle {
        csv_path: out_dir.join(format!("{name}.csv")),
        summary_path: out_dir.join(format!("{name}_summary.json")),
        log_path: out_dir.join(format!("{name}.log")),
    };
    write_atomic(&bundle.csv_path, &output.csv)?;
    let mut json = serde_json::to_vec_pretty(&output.summary).map_err(|e| Error::Input(e.to_string()))?;
    json.push(b'\n');
    write_atomic(&bundle.summary_path, &json)?;
    let mut log = output.log.join("\n");
    log.push('\n');
    write_atomic(&bundle.log_path, log.as_bytes())?;
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn unwritable_directory_names_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("plain");
        std::fs::write(&file, b"x").unwrap();
        // a regular file cannot act as a directory
        let target = file.join("out.csv");
        let e = write_atomic(&target, b"x").unwrap_err();
        assert!(e.to_string().contains("plain"), "{e}");
    }

    #[test]
    fn table_csv_quotes_commas() {
        let bytes = table_csv(&["a", "b"], &[vec!["1".into(), "x, y".into()]]).unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "a,b\n1,\"x, y\"\n");
    }
}
