//! Reading inputs and writing reports: CSV (RFC 4180), JSON and the output
//! directory with its manifest.

use std::fs;
use std::path::{Path, PathBuf};

use latentkit_core::Matrix;
use latentkit_core::dataset::{RawTable, ResponseMatrix, ScoreTable};
use serde::Serialize;
use serde::de::DeserializeOwned;

use crate::error::{Error, Result};

/// Reads a delimited file with a header row. Rows with the wrong number of
/// fields are kept so ingestion can report them.
pub fn read_table(path: &Path) -> Result<RawTable> {
    let csv_err = |source| Error::Csv { path: path.to_path_buf(), source };
    let bytes = fs::read(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(bytes.as_slice());
    let header = rdr.headers().map_err(csv_err)?.iter().map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        rows.push(rec.map_err(csv_err)?.iter().map(str::to_string).collect());
    }
    Ok(RawTable { header, rows })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|source| Error::Read { path: path.to_path_buf(), source })?;
    serde_json::from_slice(&bytes).map_err(|source| Error::Json { path: path.to_path_buf(), source })
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("reports serialize to JSON");
    out.push(b'\n');
    out
}

/// Shortest round-trip decimal; non-finite values become empty cells.
pub fn num(v: f64) -> String {
    if v.is_finite() { format!("{v}") } else { String::new() }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}

/// In-memory CSV document.
pub struct CsvDoc {
    writer: csv::Writer<Vec<u8>>,
}

impl CsvDoc {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let mut doc = CsvDoc { writer: csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new()) };
        doc.row(header);
        doc
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        self.writer.write_record(cells.iter().map(|c| c.as_ref())).expect("writing to memory");
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.writer.into_inner().expect("flushing to memory")
    }
}

/// Responses with a leading id column; missing values are empty cells.
pub fn responses_csv(m: &ResponseMatrix, id_column: &str) -> Vec<u8> {
    let mut header = vec![id_column.to_string()];
    header.extend(m.item_ids.iter().cloned());
    let mut doc = CsvDoc::new(&header);
    for (i, id) in m.respondent_ids.iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend(m.row(i).iter().map(|v| v.map_or_else(String::new, |x| x.to_string())));
        doc.row(&row);
    }
    doc.into_bytes()
}

pub fn scores_csv(t: &ScoreTable) -> Vec<u8> {
    let mut header = vec!["respondent".to_string()];
    header.extend(t.names());
    let mut doc = CsvDoc::new(&header);
    for (i, id) in t.respondent_ids.iter().enumerate() {
        let mut row = vec![id.clone()];
        row.extend(t.columns.iter().map(|c| opt_num(c.values[i])));
        doc.row(&row);
    }
    doc.into_bytes()
}

/// Labelled matrix; `corner` names the first header cell.
pub fn matrix_csv(corner: &str, rows: &[String], cols: &[String], m: &Matrix) -> Vec<u8> {
    let mut header = vec![corner.to_string()];
    header.extend(cols.iter().cloned());
    let mut doc = CsvDoc::new(&header);
    for (i, r) in rows.iter().enumerate() {
        let mut row = vec![r.clone()];
        row.extend((0..m.ncols()).map(|j| num(m[(i, j)])));
        doc.row(&row);
    }
    doc.into_bytes()
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub status: String,
    pub files: Vec<ManifestEntry>,
}

/// Output directory that remembers what was written.
pub struct OutputDir {
    root: PathBuf,
    written: Vec<ManifestEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|source| Error::Write { path: root.to_path_buf(), source })?;
        Ok(OutputDir { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|source| Error::Write { path, source })?;
        self.written.retain(|e| e.file != name);
        self.written.push(ManifestEntry { file: name.to_string(), bytes: bytes.len() });
        Ok(())
    }

    pub fn files(&self) -> &[ManifestEntry] {
        &self.written
    }

    /// Writes `manifest.json` listing every file produced so far.
    pub fn finish(&mut self, command: &str, status: &str) -> Result<()> {
        let manifest = Manifest { command: command.to_string(), status: status.to_string(), files: self.written.clone() };
        let path = self.root.join("manifest.json");
        fs::write(&path, json_bytes(&manifest)).map_err(|source| Error::Write { path, source })
    }
}
