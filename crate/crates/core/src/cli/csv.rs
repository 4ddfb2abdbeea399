use std::fs::File;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub name: String,
    pub rows: usize,
    pub columns: Vec<String>,
}

/// Shortest representation that reads back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub struct CsvFile {
    out: csv::Writer<File>,
    record: FileRecord,
}

fn io(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

impl CsvFile {
    pub fn create(dir: &Path, name: &str, columns: &[&str]) -> Result<Self> {
        let mut out = csv::Writer::from_path(dir.join(name)).map_err(io)?;
        out.write_record(columns).map_err(io)?;
        Ok(CsvFile {
            out,
            record: FileRecord {
                name: name.into(),
                rows: 0,
                columns: columns.iter().map(|c| c.to_string()).collect(),
            },
        })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        self.out.write_record(fields).map_err(io)?;
        self.record.rows += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<FileRecord> {
        self.out.flush()?;
        Ok(self.record)
    }
}
