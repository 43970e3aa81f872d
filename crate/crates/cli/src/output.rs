//! CSV artifacts: `#` manifest lines, a header row, then data rows.
//!
//! Floats are written in scientific notation with 17 significant digits, which
//! round-trips every `f64` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Missing,
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Num(v)
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as i64)
    }
}

impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Field::Int(v as i64)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_owned())
    }
}

impl<T: Into<Field>> From<Option<T>> for Field {
    fn from(v: Option<T>) -> Self {
        v.map_or(Field::Missing, Into::into)
    }
}

pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_owned()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_owned()
    } else {
        format!("{x:.16e}")
    }
}

impl Field {
    pub fn render(&self) -> String {
        match self {
            Field::Num(x) => format_float(*x),
            Field::Int(v) => v.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Text(s) => s.clone(),
            Field::Missing => String::new(),
        }
    }
}

/// Incremental CSV writer; every [`CsvSink::row`] batch can be flushed so an
/// interrupted sweep leaves the completed rows on disk.
pub struct CsvSink {
    path: PathBuf,
    width: usize,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvSink {
    pub fn create(path: &Path, manifest: &[String], header: &[&str]) -> CliResult<Self> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut buf = BufWriter::new(file);
        for line in manifest {
            writeln!(buf, "# {line}").map_err(|e| CliError::io(path, e))?;
        }
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(buf);
        writer.write_record(header).map_err(|e| csv_error(path, e))?;
        Ok(Self { path: path.to_owned(), width: header.len(), writer })
    }

    pub fn row(&mut self, fields: &[Field]) -> CliResult<()> {
        debug_assert_eq!(fields.len(), self.width, "row width differs from header");
        self.writer
            .write_record(fields.iter().map(Field::render))
            .map_err(|e| csv_error(&self.path, e))
    }

    pub fn flush(&mut self) -> CliResult<()> {
        self.writer.flush().map_err(|e| CliError::io(&self.path, e))
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.flush()?;
        Ok(self.path)
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::io(path, std::io::Error::other(format!("{other:?}"))),
    }
}

/// A parsed artifact, fields kept verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub manifest: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn read(path: &Path) -> CliResult<Self> {
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        let mut manifest = Vec::new();
        let mut body = String::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| CliError::io(path, e))?;
            match line.strip_prefix('#') {
                Some(rest) if body.is_empty() => manifest.push(rest.strip_prefix(' ').unwrap_or(rest).to_owned()),
                _ => {
                    body.push_str(&line);
                    body.push('\n');
                }
            }
        }
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
        let header = reader
            .headers()
            .map_err(|e| csv_error(path, e))?
            .iter()
            .map(str::to_owned)
            .collect();
        let rows = reader
            .records()
            .map(|r| r.map(|rec| rec.iter().map(str::to_owned).collect()))
            .collect::<Result<Vec<Vec<String>>, _>>()
            .map_err(|e| csv_error(path, e))?;
        Ok(Self { manifest, header, rows })
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let header: Vec<&str> = self.header.iter().map(String::as_str).collect();
        let mut sink = CsvSink::create(path, &self.manifest, &header)?;
        for row in &self.rows {
            let fields: Vec<Field> = row.iter().map(|s| Field::Text(s.clone())).collect();
            sink.row(&fields)?;
        }
        sink.finish()?;
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Column `name` parsed as floats (empty fields become NaN).
    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column(name)?;
        self.rows
            .iter()
            .map(|r| if r[k].is_empty() { Some(f64::NAN) } else { r[k].parse().ok() })
            .collect()
    }
}
