//! CSV formatting and all-or-nothing file output.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// An RFC 4180 table built in memory: CRLF records, fields quoted only when
/// they contain a delimiter, quote, or line break.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Csv {
    buf: String,
    width: usize,
}

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut csv = Csv {
            buf: String::new(),
            width: header.len(),
        };
        csv.push_raw(header.iter().map(|h| h.to_string()));
        csv
    }

    pub fn row(&mut self, cells: impl IntoIterator<Item = Cell>) {
        let fields: Vec<String> = cells
            .into_iter()
            .map(|c| match c {
                Cell::Num(v) => fmt_f64(v),
                Cell::Int(v) => v.to_string(),
                Cell::Text(s) => s,
                Cell::Empty => String::new(),
            })
            .collect();
        assert_eq!(fields.len(), self.width, "row width differs from header");
        self.push_raw(fields.into_iter());
    }

    fn push_raw(&mut self, fields: impl Iterator<Item = String>) {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::CRLF)
            .from_writer(Vec::new());
        w.write_record(fields).expect("writing to memory");
        let bytes = w.into_inner().expect("writing to memory");
        self.buf.push_str(std::str::from_utf8(&bytes).expect("fields are UTF-8"));
    }

    pub fn as_str(&self) -> &str {
        &self.buf
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// Files to be written together. Nothing touches the destination until
/// [`OutputSet::commit`], which stages every file next to its target and
/// then renames them into place.
#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, path: impl Into<PathBuf>, contents: impl Into<Vec<u8>>) {
        self.files.push((path.into(), contents.into()));
    }

    pub fn paths(&self) -> Vec<PathBuf> {
        self.files.iter().map(|(p, _)| p.clone()).collect()
    }

    pub fn into_files(self) -> Vec<(PathBuf, Vec<u8>)> {
        self.files
    }

    pub fn commit(self) -> Result<Vec<PathBuf>> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, bytes) in &self.files {
            match stage(path, bytes) {
                Ok(tmp) => staged.push((tmp, path.clone())),
                Err(e) => {
                    for (tmp, _) in &staged {
                        let _ = fs::remove_file(tmp);
                    }
                    return Err(e);
                }
            }
        }
        let mut done = Vec::with_capacity(staged.len());
        for (tmp, path) in staged {
            fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
            done.push(path);
        }
        Ok(done)
    }
}

fn stage(path: &Path, bytes: &[u8]) -> Result<PathBuf> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io {
            path: path.display().to_string(),
            message: "not a file path".into(),
        })?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes)
        .and_then(|_| f.sync_all())
        .map_err(|e| Error::io(&tmp, e))?;
    Ok(tmp)
}

/// Write one file atomically.
pub fn write_atomic(path: &Path, contents: impl Into<Vec<u8>>) -> Result<()> {
    let mut set = OutputSet::new();
    set.add(path, contents);
    set.commit().map(|_| ())
}
