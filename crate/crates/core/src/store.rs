//! Persistence: the on-disk factorization cache and record emission.
//!
//! Cache file format, one entry per line, decimal, space separated:
//!
//! ```text
//! 12 2^2 3^1
//! 1
//! ```
//!
//! The first field is the value, each following field a `prime^exponent`
//! part in increasing prime order. Every line is product-checked on load;
//! lines that fail are skipped and reported, never served. Appends write a
//! whole newline-terminated line per call, so a torn final line (no newline)
//! is detected and skipped as corrupt.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use num_bigint::BigUint;
use serde::Serialize;

use crate::arith::{Factorization, PrimePower};
use crate::error::{Error, Result};

/// A line that failed to parse or product-check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorruptLine {
    pub line: usize,
    pub reason: String,
}

impl From<CorruptLine> for Error {
    fn from(c: CorruptLine) -> Self {
        Error::CorruptEntry { line: c.line, reason: c.reason }
    }
}

/// Factorization cache keyed by value.
///
/// Reads go through an immutable snapshot; [`FactorCache::reload`] swaps in a
/// freshly loaded one. Writes are serialized through a single file handle.
#[derive(Debug, Default)]
pub struct FactorCache {
    path: Option<PathBuf>,
    /// Value to (factorization, loaded from disk rather than inserted this session).
    index: RwLock<Arc<HashMap<BigUint, (Factorization, bool)>>>,
    writer: Mutex<Option<File>>,
    corrupt: RwLock<Vec<CorruptLine>>,
}

impl FactorCache {
    /// A cache with no backing file.
    pub fn in_memory() -> Self {
        FactorCache::default()
    }

    /// Loads `path` (missing file means empty) and appends new entries to it.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let (index, corrupt) = load_file(&path)?;
        Ok(FactorCache {
            path: Some(path),
            index: RwLock::new(Arc::new(index)),
            writer: Mutex::new(None),
            corrupt: RwLock::new(corrupt),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.index.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lines skipped during the most recent load.
    pub fn corrupt_entries(&self) -> Vec<CorruptLine> {
        self.corrupt.read().expect("cache lock").clone()
    }

    pub fn lookup(&self, value: &BigUint) -> Option<Factorization> {
        self.index.read().expect("cache lock").get(value).map(|(f, _)| f.clone())
    }

    /// Like [`FactorCache::lookup`], but only serves entries present when the
    /// file was last loaded. Scans use this so their results depend on the
    /// cache state at start, not on what concurrent workers appended since.
    pub fn lookup_loaded(&self, value: &BigUint) -> Option<Factorization> {
        match self.index.read().expect("cache lock").get(value) {
            Some((f, true)) => Some(f.clone()),
            _ => None,
        }
    }

    /// Records `f`; a value already present is left alone.
    pub fn insert(&self, f: &Factorization) -> Result<()> {
        // re-derive through the checked constructor so nothing unverified is written
        let f = Factorization::checked(f.value().clone(), f.parts().to_vec())?;
        self.insert_checked(f)
    }

    /// Validates a raw claim before recording it.
    pub fn insert_parts(&self, value: BigUint, parts: Vec<PrimePower>) -> Result<()> {
        self.insert_checked(Factorization::checked(value, parts)?)
    }

    fn insert_checked(&self, f: Factorization) -> Result<()> {
        let mut index = self.index.write().expect("cache lock");
        if index.contains_key(f.value()) {
            return Ok(());
        }
        if let Some(path) = &self.path {
            let mut writer = self.writer.lock().expect("writer lock");
            if writer.is_none() {
                *writer = Some(open_for_append(path)?);
            }
            let line = format_entry(&f);
            writer.as_mut().expect("opened").write_all(line.as_bytes())?;
        }
        Arc::make_mut(&mut index).insert(f.value().clone(), (f, false));
        Ok(())
    }

    /// Forces appended entries to stable storage.
    pub fn flush(&self) -> Result<()> {
        if let Some(file) = self.writer.lock().expect("writer lock").as_mut() {
            file.flush()?;
            file.sync_data()?;
        }
        Ok(())
    }

    /// Re-reads the backing file and atomically replaces the snapshot.
    pub fn reload(&self) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let (index, corrupt) = load_file(path)?;
        *self.index.write().expect("cache lock") = Arc::new(index);
        *self.corrupt.write().expect("cache lock") = corrupt;
        Ok(())
    }

    /// All entries sorted by value, for saving a snapshot elsewhere.
    pub fn entries(&self) -> Vec<Factorization> {
        let index = self.index.read().expect("cache lock");
        let mut out: Vec<Factorization> = index.values().map(|(f, _)| f.clone()).collect();
        out.sort_by(|a, b| a.value().cmp(b.value()));
        out
    }

    /// Writes every entry to `path` through a temporary file and a rename.
    pub fn save_to(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let tmp = path.with_extension("tmp");
        {
            let mut out = io::BufWriter::new(File::create(&tmp)?);
            for f in self.entries() {
                out.write_all(format_entry(&f).as_bytes())?;
            }
            out.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }
}

fn open_for_append(path: &Path) -> Result<File> {
    let mut file = OpenOptions::new().create(true).read(true).append(true).open(path)?;
    // repair a torn tail so the next entry starts on its own line
    let len = file.metadata()?.len();
    if len > 0 {
        file.seek(SeekFrom::Start(len - 1))?;
        let mut last = [0u8; 1];
        file.read_exact(&mut last)?;
        if last[0] != b'\n' {
            file.write_all(b"\n")?;
        }
    }
    Ok(file)
}

type Loaded = (HashMap<BigUint, (Factorization, bool)>, Vec<CorruptLine>);

fn load_file(path: &Path) -> Result<Loaded> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok((HashMap::new(), Vec::new())),
        Err(e) => return Err(e.into()),
    };
    let mut reader = BufReader::new(file);
    let mut index = HashMap::new();
    let mut corrupt = Vec::new();
    let mut buf = String::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        if reader.read_line(&mut buf)? == 0 {
            break;
        }
        line_no += 1;
        let Some(body) = buf.strip_suffix('\n') else {
            corrupt.push(CorruptLine { line: line_no, reason: "missing newline (torn write)".into() });
            continue;
        };
        if body.trim().is_empty() {
            continue;
        }
        match parse_entry(body) {
            Ok(f) => {
                index.insert(f.value().clone(), (f, true));
            }
            Err(reason) => corrupt.push(CorruptLine { line: line_no, reason }),
        }
    }
    Ok((index, corrupt))
}

/// One cache line, newline included.
pub fn format_entry(f: &Factorization) -> String {
    let mut line = f.value().to_string();
    for part in f.parts() {
        line.push(' ');
        line.push_str(&format!("{}^{}", part.prime, part.exponent));
    }
    line.push('\n');
    line
}

/// Parses one cache line (without its newline) and product-checks it.
pub fn parse_entry(line: &str) -> std::result::Result<Factorization, String> {
    let mut fields = line.split(' ');
    let value: BigUint =
        fields.next().ok_or("empty line")?.parse().map_err(|_| "value is not a decimal integer".to_string())?;
    let mut parts = Vec::new();
    for field in fields {
        let (p, e) = field.split_once('^').ok_or_else(|| format!("part {field:?} lacks '^'"))?;
        let prime: BigUint = p.parse().map_err(|_| format!("bad prime {p:?}"))?;
        let exponent: u32 = e.parse().map_err(|_| format!("bad exponent {e:?}"))?;
        parts.push(PrimePower { prime, exponent });
    }
    Factorization::checked(value, parts).map_err(|e| e.to_string())
}

/// Appends JSON Lines records. Field order follows the struct declaration,
/// so identical inputs give byte-identical output.
pub struct JsonlSink<W: Write> {
    out: W,
    written: usize,
}

impl<W: Write> JsonlSink<W> {
    pub fn new(out: W) -> Self {
        JsonlSink { out, written: 0 }
    }

    pub fn emit<T: Serialize + ?Sized>(&mut self, record: &T) -> Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        self.written += 1;
        Ok(())
    }

    pub fn emit_all<'a, T: Serialize + 'a>(&mut self, records: impl IntoIterator<Item = &'a T>) -> Result<()> {
        records.into_iter().try_for_each(|r| self.emit(r))
    }

    pub fn written(&self) -> usize {
        self.written
    }

    pub fn into_inner(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}

/// Records with a flat CSV rendering.
pub trait CsvRecord {
    fn csv_header() -> &'static str;
    fn csv_row(&self) -> String;
}

impl CsvRecord for Factorization {
    fn csv_header() -> &'static str {
        "value,factorization"
    }

    fn csv_row(&self) -> String {
        format!("{},{}", self.value(), self)
    }
}

pub fn write_csv<'a, T: CsvRecord + 'a, W: Write>(mut out: W, records: impl IntoIterator<Item = &'a T>) -> Result<()> {
    writeln!(out, "{}", T::csv_header())?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    out.flush()?;
    Ok(())
}
