use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use sigma_lab::store::{write_csv, CsvRecord, JsonlSink};

use crate::Format;

/// The data sink. Diagnostics never go through here.
pub struct Output {
    pub format: Format,
    out: Box<dyn Write>,
}

impl Output {
    pub fn open(format: Format, path: Option<&Path>) -> io::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        };
        Ok(Output { format, out })
    }

    pub fn line(&mut self, text: impl AsRef<str>) -> sigma_lab::Result<()> {
        writeln!(self.out, "{}", text.as_ref())?;
        Ok(())
    }

    pub fn jsonl<'a, T: Serialize + 'a>(&mut self, records: impl IntoIterator<Item = &'a T>) -> sigma_lab::Result<()> {
        JsonlSink::new(&mut self.out).emit_all(records)
    }

    pub fn csv<'a, T: CsvRecord + 'a>(&mut self, records: impl IntoIterator<Item = &'a T>) -> sigma_lab::Result<()> {
        write_csv(&mut self.out, records)
    }

    /// A table that has no CSV record type: header, then rows as given.
    pub fn csv_rows(&mut self, header: &str, rows: impl IntoIterator<Item = String>) -> sigma_lab::Result<()> {
        self.line(header)?;
        rows.into_iter().try_for_each(|r| self.line(r))
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}
