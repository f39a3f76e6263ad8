use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use coarma_core::{CoarmaError, Result};

fn io_err(path: &Path, e: impl std::fmt::Display) -> CoarmaError {
    CoarmaError::Io(format!("{}: {e}", path.display()))
}

/// Reads one numeric column from a CSV file. Lines starting with '#' are
/// skipped. A first row that does not parse as numbers is taken as a header.
///
/// `column` may be a header name or a zero-based index. Without it the
/// `preferred` header name is used when present, otherwise the first column.
pub fn read_column(path: &Path, column: Option<&str>, preferred: &str) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| io_err(path, e))?;
    let mut rows: Vec<csv::StringRecord> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        rows.push(rec);
    }
    if rows.is_empty() {
        return Err(io_err(path, "no data rows"));
    }
    let header: Option<Vec<String>> = if rows[0].iter().any(|f| f.parse::<f64>().is_err()) {
        Some(rows.remove(0).iter().map(|s| s.to_string()).collect())
    } else {
        None
    };
    let idx = match (column, &header) {
        (Some(c), h) => match c.parse::<usize>() {
            Ok(i) => i,
            Err(_) => h
                .as_ref()
                .and_then(|h| h.iter().position(|n| n == c))
                .ok_or_else(|| CoarmaError::Domain(format!("column '{c}' not found in {}", path.display())))?,
        },
        (None, Some(h)) => h.iter().position(|n| n == preferred).unwrap_or(0),
        (None, None) => 0,
    };
    rows.iter()
        .enumerate()
        .map(|(i, rec)| {
            let f = rec
                .get(idx)
                .ok_or_else(|| io_err(path, format!("row {} has no column {idx}", i + 1)))?;
            f.parse::<f64>()
                .map_err(|_| CoarmaError::Parse { pos: i + 1, msg: format!("not a number: '{f}'") })
        })
        .collect()
}

/// CSV sink with a '#' comment preamble; stdout when no path is given.
pub struct Output {
    sink: Option<Box<dyn Write>>,
    csv: Option<csv::Writer<Box<dyn Write>>>,
}

pub fn fmt(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x}")
    }
}

fn wr(e: impl std::fmt::Display) -> CoarmaError {
    CoarmaError::Io(e.to_string())
}

impl Output {
    pub fn open(path: Option<&Path>, seed: Option<u64>) -> Result<Self> {
        let sink: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        let mut out = Output { sink: Some(sink), csv: None };
        let seed = seed.map_or("none".to_string(), |s| s.to_string());
        out.comment(&format!("coarma {} seed={seed}", env!("CARGO_PKG_VERSION")))?;
        Ok(out)
    }

    pub fn comment(&mut self, line: &str) -> Result<()> {
        let sink = self.sink.as_mut().ok_or_else(|| wr("comment after data rows"))?;
        writeln!(sink, "# {line}").map_err(wr)
    }

    pub fn header<S: AsRef<str>>(&mut self, cols: &[S]) -> Result<()> {
        self.record(cols.iter().map(|c| c.as_ref().to_string()))
    }

    pub fn record<I: IntoIterator<Item = String>>(&mut self, fields: I) -> Result<()> {
        if let Some(sink) = self.sink.take() {
            self.csv = Some(csv::Writer::from_writer(sink));
        }
        self.csv.as_mut().expect("writer present").write_record(fields).map_err(wr)
    }

    pub fn numbers(&mut self, xs: &[f64]) -> Result<()> {
        self.record(xs.iter().map(|&x| fmt(x)))
    }

    pub fn finish(mut self) -> Result<()> {
        match (self.csv.as_mut(), self.sink.as_mut()) {
            (Some(w), _) => w.flush().map_err(wr),
            (None, Some(s)) => s.flush().map_err(wr),
            (None, None) => Ok(()),
        }
    }
}
